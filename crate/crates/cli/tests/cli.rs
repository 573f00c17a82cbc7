use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussmode")).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussmode")).args(args).env(key, value).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_lines(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

fn column(lines: &[String], name: &str) -> Vec<String> {
    let idx = lines[0].split(',').position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"));
    lines[1..].iter().map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn point_json_has_expected_fields() {
    let o = run(&["point", "--kx", "1", "--ky", "0.25", "--omega", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sector"], "A");
    assert_eq!(v["status"], "ok");
    for key in ["S_x", "S_y", "N", "f_x", "fp_minus", "ft_minus", "D_x", "D_y", "Lz", "lambda_plus"] {
        assert!(v[key].is_f64(), "{key}");
    }
    let n = v["N"].as_f64().unwrap();
    let ft = v["ft_plus"].as_f64().unwrap();
    assert!((n - ft).abs() < 1e-12);
}

#[test]
fn bits_rescale_entropy() {
    let nats = run(&["point", "--kx", "1", "--ky", "0.25", "--omega", "0.5"]);
    let bits = run(&["point", "--kx", "1", "--ky", "0.25", "--omega", "0.5", "--bits"]);
    let a: serde_json::Value = serde_json::from_str(&stdout(&nats)).unwrap();
    let b: serde_json::Value = serde_json::from_str(&stdout(&bits)).unwrap();
    let ratio = a["S_x"].as_f64().unwrap() / b["S_x_bits"].as_f64().unwrap();
    assert!((ratio - std::f64::consts::LN_2).abs() < 1e-14);
}

#[test]
fn out_of_sector_point_exits_two_with_nulls() {
    let o = run(&["point", "--view", "fixedkprime", "--kx", "1", "--ky", "0.5", "--omega", "0.8"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["status"], "OutOfSector");
    assert!(v["S_x"].is_null());
    assert!(!o.stderr.is_empty());
}

#[test]
fn thermal_state_outside_a_exits_two() {
    let o = run(&["point", "--kx", "-1", "--ky", "-0.25", "--omega", "1", "--temp", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sector"], "B");
    assert_eq!(v["status"], "ThermalUndefined");
}

#[test]
fn usage_and_spec_errors() {
    assert_eq!(run(&["point", "--kx", "abc"]).status.code(), Some(64));
    assert_eq!(run(&["point", "--ky", "1"]).status.code(), Some(64));
    assert_eq!(run(&["point", "--kx", "1", "--ky", "1", "--temp", "-1"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let one = ["sweep", "--kx", "1", "--ky", "0.25", "--axis", "omega", "--from", "0", "--to", "1", "--samples", "1"];
    assert_eq!(run(&one).status.code(), Some(65));
    let log0 = ["sweep", "--kx", "1", "--ky", "0.25", "--axis", "omega", "--from", "0", "--to", "1", "--log"];
    assert_eq!(run(&log0).status.code(), Some(65));
    assert_eq!(run_env(&["point", "--kx", "1", "--ky", "1"], "GAUSSMODE_THREADS", "zero").status.code(), Some(64));
}

#[test]
fn sweep_smoke_and_determinism() {
    let args = [
        "sweep",
        "--kx",
        "1",
        "--ky",
        "0.25",
        "--axis",
        "omega",
        "--from",
        "0",
        "--to",
        "0.5",
        "--samples",
        "2",
        "--no-header",
    ];
    let a = run(&args);
    let b = run_env(&args, "GAUSSMODE_THREADS", "1");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let lines = data_lines(&a);
    assert_eq!(lines.len(), 3);
    assert!(!stdout(&a).starts_with('#'));
    assert_eq!(column(&lines, "omega"), ["0.0000000000000000e0", "5.0000000000000000e-1"]);
    assert_eq!(column(&lines, "sector"), ["A", "A"]);
    assert_eq!(column(&lines, "N")[0], "0.0000000000000000e0");
}

#[test]
fn csv_header_lines_are_comments() {
    let o = run(&[
        "sweep",
        "--kx",
        "1",
        "--ky",
        "0.25",
        "--axis",
        "temperature",
        "--from",
        "0",
        "--to",
        "1",
        "--samples",
        "3",
    ]);
    let text = stdout(&o);
    let comments: Vec<&str> = text.lines().take_while(|l| l.starts_with('#')).collect();
    assert_eq!(comments.len(), 4);
    assert!(comments[1].contains("sweep"));
    assert!(text.lines().nth(4).unwrap().starts_with("view,kx,ky,omega,T,"));
}

#[test]
fn sweep_keeps_unstable_rows() {
    let o = run(&[
        "sweep",
        "--view",
        "fixedkprime",
        "--kx",
        "1",
        "--ky",
        "0.5",
        "--axis",
        "omega",
        "--from",
        "0",
        "--to",
        "1.2",
        "--samples",
        "5",
        "--outputs",
        "N,sector",
        "--no-header",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let lines = data_lines(&o);
    assert_eq!(lines.len(), 6);
    let sectors = column(&lines, "sector");
    assert_eq!(sectors[0], "A");
    assert_eq!(sectors[4], "B1");
    assert!(sectors.contains(&"Unstable".to_string()));
    let n = column(&lines, "N");
    let status = column(&lines, "status");
    for (s, n) in status.iter().zip(&n) {
        assert_eq!(s == "ok", n != "NaN");
    }
}

#[test]
fn lz_axis_emits_pairs() {
    let o = run(&[
        "sweep",
        "--kx",
        "1",
        "--ky",
        "0.25",
        "--axis",
        "lz",
        "--from",
        "0.1",
        "--to",
        "0.5",
        "--samples",
        "3",
        "--no-header",
    ]);
    let lines = data_lines(&o);
    assert_eq!(lines[0], "omega,Lz,S,sector,status");
    let lz: Vec<f64> = column(&lines, "Lz").iter().map(|s| s.parse().unwrap()).collect();
    assert!(lz.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn phase_grid_smoke() {
    let o = run(&["phase", "--ratio-steps", "2", "--omega-steps", "2", "--no-header"]);
    assert_eq!(o.status.code(), Some(0));
    let lines = data_lines(&o);
    assert_eq!(lines.len(), 5);
    assert_eq!(column(&lines, "sector"), ["Unstable", "Unstable", "A", "A"]);
    assert_eq!(column(&lines, "sector"), column(&lines, "closed_form_sector"));
}

#[test]
fn te_table_and_ndjson() {
    let o = run(&["te", "--ratios", "0.25,0.5", "--samples", "2", "--ndjson"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        assert_eq!(r["status"], "ok");
        assert!(r["T_E"].as_f64().unwrap() > 0.0);
        assert_eq!(r["crossing_verified"], true);
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let path = std::env::temp_dir().join(format!("gaussmode-cli-{}.conf", std::process::id()));
    std::fs::write(&path, "# base\nkx=1\nky=0.25\nomega=0.3\n").unwrap();
    let p = path.to_str().unwrap();
    let o = run(&["point", "--config", p, "--omega", "0.5"]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["omega"], 0.5);
    assert_eq!(v["ky"], 0.25);
}

#[test]
fn check_small_cutoff_reports_failure() {
    let o = run(&["check", "--nmax", "6", "--tol", "1e-12", "--no-header"]);
    assert_eq!(o.status.code(), Some(1));
    let lines = data_lines(&o);
    assert_eq!(lines.len(), 31);
    assert!(column(&lines, "pass").contains(&"false".to_string()));
}
