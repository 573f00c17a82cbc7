//! Table builders for each subcommand.

use std::collections::BTreeSet;

use clap::{Args, ValueEnum};
use gaussmode::model::Boundaries;
use gaussmode::oracle::{compare_panel, extended_panel, standard_panel, FockConfig, Observables};
use gaussmode::thermo::{limit_temperature, phase_grid, run_sweep, te_large_omega_asymptote, PhaseSpec};
use gaussmode::{
    classify_sector, compute_report, EntanglementReport, Error, LimitTemperature, ModelParams, Output, SectorTag,
    SweepAxis, SweepSpec, View,
};
use rayon::prelude::*;

use crate::table::{Table, Value};

/// Failure classes with their exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Spec(String),
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Spec(_) => 65,
            Failure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Spec(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SpecInvalid(_) => Failure::Spec(e.to_string()),
            Error::InvalidParams(_) => Failure::Usage(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

/// A table plus the exit code it should be reported with.
pub struct Outcome {
    pub table: Table,
    pub exit_code: u8,
    /// Single-record commands print a bare JSON object.
    pub single: bool,
}

pub fn parse_view(s: &str) -> Result<View, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    /// Parameter view: fixedk (kμ held fixed) or fixedkprime (k'μ = kμ + ω² held fixed).
    #[arg(long, default_value = "fixedk", value_parser = parse_view)]
    pub view: View,
    #[arg(long, allow_negative_numbers = true)]
    pub kx: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub ky: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega: f64,
    #[arg(long = "temp", default_value_t = 0.0)]
    pub temperature: f64,
}

impl ParamArgs {
    fn build(&self, ky_fallback: Option<f64>) -> Result<ModelParams, Failure> {
        let kx = self.kx.ok_or_else(|| Failure::Usage("--kx is required".into()))?;
        let ky = self.ky.or(ky_fallback).ok_or_else(|| Failure::Usage("--ky is required".into()))?;
        Ok(ModelParams::new(self.view, kx, ky, self.omega, self.temperature)?)
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidParams(_) => "InvalidParams",
        Error::DegenerateTransform { .. } => "DegenerateTransform",
        Error::UnstableSpectrum(_) => "UnstableSpectrum",
        Error::ZeroMode => "ZeroMode",
        Error::ThermalUndefined(_) => "ThermalUndefined",
        Error::NonPhysical(_) => "NonPhysical",
        Error::OutOfSector(_) => "OutOfSector",
        Error::NoBoundary => "NoBoundary",
        Error::NotEntangledAtZero => "NotEntangledAtZero",
        Error::SpecInvalid(_) => "SpecInvalid",
        Error::ConvergenceFailure { .. } => "ConvergenceFailure",
        Error::Domain(_) => "Domain",
    }
}

fn status(err: Option<&Error>) -> Value {
    err.map_or("ok", error_kind).into()
}

fn param_values(p: &ModelParams) -> Vec<Value> {
    vec![p.view.as_str().into(), p.kx.into(), p.ky.into(), p.omega.into(), p.temperature.into()]
}

const PARAM_COLUMNS: [&str; 5] = ["view", "kx", "ky", "omega", "T"];

struct EntropyUnit(f64);

impl EntropyUnit {
    fn new(bits: bool) -> Self {
        Self(if bits { std::f64::consts::LN_2 } else { 1.0 })
    }

    fn name(&self, base: &str) -> String {
        if self.0 == 1.0 {
            base.to_string()
        } else {
            format!("{base}_bits")
        }
    }
}

fn group_columns(o: Output, unit: &EntropyUnit) -> Vec<String> {
    let fixed = |names: &[&str]| names.iter().map(|n| n.to_string()).collect();
    match o {
        Output::Entropy => vec![unit.name("S_x"), unit.name("S_y")],
        Output::DiscordX => vec![unit.name("D_x")],
        Output::DiscordY => vec![unit.name("D_y")],
        Output::Negativity => fixed(&["N"]),
        Output::FLocal => fixed(&["f_x", "f_y"]),
        Output::FPrime => fixed(&["fp_plus", "fp_minus"]),
        Output::FTilde => fixed(&["ft_plus", "ft_minus"]),
        Output::Lz => fixed(&["Lz"]),
        Output::Sector => fixed(&["near_boundary", "lambda_plus", "lambda_minus"]),
        Output::LimitTemperature => fixed(&["T_E", "T_E_exact_zero"]),
    }
}

fn group_values(
    o: Output,
    r: Option<&EntanglementReport>,
    te: Option<&LimitTemperature>,
    unit: &EntropyUnit,
) -> Vec<Value> {
    let f = |g: fn(&EntanglementReport) -> f64| Value::opt(r.map(g));
    let s = unit.0;
    match o {
        Output::Entropy => vec![Value::opt(r.map(|r| r.entropy.0 / s)), Value::opt(r.map(|r| r.entropy.1 / s))],
        Output::DiscordX => vec![Value::opt(r.map(|r| r.discord.0 / s))],
        Output::DiscordY => vec![Value::opt(r.map(|r| r.discord.1 / s))],
        Output::Negativity => vec![f(|r| r.negativity)],
        Output::FLocal => vec![f(|r| r.f_local.0), f(|r| r.f_local.1)],
        Output::FPrime => vec![f(|r| r.occupations.f_plus), f(|r| r.occupations.f_minus)],
        Output::FTilde => vec![f(|r| r.f_tilde.0), f(|r| r.f_tilde.1)],
        Output::Lz => vec![f(|r| r.mean_lz)],
        Output::Sector => {
            vec![r.map_or(Value::Null, |r| r.near_boundary.into()), f(|r| r.lambdas.0), f(|r| r.lambdas.1)]
        }
        Output::LimitTemperature => {
            vec![Value::opt(te.map(|l| l.t_e)), te.map_or(Value::Null, |l| l.exact_zero.into())]
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format; `point` defaults to json, everything else to csv.
    #[arg(long, value_enum)]
    pub format: Option<crate::table::Format>,
    /// One JSON object per line instead of an array (implies json).
    #[arg(long)]
    pub ndjson: bool,
    /// Omit the commented provenance lines above CSV output.
    #[arg(long)]
    pub no_header: bool,
    /// Report entropies and discord in bits instead of nats.
    #[arg(long)]
    pub bits: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Also solve for the limit temperature of entanglement.
    #[arg(long)]
    pub te: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn point(args: &PointArgs) -> Result<Outcome, Failure> {
    let p = args.params.build(None)?;
    let unit = EntropyUnit::new(args.output.bits);
    let mut outputs: Vec<Output> = Output::ALL.into_iter().filter(|o| *o != Output::LimitTemperature).collect();
    if args.te {
        outputs.push(Output::LimitTemperature);
    }
    let mut columns: Vec<String> = PARAM_COLUMNS.iter().map(|c| c.to_string()).collect();
    columns.extend(["sector", "status"].map(String::from));
    for &o in &outputs {
        columns.extend(group_columns(o, &unit));
    }
    columns.extend(["omega_bar", "omega_bar_g"].map(String::from));

    let sector = classify_sector(&p).tag;
    let report = compute_report(&p);
    let te = if args.te && sector == SectorTag::A { limit_temperature(&p.with_temperature(0.0)).ok() } else { None };
    let err = report.as_ref().err();
    let r = report.as_ref().ok();

    let mut row = param_values(&p);
    row.extend([sector.as_str().into(), status(err)]);
    for &o in &outputs {
        row.extend(group_values(o, r, te.as_ref(), &unit));
    }
    row.extend([Value::opt(r.map(|r| r.omega_bars.0)), Value::opt(r.map(|r| r.omega_bars.1))]);

    let mut table = Table { columns, rows: Vec::new() };
    table.push(row);
    let exit_code = match err {
        None => 0,
        Some(Error::OutOfSector(_) | Error::ThermalUndefined(_)) => {
            eprintln!("gaussmode: {}", err.unwrap());
            2
        }
        Some(e) => return Err(e.clone().into()),
    };
    Ok(Outcome { table, exit_code, single: true })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Omega,
    Temperature,
    KyRatio,
    /// ω sweep emitting (⟨Lz⟩, S) pairs.
    Lz,
}

fn parse_outputs(s: &str) -> Result<Output, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum)]
    pub axis: AxisArg,
    #[arg(long, allow_negative_numbers = true)]
    pub from: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub to: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Geometric spacing between samples.
    #[arg(long)]
    pub log: bool,
    /// Comma-separated subset of S,N,f,fp,ft,Dx,Dy,Lz,sector,TE.
    #[arg(long, value_delimiter = ',', value_parser = parse_outputs)]
    pub outputs: Option<Vec<Output>>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn sweep(args: &SweepArgs) -> Result<Outcome, Failure> {
    let (axis, lz_pairs) = match args.axis {
        AxisArg::Omega => (SweepAxis::Omega, false),
        AxisArg::Temperature => (SweepAxis::Temperature, false),
        AxisArg::KyRatio => (SweepAxis::KyRatio, false),
        AxisArg::Lz => (SweepAxis::Omega, true),
    };
    let base = args.params.build((axis == SweepAxis::KyRatio).then_some(0.0))?;
    let outputs: BTreeSet<Output> = if lz_pairs {
        [Output::Lz, Output::Entropy].into_iter().collect()
    } else {
        args.outputs.clone().map_or_else(|| Output::ALL.into_iter().collect(), |v| v.into_iter().collect())
    };
    let spec = SweepSpec { axis, lo: args.from, hi: args.to, samples: args.samples, log: args.log, base, outputs };
    let rows = run_sweep(&spec)?;
    let unit = EntropyUnit::new(args.output.bits);

    if lz_pairs {
        let mut table = Table::new(&["omega", "Lz", &unit.name("S"), "sector", "status"]);
        for r in &rows {
            let rep = r.report.as_ref();
            table.push(vec![
                r.axis_value.into(),
                Value::opt(rep.map(|x| x.mean_lz)),
                Value::opt(rep.map(|x| x.entropy.0 / unit.0)),
                r.sector.as_str().into(),
                status(r.error.as_ref()),
            ]);
        }
        return Ok(Outcome { table, exit_code: 0, single: false });
    }

    // ω and T already appear among the parameter columns
    let lead = axis == SweepAxis::KyRatio;
    let mut columns: Vec<String> = lead.then(|| axis.as_str().to_string()).into_iter().collect();
    columns.extend(PARAM_COLUMNS.iter().map(|c| c.to_string()));
    columns.extend(["sector", "status"].map(String::from));
    for &o in &spec.outputs {
        columns.extend(group_columns(o, &unit));
    }
    let mut table = Table { columns, rows: Vec::new() };
    for r in &rows {
        let mut row: Vec<Value> = lead.then(|| r.axis_value.into()).into_iter().collect();
        row.extend(param_values(&r.params));
        row.extend([r.sector.as_str().into(), status(r.error.as_ref())]);
        for &o in &spec.outputs {
            row.extend(group_values(o, r.report.as_ref(), r.limit_temperature.as_ref(), &unit));
        }
        table.push(row);
    }
    Ok(Outcome { table, exit_code: 0, single: false })
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value = "fixedk", value_parser = parse_view)]
    pub view: View,
    /// Reference constant; its sign selects the half-plane and ω₀ = √|kx|.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub kx: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub ratio_from: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub ratio_to: f64,
    #[arg(long, default_value_t = 41)]
    pub ratio_steps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub omega_from: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub omega_to: f64,
    #[arg(long, default_value_t = 61)]
    pub omega_steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn boundary_values(b: &Boundaries) -> Vec<Value> {
    [b.omega_c, b.omega_c1, b.omega_c2, b.omega_c3, b.lower].into_iter().map(Value::opt).collect()
}

pub fn phase(args: &PhaseArgs) -> Result<Outcome, Failure> {
    let spec = PhaseSpec {
        view: args.view,
        kx: args.kx,
        ratio: (args.ratio_from, args.ratio_to),
        ratio_steps: args.ratio_steps,
        omega: (args.omega_from, args.omega_to),
        omega_steps: args.omega_steps,
    };
    let cells = phase_grid(&spec)?;
    let mut table = Table::new(&[
        "ky_ratio",
        "omega_scaled",
        "view",
        "kx",
        "ky",
        "omega",
        "sector",
        "closed_form_sector",
        "near_boundary",
        "omega_c",
        "omega_c1",
        "omega_c2",
        "omega_c3",
        "omega_lower",
    ]);
    for c in &cells {
        let mut row = vec![
            c.ratio.into(),
            c.omega_scaled.into(),
            c.params.view.as_str().into(),
            c.params.kx.into(),
            c.params.ky.into(),
            c.params.omega.into(),
            c.tag.as_str().into(),
            c.closed_form_tag.as_str().into(),
            c.near_boundary.into(),
        ];
        row.extend(boundary_values(&c.boundaries));
        table.push(row);
    }
    Ok(Outcome { table, exit_code: 0, single: false })
}

#[derive(Debug, Clone, Args)]
pub struct TeArgs {
    #[arg(long, default_value = "fixedk", value_parser = parse_view)]
    pub view: View,
    #[arg(long, default_value_t = 1.0)]
    pub kx: f64,
    /// Comma-separated ky/kx (or k'y/k'x) ratios, one curve each.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub from: f64,
    #[arg(long, default_value_t = 3.0)]
    pub to: f64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn te(args: &TeArgs) -> Result<Outcome, Failure> {
    let omegas = SweepSpec {
        axis: SweepAxis::Omega,
        lo: args.from,
        hi: args.to,
        samples: args.samples,
        log: args.log,
        base: ModelParams::fixed_k(1.0, 1.0, 0.0),
        outputs: [Output::LimitTemperature].into_iter().collect(),
    };
    omegas.validate()?;
    if !(args.kx.is_finite() && args.kx > 0.0) {
        return Err(Failure::Spec(format!("reference kx must be positive, got {}", args.kx)));
    }
    if args.ratios.iter().any(|r| !r.is_finite()) {
        return Err(Failure::Spec("non-finite ratio".into()));
    }
    let cells: Vec<(f64, f64)> =
        args.ratios.iter().flat_map(|&r| omegas.values().into_iter().map(move |w| (r, w))).collect();
    let rows: Vec<Vec<Value>> = cells
        .par_iter()
        .map(|&(ratio, w)| {
            let p = ModelParams { view: args.view, kx: args.kx, ky: ratio * args.kx, omega: w, temperature: 0.0 };
            let sector = classify_sector(&p).tag;
            let res = limit_temperature(&p);
            let l = res.as_ref().ok();
            let asym = if args.view == View::FixedK { te_large_omega_asymptote(&p).ok() } else { None };
            vec![
                ratio.into(),
                w.into(),
                p.view.as_str().into(),
                p.kx.into(),
                p.ky.into(),
                sector.as_str().into(),
                Value::opt(l.map(|l| l.t_e)),
                l.map_or(Value::Null, |l| l.exact_zero.into()),
                Value::opt(l.map(|l| l.residual)),
                l.map_or(Value::Null, |l| l.crossing_verified.into()),
                l.map_or(Value::Null, |l| l.reentrant.into()),
                Value::opt(asym),
                status(res.as_ref().err()),
            ]
        })
        .collect();
    for (row, &(ratio, w)) in rows.iter().zip(&cells) {
        if row[10] == Value::Bool(true) {
            eprintln!("gaussmode: f̃₋ changes sign again above T_E at ratio {ratio}, ω {w}");
        }
    }
    let mut table = Table::new(&[
        "ky_ratio",
        "omega",
        "view",
        "kx",
        "ky",
        "sector",
        "T_E",
        "exact_zero",
        "residual",
        "crossing_verified",
        "reentrant",
        "T_E_asymptote",
        "status",
    ]);
    table.rows = rows;
    Ok(Outcome { table, exit_code: 0, single: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PanelArg {
    Standard,
    Extended,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected LOW,HIGH")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 40)]
    pub nmax: usize,
    #[arg(long, value_enum, default_value = "standard")]
    pub panel: PanelArg,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also require agreement between two cutoffs, e.g. `40,50`.
    #[arg(long, value_parser = parse_pair)]
    pub convergence: Option<(usize, usize)>,
    #[command(flatten)]
    pub output: OutputArgs,
}

pub fn check(args: &CheckArgs) -> Result<Outcome, Failure> {
    let config = FockConfig { n_max: args.nmax, convergence: args.convergence };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let points = match args.panel {
        PanelArg::Standard => standard_panel(),
        PanelArg::Extended => extended_panel(),
    };
    let results = compare_panel(&points, &config, args.tol)?;

    let mut columns: Vec<String> = PARAM_COLUMNS.iter().map(|c| c.to_string()).collect();
    for name in Observables::NAMES {
        columns.extend([format!("{name}_gauss"), format!("{name}_fock")]);
    }
    columns.extend(["max_diff", "pass", "status"].map(String::from));
    let mut table = Table { columns, rows: Vec::new() };
    let mut failures = 0;
    for r in &results {
        let mut row = param_values(&r.params);
        let fock = r.fock.as_ref().ok().map(|f| f.values());
        for (k, g) in r.gaussian.values().into_iter().enumerate() {
            row.extend([g.into(), Value::opt(fock.map(|f| f[k]))]);
        }
        row.extend([r.max_diff.into(), r.pass.into(), status(r.fock.as_ref().err())]);
        table.push(row);
        if !r.pass {
            failures += 1;
        }
    }
    eprintln!("gaussmode: {} of {} panel points within {:e}", results.len() - failures, results.len(), args.tol);
    Ok(Outcome { table, exit_code: if failures > 0 { 1 } else { 0 }, single: false })
}
