mod commands;
mod config;
mod table;

use std::io::{self, Write};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use commands::{CheckArgs, Failure, Outcome, OutputArgs, PhaseArgs, PointArgs, SweepArgs, TeArgs};
use table::{Format, Header};

/// Entanglement, discord and stability of two coupled modes in a rotating frame.
///
/// Any subcommand also accepts `--config FILE` with `key=value` lines; flags
/// on the command line win over the file.
#[derive(Debug, Parser)]
#[command(name = "gaussmode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Every measure at a single parameter point.
    #[command(args_override_self = true)]
    Point(PointArgs),
    /// Measures along one axis with the other parameters fixed.
    #[command(args_override_self = true)]
    Sweep(SweepArgs),
    /// Sector labels over a (ky/kx, ω/ω₀) grid.
    #[command(args_override_self = true)]
    Phase(PhaseArgs),
    /// Limit temperature of entanglement against ω for several ratios.
    #[command(args_override_self = true)]
    Te(TeArgs),
    /// Compare Gaussian measures with a truncated Fock-space computation.
    #[command(args_override_self = true)]
    Check(CheckArgs),
}

impl Command {
    fn output(&self) -> &OutputArgs {
        match self {
            Command::Point(a) => &a.output,
            Command::Sweep(a) => &a.output,
            Command::Phase(a) => &a.output,
            Command::Te(a) => &a.output,
            Command::Check(a) => &a.output,
        }
    }

    fn run(&self) -> Result<Outcome, Failure> {
        match self {
            Command::Point(a) => commands::point(a),
            Command::Sweep(a) => commands::sweep(a),
            Command::Phase(a) => commands::phase(a),
            Command::Te(a) => commands::te(a),
            Command::Check(a) => commands::check(a),
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Point(_) => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("GAUSSMODE_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("GAUSSMODE_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Other(e.to_string()))
}

fn emit(cmd: &Command, outcome: &Outcome, command_line: String) -> io::Result<()> {
    let opts = cmd.output();
    let format = if opts.ndjson { Format::Json } else { opts.format.unwrap_or(cmd.default_format()) };
    let mut out = io::BufWriter::new(io::stdout().lock());
    match format {
        Format::Csv => {
            let header = (!opts.no_header).then(|| Header {
                command_line,
                timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            });
            outcome.table.write_csv(&mut out, header.as_ref())?;
        }
        Format::Json => outcome.table.write_json(&mut out, opts.ndjson, outcome.single)?,
    }
    out.flush()
}

fn fail(f: &Failure) -> ExitCode {
    eprintln!("gaussmode: {}", f.message());
    ExitCode::from(f.exit_code())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let command_line = argv.join(" ");
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => return fail(&Failure::Usage(e.0)),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    if let Err(f) = init_threads() {
        return fail(&f);
    }
    let outcome = match cli.command.run() {
        Ok(o) => o,
        Err(f) => return fail(&f),
    };
    if let Err(e) = emit(&cli.command, &outcome, command_line) {
        if e.kind() != io::ErrorKind::BrokenPipe {
            return fail(&Failure::Other(e.to_string()));
        }
    }
    ExitCode::from(outcome.exit_code)
}
