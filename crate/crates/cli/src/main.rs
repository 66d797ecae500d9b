use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use sobolev_bvp_cli::config::{self, Command};
use sobolev_bvp_cli::run::{run, EXIT_USAGE};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CommandArg {
    Solve,
    Condition0,
    Continuity,
    Estimate,
    MultipointCheck,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Solve => Command::Solve,
            CommandArg::Condition0 => Command::Condition0,
            CommandArg::Continuity => Command::Continuity,
            CommandArg::Estimate => Command::Estimate,
            CommandArg::MultipointCheck => Command::MultipointCheck,
        }
    }
}

/// Linear boundary-value problems in Sobolev spaces: solves, Condition (0),
/// continuity in the parameter and multipoint limit checks.
#[derive(Debug, Parser)]
#[command(name = "sobolev-bvp", version)]
struct Args {
    #[arg(value_enum)]
    command: CommandArg,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the configuration's `output` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of grid intervals, overriding `grid.n`.
    #[arg(long)]
    grid: Option<usize>,
    /// Trend tolerance, overriding `tolerances.trend`.
    #[arg(long)]
    tol: Option<f64>,
}

fn usage(lines: &[String]) -> ExitCode {
    for l in lines {
        eprintln!("error: {l}");
    }
    ExitCode::from(EXIT_USAGE as u8)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let command = Command::from(args.command);
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return usage(&[format!("cannot read {}: {e}", args.config.display())]),
    };
    let mut cfg = match config::parse_config(&text) {
        Ok(c) => c,
        Err(errs) => return usage(&errs.0),
    };
    if let Some(n) = args.grid {
        cfg.grid.n = n;
    }
    if let Some(tol) = args.tol {
        cfg.tolerances.trend = tol;
    }
    let mut errors = config::validate(&cfg);
    if let Some(c) = cfg.command {
        if c != command {
            errors.push(format!(
                "configuration is for '{}', not '{}'",
                c.as_str(),
                command.as_str()
            ));
        }
    }
    if !errors.is_empty() {
        return usage(&errors);
    }
    let out = args
        .out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let outcome = run(command, &cfg, &out);
    if outcome.code == EXIT_USAGE {
        eprintln!("error: {}", outcome.message);
    } else {
        println!("{}", outcome.message);
    }
    ExitCode::from(outcome.code as u8)
}
