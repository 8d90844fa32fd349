use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{ConfigError, RunConfig};
use output::RunOutput;

/// Sweeps over the polaron waveguide models, written as CSV tables with a JSON sidecar.
#[derive(Parser)]
#[command(name = "wqed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Override a config entry, e.g. `--set model.lambda=0.25` or `--set sweep.g=[0.1,0.2]`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Single-qubit ground state: renormalized gap, excited population, energy
    Gs1q(RunArgs),
    /// Single-qubit bound state against the band edge and the RWA
    Bound1q(RunArgs),
    /// Ground-state photon clouds, one or two qubits
    Gsphotons(RunArgs),
    /// Ground-state photon profiles from Polaron, RWA and exact diagonalization
    BenchmarkEd(RunArgs),
    /// Spontaneous emission of an initially excited qubit
    Emission(RunArgs),
    /// Two-qubit ground state and Ising coupling versus separation
    Gs2q(RunArgs),
    /// Two-qubit bound doublet and its photon profiles
    Bound2q(RunArgs),
    /// Ramp-hold-ramp state transfer between two qubits
    Transfer(RunArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &RunArgs, fn(&RunConfig) -> Result<RunOutput, ConfigError>) {
        match self {
            Command::Gs1q(a) => ("gs1q", a, commands::gs1q),
            Command::Bound1q(a) => ("bound1q", a, commands::bound1q),
            Command::Gsphotons(a) => ("gsphotons", a, commands::gsphotons),
            Command::BenchmarkEd(a) => ("benchmark-ed", a, commands::benchmark_ed),
            Command::Emission(a) => ("emission", a, commands::emission),
            Command::Gs2q(a) => ("gs2q", a, commands::gs2q),
            Command::Bound2q(a) => ("bound2q", a, commands::bound2q),
            Command::Transfer(a) => ("transfer", a, commands::transfer),
        }
    }
}

const EXIT_CONFIG: u8 = 1;
const EXIT_CONVERGENCE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("WQED_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("WQED_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args, run) = cli.command.split();

    let prepared = init_threads()
        .and_then(|_| config::load(&args.config, &args.overrides))
        .and_then(|cfg| cfg.validate_common().map(|_| cfg));
    let cfg = match prepared {
        Ok(c) => c,
        Err(e) => {
            eprintln!("wqed {name}: config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let out = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("wqed {name}: config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match output::write_run(&args.out, name, &cfg, &out) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
        }
        Err(e) => {
            eprintln!("wqed {name}: cannot write to {}: {e}", args.out.display());
            return ExitCode::from(EXIT_SOLVER);
        }
    }
    for note in &out.notes {
        println!("note: {note}");
    }
    for f in &out.failures {
        eprintln!("wqed {name}: {} failed at {} [{}]: {}", f.module, f.point, f.status, f.message);
    }
    let code = if out.failures.iter().any(|f| f.status == "solver") {
        EXIT_SOLVER
    } else if out.failures.iter().any(|f| f.status == "convergence") {
        EXIT_CONVERGENCE
    } else if out.failures.is_empty() {
        0
    } else {
        EXIT_CONFIG
    };
    ExitCode::from(code)
}
