use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use giant_cli::config::{self, ExperimentKind, Setting, KEYS};
use giant_cli::{execute, read_settings, resolve, Registry, RunError};

#[derive(Parser)]
#[command(name = "giant", version, about = "Giant atoms on a coupled-resonator waveguide")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact rate table of one two-atom geometry.
    Rates(RunArgs),
    /// Single-atom lattice decay against the Markov rate.
    Decay(RunArgs),
    /// Bell-state preparation by decoherence-free exchange.
    Entangle(RunArgs),
    /// Closed-form vs master-equation dynamics with individual losses.
    Nonreciprocal(RunArgs),
    /// Exhaustive geometry search under a rate constraint.
    Search(RunArgs),
    /// Lattice vs Markov decay, N = 3 and 4.
    Fig2a(RunArgs),
    /// Long-time decay against intrinsic loss, g = 0.05.
    Fig2b(RunArgs),
    /// Long-time decay against intrinsic loss, g = 0.15.
    Fig2c(RunArgs),
    /// Fidelity map over intrinsic decay and dephasing.
    Fig3(RunArgs),
    /// Non-reciprocal excitation trapping.
    Fig4(RunArgs),
    /// Run the experiment named by the config file's `experiment` key.
    Run(RunArgs),
    /// List experiments and config keys.
    List,
}

#[derive(Args)]
struct RunArgs {
    /// Config file of `key=value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Integrator step, same as `dt=`.
    #[arg(long)]
    dt: Option<String>,
    /// Final time, same as `tmax=`.
    #[arg(long)]
    tmax: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<String>,
    /// Extra `key=value` overrides, applied after the config file.
    overrides: Vec<String>,
}

fn settings(args: &RunArgs) -> Result<Vec<Setting>, RunError> {
    let mut all = match &args.config {
        Some(p) => read_settings(p)?,
        None => Vec::new(),
    };
    let mut flags = args.overrides.clone();
    for (key, v) in [
        ("out", &args.out),
        ("dt", &args.dt),
        ("tmax", &args.tmax),
        ("threads", &args.threads),
    ] {
        if let Some(v) = v {
            flags.push(format!("{key}={v}"));
        }
    }
    all.extend(config::parse_flag_settings(&flags)?);
    Ok(all)
}

fn run(kind: Option<ExperimentKind>, args: &RunArgs) -> Result<bool, RunError> {
    let cfg = resolve(kind, &settings(args)?)?;
    let summary = execute(&cfg)?;
    println!("{}", summary.to_json());
    for c in summary.checks.iter().filter(|c| !c.passed) {
        eprintln!(
            "check failed: {} = {} (required {} {})",
            c.name, c.value, c.relation, c.threshold
        );
    }
    Ok(summary.passed)
}

fn list() {
    println!("experiments:");
    for e in Registry::builtin().iter() {
        println!("  {:<14} {}", e.name(), e.description());
    }
    println!("config keys:");
    for (k, d) in KEYS {
        println!("  {k:<20} {d}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Rates(a) => (Some(ExperimentKind::Rates), a),
        Command::Decay(a) => (Some(ExperimentKind::Decay), a),
        Command::Entangle(a) => (Some(ExperimentKind::Entangle), a),
        Command::Nonreciprocal(a) => (Some(ExperimentKind::Nonreciprocal), a),
        Command::Search(a) => (Some(ExperimentKind::Search), a),
        Command::Fig2a(a) => (Some(ExperimentKind::Fig2a), a),
        Command::Fig2b(a) => (Some(ExperimentKind::Fig2b), a),
        Command::Fig2c(a) => (Some(ExperimentKind::Fig2c), a),
        Command::Fig3(a) => (Some(ExperimentKind::Fig3), a),
        Command::Fig4(a) => (Some(ExperimentKind::Fig4), a),
        Command::Run(a) => (None, a),
        Command::List => {
            list();
            return ExitCode::SUCCESS;
        }
    };
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
