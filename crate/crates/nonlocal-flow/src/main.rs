use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nonlocal_flow::{execute, exit_code, load_config, Experiment};

#[derive(Parser)]
#[command(name = "nonlocal-flow", version, about = "Experiments for the nonlocal erosion conservation law")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `outputs` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Single simulation: snapshots, series, standing profile, summary.
    Run(Common),
    /// Self-convergence study over N, 2N, 4N, ...
    Convergence(Common),
    /// Distance between two solutions over time.
    Stability(Common),
    /// Shock speed or rarefaction fan against the exact solution (uniform k).
    Riemann(Common),
    /// Bounds on the nonlocal coefficient over a run and a random battery.
    ValidateK(Common),
    /// Entropy inequality residuals.
    Entropy(Common),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (experiment, common) = match cli.command {
        Command::Run(c) => (Experiment::Run, c),
        Command::Convergence(c) => (Experiment::Convergence, c),
        Command::Stability(c) => (Experiment::Stability, c),
        Command::Riemann(c) => (Experiment::Riemann, c),
        Command::ValidateK(c) => (Experiment::ValidateK, c),
        Command::Entropy(c) => (Experiment::Entropy, c),
    };
    let mut cfg = match load_config(&common.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(out) = common.out {
        cfg.outputs = out;
    }
    let result = execute(experiment, &cfg);
    match &result {
        Ok(o) if o.passed => println!("{}: passed ({})", experiment.name(), o.summary.display()),
        Ok(o) => println!("{}: FAILED ({})", experiment.name(), o.summary.display()),
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
