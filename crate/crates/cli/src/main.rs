use anomaly_cli::config::Command;
use anomaly_cli::{execute, Status};
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Reproducible anomalous-diffusion and fractional-rheology experiments.
///
/// Exit codes: 0 success, 1 error, 2 verification failed.
/// ANOMALY_THREADS caps the worker pool.
#[derive(Parser)]
#[command(name = "anomaly", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Draw α-stable samples and tabulate pdf/cdf.
    Sample(Common),
    /// Simulate a particle ensemble and report MSD and densities.
    Walk(Common),
    /// Solve a fractional advection-dispersion problem.
    Solve(Common),
    /// Relaxation, dynamic moduli and stress histories of a rheological model.
    Rheology(Common),
    /// Compare a Lévy-flight ensemble with the fundamental solution.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides output_dir in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// RNG seed (overrides the config's seed).
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (cmd, a) = match cli.command {
        Sub::Sample(a) => (Command::Sample, a),
        Sub::Walk(a) => (Command::Walk, a),
        Sub::Solve(a) => (Command::Solve, a),
        Sub::Rheology(a) => (Command::Rheology, a),
        Sub::Verify(a) => (Command::Verify, a),
    };
    match execute(cmd, &a.config, a.out.as_deref(), a.seed) {
        Ok(Status::VerificationFailed) => {
            eprintln!("verification failed; see report.csv");
            ExitCode::from(Status::VerificationFailed as u8)
        }
        Ok(s) => ExitCode::from(s as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Status::Error as u8)
        }
    }
}
