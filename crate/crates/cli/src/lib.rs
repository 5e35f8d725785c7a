//! Config-driven experiment runner for `anomaly-core`.
//!
//! Each invocation validates a JSON config, runs one experiment fully in
//! memory and only then writes its CSV artifacts and a `manifest.json`, so a
//! failed run leaves nothing behind.

pub mod config;
pub mod csv;
pub mod run;

use config::{Command, ConfigError, ExperimentConfig};
use run::{ModuleError, Outcome};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};
use thiserror::Error;

pub const THREADS_ENV: &str = "ANOMALY_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("config is for `{found}` but the `{expected}` subcommand was used")]
    CommandMismatch { expected: Command, found: Command },
    #[error("no output directory: pass --out or set output_dir in the config")]
    NoOutput,
    #[error("{THREADS_ENV} must be a positive integer, got {0:?}")]
    Threads(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
}

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Error = 1,
    VerificationFailed = 2,
}

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub threads: usize,
    pub started_unix_s: u64,
    pub wall_clock_s: f64,
    pub status: &'static str,
    pub artifacts: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Cap the global rayon pool from `ANOMALY_THREADS` if it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Threads(raw.clone()))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("rayon pool already initialised; {THREADS_ENV} ignored");
    }
    Ok(())
}

/// Load and validate a config file for `command`.
pub fn load(command: Command, path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, CliError> {
    let doc = fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let cfg = config::validate_config(&doc, seed)?;
    if cfg.command != command {
        return Err(CliError::CommandMismatch { expected: command, found: cfg.command });
    }
    Ok(cfg)
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.to_path_buf(), source })
}

/// Write artifacts and the manifest into `out`.
pub fn emit(cfg: &ExperimentConfig, outcome: &Outcome, out: &Path, started: SystemTime, elapsed: f64) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|source| CliError::Write { path: out.to_path_buf(), source })?;
    let mut entries = vec![];
    for a in &outcome.artifacts {
        write(&out.join(&a.name), &a.bytes)?;
        entries.push(ManifestEntry { file: a.name.clone(), sha256: sha256_hex(&a.bytes), bytes: a.bytes.len() });
    }
    let canonical = serde_json::to_vec(&cfg.canonical).expect("JSON values always serialize");
    let manifest = Manifest {
        tool: "anomaly",
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.to_string(),
        seed: cfg.seed,
        config_sha256: sha256_hex(&canonical),
        config: cfg.canonical.clone(),
        threads: rayon::current_num_threads(),
        started_unix_s: started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        wall_clock_s: elapsed,
        status: if outcome.passed { "ok" } else { "verification_failed" },
        artifacts: entries,
    };
    let mut json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    json.push(b'\n');
    write(&out.join("manifest.json"), &json)
}

/// Full invocation: validate, run in memory, then write. Returns the exit status.
pub fn execute(command: Command, config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<Status, CliError> {
    configure_threads()?;
    let cfg = load(command, config, seed)?;
    let out_dir = out.map(Path::to_path_buf).or_else(|| cfg.output_dir.clone()).ok_or(CliError::NoOutput)?;
    let started = SystemTime::now();
    let clock = Instant::now();
    log::info!("running {} with seed {}", cfg.command, cfg.seed);
    let outcome = run::run(&cfg)?;
    emit(&cfg, &outcome, &out_dir, started, clock.elapsed().as_secs_f64())?;
    Ok(if outcome.passed { Status::Ok } else { Status::VerificationFailed })
}
