//! `holoflow` batch runner: reads a JSON run configuration, executes one
//! command, and writes CSV/JSON/SVG results plus a manifest.

pub mod commands;
pub mod config;
mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use holoflow_core::Status;
use thiserror::Error;

use crate::config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_SINGULARITY: i32 = 2;
pub const EXIT_UNDERFLOW: i32 = 3;

pub const WORKERS_ENV: &str = "HOLOFLOW_WORKERS";
const DEFAULT_OUT: &str = "holoflow-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Integrate,
    Surface,
    Spectrum,
    Classify,
    Residual,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Integrate => "integrate",
            Command::Surface => "surface",
            Command::Spectrum => "spectrum",
            Command::Classify => "classify",
            Command::Residual => "residual",
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "holoflow",
    version,
    about = "Complex-time flows, Riemann-surface meshes and slow-manifold tests"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; falls back to HOLOFLOW_WORKERS, then the config.
    #[arg(long)]
    pub workers: Option<usize>,
}

/// What a finished command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Output file names relative to the output directory, in write order.
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn exit_code_for(status: Status) -> i32 {
    match status {
        Status::Completed => EXIT_OK,
        Status::Singularity => EXIT_SINGULARITY,
        Status::StepUnderflow => EXIT_UNDERFLOW,
    }
}

/// Worker count: flag, then environment, then config, then all cores.
pub fn resolve_workers(
    flag: Option<usize>,
    env: Option<&str>,
    config: Option<usize>,
) -> Result<usize, CliError> {
    let from_env =
        match env.map(str::trim).filter(|s| !s.is_empty()) {
            Some(s) => Some(s.parse::<usize>().map_err(|_| {
                CliError::Config(format!("{WORKERS_ENV}={s} is not a worker count"))
            })?),
            None => None,
        };
    let n = flag
        .or(from_env)
        .or(config)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if n == 0 {
        return Err(CliError::Config("worker count must be at least 1".into()));
    }
    Ok(n)
}

/// Run one command with an explicit worker count.
pub fn execute(
    command: Command,
    config_path: &Path,
    out: Option<&Path>,
    workers: Option<usize>,
) -> Result<Outcome, CliError> {
    let text = std::fs::read(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let config = RunConfig::parse(&String::from_utf8_lossy(&text))?;
    let env = std::env::var(WORKERS_ENV).ok();
    let workers = resolve_workers(workers, env.as_deref(), config.workers)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let produced = pool.install(|| commands::run(command, &config))?;

    output::write_all(&out_dir, command, &text, produced)
}

/// Parse `args` (including the program name), run, report, and return the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(
        args.command,
        &args.config,
        args.out.as_deref(),
        args.workers,
    ) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if !outcome.warnings.is_empty() {
                eprintln!("{} warning(s)", outcome.warnings.len());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("holoflow {}: {e}", args.command.name());
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worker_precedence() {
        assert_eq!(resolve_workers(Some(3), Some("5"), Some(7)).unwrap(), 3);
        assert_eq!(resolve_workers(None, Some("5"), Some(7)).unwrap(), 5);
        assert_eq!(resolve_workers(None, Some(" "), Some(7)).unwrap(), 7);
        assert_eq!(resolve_workers(None, None, Some(7)).unwrap(), 7);
        assert!(resolve_workers(None, None, None).unwrap() >= 1);
        assert!(resolve_workers(None, Some("many"), None).is_err());
        assert!(resolve_workers(Some(0), None, None).is_err());
    }

    #[test]
    fn bad_arguments_exit_one() {
        assert_eq!(
            run(["holoflow", "explode", "--config", "x.json"]),
            EXIT_CONFIG
        );
        assert_eq!(run(["holoflow", "integrate"]), EXIT_CONFIG);
        assert_eq!(
            run(["holoflow", "integrate", "--config", "/no/such/file.json"]),
            EXIT_CONFIG
        );
    }
}
