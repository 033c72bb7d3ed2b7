//! Config-driven experiment runner for `spinmon`.
//!
//! Exit statuses: 0 success, 1 runtime or I/O failure, 2 invalid config,
//! 3 finished with some rows marked as failed.

pub mod run;
pub mod spec;
pub mod table;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use run::{compute, run, Manifest, Report, RunError, RunSummary};
pub use spec::{ConfigError, ExperimentSpec, Mode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INVALID_CONFIG: i32 = 2;
pub const EXIT_PARTIAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "spinmon", version, about = "Run monitored collective-spin experiments from a TOML spec")]
pub struct Cli {
    /// Spec file (TOML), or a `manifest.json` from an earlier run.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Override the spec's mode.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Override the spec's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores. Never changes results.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Override the output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl Cli {
    /// Loads the spec and applies command-line overrides.
    pub fn resolve(&self) -> Result<ExperimentSpec, ConfigError> {
        let mut spec = ExperimentSpec::load(&self.config)?;
        if let Some(m) = self.mode {
            spec.mode = m;
        }
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(dir) = &self.out {
            spec.output.dir = dir.clone();
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Full command-line entry point; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID_CONFIG } else { EXIT_OK };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return EXIT_INVALID_CONFIG;
        }
        if let Err(e) = spinmon::par::set_threads(n) {
            eprintln!("warning: could not size worker pool: {e}");
        }
    }
    let spec = match cli.resolve() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: invalid config: {e}");
            return EXIT_INVALID_CONFIG;
        }
    };
    match run(&spec) {
        Ok(summary) => {
            let m = &summary.manifest;
            eprintln!("{}: {} rows in {:.2}s -> {}", m.mode, m.rows, m.wall_time_seconds, summary.out_dir.display());
            if m.failed_rows > 0 {
                eprintln!("warning: {} rows failed; see the status column", m.failed_rows);
                EXIT_PARTIAL
            } else {
                EXIT_OK
            }
        }
        Err(RunError::Config(e)) => {
            eprintln!("error: invalid config: {e}");
            EXIT_INVALID_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
