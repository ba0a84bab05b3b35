//! Batch front end: configuration, command implementations and output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub mod commands;
pub mod config;
pub mod table;

pub use config::{Command, Format, Mode, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Core(#[from] motzkin_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(motzkin_core::Error::Solver { .. }) => EXIT_SOLVER,
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

/// A named output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: String, contents: String) -> Self {
        Artifact { name, contents }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Points where the criterion or the certificate is inconclusive.
    pub inconclusive: usize,
}

impl Outcome {
    pub fn new(artifacts: Vec<Artifact>) -> Self {
        Outcome { artifacts, inconclusive: 0 }
    }

    pub fn exit_code(&self) -> i32 {
        if self.inconclusive > 0 {
            EXIT_INCONCLUSIVE
        } else {
            EXIT_OK
        }
    }
}

/// Runs a validated command, inside a dedicated thread pool when `threads` is set.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let go = || match cfg.command {
        Command::Norms => commands::cmd_norms(cfg),
        Command::Ratios => commands::cmd_ratios(cfg),
        Command::Criterion => commands::cmd_criterion(cfg),
        Command::Certify => commands::cmd_certify(cfg),
        Command::Penalty => commands::cmd_penalty(cfg),
        Command::Overlaps => commands::cmd_overlaps(cfg),
    };
    #[cfg(feature = "parallel")]
    if let Some(threads) = cfg.threads {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot build thread pool: {e}")))?;
        return pool.install(go);
    }
    go()
}

/// Writes artifacts into `dir`, or to `stdout` with a `# name` header each.
pub fn write_artifacts(dir: Option<&Path>, artifacts: &[Artifact], stdout: &mut dyn Write) -> Result<(), CliError> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
            for a in artifacts {
                let path = dir.join(&a.name);
                fs::write(&path, &a.contents).map_err(|source| CliError::Io { path, source })?;
            }
        }
        None => {
            let io = |source| CliError::Io { path: PathBuf::from("<stdout>"), source };
            for a in artifacts {
                writeln!(stdout, "# {}", a.name).map_err(io)?;
                stdout.write_all(a.contents.as_bytes()).map_err(io)?;
            }
        }
    }
    Ok(())
}
