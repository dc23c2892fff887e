//! Configuration, experiment registry and deterministic CSV output for the
//! `giant` command.

pub mod config;
pub mod experiments;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};

use giant_core::lattice::LatticeError;
use giant_core::lindblad::LindbladError;
use giant_core::model::ModelError;
use serde::Serialize;
use thiserror::Error;

pub use config::{parse_config, resolve, ConfigError, ExperimentKind, RunConfig};
pub use experiments::{Experiment, Registry};
pub use output::{Check, CsvTable, OutputSet};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    /// Parameters that pass the grammar but describe no valid system.
    #[error("{0}")]
    Invalid(String),
    #[error("{experiment}: {message}")]
    Numerical { experiment: String, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("no experiment registered as '{0}'")]
    Unregistered(String),
}

impl RunError {
    pub fn invalid(cfg: &RunConfig, msg: &str) -> Self {
        RunError::Invalid(format!("{}: {msg}", cfg.experiment))
    }

    pub fn model(cfg: &RunConfig, e: ModelError) -> Self {
        RunError::Invalid(format!("{}: {e}", cfg.experiment))
    }

    pub fn lattice(cfg: &RunConfig, e: LatticeError) -> Self {
        match e {
            LatticeError::Model(m) => Self::model(cfg, m),
            other => RunError::Numerical {
                experiment: cfg.experiment.to_string(),
                message: format!("lattice: {other}"),
            },
        }
    }

    pub fn lindblad(cfg: &RunConfig, e: LindbladError) -> Self {
        let experiment = cfg.experiment.to_string();
        match e {
            LindbladError::IndefiniteDissipation { .. }
            | LindbladError::NegativeRate
            | LindbladError::NonFiniteRate => RunError::Invalid(format!("{experiment}: {e}")),
            other => RunError::Numerical {
                experiment,
                message: format!("master equation: {other}"),
            },
        }
    }

    /// 1 for configuration problems, 2 for numerical or I/O failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) | RunError::Invalid(_) | RunError::Unregistered(_) => 1,
            RunError::Numerical { .. } | RunError::Io { .. } => 2,
        }
    }
}

/// Machine-readable outcome of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub experiment: String,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Runs `cfg.experiment` without touching the filesystem.
pub fn run_in_memory(cfg: &RunConfig) -> Result<(OutputSet, Vec<Check>), RunError> {
    let registry = Registry::builtin();
    let name = cfg.experiment.name();
    let exp = registry
        .get(name)
        .ok_or_else(|| RunError::Unregistered(name.to_string()))?;
    let mut out = OutputSet::default();
    let checks = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Invalid(format!("thread pool: {e}")))?
            .install(|| exp.run(cfg, &mut out))?,
        None => exp.run(cfg, &mut out)?,
    };
    Ok((out, checks))
}

/// Runs the experiment, writes its CSVs and `summary.json` into `cfg.out`.
pub fn execute(cfg: &RunConfig) -> Result<Summary, RunError> {
    let (out, checks) = run_in_memory(cfg)?;
    let dir = cfg.out.as_path();
    let written = out.commit(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let summary = Summary {
        experiment: cfg.experiment.to_string(),
        outputs: out.tables().iter().map(|t| t.file_name.clone()).collect(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    let path = dir.join("summary.json");
    if let Err(source) = fs::write(&path, summary.to_json() + "\n") {
        output::remove_all(&written);
        return Err(RunError::Io { path, source });
    }
    Ok(summary)
}

/// Reads a config file into settings.
pub fn read_settings(path: &Path) -> Result<Vec<config::Setting>, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::Invalid(format!("{}: {e}", path.display())))?;
    Ok(config::parse_settings(&text)?)
}
