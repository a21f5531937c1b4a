//! Command-line entry points and the HTTP service for `objremove`.

pub mod commands;
pub mod server;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use objremove_core::oracles::{OracleError, Oracles, SubprocessOracle};
use objremove_core::pipeline::PipelineConfig;
use serde::de::DeserializeOwned;
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const DEGRADED: i32 = 3;
    pub const ABORT: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("run aborted: {0}")]
    Abort(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Invalid(_) => exit::INPUT,
            CliError::Abort(_) | CliError::Io(_) => exit::ABORT,
        }
    }
}

/// Reads and parses a JSON file, naming the path on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let input = |message: String| CliError::Input {
        path: path.to_path_buf(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| input(e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| input(e.to_string()))
}

/// Pipeline configuration from an optional file, with `seed` replacing the
/// RANSAC seed when given.
pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<PipelineConfig, CliError> {
    let mut cfg = match path {
        Some(p) => read_json(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        cfg.ransac.rng_seed = s;
    }
    cfg.validate().map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok(cfg)
}

/// Subprocess adapter command lines for each oracle; unset ones use the
/// built-in implementation.
#[derive(Debug, Clone, Default)]
pub struct OracleCommands {
    pub matcher: Option<String>,
    pub segmenter: Option<String>,
    pub inpainter: Option<String>,
}

impl OracleCommands {
    pub fn build(&self) -> Result<Oracles, CliError> {
        let sub = |line: &str| {
            SubprocessOracle::from_command_line(line)
                .map(Arc::new)
                .map_err(|e: OracleError| CliError::Invalid(e.to_string()))
        };
        let mut oracles = Oracles::builtin();
        if let Some(l) = &self.matcher {
            oracles.matcher = sub(l)?;
        }
        if let Some(l) = &self.segmenter {
            oracles.segmenter = sub(l)?;
        }
        if let Some(l) = &self.inpainter {
            oracles.inpainter = sub(l)?;
        }
        Ok(oracles)
    }
}
