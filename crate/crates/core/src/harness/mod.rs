//! Config-driven orchestration: the translation experiment, the
//! morphological audit and the gendered-form probe.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::client::{BackendError, CorpusError};

pub mod audit;
pub mod config;
pub mod experiment;
pub mod probe;
pub mod svg;

pub use audit::{run_morph_audit, AuditOutcome, AuditPaths};
pub use config::{ConditionSelection, ExperimentConfig, Overrides, Tokenizer};
pub use experiment::{
    load_records, run_experiment, score_records, ExperimentOutcome, ExperimentReport, ScoreOptions,
};
pub use probe::{load_probe_cases, run_gender_probe, Detected, ProbeCase, ProbeResult};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("backend failure: {0}")]
    Backend(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) | HarnessError::Io { .. } => 3,
            HarnessError::Backend(_) => 4,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<BackendError> for HarnessError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Config(m) => HarnessError::Config(m),
            other => HarnessError::Backend(other.to_string()),
        }
    }
}

impl From<CorpusError> for HarnessError {
    fn from(e: CorpusError) -> Self {
        match e {
            CorpusError::Backend { .. } => HarnessError::Backend(e.to_string()),
            CorpusError::Grammar(_) => HarnessError::Config(e.to_string()),
            _ => HarnessError::Data(e.to_string()),
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(HarnessError::io(path))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(HarnessError::io(dir))?;
    }
    std::fs::write(path, contents).map_err(HarnessError::io(path))
}

/// One sentence per line; a trailing newline does not add a sentence.
pub fn read_corpus(path: &Path) -> Result<Vec<String>, HarnessError> {
    Ok(read_to_string(path)?
        .lines()
        .map(|l| l.trim_end_matches('\r').to_string())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::Config("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::Data("x".into()).exit_code(), 3);
        assert_eq!(HarnessError::Backend("x".into()).exit_code(), 4);
        let e: HarnessError = BackendError::Auth("no key".into()).into();
        assert_eq!(e.exit_code(), 4);
        let e: HarnessError = CorpusError::EmptyCorpus.into();
        assert_eq!(e.exit_code(), 3);
    }
}
