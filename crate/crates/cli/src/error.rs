use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed report csv: {0}")]
    Malformed(String),
    #[error(transparent)]
    Core(#[from] sfpate::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration problems, 3 for everything that
    /// fails at run time.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Core(e.into())
            }
        }
    )*};
}

from_core!(
    sfpate::data::DataError,
    sfpate::model::ModelError,
    sfpate::fairness::FairnessError,
    sfpate::privacy::PrivacyError,
    sfpate::pate::PipelineError,
    sfpate::theory::TheoryError
);
