use thiserror::Error;

use crate::data::DataError;
use crate::fairness::FairnessError;
use crate::model::ModelError;
use crate::pate::PipelineError;
use crate::privacy::PrivacyError;
use crate::theory::TheoryError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Union of the per-module errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Fairness(#[from] FairnessError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}
