use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("loss became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("dataset line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Ensemble(#[from] eir_core::EnsembleError),

    #[error("invalid sweep config: {0}")]
    Config(String),
}

pub(crate) fn param(msg: impl Into<String>) -> LabError {
    LabError::Parameter(msg.into())
}
