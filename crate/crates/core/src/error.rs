use std::io;

use thiserror::Error;

/// Failures while building or ingesting a prediction matrix.
#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{what} value {value} is out of range for K={num_classes}")]
    LabelRange {
        what: String,
        value: usize,
        num_classes: usize,
    },

    #[error("invalid weights: {0}")]
    Weight(String),

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("unsupported prediction file format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl EnsembleError {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        EnsembleError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// Invalid pathological-ensemble parameters.
#[derive(Debug, Error, PartialEq)]
pub enum PathologyError {
    #[error("invalid pathology spec: {0}")]
    Spec(String),
}
