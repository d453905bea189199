use thiserror::Error;

use crate::config::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {}", format_violations(.0))]
    InvalidConfig(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("no data symbols remain (K = {total}, 2*K_P = {training})")]
    NoDataSymbols { total: usize, training: usize },

    #[error("realization {index} of sweep point [{point}] panicked: {message}")]
    RealizationPanicked {
        point: String,
        index: usize,
        message: String,
    },

    #[error("config parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
