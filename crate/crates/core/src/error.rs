use thiserror::Error;

use crate::surface::ModelTag;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),
    #[error("surfaces mix model tags {0} and {1}")]
    MixedModels(ModelTag, ModelTag),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unknown model tag `{0}`")]
    UnknownModel(String),
    #[error("model {0} has no minimal solver")]
    NoMinimalSolver(ModelTag),
    #[error("need at least {needed} items for a minimal sample, got {got}")]
    TooFewItems { needed: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid too fine: {0}")]
    GridTooFine(String),
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A surface equation left its domain (a vanishing denominator, a focal
/// length below range, a degenerate direction).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct DomainError(pub &'static str);

pub type Result<T, E = Error> = std::result::Result<T, E>;
