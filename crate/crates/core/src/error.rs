use thiserror::Error;

use crate::geometry::ModelKind;

pub type Result<T> = std::result::Result<T, MshError>;

#[derive(Debug, Error)]
pub enum MshError {
    #[error("degenerate minimal subset for {kind}: {reason}")]
    Degenerate { kind: ModelKind, reason: &'static str },

    #[error("need {needed} points but only {available} are available")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("gave up after {attempts} consecutive degenerate draws")]
    GenerationExhausted { attempts: usize },

    #[error("degenerate inlier scale: {0}")]
    DegenerateScale(&'static str),

    #[error("every hypothesis was rejected while building the hypergraph")]
    EmptyHypergraph,

    #[error("tanimoto distance is undefined for an all-zero preference vector")]
    ZeroVector,

    #[error("all vertex weights are zero")]
    AllZeroWeights,

    #[error("mode selection needs at least 2 sampled vertices, got {0}")]
    TooFewVertices(usize),

    #[error("dimension mismatch: expected {expected} coordinates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("label vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
