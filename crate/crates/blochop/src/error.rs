//! Crate-wide error type.

use crate::geometry::Point;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain dimension must be at least 1")]
    ZeroDimension,

    #[error("point has {got} coordinates, domain has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point lies outside the open domain: {point}")]
    PointOutsideDomain { point: Point },

    #[error(
        "point lies inside the boundary clamp band (within {clamp:e} of the boundary): {point}"
    )]
    BoundaryClamp { point: Point, clamp: f64 },

    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error("singular evaluation: {what} at {point}")]
    Singularity { what: String, point: Point },

    #[error("custom weight is not positive: value {value:e} at {point}")]
    NonpositiveWeight { value: f64, point: Point },

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("operation requires the {expected} domain, got {got}")]
    DomainMismatch { expected: String, got: String },

    #[error("self-map leaves the domain: |phi({input})| reaches {magnitude}")]
    RangeViolation { input: Point, magnitude: f64 },

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("search budget exceeded: {required} evaluations needed, cap is {cap}")]
    SearchBudgetExceeded {
        required: u64,
        cap: u64,
        best_so_far: Option<f64>,
    },

    #[error("every grid evaluation failed; last error: {last}")]
    AllPointsSkipped { last: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
