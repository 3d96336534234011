use thiserror::Error;

/// Errors raised by geometric and measure-theoretic operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("unsupported dimension {dim} for {op}")]
    UnsupportedDimension { dim: usize, op: &'static str },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("body is unbounded")]
    UnboundedBody,
    #[error("body is degenerate (empty interior)")]
    DegenerateBody,
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("origin lies outside the body")]
    OriginOutside,
    #[error("h^(1-p) is not integrable: active facet {index} has zero offset with p = {p}")]
    IntegrabilityViolation { index: usize, p: f64 },
    #[error("directions are contained in a closed hemisphere")]
    HemisphereViolation,
    #[error("measure is not balanced: barycenter norm {norm:e}")]
    ClosureViolation { norm: f64 },
    #[error("support value at node {index} is not positive")]
    NegativeSupport { index: usize },
    #[error("inner minimization reached the boundary of the body")]
    BoundaryBlowup,
    #[error("point is outside the graph patch (|z| = {norm}, radius {radius})")]
    OutOfPatch { norm: f64, radius: f64 },
    #[error("closed form is singular at z = o; use the limit value")]
    SingularAtZero,
    #[error("point is outside the cone")]
    PointOutsideCone,
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
