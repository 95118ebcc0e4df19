use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("mesh needs at least two strictly increasing break points starting at 0, got {0}")]
    InvalidMesh(String),

    #[error("spline degree {degree} not supported here (minimum {min})")]
    InvalidDegree { degree: usize, min: usize },

    #[error("basis index {index} out of range for space of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("evaluation point {x} outside [0, {t_final}]")]
    PointOutOfRange { x: f64, t_final: f64 },

    #[error("derivative order {order} exceeds spline degree {degree}")]
    DerivativeOrder { order: usize, degree: usize },

    #[error("quadrature order {0} out of range (1..=64)")]
    QuadratureOrder(usize),

    #[error("quadrature with {points} points per element too low for degree {degree}")]
    InsufficientQuadrature { points: usize, degree: usize },

    #[error("quasi-interpolant order q={q} must satisfy 1 <= q <= p={degree}")]
    QuasiInterpolantOrder { q: usize, degree: usize },

    #[error("space of dimension {0} cannot be reduced (need at least 2)")]
    ReductionTooSmall(usize),

    #[error("trial and test spaces do not share the same parent spline space")]
    ParentMismatch,

    #[error("expected a {expected} space")]
    WrongKind { expected: &'static str },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid form parameters: {0}")]
    InvalidForm(String),

    #[error("matrix is singular to working precision (pivot {pivot:e} at step {step})")]
    Singular { pivot: f64, step: usize },

    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { pivot: f64, row: usize },

    #[error("reduced eigenproblem is indefinite (lambda_min = {0:e})")]
    Indefinite(f64),

    #[error("eigenvalue iteration did not converge")]
    NoConvergence,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
