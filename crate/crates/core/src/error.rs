use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid Sobolev parameters: {0}")]
    InvalidParams(String),
    #[error("inconsistent derivative stack at layer {layer}: residual {residual:e}")]
    InconsistentStack { layer: usize, residual: f64 },
    #[error("point {t} lies outside the interval [{a}, {b}]")]
    Domain { t: f64, a: f64, b: f64 },
    #[error("derivative order {requested} requested but only {available} available")]
    Order { requested: usize, available: usize },
    #[error("insufficient smoothness: need stack order {needed}, have {available}")]
    InsufficientSmoothness { needed: usize, available: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("grids do not match")]
    GridMismatch,
    #[error("singular matrix in LU factorisation")]
    SingularMatrix,
    #[error("fundamental matrix numerically singular at node {node} (sigma ratio {ratio:e})")]
    SingularFundamental { node: usize, ratio: f64 },
    #[error("no unique solution: characteristic matrix singular (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    NoUniqueSolution { sigma_min: f64, sigma_max: f64 },
    #[error("unsupported boundary form: {0}")]
    UnsupportedForm(String),
    #[error("duplicate limit point {0}")]
    DuplicateLimitPoint(f64),
    #[error("invalid multipoint form: {0}")]
    InvalidMultipoint(String),
    #[error("invalid parameter family: {0}")]
    InvalidFamily(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
