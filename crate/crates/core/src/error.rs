use thiserror::Error;

/// Errors raised by divergence evaluation and the numeric oracles.
///
/// An infinite divergence is never an error; it is reported as
/// [`ExtReal::PosInf`](crate::ExtReal::PosInf).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("coordinate {coord} = {value} lies outside the domain {interval}")]
    OutOfDomain {
        coord: usize,
        value: f64,
        interval: String,
    },

    #[error("coordinate {coord} = {value} is not interior to the domain {interval}")]
    NotInterior {
        coord: usize,
        value: f64,
        interval: String,
    },

    #[error("non-finite coordinate {coord} = {value}")]
    NonFiniteCoordinate { coord: usize, value: f64 },

    #[error("generator `{generator}` returned non-finite value {value}")]
    NonFiniteValue { generator: String, value: f64 },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("generator value {value} at {location} is not positive")]
    NonPositiveValue { value: f64, location: &'static str },

    #[error("quasi-arithmetic inverse: target {target} not bracketed by [{lo}, {hi}]")]
    BracketFailure { target: f64, lo: f64, hi: f64 },

    #[error("extrapolated point {point:?} leaves the domain; the domain must contain it")]
    DomainExtension { point: Vec<f64> },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error("infinite-branch integrand at u = {u}: Q(θ′+u) < Q(θ+u)")]
    InfiniteBranch { u: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
