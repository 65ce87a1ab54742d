use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-positive warp w = {value:e} at node {index} (r = {r})")]
    NonPositiveWarp { index: usize, r: f64, value: f64 },

    #[error("non-positive lapse a = {value:e} at node {index} (r = {r})")]
    NonPositiveLapse { index: usize, r: f64, value: f64 },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("excluded parameter value: {0}")]
    ExcludedParameter(String),

    #[error("tau(t) = {tau} is not positive at t = {t}")]
    NonPositiveTau { t: f64, tau: f64 },

    #[error("ode integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("diffeomorphism is not monotone near node {index}")]
    NonMonotone { index: usize },

    #[error("comparison region is empty: {0}")]
    EmptyRegion(String),

    #[error("positivity lost at t = {t}: {field} = {value:e} at node {index}")]
    PositivityLoss { t: f64, field: &'static str, index: usize, value: f64 },

    #[error("time step {dt:e} rejected: {reason}")]
    InvalidStep { dt: f64, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
