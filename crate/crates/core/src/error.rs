use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid material parameters: {0}")]
    InvalidParams(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("det F = {det:e} <= 0: polar decomposition has no rotation factor")]
    NonPositiveDeterminant { det: f64 },

    #[error("polar iteration did not converge after {iterations} iterations")]
    PolarNotConverged { iterations: usize },

    #[error("inadmissible deformation at sample {index}: 1 + psi_z = {value:e} <= 0")]
    Inadmissible { index: usize, value: f64 },

    #[error("{functional}: definition and expanded form disagree by {residual:e} at sample {index}")]
    FormulaMismatch {
        functional: &'static str,
        index: usize,
        residual: f64,
    },

    #[error("time derivatives phi_t / psi_t are required")]
    MissingTimeDerivatives,

    #[error("pole at v = {speed}: {what}")]
    Pole { speed: f64, what: &'static str },

    #[error("v = {speed} lies in a forbidden region ({detail})")]
    Forbidden { speed: f64, detail: String },

    #[error("no travelling kink: {0}")]
    NoKink(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("numerical instability at step {step} (t = {t})")]
    NumericalInstability { step: usize, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
