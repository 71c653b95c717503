//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the linear-algebra, evolution,
/// dilation, sampling, and experiment layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("state has {state_dim} amplitudes, operator expects {op_dim}")]
    StateDimMismatch { state_dim: usize, op_dim: usize },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("matrix is numerically singular (min |eigenvalue| {0:.3e})")]
    Singular(f64),

    #[error("operator is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("expected a traceless two-level Hamiltonian (|trace| {trace_abs:.3e})")]
    UnsupportedHamiltonian { trace_abs: f64 },

    #[error("integration step must be positive and finite (got {0})")]
    InvalidStep(f64),

    #[error("averaging window [{0}, {1}] is empty or outside the grid")]
    InvalidWindow(f64, f64),

    #[error("no stationary metric at r = {0}: spectrum is not PT-symmetric")]
    OutsidePtSymmetric(f64),

    #[error("Naimark dilation invalid at t = {t}: min eigenvalue of (rho - I) is {min_eig:.3e}")]
    NaimarkInvalid { t: f64, min_eig: f64 },

    #[error("dilation constant C = {c} leaves C*I - rho^-1 indefinite (min eigenvalue {min_eig:.3e})")]
    InvalidC { c: f64, min_eig: f64 },

    #[error("post-selection branch is empty")]
    EmptyBranch,

    #[error("tomographic estimate too mixed: largest eigenvalue {lambda_max:.3} < {threshold}")]
    TooMixed { lambda_max: f64, threshold: f64 },

    #[error("metric reconstruction ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
