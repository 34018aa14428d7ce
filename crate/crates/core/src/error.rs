use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension must be positive")]
    ZeroDimension,

    #[error("matrix is not skew-hermitian (residual {residual:.3e})")]
    NotSkewHermitian { residual: f64 },

    #[error("{what} has a nonzero imaginary part ({magnitude:.3e})")]
    NotReal { what: &'static str, magnitude: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty ensemble")]
    EmptyEnsemble,

    #[error("zero-norm vector at particle {index}")]
    ZeroNorm { index: usize },

    #[error("non-finite state produced at step {step}")]
    NonFinite { step: usize },

    #[error("norm drift {drift:.3e} exceeded abort threshold {threshold:.3e} at step {step}")]
    DriftAbort {
        step: usize,
        drift: f64,
        threshold: f64,
    },

    #[error("degenerate cross-ratio quadruple ({i},{j},{k},{l}): denominator magnitude {magnitude:.3e}")]
    DegenerateQuadruple {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        magnitude: f64,
    },

    #[error("frustration override in use: {0} requires the I + W decomposition")]
    OverriddenFrustration(&'static str),

    #[error("heterogeneous natural frequencies: {0} needs an identical ensemble")]
    HeterogeneousOmega(&'static str),

    #[error("{theorem} hypothesis not satisfied: {detail}")]
    HypothesisViolated { theorem: &'static str, detail: String },

    #[error("initial data generation failed: {0}")]
    InitialData(String),

    #[error("config error in {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
