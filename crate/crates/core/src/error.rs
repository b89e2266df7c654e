use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal residual {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("z = {z} lies within {distance:e} of eigenvalue {eigenvalue} (pole proximity)")]
    PoleProximity { z: f64, eigenvalue: f64, distance: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite state while integrating at z = {z}; rescale the grid or use log-form integration")]
    Overflow { z: f64 },

    #[error("eigenvalue {index} did not converge within bracket [{lo}, {hi}]")]
    EigenConvergence { index: usize, lo: f64, hi: f64 },

    #[error("incompatible solution traces: {0}")]
    Incompatible(String),

    #[error("diagonal Green's function {value:e} too small to divide by")]
    DivisionGuard { value: f64 },

    #[error("truncation window mismatch: {0}")]
    Window(String),

    #[error("spectral value {value:e} too close to zero; apply the spectral shift guard first")]
    UnguardedZero { value: f64 },

    #[error("split spectrum carries no provenance tags")]
    MissingTags,

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("truncation K = {0} is too small (need at least 8)")]
    TruncationTooSmall(usize),

    #[error("zero factor in eigenvalue ratio product at label {0}")]
    ZeroRatio(usize),

    #[error("reconstructed value {value:e} is negative beyond tolerance")]
    NegativeSquare { value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
