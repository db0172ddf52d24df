use thiserror::Error;

/// Errors raised by state construction, propagation and entanglement
/// evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("photon numbers ({n1}, {n2}) exceed truncation {max_total_photons}")]
    OutOfRange {
        n1: usize,
        n2: usize,
        max_total_photons: usize,
    },

    #[error("invalid mode index {0} (expected 1 or 2)")]
    InvalidMode(u8),

    #[error("ket is not normalized: squared norm {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("matrix is not Hermitian: max |rho - rho^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace}, expected 1")]
    TraceNotUnity { trace: f64 },

    #[error("matrix is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("operands live on different truncations ({left} vs {right})")]
    BasisMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("population {population:e} lies outside the {block} block")]
    Leakage { population: f64, block: &'static str },

    #[error("power series of a nilpotent generator did not terminate within {max_terms} terms")]
    SeriesNotTerminated { max_terms: usize },

    #[error("propagators disagree: max element gap {gap:e} exceeds {tolerance:e}")]
    PropagatorMismatch { gap: f64, tolerance: f64 },

    #[error("eigen-decomposition failed: {0}")]
    Decomposition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
