use thiserror::Error;

/// Everything that can go wrong when building operators or running dynamics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("not Hermitian: defect {defect:.3e} exceeds {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("not positive semidefinite: min eigenvalue {0:.6e}")]
    NotPositiveSemidefinite(f64),

    #[error("trace must be positive, got {0:.6e}")]
    NonPositiveTrace(f64),

    #[error("not idempotent: max |P*P - P| entry is {0:.3e}")]
    NotIdempotent(f64),

    #[error("projector trace {0} is not an integer rank in [1, dim]")]
    BadRank(f64),

    #[error("input vectors are not orthonormal: worst Gram defect {0:.3e}")]
    NotOrthonormal(f64),

    #[error("Kraus set is not trace preserving: max |sum K^dag K - I| entry is {0:.3e}")]
    KrausIncomplete(f64),

    #[error("probability {0:.17} lies outside [0,1] beyond clamping tolerance")]
    ProbabilityOutOfRange(f64),

    #[error("state leaks outside the questioned subspace: defect {defect:.3e} exceeds {tol:.1e}")]
    OutsideSubspace { defect: f64, tol: f64 },

    #[error("eigensolver did not converge within {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("degenerate scaling fit: {0}")]
    DegenerateFit(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
