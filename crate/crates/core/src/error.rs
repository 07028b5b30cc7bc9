use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix data has {found} entries, expected {expected}")]
    BadShape { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("invalid trace {0:e}")]
    InvalidTrace(f64),

    #[error("state is not normalized (norm squared {0:e})")]
    NotNormalized(f64),

    #[error("degenerate post-selection: trace {trace:e} below tolerance")]
    DegeneratePostSelection { trace: f64 },

    #[error("orthogonal selection: overlap {overlap:e} below floor {floor:e}")]
    OrthogonalSelection { overlap: f64, floor: f64 },

    #[error("Kraus operators are not complete (max deviation {0:e})")]
    NotComplete(f64),

    #[error("Kraus list is empty")]
    EmptyKraus,

    #[error(
        "phase-noise coefficients for eigenvector {index} have norm squared {norm:e}, expected 1"
    )]
    InvalidCoefficients { index: usize, norm: f64 },

    #[error("insufficient statistics: {accepted} accepted shots")]
    InsufficientStatistics { accepted: u64 },

    #[error("singular fit: {distinct} distinct abscissae")]
    SingularFit { distinct: usize },

    #[error("operation requires a qubit, got dimension {0}")]
    NotQubit(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
