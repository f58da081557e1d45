use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")]
    EigenNotConverged { sweeps: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("empty support: operator is numerically zero")]
    EmptySupport,

    #[error("states {i} and {j} are not orthogonal (overlap {overlap:.3e})")]
    NotOrthogonal { i: usize, j: usize, overlap: f64 },

    #[error("size cap exceeded: dimension {dim} > cap {cap}")]
    SizeCap { dim: usize, cap: usize },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("SDP solver failed: {0}")]
    Solver(String),

    #[error("coefficient search failed: {0}")]
    CoefficientSearch(String),

    #[error("block decomposition violated: {0}")]
    Structure(String),
}
