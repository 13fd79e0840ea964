use thiserror::Error;

pub type Result<T> = std::result::Result<T, QemError>;

#[derive(Debug, Error)]
pub enum QemError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace {0:.12} is not 1")]
    NotUnitTrace(f64),

    #[error("matrix is not positive semidefinite")]
    NotPositive,

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("degenerate overlap: every overlap eigenvalue is below the regularisation tolerance")]
    DegenerateOverlap,

    #[error("non-invertible channel: {0}")]
    NonInvertibleChannel(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("unknown fault location id {0}")]
    UnknownLocation(u32),

    #[error("duplicate fault location id {0}")]
    DuplicateLocation(u32),

    #[error("negative circuit fault rate {0}")]
    NegativeRate(f64),

    #[error("odd data-point count required for analytical extrapolation (got n = {0})")]
    EvenDataPoints(usize),

    #[error("invalid extrapolation plan: {0}")]
    InvalidPlan(String),

    #[error("duplicate or unordered extrapolation rates")]
    DuplicateRates,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state orthogonal to symmetry subspace (Tr(Pi rho) = {0:.3e})")]
    OrthogonalToSymmetry(f64),

    #[error("symmetry elements are not closed under multiplication")]
    NotClosed,

    #[error("operators do not commute: {0}")]
    NonCommuting(String),

    #[error("inconsistent moments: joint probability {0:.3e} is negative")]
    InconsistentMoments(f64),

    #[error("calibration mean vanished; increase shots")]
    ZeroDenominator,

    #[error("no accepted shots")]
    NoAcceptedShots,

    #[error("insufficient dimension: {0}")]
    InsufficientDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-Pauli channel at location {0}")]
    NonPauliChannel(u32),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
