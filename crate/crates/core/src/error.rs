use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QlgaError {
    #[error("lattice size must be at least 3, got {0}")]
    LatticeTooSmall(usize),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot normalize the zero state")]
    ZeroState,

    #[error("{0} requires a periodic lattice")]
    RequiresPeriodic(&'static str),

    #[error("operator is not unitary: residual {0:e}")]
    NotUnitary(f64),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("eigenpair residual {residual:e} exceeds tolerance {tolerance:e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("branch tracking ambiguous at grid point {index}: prediction error {error:e} vs half level spacing {half_gap:e}; refine the delta grid")]
    AmbiguousTracking { index: usize, error: f64, half_gap: f64 },

    #[error("level {level} is within {tolerance:e} of an endpoint eigenphase")]
    NonGenericLevel { level: f64, tolerance: f64 },

    #[error("packet support margin violated: x0={x0}, sigma={sigma}, lattice size {size}")]
    PacketMargin { x0: usize, sigma: f64, size: usize },

    #[error("sample {0} lies outside (-pi+0.1, pi-0.1); summary statistics would wrap")]
    Wraparound(f64),

    #[error("empty sample set")]
    EmptySamples,
}

pub type Result<T> = std::result::Result<T, QlgaError>;
