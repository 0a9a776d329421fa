use thiserror::Error;

use crate::lattice::Site;

/// Errors raised by the walk simulation and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("non-finite angle parameter: {0}")]
    NonFiniteAngle(f64),
    #[error("invalid lattice extent: {0}")]
    InvalidExtent(String),
    #[error("protocol has no plates")]
    EmptyProtocol,
    #[error("invalid step boundaries: {0}")]
    InvalidSteps(String),
    #[error("amplitude {magnitude:e} would leave the lattice at site ({m}, {n})")]
    ExtentOverflow { m: i32, n: i32, magnitude: f64 },
    #[error("site {0} lies outside the lattice extent")]
    SiteOutOfExtent(Site),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("lattice extents do not match")]
    ExtentMismatch,
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("no input sites given")]
    NoInputSites,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("site ({m}, {n}) is outside the display range")]
    DisplayRange { m: i32, n: i32 },
    #[error("no events left after correction")]
    NoEvents,
}

pub type Result<T, E = WalkError> = std::result::Result<T, E>;
