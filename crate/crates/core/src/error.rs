use alloc::boxed::Box;
use alloc::string::String;

use crate::geometry::StateVector;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("projection is not unique (coincident points)")]
    AmbiguousProjection,

    #[error("point is feasible, the proximal normal is zero")]
    ZeroNormal,

    #[error("input point is feasible")]
    FeasibleInput,

    #[error("no convergence after {sweeps} sweeps (residual {residual:e})")]
    NoConvergence {
        sweeps: usize,
        residual: f64,
        last: StateVector,
    },

    #[error("time {t} outside of [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },

    #[error("could not place all disks after {attempts} attempts; use a larger box or fewer disks")]
    SamplingFailed { attempts: usize },

    #[error("state diverged at step {step} (norm {norm:e})")]
    Diverged { step: usize, norm: f64 },

    #[error("step {step} failed: {source}")]
    StepFailed { step: usize, source: Box<Error> },

    #[error("need at least {needed} usable data points, found {found}")]
    InsufficientData { needed: usize, found: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
