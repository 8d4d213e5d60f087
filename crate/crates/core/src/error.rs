use thiserror::Error;

use crate::kinematics::Frame;

/// Errors raised by the simulator and the frame-recovery solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("frame speed {speed} is not below light speed")]
    SuperluminalFrame { speed: f64 },

    /// Velocity composition hit the pole `u·v = ±1`: the transformed speed is instantaneous.
    #[error("velocity composition diverges (transformed signal is instantaneous)")]
    Divergent,

    #[error("expected an event in the {expected:?} frame, found {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("finite superluminal speed must exceed 1 (got {0})")]
    InvalidFtlSpeed(f64),

    #[error("length must be positive and finite (got {0})")]
    InvalidLength(f64),

    #[error("malformed worldline: {0}")]
    MalformedWorldline(String),

    #[error("sweep grid is empty")]
    EmptyGrid,

    #[error("need at least 3 usable measurements at distinct angles, got {usable}")]
    InsufficientData { usable: usize },

    #[error("solver did not converge (best residual {residual:e})")]
    NoConvergence { residual: f64 },

    #[error("no sub-light frame speed reproduces the given speeds")]
    OutOfRange,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
