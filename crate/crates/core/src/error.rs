use thiserror::Error;

use crate::flow::Face;

/// Everything that can go wrong in this crate.
///
/// Values are reported in `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("step limit of {max_steps} exceeded at t = {t}")]
    StepLimitExceeded { t: f64, max_steps: usize },

    #[error("step size collapsed to {h:e} at t = {t}")]
    StepUnderflow { t: f64, h: f64 },

    #[error("t = {t} outside the covered interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("no exit from the region before the horizon t = {horizon}")]
    NoExit { horizon: f64 },

    #[error("invalid start point: {0}")]
    InvalidStart(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("symmetry {map} is not a symmetry of the field at (A, B, C) = ({a}, {b}, {c})")]
    SymmetryUnavailable { map: String, a: f64, b: f64, c: f64 },

    #[error("parameters ({a}, {b}, {c}) lie outside the radius-{radius} ball around (1, 1, 1)")]
    OutsideParameterBall { a: f64, b: f64, c: f64, radius: f64 },

    #[error("trajectory from height a = {a} left the prism through forbidden face {face:?}")]
    ForbiddenFaceExit { a: f64, face: Face },

    #[error("bracket lost at a = {a}: {reason}")]
    BracketLost { a: f64, reason: String },

    #[error("coarse scan found no S0 -> S1 transition")]
    NoTransition,

    #[error("corner residual {residual:e} exceeds {tol:e}")]
    CornerResidual { residual: f64, tol: f64 },

    #[error("shift residual {residual:e} exceeds tolerance {tol:e}")]
    PeriodicityFailure { residual: f64, tol: f64 },

    #[error("monitor violation at a = {a}: {what}")]
    MonitorViolation { a: f64, what: String },
}

impl Error {
    /// Name of the error case, as printed by the command-line tool.
    pub fn name(&self) -> &'static str {
        match self {
            Error::StepLimitExceeded { .. } => "StepLimitExceeded",
            Error::StepUnderflow { .. } => "StepUnderflow",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::NoExit { .. } => "NoExit",
            Error::InvalidStart(_) => "InvalidStart",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::SymmetryUnavailable { .. } => "SymmetryUnavailable",
            Error::OutsideParameterBall { .. } => "OutsideParameterBall",
            Error::ForbiddenFaceExit { .. } => "ForbiddenFaceExit",
            Error::BracketLost { .. } => "BracketLost",
            Error::NoTransition => "NoTransition",
            Error::CornerResidual { .. } => "CornerResidual",
            Error::PeriodicityFailure { .. } => "PeriodicityFailure",
            Error::MonitorViolation { .. } => "MonitorViolation",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
