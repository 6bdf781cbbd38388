use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("m = {m} is not a member of the multiplet with r = {r}")]
    OutsideMultiplet { m: f64, r: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invariant violated at t = {t}: {what}")]
    InvariantBreach { t: f64, what: String },

    #[error("quantum jump produced a zero-norm state at t = {t}")]
    ZeroNormJump { t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
