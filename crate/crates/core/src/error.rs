use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },

    #[error("non-finite value in `{0}`")]
    NonFinite(&'static str),

    #[error("sample rate {rate} Hz too coarse: {reason}")]
    RateTooLow { rate: f64, reason: &'static str },

    #[error("cycle window [{start}, {end}) outside stream of {len} samples")]
    WindowOutOfBounds { start: i64, end: i64, len: usize },

    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },

    #[error("need at least {min} Allan points above tau_min, found {found}")]
    InsufficientPoints { found: usize, min: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("noise budget inconsistent: total {total:e} below component {component:e}")]
    InconsistentBudget { total: f64, component: f64 },
}

pub(crate) fn ensure_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}

pub(crate) fn ensure_positive(name: &'static str, v: f64) -> Result<()> {
    ensure_finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "must be > 0" })
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, v: f64) -> Result<()> {
    ensure_finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "must be >= 0" })
    }
}
