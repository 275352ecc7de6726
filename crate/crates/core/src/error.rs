use thiserror::Error;

use crate::short_time::SeriesKind;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("signal has no samples")]
    EmptySignal,
    #[error("sample {0} is not finite")]
    NonFinite(usize),
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("window of {window} samples is longer than the {signal}-sample signal")]
    WindowTooLong { window: usize, signal: usize },
    #[error("input of {len} samples is too short, at least {needed} required")]
    TooShort { len: usize, needed: usize },
    #[error("signal has zero power")]
    ZeroPower,
    #[error("expected a {expected:?} series, got {actual:?}")]
    WrongKind {
        expected: SeriesKind,
        actual: SeriesKind,
    },
    #[error("slice [{start}, {start}+{span}) does not fit a series of length {len}")]
    SliceOutOfRange { start: usize, span: usize, len: usize },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("{0} is undefined for these counts")]
    UndefinedMetric(&'static str),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
