use thiserror::Error;

/// Errors raised by parameter validation and the codec.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A probability or fraction fell outside its admissible interval.
    #[error("{name} must lie in {interval}, got {value}")]
    OutOfRange {
        name: &'static str,
        interval: &'static str,
        value: f64,
    },

    #[error("phase index {0} is not one of 1, 2, 3")]
    PhaseOutOfRange(u8),

    #[error("normalized time {0} is outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("inverse of zero in GF(2^8)")]
    InverseOfZero,

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("no source packets to encode")]
    EmptySources,

    #[error("decoder has rank {rank}, needs {dimension} to solve")]
    RankDeficient { rank: usize, dimension: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("region is unbounded")]
    UnboundedRegion,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Checks that `value` lies in the open interval (lo, hi).
pub(crate) fn check_open(
    name: &'static str,
    interval: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    if value > lo && value < hi {
        Ok(value)
    } else {
        Err(Error::OutOfRange {
            name,
            interval,
            value,
        })
    }
}
