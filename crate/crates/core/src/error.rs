use alloc::string::String;
use core::fmt;

/// Errors produced by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Input has too few samples for the requested operation.
    SignalTooShort { needed: usize, got: usize },
    /// Non-finite sample or non-positive sampling rate at construction.
    InvalidSignal(String),
    /// Frequency band or rate argument out of range.
    InvalidBand(String),
    /// Operation needs more beats than the annotations provide.
    InsufficientBeats { needed: usize, got: usize },
    /// Bad hyperparameter or configuration value.
    InvalidParameter(String),
    /// Model and data shapes disagree.
    DimensionMismatch { expected: usize, got: usize },
    /// Labels do not form a usable two-class problem.
    DegenerateLabels(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SignalTooShort { needed, got } => {
                write!(f, "signal too short: need {} samples, got {}", needed, got)
            }
            Error::InvalidSignal(msg) => write!(f, "invalid signal: {}", msg),
            Error::InvalidBand(msg) => write!(f, "invalid band: {}", msg),
            Error::InsufficientBeats { needed, got } => {
                write!(f, "insufficient beats: need {}, got {}", needed, got)
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {}", msg),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {}, got {}", expected, got)
            }
            Error::DegenerateLabels(msg) => write!(f, "degenerate labels: {}", msg),
        }
    }
}

#[cfg(test)]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
