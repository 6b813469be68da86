use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("corrupt audio file: {0}")]
    CorruptFile(String),

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid audio buffer: {0}")]
    InvalidBuffer(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("partials reach {highest_hz} Hz, at or above Nyquist ({nyquist_hz} Hz)")]
    NyquistViolation { highest_hz: f64, nyquist_hz: f64 },

    #[error("buffer has {len} samples, at least {needed} required")]
    BufferTooShort { len: usize, needed: usize },

    #[error("spectrum frame is already ISO 226 weighted")]
    AlreadyWeighted,

    #[error("loudness level {0} phon outside [20, 80]")]
    PhonOutOfRange(f64),

    #[error("frequency must be positive, got {0}")]
    NonpositiveFrequency(f64),

    #[error("need at least 2 peaks, got {0}")]
    TooFewPeaks(usize),

    #[error("frame has {len} samples, at least {needed} required")]
    FrameTooShort { len: usize, needed: usize },

    #[error("frequency band [{lo_hz}, {hi_hz}] Hz contains no bins")]
    EmptyBand { lo_hz: f64, hi_hz: f64 },

    #[error("value {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("spectral flatness must be positive, got {0}")]
    NonpositiveFlatness(f64),

    #[error("point cloud is degenerate (collinear or identical points)")]
    DegenerateCloud,

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("polynomial of degree {degree} is under-determined by {points} points")]
    UnderDetermined { degree: usize, points: usize },

    #[error("beat grid invalid: {0}")]
    GridOutOfRange(String),

    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool.
    ///
    /// 2 invalid arguments, 3 input format error, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnsupportedFormat(_)
            | Error::CorruptFile(_)
            | Error::Io { .. }
            | Error::Format(_)
            | Error::GridOutOfRange(_) => 3,
            Error::InvalidSpec(_)
            | Error::NyquistViolation { .. }
            | Error::PhonOutOfRange(_)
            | Error::NonpositiveFrequency(_)
            | Error::OutOfRange { .. }
            | Error::InvalidBuffer(_) => 2,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
