use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the feature-extraction and learning pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent channel count at line {line}: expected {expected}, found {found}")]
    InconsistentChannelCount { line: usize, expected: usize, found: usize },
    #[error("operation needs at least {required} channels, recording has {found}")]
    TooFewChannels { required: usize, found: usize },
    #[error("frequency {freq} Hz is not below the Nyquist frequency {nyquist} Hz")]
    NyquistViolation { freq: f64, nyquist: f64 },
    #[error("invalid filter band {low}..{high} Hz")]
    InvalidBand { low: f64, high: f64 },
    #[error("event {index} (onset {onset}, duration {duration}) exceeds recording length {len}")]
    EventOutOfRange {
        index: usize,
        onset: usize,
        duration: usize,
        len: usize,
    },
    #[error("invalid event table: {0}")]
    InvalidEvents(String),
    #[error("epoch has no valid samples")]
    EmptyEpoch,
    #[error("window of {window} samples is shorter than the embedding span {span}")]
    WindowTooShort { window: usize, span: usize },
    #[error("homology dimension {0} is not supported (max 1)")]
    DimensionUnsupported(usize),
    #[error("brute-force persistence accepts at most {max} points, got {n}")]
    TooLargeForOracle { n: usize, max: usize },
    #[error("unknown amplitude metric `{0}`")]
    UnknownMetric(String),
    #[error("class {class} has {count} members, fewer than {folds} folds")]
    ClassTooSmall { class: usize, count: usize, folds: usize },
    #[error("feature {feature} has zero variance in every class and smoothing is 0")]
    DegenerateVariance { feature: usize },
    #[error("model is not tree based")]
    NotTreeBased,
    #[error("importance tables do not share the same feature ids")]
    MismatchedFeatureSets,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("assignment out of bounds for parameter `{0}`")]
    OutOfBounds(String),
    #[error("kernel matrix is singular even with jitter {jitter:e}")]
    SingularKernel { jitter: f64 },
    #[error("objective failed: {0}")]
    ObjectiveFailure(String),
    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration problems, 3 for bad or
    /// missing data, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::SpecInvalid(_) | Error::InvalidParam(_) | Error::UnknownMetric(_) => 2,
            Error::SingularKernel { .. }
            | Error::DegenerateVariance { .. }
            | Error::ObjectiveFailure(_)
            | Error::OutOfBounds(_)
            | Error::NotTreeBased
            | Error::DimensionUnsupported(_)
            | Error::TooLargeForOracle { .. } => 4,
            _ => 3,
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
