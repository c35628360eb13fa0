use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("non-finite value {value} at position {index} of sample set '{label}'")]
    NonFiniteSample {
        label: String,
        index: usize,
        value: f64,
    },

    #[error("degenerate variance: {0}")]
    DegenerateVariance(&'static str),

    #[error("negative-control mean is zero; signal-to-background ratio undefined")]
    DivisionByZeroMean,

    #[error("control means are equal; Z'-factor undefined")]
    DegenerateMeanDifference,

    #[error("signal has zero power; SNR-scaled noise undefined")]
    ZeroPowerSignal,

    #[error("subsample size {size} invalid for groups of {available} samples")]
    InvalidSubsampleSize { size: usize, available: usize },

    #[error("control means are exactly equal; no effect direction")]
    ZeroSign,

    #[error("logistic fit needs both classes; got only {0}")]
    SingleClassInput(&'static str),

    #[error("plate '{plate}' has {pos} positive and {neg} negative control wells; at least {required} of each required")]
    InsufficientControls {
        plate: String,
        pos: usize,
        neg: usize,
        required: usize,
    },

    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("line {line}: unknown well role '{role}' (expected pos, neg, sample or empty)")]
    UnknownRole { line: u64, role: String },

    #[error("line {line}: duplicate well ({row}, {col}) on plate '{plate}'")]
    DuplicateWell {
        line: u64,
        plate: String,
        row: u32,
        col: u32,
    },

    #[error("line {line}: non-finite value '{value}'")]
    NonFiniteValue { line: u64, value: String },

    #[error("missing or unexpected header: expected `{expected}`, found `{found}`")]
    MissingHeader { expected: String, found: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than a
    /// numerical breakdown on otherwise valid input.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::EmptySampleSet
                | Error::NonFiniteSample { .. }
                | Error::InvalidSubsampleSize { .. }
                | Error::InsufficientControls { .. }
                | Error::MalformedRow { .. }
                | Error::UnknownRole { .. }
                | Error::DuplicateWell { .. }
                | Error::NonFiniteValue { .. }
                | Error::MissingHeader { .. }
                | Error::InvalidParameter(_)
                | Error::UnknownScenario(_)
                | Error::Io(_)
                | Error::SingleClassInput(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
