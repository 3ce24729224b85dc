use thiserror::Error;

/// Errors raised by fallible operations. Validation problems are not errors;
/// see [`crate::validate::ValidationReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("example {0} has no valid explanation")]
    NotExplained(String),

    #[error("overlapping spans in {host}: [{first_start}, {first_end}) and [{second_start}, {second_end})")]
    OverlappingSpans {
        host: &'static str,
        first_start: usize,
        first_end: usize,
        second_start: usize,
        second_end: usize,
    },

    #[error("invalid example: {0}")]
    InvalidExample(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid UTF-8 on line {line}")]
    Encoding { line: usize },

    #[error("prediction for unknown example id {0}")]
    UnknownId(String),

    #[error("duplicate example id {0}")]
    DuplicateId(String),

    #[error("id sets differ: {0}")]
    IdMismatch(String),

    #[error("answer span of example {0} is not inside a single sentence")]
    NoSentence(String),

    #[error("duplicate judgment by rater {rater} on instance {instance}")]
    DuplicateJudgment { rater: String, instance: String },

    #[error("instance {0} has inconsistent gold correctness")]
    InconsistentGold(String),

    #[error("invalid judgment record: {0}")]
    InvalidJudgment(String),

    #[error("judgment log is empty")]
    EmptyLog,

    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Stable upper-case code for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotExplained(_) => "NOT_EXPLAINED",
            Error::OverlappingSpans { .. } => "OVERLAPPING_SPANS",
            Error::InvalidExample(_) => "INVALID_EXAMPLE",
            Error::Io(_) => "IO_ERROR",
            Error::Encoding { .. } => "ENCODING_ERROR",
            Error::UnknownId(_) => "UNKNOWN_ID",
            Error::DuplicateId(_) => "DUPLICATE_ID",
            Error::IdMismatch(_) => "ID_MISMATCH",
            Error::NoSentence(_) => "NO_SENTENCE",
            Error::DuplicateJudgment { .. } => "DUPLICATE_JUDGMENT",
            Error::InconsistentGold(_) => "INCONSISTENT_GOLD",
            Error::InvalidJudgment(_) => "INVALID_JUDGMENT",
            Error::EmptyLog => "EMPTY_LOG",
            Error::Usage(_) => "USAGE",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
