use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Each variant carries a stable machine-readable [`Error::code`] so the CLI
/// and the HTTP API can report failures uniformly.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid summary: {0}")]
    InvalidSummary(String),

    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    #[error("no skewness test applies to a {0} summary")]
    TestNotApplicable(String),

    #[error("alpha = {alpha} is not supported by the {source_name} source (only 0.05)")]
    UnsupportedAlpha { alpha: f64, source_name: String },

    #[error("n = {0} is outside the tabulated range [5, 401]")]
    OutOfTableRange(u64),

    #[error("no asymptotic null distribution is available for scenario S3")]
    AsymptoticUnavailable,

    #[error("Monte Carlo needs at least 1000 replications, got {0}")]
    InsufficientReplications(u64),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("no studies to pool")]
    NoStudies,

    #[error("i/o error: {0}")]
    Io(String),

    #[error("line {line}: {message}")]
    Ingest { line: u64, message: String },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::InvalidSummary(_) => "invalid_summary",
            Error::DegenerateRange(_) => "degenerate_range",
            Error::TestNotApplicable(_) => "test_not_applicable",
            Error::UnsupportedAlpha { .. } => "unsupported_alpha",
            Error::OutOfTableRange(_) => "out_of_table_range",
            Error::AsymptoticUnavailable => "asymptotic_unavailable",
            Error::InsufficientReplications(_) => "insufficient_replications",
            Error::NotApplicable(_) => "not_applicable",
            Error::NoStudies => "no_studies",
            Error::Io(_) => "io_error",
            Error::Ingest { .. } => "ingest_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
