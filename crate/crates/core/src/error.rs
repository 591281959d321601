use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid rule table at index {index}: {reason}")]
    RuleTable { index: usize, reason: String },

    #[error("invalid rule: {0}")]
    Rule(String),

    /// The caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("loom capacity exceeded: {required} shafts required, capacity is {capacity}")]
    Capacity { required: usize, capacity: usize },

    #[error("image parse error at byte {offset}: {message}")]
    ImageParse { offset: usize, message: String },

    #[error("WIF error: {0}")]
    Wif(String),

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unsupported document format_version {found} (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },

    #[error("float repair did not converge within {0} passes")]
    RepairDiverged(usize),
}

/// Coarse classification used for exit codes and HTTP statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Capacity,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Capacity { .. } => ErrorKind::Capacity,
            _ => ErrorKind::Validation,
        }
    }

    /// Short machine-readable tag for JSON error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::RuleTable { .. } | Error::Rule(_) => "rule",
            Error::Contract(_) => "contract",
            Error::Validation(_) => "validation",
            Error::Unsupported(_) => "unsupported",
            Error::Capacity { .. } => "capacity",
            Error::ImageParse { .. } => "image_parse",
            Error::Wif(_) => "wif",
            Error::Schema { .. } => "schema",
            Error::UnsupportedVersion { .. } => "unsupported_version",
            Error::RepairDiverged(_) => "repair_diverged",
        }
    }
}
