use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("empty word: a *-word must contain at least one letter")]
    EmptyWord,

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("{what} limit exceeded: {value} > {limit}")]
    LimitExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("insufficient moment data: {0}")]
    InsufficientData(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unknown variable x{0}")]
    UnknownVariable(u32),

    #[error("unknown generator {0}")]
    UnknownGenerator(String),

    #[error("missing marginal for x{0}")]
    MissingMarginal(u32),

    #[error("not directly evaluable: {0}")]
    NotEvaluable(String),

    #[error("factor {factor} not evaluable on {word}: {reason}")]
    FactorNotEvaluable {
        factor: usize,
        word: String,
        reason: String,
    },

    #[error("factor family {factor} is not *-free (witness {witness})")]
    FactorNotFree { factor: usize, witness: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl Error {
    pub fn limit(what: &'static str, value: usize, limit: usize) -> Self {
        Error::LimitExceeded { what, value, limit }
    }
}
