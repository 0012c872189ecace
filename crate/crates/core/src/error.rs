use std::fmt;

/// Parse failure with a location inside the input (a JSON path or a line number).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub location: String,
    pub message: String,
}

impl ParseError {
    pub fn new(location: impl Into<String>, message: impl Into<String>) -> Self {
        ParseError {
            location: location.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (at {})", self.message, self.location)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid rational `{0}`")]
    InvalidRational(String),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("valuation mismatch: {0}")]
    ValuationMismatch(String),
    #[error("no variable registered for sequence {0}")]
    MissingVariable(String),
    #[error("table error: {0}")]
    Table(String),
    #[error("pop on an empty assertion stack")]
    EmptyScope,
    #[error("teacher error: {0}")]
    Teacher(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("search limit reached: {0}")]
    LimitReached(String),
    #[error("value out of machine range in {0}")]
    Overflow(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
