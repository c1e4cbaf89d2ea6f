use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid category: {0}")]
    InvalidCategory(String),

    #[error("marking is not closed under composition: {g} . {f} = {composite} is unmarked")]
    MarkingNotClosed {
        g: String,
        f: String,
        composite: String,
    },

    #[error("identity {0} is not marked")]
    UnmarkedIdentity(String),

    #[error("invalid functor: {0}")]
    InvalidFunctor(String),

    #[error("non-functorial diagram: {0}")]
    NonFunctorial(String),

    #[error("budget of {budget} exceeded while {context}")]
    BudgetExceeded { budget: usize, context: String },

    #[error("truncation bounds differ: {0} vs {1}")]
    BoundMismatch(usize, usize),

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("missing simplex: {0}")]
    MissingSimplex(String),

    #[error("rewriting is not confluent within bounds: unresolved critical pair {left} <> {right} (from overlap {overlap})")]
    NonConfluent {
        overlap: String,
        left: String,
        right: String,
    },

    #[error("presented category has irreducible words of length {0}; it is infinite or exceeds max-word-length")]
    Unbounded(usize),

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Stable machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidCategory(_) => "invalid-category",
            Error::MarkingNotClosed { .. } => "marking-not-closed",
            Error::UnmarkedIdentity(_) => "unmarked-identity",
            Error::InvalidFunctor(_) => "invalid-functor",
            Error::NonFunctorial(_) => "non-functorial",
            Error::BudgetExceeded { .. } => "budget-exceeded",
            Error::BoundMismatch(..) => "bound-mismatch",
            Error::BoundViolation(_) => "bound-violation",
            Error::MissingSimplex(_) => "missing-simplex",
            Error::NonConfluent { .. } => "non-confluent",
            Error::Unbounded(_) => "unbounded",
            Error::Parse { .. } => "parse",
            Error::Unknown { .. } => "unknown-name",
            Error::Io { .. } => "io",
            Error::Context { source, .. } => source.kind(),
        }
    }
}
