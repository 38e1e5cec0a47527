use thiserror::Error;

use crate::semiring::Semiring;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain mismatch: {left} vs {right}")]
    DomainMismatch { left: Semiring, right: Semiring },

    #[error("unsupported semiring `{name}`: {reason}")]
    UnsupportedSemiring { name: String, reason: String },

    #[error("cannot embed {0} weights into the rationals")]
    UnsupportedEmbedding(Semiring),

    #[error("`{text}` is not a valid {semiring} weight")]
    InvalidWeight { text: String, semiring: Semiring },

    #[error("no image for key `{0}`")]
    MissingKey(String),

    #[error("letter `{0}` is not in the alphabet")]
    UnknownLetter(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("undeclared state `{0}`")]
    UndeclaredState(String),

    #[error("duplicate state `{0}`")]
    DuplicateState(String),

    #[error("operation requires {required}, got {actual}")]
    Capability { required: String, actual: Semiring },

    #[error("expression is not closed: free variable `{0}`")]
    OpenExpression(String),

    #[error("body of `mu {0}` is not guarded in `{0}`")]
    Unguarded(String),

    #[error("unbound variable `{0}`")]
    UnboundVariable(String),

    #[error("derivative closure exceeded {bound} states; frontier: {frontier}")]
    StateBound { bound: usize, frontier: String },

    #[error("expression has {nodes} nodes when written out, over the limit of {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("construction invariant violated: {0}")]
    Construction(String),

    #[error("step {step}: {message}")]
    Proof { step: String, message: String },

    #[error("not a bisimulation: pair ({left}, {right}) {reason}")]
    NotBisimulation {
        left: String,
        right: String,
        reason: String,
    },
}

impl Error {
    pub fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}
