use std::fmt;

use thiserror::Error;

use crate::syntax::Pos;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {0}")]
    Parse(#[from] ParseError),

    #[error("constraint `{formula}` is outside the Horn fragment: {reason}")]
    NonHornConstraint { formula: String, reason: String },

    #[error("recursive call to `{constant}` is not guarded by a prefix")]
    UnguardedRecursion { constant: String },

    #[error("`{constant}` expects {expected} argument(s), found {found}")]
    ArityMismatch {
        constant: String,
        expected: usize,
        found: usize,
    },

    #[error("`{constant}` is defined more than once")]
    DuplicateDefinition { constant: String },

    #[error("redex does not match the state: {0}")]
    StaleRedex(String),

    #[error("state bound exceeded after {states} states")]
    BoundExceeded { states: usize },

    #[error("source of rule `{rule}` is not connected")]
    DisconnectedSource { rule: String },

    #[error("ill-formed rewrite rule `{rule}`: {reason}")]
    InvalidRule { rule: String, reason: String },

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error("ill-formed hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("unknown corpus entry `{0}`")]
    UnknownProgram(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
