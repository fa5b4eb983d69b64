use thiserror::Error;

use crate::rational::Rational;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("malformed interval [{start}, {end}): start exceeds end")]
    MalformedInterval { start: Box<Rational>, end: Box<Rational> },

    #[error("infeasible selection: requested {requested}, available {available}")]
    InfeasibleSelection {
        requested: Box<Rational>,
        available: Box<Rational>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("arity mismatch: expected {expected}, found {found}")]
    Arity { expected: usize, found: usize },

    #[error("ground sets overlap: {0}")]
    Disjointness(String),

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InternalInvariant(msg.into())
    }
}
