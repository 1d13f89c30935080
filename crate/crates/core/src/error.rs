//! Error classification shared across the library.
//!
//! `InvalidInput` covers bad user data (singular curves, constant maps,
//! malformed expressions); `Internal` covers breached internal invariants
//! such as a Riemann-Hurwitz mismatch or disagreeing degree routes, which
//! must abort loudly rather than be silently absorbed.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    InvalidInput(String),
    Internal(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
    pub fn internal(msg: impl Into<String>) -> Self {
        Error::Internal(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {}", m),
            Error::Internal(m) => write!(f, "internal consistency failure: {}", m),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
