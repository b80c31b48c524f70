use std::fmt;

use crate::instance::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid instance: {0}")]
    Invalid(Violations),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("setting mismatch: {0}")]
    Setting(String),

    /// An enumeration (worlds, tuples, candidate solutions) would exceed its ceiling.
    #[error("{what}: {size} exceeds limit {limit}")]
    Limit {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error("hypergraph line {line}: {message}")]
    Hypergraph { line: usize, message: String },
}

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors caused by a resource ceiling rather than bad input.
    pub fn is_limit(&self) -> bool {
        matches!(self, Error::Limit { .. })
    }
}

/// Non-empty list of instance invariant violations.
#[derive(Debug, Clone, PartialEq)]
pub struct Violations(pub Vec<Violation>);

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
