use std::fmt;

use serde::{Deserialize, Serialize};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The die does not fit on the wafer, or a similar layout failure.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// A denominator (functional dies, candidate total) is zero.
    #[error("singular denominator: {0}")]
    Singular(String),
    /// A scenario entry was used before `validate_scenario` resolved it.
    #[error("unresolved field `{0}`; run validation first")]
    Unresolved(String),
}

/// One invariant violation found while validating a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub value: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, value: impl fmt::Display, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            value: value.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}: {}", self.path, self.value, self.message)
    }
}
