//! Error type shared by the core domain operations.

use thiserror::Error;

use crate::types::{EventId, VarId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("event {event} references variable {var}, which the instance does not define")]
    MissingVariable { event: EventId, var: VarId },

    #[error("invalid instance: {0}")]
    Invalid(String),
}

impl CoreError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CoreError::Invalid(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        CoreError::Parse {
            line,
            msg: msg.into(),
        }
    }
}
