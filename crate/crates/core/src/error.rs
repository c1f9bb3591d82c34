use thiserror::Error;

use crate::model::NodeId;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("unknown map name: {0}")]
    UnknownMap(String),
}

impl ModelError {
    pub fn validation(msg: impl Into<String>) -> Self {
        ModelError::Validation(msg.into())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("mission node {0} is unreachable on the street graph")]
    Disconnected(NodeId),
    #[error("no feasible all-truck route: {0}")]
    NoFallback(String),
    #[error("route violates {0}")]
    ConstraintViolation(String),
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
}
