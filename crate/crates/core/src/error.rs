use thiserror::Error;

use crate::graph::{ArcId, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("graph is not series-parallel")]
    NotSeriesParallel,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn unknown_arc(a: ArcId) -> Self {
        Error::InvalidPath(format!("unknown arc {a}"))
    }

    pub(crate) fn not_incident(a: ArcId, b: ArcId) -> Self {
        Error::InvalidPath(format!("arcs {a} and {b} are not consecutive"))
    }

    pub(crate) fn unknown_node(v: NodeId) -> Self {
        Error::InvalidGraph(format!("unknown node {v}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
