use pop_core::PopError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("malformed graph: {0}")]
    Graph(String),
    #[error(transparent)]
    Xml(#[from] roxmltree::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("invalid commodity {id}: {reason}")]
    Commodity { id: u64, reason: String },
    #[error("traffic sub-problems need a capacity split, got {0}")]
    Strategy(String),
    #[error("solver returned {0}")]
    Solver(String),
    #[error(transparent)]
    Pop(#[from] PopError),
}
