use thiserror::Error;

use crate::graph::EdgeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("edge #{index} is a self-loop on vertex {vertex}")]
    SelfLoop { index: usize, vertex: u32 },
    #[error("edge #{index} references vertex {vertex}, but the graph has {n} vertices")]
    VertexOutOfRange { index: usize, vertex: u32, n: usize },
    #[error("edge {0} is not alive")]
    DeadEdge(EdgeId),
    #[error("edge {0} is unknown to this structure")]
    UnknownEdge(EdgeId),
    #[error("edge {0} is already present")]
    DuplicateEdge(EdgeId),
    #[error("edge {0} joins two different components")]
    MergingInsert(EdgeId),
    #[error("component id {0} does not exist")]
    StaleComponent(u32),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported connectivity order c={0}")]
    UnsupportedOrder(u32),
    #[error("internal corruption: {0}")]
    Corruption(String),
    #[error("retry budget of {0} attempts exhausted")]
    RetriesExhausted(u32),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}
