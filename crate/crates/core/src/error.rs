use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: u32 },

    #[error("line {line}: vertex {vertex} declares degree {declared} but has {actual}")]
    DegreeMismatch {
        line: usize,
        vertex: u32,
        declared: usize,
        actual: usize,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("query graph is empty")]
    EmptyQuery,

    #[error("query graph is not connected")]
    DisconnectedQuery,

    #[error("query has {vertices} vertices, at most {max} are supported")]
    QueryTooLarge { vertices: usize, max: usize },

    #[error("invalid matching order: {0}")]
    InvalidOrder(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
