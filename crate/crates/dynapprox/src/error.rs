use crate::types::{EdgeLabel, VertexId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("vertex {0} already exists")]
    DuplicateVertex(VertexId),
    #[error("vertex {0} does not exist")]
    MissingVertex(VertexId),
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge {0} does not exist")]
    UnknownEdge(EdgeLabel),
    #[error("edge {0}-{1} already exists")]
    DuplicateEdge(VertexId, VertexId),
    #[error("no edge between {0} and {1}")]
    MissingEdge(VertexId, VertexId),
    #[error("value {value} outside the domain of vertex {vertex}")]
    OutOfDomain { vertex: VertexId, value: u32 },
    #[error("malformed instance: {0}")]
    Malformed(String),
    #[error("decomposition width {width} exceeds cap {cap}")]
    WidthExceeded { width: usize, cap: usize },
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("stash is not ancestor-closed at vertex {0}")]
    PrefixViolation(VertexId),
    #[error("vertex {vertex} has no combination of states {x1} and {x2}")]
    NoCombination { vertex: VertexId, x1: usize, x2: usize },
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("parameter overflow: {0}")]
    ParameterOverflow(String),
    #[error("invalid epsilon: {0}")]
    InvalidEpsilon(String),
    #[error("degree cap {cap} exceeded at vertex {vertex}")]
    DegreeCap { vertex: VertexId, cap: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
