use thiserror::Error;

use crate::graph::{PlayerId, VertexId};

#[derive(Debug, Error)]
pub enum KegError {
    #[error("unknown player {0}")]
    UnknownPlayer(String),

    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("edge ({0}, {1}) is not in the graph")]
    UnknownEdge(usize, usize),

    #[error("not a matching: vertex {0} is covered twice")]
    NotAMatching(VertexId),

    #[error("strategy of player {player} uses edge {edge} that is not one of its internal edges")]
    InvalidStrategy { player: PlayerId, edge: usize },

    #[error("vertex {0} is already matched")]
    AlreadyMatched(VertexId),

    #[error("path is not alternating with respect to the matching")]
    NotAlternating,

    #[error("seed matching is not maximum")]
    NotMaximum,

    #[error("{0}")]
    PolicyMismatch(String),

    #[error("lexicographic priority needs at least two players")]
    TooFewPlayers,

    #[error("view has {vertices} vertices, more than the bitmask cap of {cap}")]
    VertexCap { vertices: usize, cap: usize },

    #[error("view has {edges} edges, more than the enumeration guard of {guard}")]
    EdgeGuard { edges: usize, guard: usize },

    #[error("weights do not fit in 128-bit integers after scaling")]
    WeightOverflow,

    #[error("bad number {0:?}")]
    BadNumber(String),

    #[error("generator config: {0}")]
    Config(String),

    #[error("age sample is empty or has no positive age")]
    EmptyAgeSample,

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, KegError>;
