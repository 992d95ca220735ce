use std::io;

use thiserror::Error;

use crate::graph::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range (graph has {n} nodes)")]
    InvalidNode { node: u64, n: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("graph is empty")]
    EmptyGraph,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node budget exceeded: {requested} nodes requested, budget is {budget}")]
    BudgetExceeded { requested: u128, budget: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fewer than 2 highway nodes after {epochs} membership epochs")]
    TooFewHighwayNodes { epochs: u32 },

    #[error("node {0} is not a highway node")]
    NotHighway(NodeId),

    #[error("radius {requested} exceeds graph radius {radius}")]
    RadiusTooLarge { requested: u32, radius: u32 },

    #[error("exact mode limited to {cap} nodes, graph has {n}")]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("no eligible samples: {0}")]
    NoEligibleSamples(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
