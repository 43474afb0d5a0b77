use thiserror::Error;

/// Errors produced by graph ingestion, restructuring, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("node id {id} out of range for declared node count {num_nodes}")]
    Range { id: usize, num_nodes: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("cannot normalize: node {node} has degree zero and self-loops are disabled")]
    Normalization { node: usize },

    #[error("metric undefined: {0}")]
    Metric(String),

    #[error("invalid partition plan: {0}")]
    Plan(String),

    #[error("chunk {chunk} buffer too small: needs {needed} bytes, has {available}")]
    Capacity {
        chunk: usize,
        needed: usize,
        available: usize,
    },

    #[error("unexpected sparse format: {0}")]
    Format(String),

    #[error("bad hardware config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
