use thiserror::Error;

/// Errors surfaced by graph operations, the dynamic index, and the reduction lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertices are in different connected components")]
    Disconnected,
    #[error("source and target are the same vertex")]
    SameVertex,
    #[error("no edge ({0}, {1}) in the graph")]
    NoSuchEdge(usize, usize),
    #[error("edge weight {0} is not positive")]
    NonPositiveWeight(f64),
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("block to eliminate is numerically singular")]
    SingularBlock,
    #[error("rational matrix is singular")]
    Singular,
    #[error("vertex sequence is not a walk: {0}")]
    NotAWalk(String),
    #[error("walk is not terminal-free: {0}")]
    NotTerminalFree(String),
    #[error("graphs share non-terminal vertex {0}")]
    SharedNonTerminal(usize),
    #[error("walk enumeration budget exceeded ({0} walks)")]
    Budget(u64),
    #[error("no balanced separator within budget: {0}")]
    NoBalancedSeparator(String),
    #[error("terminal budget exhausted ({0} terminals allowed)")]
    TooManyTerminals(usize),
    #[error("prescribed gadget weight is not positive")]
    WeightUnderflow,
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
