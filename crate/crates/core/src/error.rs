use thiserror::Error;

use crate::sepsys::{OrientedSepId, ValidationReport};
use crate::tree::{NodeId, Violation};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid separation system: {0}")]
    InvalidSystem(ValidationReport),
    #[error("partial orientation is inconsistent")]
    InconsistentInput,
    #[error("set was drawn from a different separation system (capacity {found}, expected {expected})")]
    GroundMismatch { expected: usize, found: usize },
    #[error("ground lacks required structure: {0}")]
    MissingCapability(&'static str),
    #[error("node {0} is a leaf and has no separation")]
    LeafHasNoSep(NodeId),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("not a structure tree: {0}")]
    NotAStructureTree(Violation),
    #[error("tree is not ordered: {0}")]
    NotOrdered(Violation),
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
    #[error("node {child} is not a child of node {parent}")]
    NotParentChild { parent: NodeId, child: NodeId },
    #[error("node cap of {0} nodes exceeded")]
    NodeCapExceeded(usize),
    #[error("family is not standard: leaf {node} carries co-trivial separation {element:?}")]
    NonStandardFamily { node: NodeId, element: OrientedSepId },
    #[error("leaf {0} is neither a tangle leaf nor forbidden")]
    UnresolvedLeaf(NodeId),
    #[error("sides are not closed under complement: {0}")]
    NotComplementClosed(String),
    #[error("orientation is not a tangle: {0}")]
    NotATangle(String),
    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
