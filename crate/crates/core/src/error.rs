use thiserror::Error;

use crate::graph::NodeId;

/// Errors raised by graph construction, distance evaluation and the exact oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum UstError {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("edge {edge} references node {node} but the graph has {node_count} nodes")]
    NodeOutOfRange {
        edge: usize,
        node: NodeId,
        node_count: usize,
    },
    #[error("edge {edge} has non-positive length {length}")]
    NonPositiveWeight { edge: usize, length: f64 },
    #[error("edge {edge} is a self-loop on node {node}")]
    SelfLoop { edge: usize, node: NodeId },
    #[error("edge {edge} duplicates edge {first} between nodes {u} and {v}")]
    DuplicateEdge {
        edge: usize,
        first: usize,
        u: NodeId,
        v: NodeId,
    },
    #[error("graph is disconnected: node {unreachable} is not reachable from node 0")]
    DisconnectedGraph { unreachable: NodeId },
    #[error("root {root} is out of range for a graph with {node_count} nodes")]
    RootOutOfRange { root: NodeId, node_count: usize },
    #[error("shortest paths from root {root} are not unique at nodes {tied:?}")]
    NonUniqueShortestPath { root: NodeId, tied: Vec<NodeId> },
    #[error("negative mass {mass} at node {node}")]
    NegativeMass { node: NodeId, mass: f64 },
    #[error("negative scale factor {0}")]
    NegativeScale(f64),
    #[error("measure is supported on node {node} outside a graph with {node_count} nodes")]
    SupportOffGraph { node: NodeId, node_count: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no node admits unique shortest paths")]
    NoValidRoot,
    #[error("weight slope {slope} must lie in [0, b = {b}]")]
    InvalidWeightSlope { slope: f64, b: f64 },
    #[error("transport instance is unbalanced: supply {supply} vs demand {demand}")]
    Unbalanced { supply: f64, demand: f64 },
    #[error("measures have different total masses {0} and {1}")]
    UnbalancedMasses(f64, f64),
    #[error("cost matrix is {rows}x{cols} but instance has {supplies} supplies and {demands} demands")]
    CostShape {
        rows: usize,
        cols: usize,
        supplies: usize,
        demands: usize,
    },
    #[error("transport solver exceeded {0} augmentations")]
    DegenerateCycling(usize),
    #[error("distance matrix is not symmetric at ({0}, {1})")]
    NonSymmetricInput(usize, usize),
    #[error("bandwidth multiplier t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("point {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {0} has a non-finite coordinate")]
    NonFiniteCoordinate(usize),
    #[error("at least two centroids are required to build a graph")]
    SingleNode,
    #[error("centroids {0} and {1} coincide")]
    DegenerateCentroids(usize, usize),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl UstError {
    /// True for failures caused by the mathematical setting (ties, infeasible parameters)
    /// rather than malformed input.
    pub fn is_math_domain(&self) -> bool {
        matches!(
            self,
            UstError::NonUniqueShortestPath { .. }
                | UstError::NoValidRoot
                | UstError::InvalidParams(_)
                | UstError::InvalidWeightSlope { .. }
                | UstError::UnbalancedMasses(..)
                | UstError::Unbalanced { .. }
                | UstError::NonPositiveT(_)
                | UstError::DegenerateCentroids(..)
        )
    }

    /// Stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            UstError::EmptyGraph => "EmptyGraph",
            UstError::NodeOutOfRange { .. } => "NodeOutOfRange",
            UstError::NonPositiveWeight { .. } => "NonPositiveWeight",
            UstError::SelfLoop { .. } => "SelfLoop",
            UstError::DuplicateEdge { .. } => "DuplicateEdge",
            UstError::DisconnectedGraph { .. } => "DisconnectedGraph",
            UstError::RootOutOfRange { .. } => "RootOutOfRange",
            UstError::NonUniqueShortestPath { .. } => "NonUniqueShortestPath",
            UstError::NegativeMass { .. } => "NegativeMass",
            UstError::NegativeScale(_) => "NegativeScale",
            UstError::SupportOffGraph { .. } => "SupportOffGraph",
            UstError::InvalidParams(_) => "InvalidParams",
            UstError::NoValidRoot => "NoValidRoot",
            UstError::InvalidWeightSlope { .. } => "InvalidWeightSlope",
            UstError::Unbalanced { .. } => "Unbalanced",
            UstError::UnbalancedMasses(..) => "UnbalancedMasses",
            UstError::CostShape { .. } => "CostShape",
            UstError::DegenerateCycling(_) => "DegenerateCycling",
            UstError::NonSymmetricInput(..) => "NonSymmetricInput",
            UstError::NonPositiveT(_) => "NonPositiveT",
            UstError::EmptyCloud => "EmptyCloud",
            UstError::DimensionMismatch { .. } => "DimensionMismatch",
            UstError::NonFiniteCoordinate(_) => "NonFiniteCoordinate",
            UstError::SingleNode => "SingleNode",
            UstError::DegenerateCentroids(..) => "DegenerateCentroids",
            UstError::Parse { .. } => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, UstError>;
