use thiserror::Error;

use crate::dynamics::Trajectory;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty vertex set")]
    EmptyVertexSet,

    #[error("vertex {vertex} out of range for graph with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partitions are over different vertex sets")]
    MismatchedVertexSets,

    #[error("graph not connected")]
    Disconnected,

    #[error("nonpositive distance {0}")]
    NonpositiveDistance(f64),

    #[error("distance {distance} outside tabulated range [{lo}, {hi}]")]
    OutsideTabulatedRange { distance: f64, lo: f64, hi: f64 },

    #[error("invalid interaction parameters: {0}")]
    InvalidInteraction(String),

    #[error("not an attraction/repulsion function: {0}")]
    NotAttractionRepulsion(String),

    #[error("level set not confined: eta = {eta} must exceed {threshold}")]
    LevelSetNotConfined { eta: f64, threshold: f64 },

    #[error("potential below global lower bound: {psi} < {bound}")]
    PotentialBelowLowerBound { psi: f64, bound: f64 },

    #[error("configuration outside P_G: neighbors {0} and {1} coincide")]
    OutsideConfigurationSpace(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid block index {0}")]
    InvalidBlock(usize),

    #[error("no adjacent pairs")]
    NoAdjacentPairs,

    #[error("instance too large for enumeration: {0} vertices (max {1})")]
    TooLargeForEnumeration(usize, usize),

    #[error("index {k} out of range 1..={max}")]
    IndexOutOfRange { k: usize, max: usize },

    #[error("trivial partition: a nontrivial partition is required")]
    TrivialPartition,

    #[error("invalid integrator parameters: {0}")]
    InvalidParams(String),

    #[error("stiffness failure at t = {t}: step size {step} underflowed")]
    StiffnessFailure {
        t: f64,
        step: f64,
        partial: Box<Trajectory>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
