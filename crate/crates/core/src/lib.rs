//! Simulation and analysis of gradient-flow multi-agent systems whose pairwise
//! interactions repel strongly at short range and attract with fading strength
//! at long range.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod interaction;
pub mod numeric;
pub mod partition;

pub use error::{Error, Result};
pub use graph::{Graph, VertexPartition};
pub use interaction::{InteractionFunction, InteractionMap, LennardJones, TabulatedFunction};
