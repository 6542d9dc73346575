//! Dynamic approximation schemes for weighted independent set and dominating
//! set on graph classes with bounded local treewidth.

pub mod baker;
pub mod compress;
pub mod csp;
pub mod decomp;
pub mod dp;
pub mod error;
pub mod gendom;
pub mod graph;
pub mod hierarchy;
pub mod relation;
pub mod oracle;
pub mod types;

pub use error::{Error, Result};
pub use types::{Cost, EdgeLabel, MixedRadix, VertexId, VertexKey, Weight};
