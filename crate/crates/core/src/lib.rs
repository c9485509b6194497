//! Graph and hypergraph containers for sets with small sumset in abelian groups,
//! with exhaustive enumeration oracles, bound evaluators and structural checks.

pub mod error;
pub mod group;
pub mod rational;
pub mod set;

pub use error::{Error, Result};
pub use group::{beta, enumerate_subgroups, Element, GroundSet, GroupSpec};
pub use rational::Rational;
pub use set::{IndexSet, Universe};
pub mod graph;
pub mod hypergraph;
pub mod bounds;
pub mod oracle;
pub mod pipeline;
pub mod structure;
pub mod lowerbound;
