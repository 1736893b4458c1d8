pub mod arena;
pub mod bitset;
pub mod cubing;
pub mod cuts;
pub mod error;
pub mod graph;
pub mod group;
pub mod pocset;
pub mod relative;
pub mod tree;

pub use bitset::VertexSet;
pub use error::{Error, Result};
pub use graph::{Cut, Graph};
