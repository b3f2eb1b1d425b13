//! Random subgraphs of graphs: colouring numbers, t-cores, expander blow-ups
//! and the bootstrap-percolation processes that drive their cores to empty.

pub mod bounds;
pub mod colouring;
pub mod error;
pub mod generators;
pub mod graph;
pub mod harness;
pub mod percolation;
pub mod sampling;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{ArcColour, DiGraph, Graph, VertexSet};
