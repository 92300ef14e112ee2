//! Multipartite regularity partitions, the transversal Turán bound, and
//! bounded-degree embedding into regular cluster tuples.

pub mod embedding;
pub mod error;
pub mod graph;
pub mod harness;
pub mod partition;
pub mod ratio;
pub mod regularity;
pub mod turan;

pub use error::{Error, Result};
pub use graph::{DenseGraph, PartiteHost, VertexSet};
pub use partition::{absorb_exceptional, initial_partition, iterate_to_regular, Partition};
pub use ratio::{Density, Index};
pub use regularity::{RegularityParams, Verdict};
