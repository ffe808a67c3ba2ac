//! Modularity clustering with greedy coarsening, vertex-mover refinement and
//! a multi-level driver.

pub mod bench;
pub mod clustering;
pub mod coarsening;
pub mod error;
pub mod graph;
pub mod heap;
pub mod io;
pub mod modularity;
pub mod multilevel;
pub mod oracle;
pub mod refinement;
pub mod synthetic;

pub use clustering::{ClusterId, Clustering};
pub use coarsening::{Coarsener, CoarseningConfig, MergePrioritizer, MergeStep};
pub use error::{Error, Result};
pub use graph::{Graph, VertexId};
pub use io::{read_graph, Format, LoadedGraph, ReadOptions};
pub use modularity::{modularity, MoveTarget};
pub use multilevel::{build_hierarchy, multi_level_cluster, LevelHierarchy, MultilevelOutcome};
pub use refinement::{MoveProposal, Refiner};
