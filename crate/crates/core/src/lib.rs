//! Random intersection graphs: sampling, sparsity measures, tree-likeness
//! and low-treewidth colourings.

pub mod cli;
pub mod coloring;
pub mod error;
pub mod flow;
pub mod experiments;
pub mod graph_core;
pub mod hyperbolicity;
pub mod io;
pub mod model;
pub mod parallel;
pub mod sparsity;

pub use error::{Result, RigError};
pub use model::{project, sample_bipartite, BipartiteGraph, IntersectionGraph, ModelParams};
