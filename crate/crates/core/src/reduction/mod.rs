//! Reduction semantics over structural normal forms.

pub mod engine;
pub mod fusion;
pub mod graph;

pub use engine::{apply, enabled_redexes, successors, Redex, Rule};
pub use fusion::{join_instantiations, local_minimal, local_minimal_fusions, minimal_fusions, Fusion, LocalFusion};
pub use graph::{explore, explore_filtered, reaches, reaches_filtered, Bounds, Edge, EdgeFilter, Reach, StateGraph, Step};
