//! Recognition, tree decomposition and minimum P4-sparse completion for
//! P4-sparse graphs.
//!
//! A graph is P4-sparse when every five vertices induce at most one P4.
//! [`completion::min_edge_addition`] answers the question: given a
//! P4-sparse graph and a non-edge `uv`, which smallest set of non-edges,
//! containing `uv`, can be added so that the graph stays P4-sparse?

pub mod completion;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod tree;

pub use completion::{min_edge_addition, CompletionResult};
pub use error::{Error, Result, Witness};
pub use graph::{Edge, Graph, VertexId};
pub use tree::{build_tree, realize_graph, PSTree};
