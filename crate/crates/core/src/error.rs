use std::fmt;

use crate::graph::VertexId;

/// Proof that a graph is not P4-sparse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// Five vertices inducing at least two P4s.
    Five([VertexId; 5]),
    /// A connected, co-connected induced subgraph that is not a spider.
    Irreducible(Vec<VertexId>),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: &[VertexId] = match self {
            Witness::Five(vs) => vs,
            Witness::Irreducible(vs) => vs,
        };
        let tag = match self {
            Witness::Five(_) => "five",
            Witness::Irreducible(_) => "irreducible",
        };
        write!(f, "{tag}")?;
        for v in vs {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph on {n} vertices")]
    VertexOutOfRange { vertex: VertexId, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph is not P4-sparse ({0})")]
    NotP4Sparse(Witness),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("{u} and {v} are already adjacent")]
    AlreadyAdjacent { u: VertexId, v: VertexId },
    #[error("endpoints must be distinct (got {0} twice)")]
    SameVertex(VertexId),
    #[error("role mismatch: {0}")]
    RoleMismatch(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("graph on {n} vertices exceeds the cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("internal error: completion is not P4-sparse ({0})")]
    InvalidCompletion(String),
    #[error("oracle budget exceeded: no completion with at most {max_extra} extra edges")]
    BudgetExceeded { max_extra: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
