//! Core graph vocabulary shared by every other module: vertex handles,
//! labelled edges, stage colours, path signatures and the read-only
//! [`ColouredDigraph`] view implemented by trees, staged trees, working
//! graphs of the merge sweep and final CEGs.

pub mod ceg;
pub mod multi;
pub mod ops;
pub mod tree;

pub use ceg::Ceg;
pub use multi::ColouredGraph;
pub use ops::{
    depth, distance_partition, floret, longest_distance_partition, paths, Floret, FloretError,
};
pub use tree::{construct_tree, EventTree, TreeBuildError};

use std::fmt;
use std::sync::Arc;

/// Default absolute tolerance for comparing transition probabilities.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Graph-local vertex handle.
///
/// Identities are opaque and not stable across transformations; file formats
/// reference vertices by string keys that the serialisation layer maps onto
/// handles at load time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(u32);

impl VertexId {
    pub fn new(index: usize) -> Self {
        VertexId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// A directed labelled edge, optionally carrying a transition probability
/// and an observation count.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub source: VertexId,
    pub target: VertexId,
    pub label: String,
    /// Spelling before label-equivalence canonicalisation, when it differed.
    pub original_label: Option<String>,
    pub theta: Option<f64>,
    pub count: Option<u64>,
}

impl Edge {
    pub fn new(source: VertexId, target: VertexId, label: impl Into<String>) -> Self {
        Edge {
            source,
            target,
            label: label.into(),
            original_label: None,
            theta: None,
            count: None,
        }
    }
}

/// Vertex colour identifying stage membership.
///
/// Non-trivial stages share a numbered colour. Trivial (singleton) stages
/// each get a colour derived from their member's root path so that distinct
/// futures never collide in a path signature; DOT output renders all of them
/// as uncoloured. Leaves, the sink and unstaged vertices are `Plain`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Colour {
    Stage(u32),
    Singleton(Arc<[String]>),
    Plain,
}

impl Colour {
    pub fn singleton(path: &[String]) -> Self {
        Colour::Singleton(path.iter().cloned().collect())
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Colour::Stage(i) => write!(f, "stage{i}"),
            Colour::Singleton(path) => write!(f, "singleton[{}]", path.join("/")),
            Colour::Plain => write!(f, "plain"),
        }
    }
}

/// A root-to-leaf (or root-to-sink) path as the sequence of
/// (vertex colour, edge label) tuples read along its edges.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSignature {
    steps: Vec<(Colour, String)>,
}

impl PathSignature {
    pub fn new(steps: Vec<(Colour, String)>) -> Self {
        debug_assert!(!steps.is_empty(), "path signatures are non-empty");
        PathSignature { steps }
    }

    pub fn steps(&self) -> &[(Colour, String)] {
        &self.steps
    }

    /// Number of tuples on the path.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl fmt::Display for PathSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (colour, label) in &self.steps {
            write!(f, "({colour},{label})")?;
        }
        Ok(())
    }
}

/// Read access shared by all directed graph flavours in this crate.
///
/// Implementations guarantee: a single root from which every live vertex is
/// reachable, acyclicity, and pairwise-distinct labels on the out-edges of
/// each vertex. Terminal vertices (leaves, or the sink) have no out-edges.
pub trait ColouredDigraph {
    fn root(&self) -> VertexId;

    /// Live vertices in a deterministic order.
    fn vertex_ids(&self) -> Vec<VertexId>;

    fn out_edges(&self, v: VertexId) -> &[Edge];

    fn colour(&self, v: VertexId) -> &Colour;

    fn is_terminal(&self, v: VertexId) -> bool {
        self.out_edges(v).is_empty()
    }

    fn vertex_count(&self) -> usize {
        self.vertex_ids().len()
    }

    fn edge_count(&self) -> usize {
        self.vertex_ids()
            .into_iter()
            .map(|v| self.out_edges(v).len())
            .sum()
    }
}
