//! Event trees: finite rooted trees whose edges carry the labels of
//! unfoldable events, with optional transition probabilities and counts.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Colour, ColouredDigraph, Edge, VertexId};

/// A rooted tree of labelled edges. Sibling edges carry pairwise-distinct
/// labels and are kept sorted by label.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTree {
    out: Vec<Vec<Edge>>,
    parent: Vec<Option<VertexId>>,
    root: VertexId,
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeBuildError {
    #[error("edge list is empty")]
    Empty,
    #[error("cycle detected: every vertex has an incoming edge")]
    CycleDetected,
    #[error("multiple roots: {0:?} and {1:?} both lack incoming edges")]
    MultipleRoots(String, String),
    #[error("duplicate sibling label {label:?} under {parent:?}")]
    DuplicateSiblingLabel { parent: String, label: String },
    #[error("vertex {0:?} has more than one incoming edge")]
    DuplicateParent(String),
    #[error("vertex {0:?} is not reachable from the root")]
    Disconnected(String),
}

/// One edge of a tree under construction, keyed by caller-chosen names.
#[derive(Debug, Clone)]
pub(crate) struct EdgeRecord {
    pub parent: String,
    pub child: String,
    pub label: String,
    pub original_label: Option<String>,
    pub theta: Option<f64>,
    pub count: Option<u64>,
}

impl EdgeRecord {
    pub fn new(
        parent: impl Into<String>,
        child: impl Into<String>,
        label: impl Into<String>,
    ) -> Self {
        EdgeRecord {
            parent: parent.into(),
            child: child.into(),
            label: label.into(),
            original_label: None,
            theta: None,
            count: None,
        }
    }
}

/// Builds an event tree from (parent key, child key, label) triples.
///
/// Also returns the mapping from the caller's keys to vertex handles.
/// Vertices are numbered by first appearance in the input; sibling edges
/// come out sorted by label.
pub fn construct_tree<S: AsRef<str>>(
    edges: &[(S, S, S)],
) -> Result<(EventTree, BTreeMap<String, VertexId>), TreeBuildError> {
    let records: Vec<EdgeRecord> = edges
        .iter()
        .map(|(p, c, l)| EdgeRecord::new(p.as_ref(), c.as_ref(), l.as_ref()))
        .collect();
    build_tree(records)
}

pub(crate) fn build_tree(
    records: Vec<EdgeRecord>,
) -> Result<(EventTree, BTreeMap<String, VertexId>), TreeBuildError> {
    if records.is_empty() {
        return Err(TreeBuildError::Empty);
    }
    fn intern(
        name: &str,
        names: &mut Vec<String>,
        index: &mut BTreeMap<String, VertexId>,
    ) -> VertexId {
        if let Some(&id) = index.get(name) {
            return id;
        }
        let id = VertexId::new(names.len());
        names.push(name.to_string());
        index.insert(name.to_string(), id);
        id
    }

    let mut index: BTreeMap<String, VertexId> = BTreeMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut out: Vec<Vec<Edge>> = Vec::new();
    let mut parent: Vec<Option<VertexId>> = Vec::new();
    for record in &records {
        let p = intern(&record.parent, &mut names, &mut index);
        let c = intern(&record.child, &mut names, &mut index);
        while out.len() < names.len() {
            out.push(Vec::new());
            parent.push(None);
        }
        if out[p.index()].iter().any(|e| e.label == record.label) {
            return Err(TreeBuildError::DuplicateSiblingLabel {
                parent: record.parent.clone(),
                label: record.label.clone(),
            });
        }
        if parent[c.index()].is_some() {
            return Err(TreeBuildError::DuplicateParent(record.child.clone()));
        }
        parent[c.index()] = Some(p);
        out[p.index()].push(Edge {
            source: p,
            target: c,
            label: record.label.clone(),
            original_label: record.original_label.clone(),
            theta: record.theta,
            count: record.count,
        });
    }

    let mut roots = parent
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_none())
        .map(|(i, _)| VertexId::new(i));
    let root = match (roots.next(), roots.next()) {
        (None, _) => return Err(TreeBuildError::CycleDetected),
        (Some(r), None) => r,
        (Some(a), Some(b)) => {
            return Err(TreeBuildError::MultipleRoots(
                names[a.index()].clone(),
                names[b.index()].clone(),
            ))
        }
    };

    let mut reached = vec![false; names.len()];
    let mut stack = vec![root];
    reached[root.index()] = true;
    while let Some(v) = stack.pop() {
        for edge in &out[v.index()] {
            if !reached[edge.target.index()] {
                reached[edge.target.index()] = true;
                stack.push(edge.target);
            }
        }
    }
    if let Some(i) = reached.iter().position(|&r| !r) {
        return Err(TreeBuildError::Disconnected(names[i].clone()));
    }

    for siblings in &mut out {
        siblings.sort_by(|a, b| a.label.cmp(&b.label));
    }
    Ok((EventTree { out, parent, root }, index))
}

impl EventTree {
    pub(crate) fn from_parts(
        out: Vec<Vec<Edge>>,
        parent: Vec<Option<VertexId>>,
        root: VertexId,
    ) -> Self {
        EventTree { out, parent, root }
    }

    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v.index()]
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.out[v.index()].is_empty()
    }

    pub fn leaves(&self) -> Vec<VertexId> {
        (0..self.out.len())
            .map(VertexId::new)
            .filter(|&v| self.is_leaf(v))
            .collect()
    }

    /// Non-leaf vertices, the situations of the tree.
    pub fn situations(&self) -> Vec<VertexId> {
        (0..self.out.len())
            .map(VertexId::new)
            .filter(|&v| !self.is_leaf(v))
            .collect()
    }

    /// Labels along the root-to-vertex path, for every vertex.
    pub fn root_paths(&self) -> Vec<Vec<String>> {
        let mut paths: Vec<Vec<String>> = vec![Vec::new(); self.out.len()];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            for edge in &self.out[v.index()] {
                let mut path = paths[v.index()].clone();
                path.push(edge.label.clone());
                paths[edge.target.index()] = path;
                stack.push(edge.target);
            }
        }
        paths
    }

    pub(crate) fn adjacency_mut(&mut self) -> &mut [Vec<Edge>] {
        &mut self.out
    }
}

impl ColouredDigraph for EventTree {
    fn root(&self) -> VertexId {
        self.root
    }

    fn vertex_ids(&self) -> Vec<VertexId> {
        (0..self.out.len()).map(VertexId::new).collect()
    }

    fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.out[v.index()]
    }

    fn colour(&self, _v: VertexId) -> &Colour {
        const PLAIN: Colour = Colour::Plain;
        &PLAIN
    }

    fn vertex_count(&self) -> usize {
        self.out.len()
    }

    fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}
