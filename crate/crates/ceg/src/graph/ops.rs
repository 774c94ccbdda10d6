//! Structural queries over any [`ColouredDigraph`]: depth, distance
//! layering, path enumeration and floret extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use super::{Colour, ColouredDigraph, Edge, PathSignature, VertexId};

/// Longest root-to-terminal distance, counted in edges.
pub fn depth<G: ColouredDigraph + ?Sized>(graph: &G) -> usize {
    longest_distances(graph)
        .get(&graph.root())
        .copied()
        .unwrap_or(0)
}

/// Groups non-terminal vertices by the length of their shortest directed
/// path to a terminal vertex. Keys start at 1; terminals are omitted.
pub fn distance_partition<G: ColouredDigraph + ?Sized>(
    graph: &G,
) -> BTreeMap<usize, BTreeSet<VertexId>> {
    let vertices = graph.vertex_ids();
    let slots = max_slot(&vertices) + 1;
    let mut reverse: Vec<Vec<VertexId>> = vec![Vec::new(); slots];
    let mut queue = VecDeque::new();
    let mut dist: Vec<Option<usize>> = vec![None; slots];
    for &v in &vertices {
        for edge in graph.out_edges(v) {
            reverse[edge.target.index()].push(v);
        }
        if graph.is_terminal(v) {
            dist[v.index()] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v.index()].unwrap();
        for &u in &reverse[v.index()] {
            if dist[u.index()].is_none() {
                dist[u.index()] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    let mut partition: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
    for &v in &vertices {
        if let Some(d) = dist[v.index()] {
            if d > 0 {
                partition.entry(d).or_default().insert(v);
            }
        }
    }
    partition
}

/// Groups non-terminal vertices by the length of their longest directed path
/// to a terminal vertex.
///
/// This is the layering the merge sweep iterates over: every child sits in a
/// strictly lower layer than its parent, so by the time a layer is processed
/// all vertices reachable from it have already been reduced to positions.
pub fn longest_distance_partition<G: ColouredDigraph + ?Sized>(
    graph: &G,
) -> BTreeMap<usize, BTreeSet<VertexId>> {
    let mut partition: BTreeMap<usize, BTreeSet<VertexId>> = BTreeMap::new();
    for (v, d) in longest_distances(graph) {
        if d > 0 {
            partition.entry(d).or_default().insert(v);
        }
    }
    partition
}

fn longest_distances<G: ColouredDigraph + ?Sized>(graph: &G) -> HashMap<VertexId, usize> {
    let order = post_order(graph);
    let mut dist: HashMap<VertexId, usize> = HashMap::with_capacity(order.len());
    for v in order {
        let d = graph
            .out_edges(v)
            .iter()
            .map(|e| dist[&e.target] + 1)
            .max()
            .unwrap_or(0);
        dist.insert(v, d);
    }
    dist
}

/// Vertices reachable from the root, children before parents.
fn post_order<G: ColouredDigraph + ?Sized>(graph: &G) -> Vec<VertexId> {
    let mut order = Vec::new();
    let mut visited: BTreeSet<VertexId> = BTreeSet::new();
    let mut stack: Vec<(VertexId, usize)> = vec![(graph.root(), 0)];
    visited.insert(graph.root());
    while let Some((v, cursor)) = stack.pop() {
        let edges = graph.out_edges(v);
        if cursor < edges.len() {
            stack.push((v, cursor + 1));
            let child = edges[cursor].target;
            if visited.insert(child) {
                stack.push((child, 0));
            }
        } else {
            order.push(v);
        }
    }
    order
}

/// Enumerates the signatures of all root-to-terminal paths.
pub fn paths<G: ColouredDigraph + ?Sized>(graph: &G) -> BTreeSet<PathSignature> {
    let mut all = BTreeSet::new();
    let mut steps: Vec<(Colour, String)> = Vec::new();
    let mut stack: Vec<(VertexId, usize)> = vec![(graph.root(), 0)];
    while let Some(frame) = stack.last_mut() {
        let (v, cursor) = *frame;
        let edges = graph.out_edges(v);
        if cursor < edges.len() {
            frame.1 += 1;
            let edge = &edges[cursor];
            steps.push((graph.colour(v).clone(), edge.label.clone()));
            if graph.is_terminal(edge.target) {
                all.insert(PathSignature::new(steps.clone()));
                steps.pop();
            } else {
                stack.push((edge.target, 0));
            }
        } else {
            stack.pop();
            if !stack.is_empty() {
                steps.pop();
            }
        }
    }
    all
}

/// The subgraph induced by a vertex and its children.
#[derive(Debug, Clone)]
pub struct Floret {
    pub centre: VertexId,
    /// Centre first, then the distinct children in ascending order.
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Error, PartialEq)]
pub enum FloretError {
    #[error("{0} is terminal and spans no floret")]
    IsLeaf(VertexId),
}

/// Extracts the floret rooted at `v`.
pub fn floret<G: ColouredDigraph + ?Sized>(
    graph: &G,
    v: VertexId,
) -> Result<Floret, FloretError> {
    if graph.is_terminal(v) {
        return Err(FloretError::IsLeaf(v));
    }
    let mut members: BTreeSet<VertexId> = BTreeSet::new();
    members.insert(v);
    for edge in graph.out_edges(v) {
        members.insert(edge.target);
    }
    let mut edges = Vec::new();
    for &m in &members {
        for edge in graph.out_edges(m) {
            if members.contains(&edge.target) {
                edges.push(edge.clone());
            }
        }
    }
    let mut vertices = vec![v];
    vertices.extend(members.into_iter().filter(|&m| m != v));
    Ok(Floret {
        centre: v,
        vertices,
        edges,
    })
}

fn max_slot(vertices: &[VertexId]) -> usize {
    vertices.iter().map(|v| v.index()).max().unwrap_or(0)
}
