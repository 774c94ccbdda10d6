//! Rebuilding a staged tree from root-to-sink path signatures.
//!
//! A chain event graph keeps every path signature of the tree it was
//! compacted from, so unfolding those signatures into a prefix trie
//! recovers the tree, its stage partition and its transition
//! probabilities. Observation counts and pre-canonicalisation label
//! spellings are not recoverable: merging sums the former and keeps only
//! the representative's copy of the latter.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::tree::{build_tree, EdgeRecord};
use crate::graph::{
    paths, Ceg, Colour, ColouredDigraph, PathSignature, VertexId, DEFAULT_TOLERANCE,
};
use crate::staging::{apply_staging_default, ApplyStagingError, StagePartition, StagedTree};

#[derive(Debug, Error, PartialEq)]
pub enum ReconstructError {
    #[error("no paths to rebuild from")]
    Empty,
    #[error("path {longer:?} runs through the end of path {shorter:?}")]
    NestedPaths { shorter: String, longer: String },
    #[error("conflicting colours on the route {route:?}: {a} vs {b}")]
    ColourConflict { route: String, a: String, b: String },
    #[error(transparent)]
    Staging(#[from] ApplyStagingError),
}

/// Unfolds a chain event graph back into a staged tree.
///
/// Transition probabilities are carried over from the graph's florets,
/// keyed by vertex colour and edge label; equality of probabilities
/// within a stage makes the choice of floret immaterial.
pub fn reconstruct(ceg: &Ceg) -> Result<StagedTree, ReconstructError> {
    let signatures: Vec<PathSignature> = paths(ceg).into_iter().collect();
    let mut thetas: BTreeMap<Colour, BTreeMap<String, f64>> = BTreeMap::new();
    for v in ceg.vertex_ids() {
        for edge in ceg.out_edges(v) {
            if let Some(t) = edge.theta {
                thetas
                    .entry(ceg.colour(v).clone())
                    .or_default()
                    .insert(edge.label.clone(), t);
            }
        }
    }
    assemble(&signatures, &thetas)
}

/// Rebuilds a staged tree from an explicit collection of path signatures.
///
/// Input order is irrelevant and exact duplicates are ignored. Two
/// signatures that share a label route but disagree on a colour along it
/// are rejected, as is a signature that is a proper prefix of another:
/// no tree has such a leaf-path set. Stage identifiers and singleton
/// colours must be the ones staging the rebuilt tree would assign, which
/// holds for every signature set read off an actual graph.
pub fn reconstruct_from_paths(
    signatures: &[PathSignature],
) -> Result<StagedTree, ReconstructError> {
    assemble(signatures, &BTreeMap::new())
}

#[derive(Default)]
struct TrieNode {
    colour: Option<Colour>,
    children: BTreeMap<String, usize>,
    terminal: bool,
}

fn label_route(steps: &[(Colour, String)]) -> String {
    steps
        .iter()
        .map(|(_, label)| label.as_str())
        .collect::<Vec<_>>()
        .join("/")
}

fn node_name(i: usize) -> String {
    format!("n{i}")
}

fn assemble(
    signatures: &[PathSignature],
    thetas: &BTreeMap<Colour, BTreeMap<String, f64>>,
) -> Result<StagedTree, ReconstructError> {
    let mut ordered: Vec<&PathSignature> = signatures.iter().collect();
    ordered.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.steps().cmp(b.steps())));
    ordered.dedup();

    let mut nodes: Vec<TrieNode> = vec![TrieNode::default()];
    for signature in ordered {
        let steps = signature.steps();
        let mut cur = 0usize;
        for (i, (colour, label)) in steps.iter().enumerate() {
            if nodes[cur].terminal {
                return Err(ReconstructError::NestedPaths {
                    shorter: label_route(&steps[..i]),
                    longer: label_route(steps),
                });
            }
            match &nodes[cur].colour {
                None => nodes[cur].colour = Some(colour.clone()),
                Some(existing) if existing != colour => {
                    return Err(ReconstructError::ColourConflict {
                        route: label_route(&steps[..i]),
                        a: existing.to_string(),
                        b: colour.to_string(),
                    });
                }
                Some(_) => {}
            }
            cur = match nodes[cur].children.get(label) {
                Some(&child) => child,
                None => {
                    let child = nodes.len();
                    nodes.push(TrieNode::default());
                    nodes[cur].children.insert(label.clone(), child);
                    child
                }
            };
        }
        debug_assert!(
            nodes[cur].children.is_empty() && !nodes[cur].terminal,
            "length-sorted insertion reaches path ends first"
        );
        nodes[cur].terminal = true;
    }
    if nodes.len() == 1 {
        return Err(ReconstructError::Empty);
    }

    let mut records = Vec::new();
    let mut routes: Vec<String> = vec![String::new(); nodes.len()];
    let mut stack = vec![0usize];
    while let Some(p) = stack.pop() {
        for (label, &c) in &nodes[p].children {
            routes[c] = if routes[p].is_empty() {
                label.clone()
            } else {
                format!("{}/{label}", routes[p])
            };
            let mut record = EdgeRecord::new(node_name(p), node_name(c), label.clone());
            record.theta = nodes[p]
                .colour
                .as_ref()
                .and_then(|colour| thetas.get(colour))
                .and_then(|floret| floret.get(label))
                .copied();
            records.push(record);
            stack.push(c);
        }
    }
    let (tree, names) = build_tree(records).expect("prefix trie forms a tree");

    let mut cells: BTreeMap<&Colour, BTreeSet<VertexId>> = BTreeMap::new();
    for (i, node) in nodes.iter().enumerate() {
        if let Some(colour) = &node.colour {
            cells.entry(colour).or_default().insert(names[&node_name(i)]);
        }
    }
    let partition = StagePartition::new(cells.into_values().collect());
    let staged = apply_staging_default(&tree, &partition)?;

    for (i, node) in nodes.iter().enumerate() {
        if let Some(colour) = &node.colour {
            let derived = staged.colour(names[&node_name(i)]);
            if derived != colour {
                return Err(ReconstructError::ColourConflict {
                    route: routes[i].clone(),
                    a: colour.to_string(),
                    b: derived.to_string(),
                });
            }
        }
    }
    Ok(staged)
}

/// Whether two staged trees agree on shape, edge labels, colours and
/// transition probabilities (the latter within the default tolerance).
/// Counts and original label spellings are not compared.
pub fn isomorphic(a: &StagedTree, b: &StagedTree) -> bool {
    let mut stack = vec![(a.root(), b.root())];
    while let Some((va, vb)) = stack.pop() {
        if a.colour(va) != b.colour(vb) {
            return false;
        }
        let ea = a.out_edges(va);
        let eb = b.out_edges(vb);
        if ea.len() != eb.len() {
            return false;
        }
        for (x, y) in ea.iter().zip(eb) {
            if x.label != y.label {
                return false;
            }
            match (x.theta, y.theta) {
                (None, None) => {}
                (Some(s), Some(t)) if (s - t).abs() <= DEFAULT_TOLERANCE => {}
                _ => return false,
            }
            stack.push((x.target, y.target));
        }
    }
    true
}

/// Whether two chain event graphs agree on shape, edge labels, colours
/// and transition probabilities (the latter within the default tolerance).
///
/// Out-edges are matched by label, which pins a candidate bijection from
/// the roots down; the walk fails as soon as the bijection would have to
/// send one vertex to two targets or two vertices to one.
pub fn cegs_isomorphic(a: &Ceg, b: &Ceg) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut forward: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    let mut backward: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    forward.insert(a.root(), b.root());
    backward.insert(b.root(), a.root());
    let mut stack = vec![(a.root(), b.root())];
    while let Some((va, vb)) = stack.pop() {
        if a.colour(va) != b.colour(vb) {
            return false;
        }
        let ea = a.out_edges(va);
        let eb = b.out_edges(vb);
        if ea.len() != eb.len() {
            return false;
        }
        for (x, y) in ea.iter().zip(eb) {
            if x.label != y.label {
                return false;
            }
            match (x.theta, y.theta) {
                (None, None) => {}
                (Some(s), Some(t)) if (s - t).abs() <= DEFAULT_TOLERANCE => {}
                _ => return false,
            }
            match (forward.get(&x.target), backward.get(&y.target)) {
                (None, None) => {
                    forward.insert(x.target, y.target);
                    backward.insert(y.target, x.target);
                    stack.push((x.target, y.target));
                }
                (Some(&fwd), Some(&bwd)) if fwd == y.target && bwd == x.target => {}
                _ => return false,
            }
        }
    }
    true
}
