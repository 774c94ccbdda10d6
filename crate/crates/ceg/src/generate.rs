//! Random staged trees for tests and benchmarks.
//!
//! Trees grow level by level with independently drawn out-degrees; a
//! spine of guaranteed branching keeps the requested depth exact, while
//! other vertices may close off early, so both stratified and
//! non-stratified shapes come out. Situations with the same label set
//! are then pooled into stages at the requested density and their
//! transition probabilities repaired to agree within each stage.

use std::collections::BTreeMap;

use rand::Rng;

use crate::graph::tree::{build_tree, EdgeRecord};
use crate::graph::{ColouredDigraph, VertexId};
use crate::staging::{apply_staging_default, StagePartition, StagedTree};

/// Soft cap on generated vertices; growth stops branching once the tree
/// reaches it, apart from the spine that maintains the requested depth.
pub const VERTEX_BUDGET: usize = 50_000;

const LEAF_PROBABILITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorParams {
    /// Exact depth of the produced tree, at least 1.
    pub depth: usize,
    /// Out-degrees are drawn uniformly from 1..=max_branching, with edge
    /// labels sampled from an alphabet of the same size.
    pub max_branching: usize,
    /// Probability that a situation joins its label-set group's stage.
    pub stage_density: f64,
}

/// Draws a staged tree. All randomness comes from `rng`, so a seeded
/// generator reproduces the same tree.
pub fn random_staged_tree(params: GeneratorParams, rng: &mut impl Rng) -> StagedTree {
    assert!(params.depth >= 1, "depth must be at least 1");
    assert!(params.max_branching >= 1, "max_branching must be at least 1");
    assert!(
        (0.0..=1.0).contains(&params.stage_density),
        "stage_density must lie in [0, 1]"
    );

    let alphabet: Vec<String> = (0..params.max_branching)
        .map(|i| format!("e{i}"))
        .collect();
    let mut records: Vec<EdgeRecord> = Vec::new();
    let mut next = 1usize;
    let mut level: Vec<(usize, bool)> = vec![(0, true)];
    for current_depth in 0..params.depth {
        let mut below = Vec::new();
        for (vertex, on_spine) in level {
            let retires = !on_spine
                && (next >= VERTEX_BUDGET
                    || (current_depth > 0 && rng.gen_bool(LEAF_PROBABILITY)));
            if retires {
                continue;
            }
            let degree = rng.gen_range(1..=params.max_branching);
            let mut labels: Vec<usize> =
                rand::seq::index::sample(rng, params.max_branching, degree).into_vec();
            labels.sort();
            let weights: Vec<f64> = (0..degree).map(|_| rng.gen_range(1e-3..1.0)).collect();
            let total: f64 = weights.iter().sum();
            for (slot, (label, weight)) in labels.into_iter().zip(weights).enumerate() {
                let child = next;
                next += 1;
                let mut record = EdgeRecord::new(
                    format!("v{vertex}"),
                    format!("v{child}"),
                    alphabet[label].clone(),
                );
                record.theta = Some(weight / total);
                records.push(record);
                below.push((child, on_spine && slot == 0));
            }
        }
        level = below;
    }
    let (mut tree, _) = build_tree(records).expect("generated records form a tree");

    let mut groups: BTreeMap<Vec<String>, Vec<VertexId>> = BTreeMap::new();
    for v in tree.situations() {
        let labels: Vec<String> = tree
            .out_edges(v)
            .iter()
            .map(|e| e.label.clone())
            .collect();
        groups.entry(labels).or_default().push(v);
    }
    let mut cells: Vec<std::collections::BTreeSet<VertexId>> = Vec::new();
    for members in groups.values() {
        let (joined, alone): (Vec<VertexId>, Vec<VertexId>) = members
            .iter()
            .copied()
            .partition(|_| rng.gen_bool(params.stage_density));
        if joined.len() >= 2 {
            let repaired: Vec<(String, Option<f64>)> = tree
                .out_edges(joined[0])
                .iter()
                .map(|e| (e.label.clone(), e.theta))
                .collect();
            for &member in &joined[1..] {
                for (edge, (label, theta)) in tree.adjacency_mut()[member.index()]
                    .iter_mut()
                    .zip(&repaired)
                {
                    debug_assert_eq!(&edge.label, label);
                    edge.theta = *theta;
                }
            }
            cells.push(joined.into_iter().collect());
            cells.extend(alone.into_iter().map(|v| [v].into()));
        } else {
            cells.extend(members.iter().map(|&v| [v].into()));
        }
    }
    apply_staging_default(&tree, &StagePartition::new(cells))
        .expect("repaired staging is valid")
}
