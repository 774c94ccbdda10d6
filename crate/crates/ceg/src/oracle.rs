//! Ground-truth position computation by direct subtree comparison.
//!
//! A position groups situations whose coloured subtrees are isomorphic,
//! labels and colours both preserved. This module computes that partition
//! without any merge machinery, by interning a canonical code per subtree,
//! so it can referee the compaction pipeline in tests.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{Colour, ColouredDigraph, VertexId};
use crate::staging::StagedTree;

/// Ceiling on pairwise comparisons accepted by [`positions_brute_force`].
pub const DEFAULT_PAIR_GUARD: usize = 10_000;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{pairs} situation pairs exceed the brute-force guard of {guard}")]
    TooLarge { pairs: usize, guard: usize },
}

/// A partition of situations into positions, normalised for comparison:
/// cell members ascend, cells are ordered by their first member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionPartition {
    cells: Vec<Vec<VertexId>>,
}

impl PositionPartition {
    pub fn normalised(mut cells: Vec<Vec<VertexId>>) -> Self {
        for cell in &mut cells {
            cell.sort();
            cell.dedup();
        }
        cells.retain(|cell| !cell.is_empty());
        cells.sort_by(|a, b| a[0].cmp(&b[0]));
        PositionPartition { cells }
    }

    pub fn cells(&self) -> &[Vec<VertexId>] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }
}

/// One canonical code per vertex; equal code means isomorphic coloured
/// subtree. Codes are interned bottom-up, children before parents.
fn subtree_codes(staged: &StagedTree) -> Vec<u32> {
    let tree = staged.tree();
    let n = tree.vertex_count();
    let mut codes = vec![u32::MAX; n];
    let mut intern: HashMap<(Colour, Vec<(String, u32)>), u32> = HashMap::new();

    // Post-order traversal: every child's code exists before its parent's.
    let mut stack: Vec<(VertexId, bool)> = vec![(tree.root(), false)];
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            let children: Vec<(String, u32)> = tree
                .out_edges(v)
                .iter()
                .map(|e| (e.label.clone(), codes[e.target.index()]))
                .collect();
            let key = (staged.colour(v).clone(), children);
            let next = intern.len() as u32;
            codes[v.index()] = *intern.entry(key).or_insert(next);
        } else {
            stack.push((v, true));
            for edge in tree.out_edges(v) {
                stack.push((edge.target, false));
            }
        }
    }
    codes
}

/// Colour-preserving rooted-subtree isomorphism between two vertices of one
/// staged tree.
pub fn subtree_isomorphic(staged: &StagedTree, a: VertexId, b: VertexId) -> bool {
    let codes = subtree_codes(staged);
    codes[a.index()] == codes[b.index()]
}

/// The position partition of all situations, by exhaustive comparison.
///
/// Conceptually the transitive closure of pairwise [`subtree_isomorphic`];
/// computed by grouping equal canonical codes, which coincides because code
/// equality is already an equivalence. Refuses instances whose pair count
/// exceeds [`DEFAULT_PAIR_GUARD`].
pub fn positions_brute_force(staged: &StagedTree) -> Result<PositionPartition, OracleError> {
    positions_brute_force_guarded(staged, DEFAULT_PAIR_GUARD)
}

pub fn positions_brute_force_guarded(
    staged: &StagedTree,
    guard: usize,
) -> Result<PositionPartition, OracleError> {
    let situations = staged.tree().situations();
    let pairs = situations.len() * situations.len().saturating_sub(1) / 2;
    if pairs > guard {
        return Err(OracleError::TooLarge { pairs, guard });
    }
    let codes = subtree_codes(staged);
    let mut by_code: HashMap<u32, Vec<VertexId>> = HashMap::new();
    for v in situations {
        by_code.entry(codes[v.index()]).or_default().push(v);
    }
    Ok(PositionPartition::normalised(
        by_code.into_values().collect(),
    ))
}
