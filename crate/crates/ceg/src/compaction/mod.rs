//! Compaction of a staged tree into its chain event graph.
//!
//! Step one melds all leaves into a single sink. The sweep then climbs the
//! tree's layers, where a vertex's layer is its longest distance to the
//! sink, so every child sits strictly below its parent. Each layer's stage
//! cells are refined by where equal labels lead; because everything below
//! the current layer has already been reduced to positions, two situations
//! refine into the same cell exactly when their entire unfoldings match,
//! and each refined cell is merged into its first member. Root-to-sink
//! path signatures are preserved by every step, and vertex and edge counts
//! never increase.

pub mod strategy;

pub use strategy::{
    strategies, strategy_by_name, CompactionMode, CompactionStrategy, FullSweep, OptimalStop,
};

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use crate::graph::{
    depth, longest_distance_partition, Ceg, Colour, ColouredDigraph, ColouredGraph, Edge,
    VertexId,
};
use crate::oracle::PositionPartition;
use crate::staging::{stages_at_level, StagedTree};

/// Why a sweep ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// A layer produced no merges, so no higher layer can merge either.
    Fixpoint,
    /// The strategy's last layer was reached.
    FullDepth,
}

/// What one sweep iteration did to its layer.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// Longest distance to the sink of the vertices processed.
    pub layer: usize,
    /// Stage cells intersected with the layer.
    pub stage_cells: Vec<Vec<VertexId>>,
    /// Stage cells refined by equal-label targets.
    pub position_cells: Vec<Vec<VertexId>>,
    /// Surviving first member of each cell that merged.
    pub representatives: Vec<VertexId>,
    /// Vertices retired into their representative.
    pub absorbed: Vec<VertexId>,
    /// Live vertices after this iteration.
    pub vertices: usize,
    /// Live edges after this iteration.
    pub edges: usize,
    /// Key comparisons spent refining.
    pub comparisons: u64,
    pub elapsed: Duration,
}

/// Full account of one compaction run.
#[derive(Debug, Clone)]
pub struct MergeTrace {
    pub mode: &'static str,
    pub stop: StopReason,
    /// Depth of the staged tree, the number of layers plus the root's.
    pub depth: usize,
    /// Vertex count right after the leaf meld.
    pub initial_vertices: usize,
    /// Edge count right after the leaf meld.
    pub initial_edges: usize,
    pub iterations: Vec<IterationRecord>,
    pub total_elapsed: Duration,
}

impl MergeTrace {
    /// The position partition implied by the run: every refined cell seen
    /// during the sweep, plus singletons for situations in layers the sweep
    /// never reached.
    pub fn accumulated_positions(&self, staged: &StagedTree) -> PositionPartition {
        let mut seen: BTreeSet<VertexId> = BTreeSet::new();
        let mut cells: Vec<Vec<VertexId>> = Vec::new();
        for iteration in &self.iterations {
            for cell in &iteration.position_cells {
                seen.extend(cell.iter().copied());
                cells.push(cell.clone());
            }
        }
        for v in staged.tree().situations() {
            if !seen.contains(&v) {
                cells.push(vec![v]);
            }
        }
        PositionPartition::normalised(cells)
    }
}

#[derive(Debug, Clone)]
pub struct CompactionOutcome {
    pub ceg: Ceg,
    pub trace: MergeTrace,
}

/// Totals that summarise how much work a sweep did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkSummary {
    pub iterations: usize,
    /// Iterations that absorbed at least one vertex.
    pub merge_iterations: usize,
    pub comparisons: u64,
    pub elapsed: Duration,
}

pub fn count_merge_work(trace: &MergeTrace) -> WorkSummary {
    WorkSummary {
        iterations: trace.iterations.len(),
        merge_iterations: trace
            .iterations
            .iter()
            .filter(|i| !i.absorbed.is_empty())
            .count(),
        comparisons: trace.iterations.iter().map(|i| i.comparisons).sum(),
        elapsed: trace.total_elapsed,
    }
}

/// Retargets every leaf-bound edge onto a fresh sink vertex and retires the
/// leaves. Colours carry over; the sink is plain.
pub fn merge_leaves(staged: &StagedTree) -> ColouredGraph {
    let tree = staged.tree();
    let n = tree.vertex_count();
    let sink = VertexId::new(n);
    let mut out: Vec<Vec<Edge>> = Vec::with_capacity(n + 1);
    let mut colours: Vec<Colour> = Vec::with_capacity(n + 1);
    let mut alive = vec![true; n + 1];
    for (i, live) in alive.iter_mut().enumerate().take(n) {
        let v = VertexId::new(i);
        out.push(
            tree.out_edges(v)
                .iter()
                .map(|e| Edge {
                    target: if tree.is_leaf(e.target) { sink } else { e.target },
                    ..e.clone()
                })
                .collect(),
        );
        colours.push(staged.colour(v).clone());
        if tree.is_leaf(v) {
            *live = false;
        }
    }
    out.push(Vec::new());
    colours.push(Colour::Plain);
    ColouredGraph::new(out, colours, alive, tree.root(), sink)
}

/// Out-edges of one situation as (label, target) pairs; two situations with
/// equal keys head into identical futures.
type FloretKey<'a> = BTreeSet<(&'a str, VertexId)>;

/// Splits each stage cell into groups whose members agree, label by label,
/// on the exact vertex their edges enter. Also returns the number of key
/// comparisons spent.
///
/// Valid only when everything strictly below the cells' layer is already a
/// position; the sweep guarantees that by climbing layers bottom-up.
pub fn refine_to_positions(
    graph: &ColouredGraph,
    stage_cells: &[Vec<VertexId>],
) -> (Vec<Vec<VertexId>>, u64) {
    let mut cells = Vec::new();
    let mut comparisons = 0u64;
    for cell in stage_cells {
        let mut groups: Vec<(FloretKey, Vec<VertexId>)> = Vec::new();
        for &v in cell {
            let key: FloretKey = graph
                .out_edges(v)
                .iter()
                .map(|e| (e.label.as_str(), e.target))
                .collect();
            let mut matched = false;
            for (group_key, members) in groups.iter_mut() {
                comparisons += 1;
                if *group_key == key {
                    members.push(v);
                    matched = true;
                    break;
                }
            }
            if !matched {
                groups.push((key, vec![v]));
            }
        }
        cells.extend(groups.into_iter().map(|(_, members)| members));
    }
    (cells, comparisons)
}

/// Merges each multi-member cell into its first member: the others lose
/// their out-edges and retire, incoming edges are rewired onto the
/// representative, and where every member carried counts the
/// representative's counts become per-label totals for the cell.
pub fn merge_level(graph: &ColouredGraph, position_cells: &[Vec<VertexId>]) -> ColouredGraph {
    let mut next = graph.clone();
    let mut redirect: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for cell in position_cells {
        for &v in &cell[1..] {
            redirect.insert(v, cell[0]);
        }
    }
    if redirect.is_empty() {
        return next;
    }

    for cell in position_cells.iter().filter(|c| c.len() > 1) {
        let mut totals: BTreeMap<&str, Option<u64>> = BTreeMap::new();
        for &v in cell.iter() {
            for edge in graph.out_edges(v) {
                let slot = totals.entry(edge.label.as_str()).or_insert(Some(0));
                *slot = match (*slot, edge.count) {
                    (Some(acc), Some(c)) => Some(acc + c),
                    _ => None,
                };
            }
        }
        for edge in next.out_mut(cell[0]) {
            edge.count = totals.get(edge.label.as_str()).copied().flatten();
        }
    }

    let live: Vec<VertexId> = next.live_vertices().collect();
    for v in live {
        for edge in next.out_mut(v) {
            if let Some(&rep) = redirect.get(&edge.target) {
                edge.target = rep;
            }
        }
    }
    for &v in redirect.keys() {
        next.retire(v);
    }
    next
}

/// Compacts a staged tree into its chain event graph under the given mode.
pub fn compact(staged: &StagedTree, mode: CompactionMode) -> CompactionOutcome {
    compact_with(staged, mode.strategy())
}

pub fn compact_with(
    staged: &StagedTree,
    strategy: &dyn CompactionStrategy,
) -> CompactionOutcome {
    run(staged, strategy, |_| {})
}

/// Like [`compact`], but also returns a snapshot of the working graph after
/// the leaf meld and after every iteration, for invariant checking.
pub fn compact_recording(
    staged: &StagedTree,
    mode: CompactionMode,
) -> (CompactionOutcome, Vec<ColouredGraph>) {
    let mut snapshots = Vec::new();
    let outcome = run(staged, mode.strategy(), |g| snapshots.push(g.clone()));
    (outcome, snapshots)
}

fn run(
    staged: &StagedTree,
    strategy: &dyn CompactionStrategy,
    mut observe: impl FnMut(&ColouredGraph),
) -> CompactionOutcome {
    let start = Instant::now();
    let tree_depth = depth(staged);
    let mut graph = merge_leaves(staged);
    observe(&graph);
    let initial_vertices = graph.vertex_count();
    let initial_edges = graph.edge_count();
    let layers = longest_distance_partition(&graph);
    let deepest = layers.keys().next_back().copied().unwrap_or(0);

    let mut iterations = Vec::new();
    let mut stop = StopReason::FullDepth;
    // A depth-one tree is a single floret: the leaf meld alone compacts it.
    if tree_depth > 1 {
        for layer in 1..=strategy.last_layer(tree_depth, deepest) {
            let timer = Instant::now();
            let level: Vec<VertexId> = layers
                .get(&layer)
                .map(|set| {
                    set.iter()
                        .copied()
                        .filter(|&v| graph.is_alive(v))
                        .collect()
                })
                .unwrap_or_default();
            let stage_cells = stages_at_level(staged, &level);
            let (position_cells, comparisons) = refine_to_positions(&graph, &stage_cells);
            let absorbed: Vec<VertexId> = position_cells
                .iter()
                .flat_map(|c| c[1..].iter().copied())
                .collect();
            let representatives: Vec<VertexId> = position_cells
                .iter()
                .filter(|c| c.len() > 1)
                .map(|c| c[0])
                .collect();
            graph = merge_level(&graph, &position_cells);
            observe(&graph);
            let no_merges = absorbed.is_empty();
            iterations.push(IterationRecord {
                layer,
                stage_cells,
                position_cells,
                representatives,
                absorbed,
                vertices: graph.vertex_count(),
                edges: graph.edge_count(),
                comparisons,
                elapsed: timer.elapsed(),
            });
            if strategy.stops_at_fixpoint() && no_merges {
                stop = StopReason::Fixpoint;
                break;
            }
        }
    }

    let ceg = Ceg::from_working(&graph, staged.root_paths());
    CompactionOutcome {
        ceg,
        trace: MergeTrace {
            mode: strategy.name(),
            stop,
            depth: tree_depth,
            initial_vertices,
            initial_edges,
            iterations,
            total_elapsed: start.elapsed(),
        },
    }
}
