//! File formats: JSON for trees, stage partitions, chain event graphs and
//! merge traces, plus DOT rendering for graph viewers.
//!
//! Vertices are referenced by string keys. Tree files may use any keys;
//! saving a tree names its vertices `v0..vN`. Graph files name positions
//! `w0..wN` with the sink as `w_inf`. Staging files refer to the keys of
//! the tree file they accompany. Probabilities are checked on load: each
//! must lie in [0, 1], and where a vertex carries one on every out-edge
//! they must sum to one within a small tolerance that forgives decimal
//! rounding in hand-written files.

pub mod dot;

pub use dot::ceg_to_dot;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compaction::{MergeTrace, StopReason};
use crate::graph::tree::{build_tree, EdgeRecord};
use crate::graph::{Ceg, Colour, ColouredDigraph, Edge, EventTree, TreeBuildError, VertexId};
use crate::staging::StagePartition;

/// Slack allowed when checking that a floret's probabilities sum to one.
pub const THETA_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tree(#[from] TreeBuildError),
    #[error("vertex {0:?} is not declared")]
    UnknownVertex(String),
    #[error("vertex {0:?} is declared twice")]
    DuplicateVertex(String),
    #[error("vertex {vertex:?} has two out-edges labelled {label:?}")]
    DuplicateEdgeLabel { vertex: String, label: String },
    #[error("declared root {0:?} is not the root of the edge set")]
    RootMismatch(String),
    #[error("the root and the sink are the same vertex")]
    RootIsSink,
    #[error("sink {0:?} has outgoing edges")]
    SinkHasEdges(String),
    #[error("vertex {0:?} has no outgoing edges but is not the sink")]
    TerminalVertex(String),
    #[error("the graph contains a cycle")]
    ContainsCycle,
    #[error("vertex {0:?} is unreachable from the root")]
    Unreachable(String),
    #[error("probability {value} on edge {label:?} of {vertex:?} is outside [0, 1]")]
    ThetaOutOfRange {
        vertex: String,
        label: String,
        value: f64,
    },
    #[error("probabilities of {vertex:?} sum to {sum}, not 1")]
    ThetaSumOffUnity { vertex: String, sum: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDto {
    from: String,
    to: String,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    original_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    count: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    root: String,
    edges: Vec<EdgeDto>,
}

/// Serialises a tree with vertices keyed `v0..vN`, edges ordered by the
/// root path of their source and then by label.
pub fn tree_to_json(tree: &EventTree) -> String {
    let paths = tree.root_paths();
    let mut order: Vec<VertexId> = tree.situations();
    order.sort_by(|a, b| paths[a.index()].cmp(&paths[b.index()]));
    let mut edges = Vec::with_capacity(tree.edge_count());
    for v in order {
        for edge in tree.out_edges(v) {
            edges.push(EdgeDto {
                from: format!("v{}", edge.source.index()),
                to: format!("v{}", edge.target.index()),
                label: edge.label.clone(),
                original_label: edge.original_label.clone(),
                theta: edge.theta,
                count: edge.count,
            });
        }
    }
    let file = TreeFile {
        root: format!("v{}", tree.root().index()),
        edges,
    };
    serde_json::to_string_pretty(&file).expect("tree serialises")
}

/// Parses a tree file, returning the tree and the mapping from the file's
/// vertex keys to handles.
pub fn tree_from_json(
    text: &str,
) -> Result<(EventTree, BTreeMap<String, VertexId>), FormatError> {
    let file: TreeFile = serde_json::from_str(text)?;
    let records: Vec<EdgeRecord> = file
        .edges
        .into_iter()
        .map(|e| {
            let mut record = EdgeRecord::new(e.from, e.to, e.label);
            record.original_label = e.original_label;
            record.theta = e.theta;
            record.count = e.count;
            record
        })
        .collect();
    let (tree, index) = build_tree(records)?;
    match index.get(&file.root) {
        Some(&v) if v == tree.root() => {}
        _ => return Err(FormatError::RootMismatch(file.root)),
    }
    let names = key_names(&index);
    for v in tree.situations() {
        check_floret_thetas(tree.out_edges(v), &names[v.index()])?;
    }
    Ok((tree, index))
}

/// Inverts a key-to-handle mapping into a handle-indexed list of keys.
pub fn key_names(index: &BTreeMap<String, VertexId>) -> Vec<String> {
    let mut names = vec![String::new(); index.len()];
    for (name, &v) in index {
        names[v.index()] = name.clone();
    }
    names
}

fn check_floret_thetas(edges: &[Edge], vertex: &str) -> Result<(), FormatError> {
    for edge in edges {
        if let Some(t) = edge.theta {
            if !(0.0..=1.0).contains(&t) {
                return Err(FormatError::ThetaOutOfRange {
                    vertex: vertex.to_string(),
                    label: edge.label.clone(),
                    value: t,
                });
            }
        }
    }
    if !edges.is_empty() && edges.iter().all(|e| e.theta.is_some()) {
        let sum: f64 = edges.iter().map(|e| e.theta.unwrap()).sum();
        if (sum - 1.0).abs() > THETA_SUM_TOLERANCE {
            return Err(FormatError::ThetaSumOffUnity {
                vertex: vertex.to_string(),
                sum,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDto {
    members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    colour: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StagingFile {
    stages: Vec<StageDto>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    label_equivalence: BTreeMap<String, String>,
}

/// Serialises a stage partition using the given handle-indexed vertex keys.
pub fn staging_to_json(partition: &StagePartition, names: &[String]) -> String {
    let stages = partition
        .stages()
        .iter()
        .enumerate()
        .map(|(si, stage)| StageDto {
            members: stage.iter().map(|v| names[v.index()].clone()).collect(),
            colour: partition.display_colours().get(&si).cloned(),
        })
        .collect();
    let file = StagingFile {
        stages,
        label_equivalence: partition.label_equivalence().clone(),
    };
    serde_json::to_string_pretty(&file).expect("staging serialises")
}

/// Parses a staging file against the vertex keys of an already loaded tree.
pub fn staging_from_json(
    text: &str,
    index: &BTreeMap<String, VertexId>,
) -> Result<StagePartition, FormatError> {
    let file: StagingFile = serde_json::from_str(text)?;
    let mut stages: Vec<BTreeSet<VertexId>> = Vec::with_capacity(file.stages.len());
    let mut colours: Vec<(usize, String)> = Vec::new();
    for (si, stage) in file.stages.into_iter().enumerate() {
        let mut members = BTreeSet::new();
        for key in stage.members {
            let Some(&v) = index.get(&key) else {
                return Err(FormatError::UnknownVertex(key));
            };
            if !members.insert(v) {
                return Err(FormatError::DuplicateVertex(key));
            }
        }
        if let Some(colour) = stage.colour {
            colours.push((si, colour));
        }
        stages.push(members);
    }
    let mut partition =
        StagePartition::new(stages).with_label_equivalence(file.label_equivalence);
    for (si, colour) in colours {
        partition = partition.with_display_colour(si, colour);
    }
    Ok(partition)
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum ColourDto {
    Stage { index: u32 },
    Singleton { path: Vec<String> },
    Plain,
}

impl ColourDto {
    fn of(colour: &Colour) -> Self {
        match colour {
            Colour::Stage(i) => ColourDto::Stage { index: *i },
            Colour::Singleton(path) => ColourDto::Singleton {
                path: path.to_vec(),
            },
            Colour::Plain => ColourDto::Plain,
        }
    }

    fn into_colour(self) -> Colour {
        match self {
            ColourDto::Stage { index } => Colour::Stage(index),
            ColourDto::Singleton { path } => Colour::singleton(&path),
            ColourDto::Plain => Colour::Plain,
        }
    }
}

fn is_plain(colour: &ColourDto) -> bool {
    *colour == ColourDto::Plain
}

fn plain() -> ColourDto {
    ColourDto::Plain
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDto {
    key: String,
    #[serde(default = "plain", skip_serializing_if = "is_plain")]
    colour: ColourDto,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CegFile {
    root: String,
    sink: String,
    vertices: Vec<VertexDto>,
    edges: Vec<EdgeDto>,
}

fn ceg_key(ceg: &Ceg, v: VertexId) -> String {
    if v == ceg.sink() {
        "w_inf".to_string()
    } else {
        format!("w{}", v.index())
    }
}

/// Serialises a chain event graph. Positions are keyed `w0..wN` in vertex
/// order with the root first; the sink is `w_inf`.
pub fn ceg_to_json(ceg: &Ceg) -> String {
    let vertices = ceg
        .vertex_ids()
        .into_iter()
        .map(|v| VertexDto {
            key: ceg_key(ceg, v),
            colour: ColourDto::of(ceg.colour(v)),
        })
        .collect();
    let mut edges = Vec::with_capacity(ceg.edge_count());
    for v in ceg.vertex_ids() {
        for edge in ceg.out_edges(v) {
            edges.push(EdgeDto {
                from: ceg_key(ceg, edge.source),
                to: ceg_key(ceg, edge.target),
                label: edge.label.clone(),
                original_label: edge.original_label.clone(),
                theta: edge.theta,
                count: edge.count,
            });
        }
    }
    let file = CegFile {
        root: ceg_key(ceg, ceg.root()),
        sink: ceg_key(ceg, ceg.sink()),
        vertices,
        edges,
    };
    serde_json::to_string_pretty(&file).expect("graph serialises")
}

/// Parses and validates a chain event graph file. Vertices take handles in
/// declaration order; the graph must be acyclic, fully reachable from the
/// root, and terminal only at the sink.
pub fn ceg_from_json(text: &str) -> Result<Ceg, FormatError> {
    let file: CegFile = serde_json::from_str(text)?;
    let mut index: BTreeMap<String, VertexId> = BTreeMap::new();
    for (i, vertex) in file.vertices.iter().enumerate() {
        if index
            .insert(vertex.key.clone(), VertexId::new(i))
            .is_some()
        {
            return Err(FormatError::DuplicateVertex(vertex.key.clone()));
        }
    }
    let colours: Vec<Colour> = file
        .vertices
        .into_iter()
        .map(|v| v.colour.into_colour())
        .collect();
    let resolve = |key: &str| -> Result<VertexId, FormatError> {
        index
            .get(key)
            .copied()
            .ok_or_else(|| FormatError::UnknownVertex(key.to_string()))
    };
    let root = resolve(&file.root)?;
    let sink = resolve(&file.sink)?;
    if root == sink {
        return Err(FormatError::RootIsSink);
    }

    let n = colours.len();
    let mut out: Vec<Vec<Edge>> = vec![Vec::new(); n];
    for edge in file.edges {
        let from = resolve(&edge.from)?;
        let to = resolve(&edge.to)?;
        if from == sink {
            return Err(FormatError::SinkHasEdges(edge.from));
        }
        if out[from.index()].iter().any(|e| e.label == edge.label) {
            return Err(FormatError::DuplicateEdgeLabel {
                vertex: edge.from,
                label: edge.label,
            });
        }
        out[from.index()].push(Edge {
            source: from,
            target: to,
            label: edge.label,
            original_label: edge.original_label,
            theta: edge.theta,
            count: edge.count,
        });
    }
    for edges in &mut out {
        edges.sort_by(|a, b| a.label.cmp(&b.label).then(a.target.cmp(&b.target)));
    }

    let names = key_names(&index);
    for (i, edges) in out.iter().enumerate() {
        if edges.is_empty() && VertexId::new(i) != sink {
            return Err(FormatError::TerminalVertex(names[i].clone()));
        }
        check_floret_thetas(edges, &names[i])?;
    }

    let mut indegree = vec![0usize; n];
    for edges in &out {
        for edge in edges {
            indegree[edge.target.index()] += 1;
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut processed = 0;
    while let Some(i) = queue.pop() {
        processed += 1;
        for edge in &out[i] {
            let t = edge.target.index();
            indegree[t] -= 1;
            if indegree[t] == 0 {
                queue.push(t);
            }
        }
    }
    if processed < n {
        return Err(FormatError::ContainsCycle);
    }

    let mut reached = vec![false; n];
    reached[root.index()] = true;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        for edge in &out[v.index()] {
            if !reached[edge.target.index()] {
                reached[edge.target.index()] = true;
                stack.push(edge.target);
            }
        }
    }
    if let Some(i) = reached.iter().position(|&r| !r) {
        return Err(FormatError::Unreachable(names[i].clone()));
    }

    Ok(Ceg::new(out, colours, root, sink))
}

#[derive(Debug, Serialize)]
struct IterationDto {
    layer: usize,
    stage_cells: usize,
    position_cells: usize,
    representatives: Vec<String>,
    absorbed: Vec<String>,
    vertices: usize,
    edges: usize,
    comparisons: u64,
    elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
struct TraceFile {
    mode: String,
    stop: String,
    depth: usize,
    initial_vertices: usize,
    initial_edges: usize,
    iterations: Vec<IterationDto>,
    total_elapsed_ms: f64,
}

/// Serialises a merge trace, naming vertices with the given handle-indexed
/// keys of the staged tree that was compacted.
pub fn trace_to_json(trace: &MergeTrace, names: &[String]) -> String {
    let name_of = |v: &VertexId| names[v.index()].clone();
    let iterations = trace
        .iterations
        .iter()
        .map(|it| IterationDto {
            layer: it.layer,
            stage_cells: it.stage_cells.len(),
            position_cells: it.position_cells.len(),
            representatives: it.representatives.iter().map(name_of).collect(),
            absorbed: it.absorbed.iter().map(name_of).collect(),
            vertices: it.vertices,
            edges: it.edges,
            comparisons: it.comparisons,
            elapsed_ms: it.elapsed.as_secs_f64() * 1e3,
        })
        .collect();
    let file = TraceFile {
        mode: trace.mode.to_string(),
        stop: match trace.stop {
            StopReason::Fixpoint => "fixpoint".to_string(),
            StopReason::FullDepth => "full-depth".to_string(),
        },
        depth: trace.depth,
        initial_vertices: trace.initial_vertices,
        initial_edges: trace.initial_edges,
        iterations,
        total_elapsed_ms: trace.total_elapsed.as_secs_f64() * 1e3,
    };
    serde_json::to_string_pretty(&file).expect("trace serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compaction::{compact, CompactionMode};
    use crate::graph::paths;
    use crate::roundtrip::{isomorphic, reconstruct};
    use crate::samples;

    fn tree_facts(tree: &EventTree) -> BTreeSet<(Vec<String>, String, String, String)> {
        let paths = tree.root_paths();
        let mut facts = BTreeSet::new();
        for v in tree.situations() {
            for edge in tree.out_edges(v) {
                facts.insert((
                    paths[v.index()].clone(),
                    edge.label.clone(),
                    format!("{:?}", edge.theta),
                    format!("{:?}", edge.count),
                ));
            }
        }
        facts
    }

    #[test]
    fn tree_files_roundtrip_structurally() {
        let (tree, _) = samples::disease_event_tree();
        let text = tree_to_json(&tree);
        let (loaded, index) = tree_from_json(&text).unwrap();
        assert_eq!(tree_facts(&loaded), tree_facts(&tree));
        assert_eq!(loaded.vertex_count(), tree.vertex_count());
        assert!(index.contains_key("v0"));
    }

    #[test]
    fn saving_a_loaded_tree_is_byte_stable() {
        let (tree, _) = samples::disease_event_tree();
        let first = tree_to_json(&tree);
        let (loaded, _) = tree_from_json(&first).unwrap();
        let second = tree_to_json(&loaded);
        let (reloaded, _) = tree_from_json(&second).unwrap();
        assert_eq!(second, tree_to_json(&reloaded));
    }

    #[test]
    fn tree_probability_checks_fire() {
        let high = r#"{"root":"r","edges":[
            {"from":"r","to":"a","label":"x","theta":1.5},
            {"from":"r","to":"b","label":"y","theta":0.5}]}"#;
        assert!(matches!(
            tree_from_json(high).unwrap_err(),
            FormatError::ThetaOutOfRange { value, .. } if value == 1.5
        ));
        let off = r#"{"root":"r","edges":[
            {"from":"r","to":"a","label":"x","theta":0.5},
            {"from":"r","to":"b","label":"y","theta":0.4}]}"#;
        assert!(matches!(
            tree_from_json(off).unwrap_err(),
            FormatError::ThetaSumOffUnity { .. }
        ));
        let partial = r#"{"root":"r","edges":[
            {"from":"r","to":"a","label":"x","theta":0.5},
            {"from":"r","to":"b","label":"y"}]}"#;
        assert!(tree_from_json(partial).is_ok());
    }

    #[test]
    fn tree_structure_errors_pass_through() {
        let doubled = r#"{"root":"r","edges":[
            {"from":"r","to":"a","label":"x"},
            {"from":"r","to":"b","label":"x"}]}"#;
        assert!(matches!(
            tree_from_json(doubled).unwrap_err(),
            FormatError::Tree(TreeBuildError::DuplicateSiblingLabel { .. })
        ));
        let wrong_root = r#"{"root":"a","edges":[{"from":"r","to":"a","label":"x"}]}"#;
        assert!(matches!(
            tree_from_json(wrong_root).unwrap_err(),
            FormatError::RootMismatch(key) if key == "a"
        ));
    }

    #[test]
    fn staging_files_roundtrip() {
        let (staged, ix) = samples::disease_tree(samples::DiseaseStaging::MergedRecoveries);
        let partition = staged.partition();
        let names = key_names(&ix);
        let text = staging_to_json(partition, &names);
        let loaded = staging_from_json(&text, &ix).unwrap();
        assert_eq!(&loaded, partition);
    }

    #[test]
    fn staging_member_checks_fire() {
        let (_, ix) = samples::twin_fork();
        let ghost = r#"{"stages":[{"members":["nobody"]}]}"#;
        assert!(matches!(
            staging_from_json(ghost, &ix).unwrap_err(),
            FormatError::UnknownVertex(key) if key == "nobody"
        ));
        let doubled = r#"{"stages":[{"members":["v1","v1"]}]}"#;
        assert!(matches!(
            staging_from_json(doubled, &ix).unwrap_err(),
            FormatError::DuplicateVertex(key) if key == "v1"
        ));
    }

    #[test]
    fn ceg_files_roundtrip_and_are_byte_stable() {
        let (staged, _) = samples::disease_tree(samples::DiseaseStaging::SeparateRecoveries);
        let ceg = compact(&staged, CompactionMode::Optimal).ceg;
        let text = ceg_to_json(&ceg);
        let loaded = ceg_from_json(&text).unwrap();
        assert_eq!(paths(&loaded), paths(&ceg));
        assert_eq!(loaded.vertex_count(), ceg.vertex_count());
        for v in ceg.vertex_ids() {
            assert_eq!(loaded.colour(v), ceg.colour(v));
        }
        assert_eq!(ceg_to_json(&loaded), text);
    }

    #[test]
    fn serialised_graphs_still_reconstruct() {
        let (staged, _) = samples::disease_tree(samples::DiseaseStaging::MergedRecoveries);
        let ceg = compact(&staged, CompactionMode::Optimal).ceg;
        let loaded = ceg_from_json(&ceg_to_json(&ceg)).unwrap();
        let rebuilt = reconstruct(&loaded).unwrap();
        assert!(isomorphic(&rebuilt, &staged));
    }

    #[test]
    fn ceg_validation_rejects_malformed_graphs() {
        let sink_edge = r#"{"root":"w0","sink":"w_inf",
            "vertices":[{"key":"w0"},{"key":"w_inf"}],
            "edges":[{"from":"w0","to":"w_inf","label":"a"},
                     {"from":"w_inf","to":"w0","label":"b"}]}"#;
        assert!(matches!(
            ceg_from_json(sink_edge).unwrap_err(),
            FormatError::SinkHasEdges(_)
        ));

        let cycle = r#"{"root":"w0","sink":"w_inf",
            "vertices":[{"key":"w0"},{"key":"w1"},{"key":"w2"},{"key":"w_inf"}],
            "edges":[{"from":"w0","to":"w1","label":"a"},
                     {"from":"w1","to":"w2","label":"b"},
                     {"from":"w2","to":"w1","label":"c"},
                     {"from":"w1","to":"w_inf","label":"d"},
                     {"from":"w2","to":"w_inf","label":"e"}]}"#;
        assert!(matches!(
            ceg_from_json(cycle).unwrap_err(),
            FormatError::ContainsCycle
        ));

        let ghost = r#"{"root":"w0","sink":"w_inf",
            "vertices":[{"key":"w0"},{"key":"w_inf"}],
            "edges":[{"from":"w0","to":"nowhere","label":"a"}]}"#;
        assert!(matches!(
            ceg_from_json(ghost).unwrap_err(),
            FormatError::UnknownVertex(_)
        ));

        let doubled = r#"{"root":"w0","sink":"w_inf",
            "vertices":[{"key":"w0"},{"key":"w_inf"}],
            "edges":[{"from":"w0","to":"w_inf","label":"a"},
                     {"from":"w0","to":"w_inf","label":"a"}]}"#;
        assert!(matches!(
            ceg_from_json(doubled).unwrap_err(),
            FormatError::DuplicateEdgeLabel { .. }
        ));

        let stranded = r#"{"root":"w0","sink":"w_inf",
            "vertices":[{"key":"w0"},{"key":"w1"},{"key":"w_inf"}],
            "edges":[{"from":"w0","to":"w_inf","label":"a"},
                     {"from":"w1","to":"w_inf","label":"b"}]}"#;
        assert!(matches!(
            ceg_from_json(stranded).unwrap_err(),
            FormatError::Unreachable(key) if key == "w1"
        ));

        let dead_end = r#"{"root":"w0","sink":"w_inf",
            "vertices":[{"key":"w0"},{"key":"w1"},{"key":"w_inf"}],
            "edges":[{"from":"w0","to":"w_inf","label":"a"},
                     {"from":"w0","to":"w1","label":"b"}]}"#;
        assert!(matches!(
            ceg_from_json(dead_end).unwrap_err(),
            FormatError::TerminalVertex(key) if key == "w1"
        ));
    }

    #[test]
    fn trace_serialises_with_named_vertices() {
        let (staged, ix) = samples::twin_fork();
        let outcome = compact(&staged, CompactionMode::Optimal);
        let names = key_names(&ix);
        let text = trace_to_json(&outcome.trace, &names);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["mode"], "optimal");
        assert_eq!(value["stop"], "fixpoint");
        assert_eq!(value["iterations"].as_array().unwrap().len(), 2);
        assert_eq!(value["iterations"][0]["representatives"][0], "v1");
        assert_eq!(value["iterations"][0]["absorbed"][0], "v2");
        assert!(value["total_elapsed_ms"].as_f64().unwrap() >= 0.0);
    }
}
