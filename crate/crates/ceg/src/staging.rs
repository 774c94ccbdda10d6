//! Stage partitions over event trees and their validated application.
//!
//! A stage groups situations whose unfoldings are indistinguishable: same
//! edge labels (after any label equivalence) and, where present, the same
//! transition probabilities. Applying a valid partition colours the tree
//! and canonicalises its edge labels, producing a [`StagedTree`] ready for
//! compaction.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{
    Colour, ColouredDigraph, Edge, EventTree, VertexId, DEFAULT_TOLERANCE,
};

/// A partition of a tree's situations into stages, with an optional label
/// equivalence and optional per-stage display colours for rendering.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePartition {
    stages: Vec<BTreeSet<VertexId>>,
    label_equivalence: BTreeMap<String, String>,
    display_colours: BTreeMap<usize, String>,
}

impl StagePartition {
    pub fn new(stages: Vec<BTreeSet<VertexId>>) -> Self {
        StagePartition {
            stages,
            label_equivalence: BTreeMap::new(),
            display_colours: BTreeMap::new(),
        }
    }

    /// The partition that puts every situation in its own stage.
    pub fn trivial(tree: &EventTree) -> Self {
        StagePartition::new(
            tree.situations()
                .into_iter()
                .map(|v| BTreeSet::from([v]))
                .collect(),
        )
    }

    pub fn with_label_equivalence(mut self, map: BTreeMap<String, String>) -> Self {
        self.label_equivalence = map;
        self
    }

    pub fn with_display_colour(mut self, stage: usize, colour: impl Into<String>) -> Self {
        self.display_colours.insert(stage, colour.into());
        self
    }

    pub fn stages(&self) -> &[BTreeSet<VertexId>] {
        &self.stages
    }

    pub fn label_equivalence(&self) -> &BTreeMap<String, String> {
        &self.label_equivalence
    }

    pub fn display_colours(&self) -> &BTreeMap<usize, String> {
        &self.display_colours
    }

    /// Maps a label to its canonical spelling under the equivalence.
    pub fn canonical_label<'a>(&'a self, label: &'a str) -> &'a str {
        self.label_equivalence
            .get(label)
            .map(String::as_str)
            .unwrap_or(label)
    }
}

/// Structural problems that make a partition unusable regardless of data.
#[derive(Debug, Error, PartialEq)]
pub enum StagingError {
    #[error("stage member {0} is not a vertex of the tree")]
    UnknownVertex(VertexId),
    #[error("stage member {0} is a leaf")]
    LeafInStage(VertexId),
}

/// Ways a structurally well-formed partition can still be invalid.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum StageViolation {
    #[error("situation {0} belongs to no stage")]
    MissingSituation(VertexId),
    #[error("{0} appears in more than one stage")]
    DuplicateMembership(VertexId),
    #[error("stage {stage}: {a} and {b} carry different label sets")]
    LabelSetMismatch {
        stage: usize,
        a: VertexId,
        b: VertexId,
    },
    #[error(
        "stage {stage}: probability on label {label:?} differs between {a} and {b}"
    )]
    ThetaMismatch {
        stage: usize,
        a: VertexId,
        b: VertexId,
        label: String,
    },
    #[error("stage {stage}: {a} and {b} disagree on which edges carry probabilities")]
    ThetaPresenceMismatch {
        stage: usize,
        a: VertexId,
        b: VertexId,
    },
    #[error("label equivalence target {0:?} is itself remapped")]
    NonCanonicalEquivalence(String),
    #[error("equivalence folds two sibling edges of {vertex} onto label {label:?}")]
    EquivalenceCollision { vertex: VertexId, label: String },
}

#[derive(Debug, Error, PartialEq)]
pub enum ApplyStagingError {
    #[error(transparent)]
    Staging(#[from] StagingError),
    #[error("invalid stage partition: {}", format_violations(.0))]
    InvalidPartition(Vec<StageViolation>),
}

fn format_violations(violations: &[StageViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks a partition against a tree. Hard structural errors abort; data
/// problems are collected and returned, an empty list meaning valid.
pub fn validate_stage_partition(
    tree: &EventTree,
    partition: &StagePartition,
    tolerance: f64,
) -> Result<Vec<StageViolation>, StagingError> {
    let n = tree.vertex_count();
    let mut violations = Vec::new();

    for value in partition.label_equivalence.values() {
        if let Some(further) = partition.label_equivalence.get(value) {
            if further != value {
                violations.push(StageViolation::NonCanonicalEquivalence(value.clone()));
            }
        }
    }

    let mut membership = vec![0usize; n];
    for stage in &partition.stages {
        for &v in stage {
            if v.index() >= n {
                return Err(StagingError::UnknownVertex(v));
            }
            if tree.is_leaf(v) {
                return Err(StagingError::LeafInStage(v));
            }
            membership[v.index()] += 1;
        }
    }
    for v in tree.situations() {
        match membership[v.index()] {
            0 => violations.push(StageViolation::MissingSituation(v)),
            1 => {}
            _ => violations.push(StageViolation::DuplicateMembership(v)),
        }
    }

    for v in tree.situations() {
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for edge in tree.out_edges(v) {
            let canon = partition.canonical_label(&edge.label);
            if !seen.insert(canon) {
                violations.push(StageViolation::EquivalenceCollision {
                    vertex: v,
                    label: canon.to_string(),
                });
            }
        }
    }

    for (si, stage) in partition.stages.iter().enumerate() {
        let mut members = stage.iter();
        let Some(&first) = members.next() else {
            continue;
        };
        if first.index() >= n || tree.is_leaf(first) {
            continue;
        }
        let reference = floret_summary(tree, partition, first);
        for &other in members {
            if other.index() >= n || tree.is_leaf(other) {
                continue;
            }
            let candidate = floret_summary(tree, partition, other);
            if !same_labels(&reference, &candidate) {
                violations.push(StageViolation::LabelSetMismatch {
                    stage: si,
                    a: first,
                    b: other,
                });
                continue;
            }
            let mut presence_reported = false;
            for (label, &theta) in &reference {
                match (theta, candidate[label]) {
                    (Some(a), Some(b)) => {
                        if (a - b).abs() > tolerance {
                            violations.push(StageViolation::ThetaMismatch {
                                stage: si,
                                a: first,
                                b: other,
                                label: label.clone(),
                            });
                        }
                    }
                    (None, None) => {}
                    _ => {
                        if !presence_reported {
                            violations.push(StageViolation::ThetaPresenceMismatch {
                                stage: si,
                                a: first,
                                b: other,
                            });
                            presence_reported = true;
                        }
                    }
                }
            }
        }
    }

    Ok(violations)
}

fn floret_summary(
    tree: &EventTree,
    partition: &StagePartition,
    v: VertexId,
) -> BTreeMap<String, Option<f64>> {
    tree.out_edges(v)
        .iter()
        .map(|e| (partition.canonical_label(&e.label).to_string(), e.theta))
        .collect()
}

fn same_labels(
    a: &BTreeMap<String, Option<f64>>,
    b: &BTreeMap<String, Option<f64>>,
) -> bool {
    a.len() == b.len() && a.keys().eq(b.keys())
}

/// An event tree with a validated stage colouring and canonical edge labels.
#[derive(Debug, Clone)]
pub struct StagedTree {
    tree: EventTree,
    partition: StagePartition,
    colours: Vec<Colour>,
    stage_index: Vec<Option<usize>>,
    root_paths: Vec<Vec<String>>,
    display: BTreeMap<Colour, String>,
}

/// Validates the partition and colours the tree with it.
///
/// Stages of two or more situations receive numbered colours ordered by the
/// lexicographically smallest root path among their members; trivial stages
/// are coloured by their member's root path; leaves stay plain. Edge labels
/// are rewritten to canonical form, keeping the original spelling on the
/// edge when it differed.
pub fn apply_staging(
    tree: &EventTree,
    partition: &StagePartition,
    tolerance: f64,
) -> Result<StagedTree, ApplyStagingError> {
    let violations = validate_stage_partition(tree, partition, tolerance)?;
    if !violations.is_empty() {
        return Err(ApplyStagingError::InvalidPartition(violations));
    }

    let mut tree = tree.clone();
    if !partition.label_equivalence.is_empty() {
        for siblings in tree.adjacency_mut() {
            for edge in siblings.iter_mut() {
                let canon = partition.canonical_label(&edge.label).to_string();
                if canon != edge.label {
                    edge.original_label = Some(std::mem::replace(&mut edge.label, canon));
                }
            }
            siblings.sort_by(|a, b| a.label.cmp(&b.label));
        }
    }
    let root_paths = tree.root_paths();

    let mut shared: Vec<usize> = (0..partition.stages.len())
        .filter(|&si| partition.stages[si].len() >= 2)
        .collect();
    shared.sort_by(|&a, &b| {
        let key = |si: usize| {
            partition.stages[si]
                .iter()
                .map(|v| &root_paths[v.index()])
                .min()
                .expect("non-empty stage")
        };
        key(a).cmp(key(b))
    });

    let n = tree.vertex_count();
    let mut colours = vec![Colour::Plain; n];
    let mut stage_index = vec![None; n];
    let mut display: BTreeMap<Colour, String> = BTreeMap::new();
    for (k, &si) in shared.iter().enumerate() {
        let colour = Colour::Stage(k as u32);
        if let Some(dc) = partition.display_colours.get(&si) {
            display.insert(colour.clone(), dc.clone());
        }
        for &v in &partition.stages[si] {
            colours[v.index()] = colour.clone();
            stage_index[v.index()] = Some(si);
        }
    }
    for (si, stage) in partition.stages.iter().enumerate() {
        if stage.len() == 1 {
            let &v = stage.iter().next().expect("non-empty stage");
            let colour = Colour::singleton(&root_paths[v.index()]);
            if let Some(dc) = partition.display_colours.get(&si) {
                display.insert(colour.clone(), dc.clone());
            }
            colours[v.index()] = colour;
            stage_index[v.index()] = Some(si);
        }
    }

    Ok(StagedTree {
        tree,
        partition: partition.clone(),
        colours,
        stage_index,
        root_paths,
        display,
    })
}

impl StagedTree {
    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn partition(&self) -> &StagePartition {
        &self.partition
    }

    pub fn stage_of(&self, v: VertexId) -> Option<usize> {
        self.stage_index[v.index()]
    }

    pub fn root_paths(&self) -> &[Vec<String>] {
        &self.root_paths
    }

    pub fn display_colours(&self) -> &BTreeMap<Colour, String> {
        &self.display
    }

    pub fn situations(&self) -> Vec<VertexId> {
        self.tree.situations()
    }
}

impl ColouredDigraph for StagedTree {
    fn root(&self) -> VertexId {
        self.tree.root()
    }

    fn vertex_ids(&self) -> Vec<VertexId> {
        self.tree.vertex_ids()
    }

    fn out_edges(&self, v: VertexId) -> &[Edge] {
        self.tree.out_edges(v)
    }

    fn colour(&self, v: VertexId) -> &Colour {
        &self.colours[v.index()]
    }

    fn vertex_count(&self) -> usize {
        self.tree.vertex_count()
    }

    fn edge_count(&self) -> usize {
        self.tree.edge_count()
    }
}

/// Intersects the stage partition with a set of vertices, usually one layer
/// of the merge sweep. Cells list their members in root-path order and are
/// themselves ordered by their first member's root path.
pub fn stages_at_level(staged: &StagedTree, level: &[VertexId]) -> Vec<Vec<VertexId>> {
    let mut cells: BTreeMap<usize, Vec<VertexId>> = BTreeMap::new();
    for &v in level {
        let si = staged
            .stage_of(v)
            .expect("level vertices are staged situations");
        cells.entry(si).or_default().push(v);
    }
    let paths = staged.root_paths();
    let mut out: Vec<Vec<VertexId>> = cells.into_values().collect();
    for cell in &mut out {
        cell.sort_by(|a, b| paths[a.index()].cmp(&paths[b.index()]));
    }
    out.sort_by(|a, b| paths[a[0].index()].cmp(&paths[b[0].index()]));
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum StagerError {
    #[error("situation {0} has zero outgoing count")]
    ZeroCountSituation(VertexId),
}

/// Groups situations into stages by exact agreement of label sets and
/// relative transition frequencies, within the given tolerance.
///
/// Situations are considered in root-path order and each joins the first
/// group whose representative matches, so the result is deterministic.
pub fn naive_exact_stager(
    tree: &EventTree,
    tolerance: f64,
) -> Result<StagePartition, StagerError> {
    let paths = tree.root_paths();
    let mut situations = tree.situations();
    situations.sort_by(|a, b| paths[a.index()].cmp(&paths[b.index()]));

    struct Group {
        labels: Vec<String>,
        frequencies: Vec<f64>,
        members: BTreeSet<VertexId>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for v in situations {
        let edges = tree.out_edges(v);
        let total: u64 = edges.iter().map(|e| e.count.unwrap_or(0)).sum();
        if total == 0 {
            return Err(StagerError::ZeroCountSituation(v));
        }
        let labels: Vec<String> = edges.iter().map(|e| e.label.clone()).collect();
        let frequencies: Vec<f64> = edges
            .iter()
            .map(|e| e.count.unwrap_or(0) as f64 / total as f64)
            .collect();
        let found = groups.iter_mut().find(|g| {
            g.labels == labels
                && g.frequencies
                    .iter()
                    .zip(&frequencies)
                    .all(|(a, b)| (a - b).abs() <= tolerance)
        });
        match found {
            Some(group) => {
                group.members.insert(v);
            }
            None => groups.push(Group {
                labels,
                frequencies,
                members: BTreeSet::from([v]),
            }),
        }
    }
    Ok(StagePartition::new(
        groups.into_iter().map(|g| g.members).collect(),
    ))
}

/// Convenience for a tolerance-default application.
pub fn apply_staging_default(
    tree: &EventTree,
    partition: &StagePartition,
) -> Result<StagedTree, ApplyStagingError> {
    apply_staging(tree, partition, DEFAULT_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::construct_tree;

    fn twin_fork() -> (EventTree, BTreeMap<String, VertexId>) {
        construct_tree(&[
            ("r", "v1", "a"),
            ("r", "v2", "b"),
            ("v1", "l1", "x"),
            ("v1", "l2", "y"),
            ("v2", "l3", "x"),
            ("v2", "l4", "y"),
        ])
        .unwrap()
    }

    #[test]
    fn accepts_matching_stage() {
        let (tree, ix) = twin_fork();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ]);
        let violations =
            validate_stage_partition(&tree, &partition, DEFAULT_TOLERANCE).unwrap();
        assert!(violations.is_empty());
    }

    #[test]
    fn flags_label_set_mismatch() {
        let (tree, ix) = construct_tree(&[
            ("r", "v1", "a"),
            ("r", "v2", "b"),
            ("v1", "l1", "x"),
            ("v2", "l2", "z"),
        ])
        .unwrap();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ]);
        let violations =
            validate_stage_partition(&tree, &partition, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(
            violations,
            vec![StageViolation::LabelSetMismatch {
                stage: 1,
                a: ix["v1"],
                b: ix["v2"],
            }]
        );
    }

    #[test]
    fn label_equivalence_reconciles_spellings() {
        let (tree, ix) = construct_tree(&[
            ("r", "v1", "a"),
            ("r", "v2", "b"),
            ("v1", "l1", "recovery"),
            ("v2", "l2", "recovery*"),
        ])
        .unwrap();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ])
        .with_label_equivalence(BTreeMap::from([(
            "recovery*".to_string(),
            "recovery".to_string(),
        )]));
        let violations =
            validate_stage_partition(&tree, &partition, DEFAULT_TOLERANCE).unwrap();
        assert!(violations.is_empty());
    }

    #[test]
    fn rejects_chained_equivalence() {
        let (tree, ix) = construct_tree(&[("r", "l1", "a")]).unwrap();
        let partition = StagePartition::new(vec![BTreeSet::from([ix["r"]])])
            .with_label_equivalence(BTreeMap::from([
                ("a".to_string(), "b".to_string()),
                ("b".to_string(), "c".to_string()),
            ]));
        let violations =
            validate_stage_partition(&tree, &partition, DEFAULT_TOLERANCE).unwrap();
        assert!(violations.contains(&StageViolation::NonCanonicalEquivalence("b".into())));
    }

    #[test]
    fn hard_errors_on_leaf_membership() {
        let (tree, ix) = twin_fork();
        let partition = StagePartition::new(vec![BTreeSet::from([ix["l1"]])]);
        let err = validate_stage_partition(&tree, &partition, DEFAULT_TOLERANCE).unwrap_err();
        assert_eq!(err, StagingError::LeafInStage(ix["l1"]));
    }

    #[test]
    fn theta_disagreement_is_flagged() {
        let (mut tree, ix) = twin_fork();
        for siblings in tree.adjacency_mut() {
            for edge in siblings.iter_mut() {
                edge.theta = Some(if edge.label == "x" { 0.3 } else { 0.7 });
            }
        }
        let v2 = ix["v2"];
        tree.adjacency_mut()[v2.index()][0].theta = Some(0.4);
        tree.adjacency_mut()[v2.index()][1].theta = Some(0.6);
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ]);
        let violations =
            validate_stage_partition(&tree, &partition, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(violations.len(), 2);
        assert!(matches!(
            violations[0],
            StageViolation::ThetaMismatch { stage: 1, .. }
        ));
    }

    #[test]
    fn apply_colours_stage_members_alike() {
        let (tree, ix) = twin_fork();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ]);
        let staged = apply_staging_default(&tree, &partition).unwrap();
        assert_eq!(staged.colour(ix["v1"]), staged.colour(ix["v2"]));
        assert_eq!(staged.colour(ix["v1"]), &Colour::Stage(0));
        assert_ne!(staged.colour(ix["r"]), staged.colour(ix["v1"]));
        assert_eq!(staged.colour(ix["l1"]), &Colour::Plain);
    }

    #[test]
    fn apply_keeps_structure_intact() {
        let (tree, ix) = twin_fork();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ]);
        let staged = apply_staging_default(&tree, &partition).unwrap();
        assert_eq!(staged.tree().vertex_count(), tree.vertex_count());
        assert_eq!(staged.tree().edge_count(), tree.edge_count());
        assert_eq!(staged.tree(), &tree);
    }

    #[test]
    fn trivial_partition_gives_distinct_colours() {
        let (tree, ix) = twin_fork();
        let staged = apply_staging_default(&tree, &StagePartition::trivial(&tree)).unwrap();
        assert_ne!(staged.colour(ix["v1"]), staged.colour(ix["v2"]));
        assert!(matches!(staged.colour(ix["r"]), Colour::Singleton(_)));
    }

    #[test]
    fn rejects_uncovered_situation() {
        let (tree, ix) = twin_fork();
        let partition = StagePartition::new(vec![BTreeSet::from([ix["v1"], ix["v2"]])]);
        let err = apply_staging_default(&tree, &partition).unwrap_err();
        match err {
            ApplyStagingError::InvalidPartition(violations) => {
                assert_eq!(violations, vec![StageViolation::MissingSituation(ix["r"])]);
            }
            other => panic!("expected InvalidPartition, got {other:?}"),
        }
    }

    #[test]
    fn canonicalisation_rewrites_labels_and_keeps_originals() {
        let (tree, ix) = construct_tree(&[
            ("r", "v1", "a"),
            ("r", "v2", "b"),
            ("v1", "l1", "recovery"),
            ("v2", "l2", "recovery*"),
        ])
        .unwrap();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ])
        .with_label_equivalence(BTreeMap::from([(
            "recovery*".to_string(),
            "recovery".to_string(),
        )]));
        let staged = apply_staging_default(&tree, &partition).unwrap();
        let edge = &staged.tree().out_edges(ix["v2"])[0];
        assert_eq!(edge.label, "recovery");
        assert_eq!(edge.original_label.as_deref(), Some("recovery*"));
        let untouched = &staged.tree().out_edges(ix["v1"])[0];
        assert_eq!(untouched.original_label, None);
    }

    #[test]
    fn canonical_label_is_idempotent() {
        let partition = StagePartition::new(Vec::new()).with_label_equivalence(
            BTreeMap::from([("b".to_string(), "a".to_string())]),
        );
        let once = partition.canonical_label("b");
        assert_eq!(partition.canonical_label(once), once);
        assert_eq!(partition.canonical_label("a"), "a");
        assert_eq!(partition.canonical_label("c"), "c");
    }

    #[test]
    fn stage_cells_intersect_level() {
        let (tree, ix) = twin_fork();
        let partition = StagePartition::new(vec![
            BTreeSet::from([ix["r"]]),
            BTreeSet::from([ix["v1"], ix["v2"]]),
        ]);
        let staged = apply_staging_default(&tree, &partition).unwrap();
        let cells = stages_at_level(&staged, &[ix["v1"], ix["v2"]]);
        assert_eq!(cells, vec![vec![ix["v1"], ix["v2"]]]);
        let cells = stages_at_level(&staged, &[ix["r"]]);
        assert_eq!(cells, vec![vec![ix["r"]]]);
    }

    #[test]
    fn stager_merges_proportional_counts() {
        let (mut tree, ix) = twin_fork();
        let v1 = ix["v1"];
        let v2 = ix["v2"];
        tree.adjacency_mut()[v1.index()][0].count = Some(3);
        tree.adjacency_mut()[v1.index()][1].count = Some(7);
        tree.adjacency_mut()[v2.index()][0].count = Some(30);
        tree.adjacency_mut()[v2.index()][1].count = Some(70);
        let r = ix["r"];
        tree.adjacency_mut()[r.index()][0].count = Some(10);
        tree.adjacency_mut()[r.index()][1].count = Some(100);
        let partition = naive_exact_stager(&tree, DEFAULT_TOLERANCE).unwrap();
        assert!(partition
            .stages()
            .iter()
            .any(|s| *s == BTreeSet::from([v1, v2])));
        assert!(partition.stages().iter().any(|s| *s == BTreeSet::from([r])));
    }

    #[test]
    fn stager_separates_different_frequencies() {
        let (mut tree, ix) = twin_fork();
        let v1 = ix["v1"];
        let v2 = ix["v2"];
        tree.adjacency_mut()[v1.index()][0].count = Some(3);
        tree.adjacency_mut()[v1.index()][1].count = Some(7);
        tree.adjacency_mut()[v2.index()][0].count = Some(4);
        tree.adjacency_mut()[v2.index()][1].count = Some(6);
        let r = ix["r"];
        tree.adjacency_mut()[r.index()][0].count = Some(1);
        tree.adjacency_mut()[r.index()][1].count = Some(1);
        let partition = naive_exact_stager(&tree, DEFAULT_TOLERANCE).unwrap();
        assert_eq!(partition.stages().len(), 3);
    }

    #[test]
    fn stager_rejects_zero_counts() {
        let (tree, ix) = twin_fork();
        let err = naive_exact_stager(&tree, DEFAULT_TOLERANCE).unwrap_err();
        assert_eq!(err, StagerError::ZeroCountSituation(ix["r"]));
    }
}
