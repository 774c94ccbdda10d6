//! Small built-in staged trees used by the tests, the benchmarks and the
//! documentation examples.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::tree::{build_tree, EdgeRecord};
use crate::graph::{EventTree, VertexId};
use crate::staging::{apply_staging_default, StagePartition, StagedTree};

/// Two root alternatives that unfold identically: the smallest tree with a
/// non-trivial stage. Compacts to a single interior position.
pub fn twin_fork() -> (StagedTree, BTreeMap<String, VertexId>) {
    let (tree, ix) = crate::graph::construct_tree(&[
        ("r", "v1", "a"),
        ("r", "v2", "b"),
        ("v1", "l1", "x"),
        ("v1", "l2", "y"),
        ("v2", "l3", "x"),
        ("v2", "l4", "y"),
    ])
    .unwrap();
    let partition = StagePartition::new(vec![
        BTreeSet::from([ix["r"]]),
        BTreeSet::from([ix["v1"], ix["v2"]]),
    ]);
    let staged = apply_staging_default(&tree, &partition).unwrap();
    (staged, ix)
}

/// One branch unfolds further while the other stops immediately, so the two
/// root-to-leaf paths differ in length. Trivially staged.
pub fn lopsided_fork() -> (StagedTree, BTreeMap<String, VertexId>) {
    let (tree, ix) = crate::graph::construct_tree(&[
        ("r", "v1", "a"),
        ("r", "l0", "b"),
        ("v1", "l1", "x"),
        ("v1", "l2", "y"),
    ])
    .unwrap();
    let staged = apply_staging_default(&tree, &StagePartition::trivial(&tree)).unwrap();
    (staged, ix)
}

/// A single path of `length` edges, trivially staged.
pub fn chain(length: usize) -> StagedTree {
    assert!(length >= 1);
    let mut records = Vec::new();
    for i in 0..length {
        records.push(EdgeRecord::new(format!("s{i}"), format!("s{}", i + 1), "next"));
    }
    let (tree, _) = build_tree(records).unwrap();
    apply_staging_default(&tree, &StagePartition::trivial(&tree)).unwrap()
}

/// A root with `fanout` immediate leaves, trivially staged.
pub fn single_floret(fanout: usize) -> StagedTree {
    assert!(fanout >= 1);
    let records = (0..fanout)
        .map(|i| EdgeRecord::new("r", format!("l{i}"), format!("o{i}")))
        .collect();
    let (tree, _) = build_tree(records).unwrap();
    apply_staging_default(&tree, &StagePartition::trivial(&tree)).unwrap()
}

/// Stage colourings available for [`disease_tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiseaseStaging {
    /// Tested-positive and untreated patients are staged separately.
    SeparateRecoveries,
    /// A label equivalence folds the untreated recovery outcome onto the
    /// treated one, letting both groups share a single stage.
    MergedRecoveries,
}

/// A patient pathway: where someone falls ill, whether they are tested,
/// the test outcome and whether they recover. Mimics the shape of a
/// textbook public-health unfolding with asymmetric branch depths.
pub fn disease_tree(staging: DiseaseStaging) -> (StagedTree, BTreeMap<String, VertexId>) {
    let theta = |parent: &str, child: &str, label: &str, value: f64| {
        let mut record = EdgeRecord::new(parent, child, label);
        record.theta = Some(value);
        record
    };
    let mut records = vec![
        theta("root", "H", "hospital", 0.5),
        theta("root", "C", "care_home", 0.3),
        theta("root", "G", "community", 0.2),
        theta("H", "TH", "test", 0.7),
        theta("H", "NH", "no_test", 0.3),
        theta("C", "TC", "test", 0.6),
        theta("C", "NC", "no_test", 0.4),
        theta("G", "TG", "test", 0.2),
        theta("G", "NG", "no_test", 0.8),
    ];
    for s in ["H", "C", "G"] {
        records.push(theta(&format!("T{s}"), &format!("P{s}"), "positive", 0.3));
        records.push(theta(&format!("T{s}"), &format!("T{s}neg"), "negative", 0.7));
        records.push(theta(&format!("P{s}"), &format!("P{s}rec"), "recover", 0.8));
        records.push(theta(&format!("P{s}"), &format!("P{s}die"), "die", 0.2));
    }
    for s in ["H", "C"] {
        records.push(theta(&format!("N{s}"), &format!("N{s}rec"), "recover*", 0.8));
        records.push(theta(&format!("N{s}"), &format!("N{s}die"), "die", 0.2));
    }
    records.push(theta("NG", "NGrec", "recover*", 0.6));
    records.push(theta("NG", "NGdie", "die", 0.4));

    let (tree, ix) = build_tree(records).unwrap();
    let singleton = |k: &str| BTreeSet::from([ix[k]]);
    let mut stages = vec![
        singleton("root"),
        singleton("H"),
        singleton("C"),
        singleton("G"),
        singleton("TH"),
        singleton("TC"),
        singleton("TG"),
        singleton("NG"),
    ];
    let partition = match staging {
        DiseaseStaging::SeparateRecoveries => {
            stages.push(BTreeSet::from([ix["PH"], ix["PC"], ix["PG"]]));
            stages.push(BTreeSet::from([ix["NH"], ix["NC"]]));
            StagePartition::new(stages)
        }
        DiseaseStaging::MergedRecoveries => {
            stages.push(BTreeSet::from([
                ix["PH"],
                ix["PC"],
                ix["PG"],
                ix["NH"],
                ix["NC"],
            ]));
            StagePartition::new(stages).with_label_equivalence(BTreeMap::from([(
                "recover*".to_string(),
                "recover".to_string(),
            )]))
        }
    };
    let staged = apply_staging_default(&tree, &partition).unwrap();
    (staged, ix)
}

/// The raw disease tree without any staging applied, for ingest and
/// serialisation tests.
pub fn disease_event_tree() -> (EventTree, BTreeMap<String, VertexId>) {
    let (staged, ix) = disease_tree(DiseaseStaging::SeparateRecoveries);
    (staged.tree().clone(), ix)
}
