//! Acceptance suite: eight end-to-end checks over seeded random corpora
//! and the worked examples, one test per criterion, each printing a
//! single PASS line with its tally and elapsed time.

use std::time::{Duration, Instant};

use ceg::oracle::positions_brute_force;
use ceg::samples;
use ceg::{
    cegs_isomorphic, compact, compact_recording, isomorphic, paths, random_staged_tree,
    reconstruct, ColouredDigraph, CompactionMode, GeneratorParams, StagePartition, StagedTree,
    StopReason,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 0xCE60;
const ROUNDTRIP_BUDGET: Duration = Duration::from_secs(30);
const ORACLE_BUDGET: Duration = Duration::from_secs(10);
const DENSITIES: [f64; 5] = [0.0, 0.2, 0.5, 0.8, 1.0];

fn corpus_500() -> Vec<StagedTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..500)
        .map(|i| {
            random_staged_tree(
                GeneratorParams {
                    depth: 1 + (i % 7),
                    max_branching: 1 + (i % 4),
                    stage_density: DENSITIES[i % DENSITIES.len()],
                },
                &mut rng,
            )
        })
        .collect()
}

fn small_corpus(count: usize) -> Vec<StagedTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED + 1);
    let mut out = Vec::with_capacity(count);
    let mut attempt = 0usize;
    while out.len() < count {
        assert!(attempt < 10 * count, "generator starves the small corpus");
        let staged = random_staged_tree(
            GeneratorParams {
                depth: 1 + (attempt % 4),
                max_branching: 1 + (attempt % 3),
                stage_density: DENSITIES[attempt % DENSITIES.len()],
            },
            &mut rng,
        );
        attempt += 1;
        if staged.situations().len() <= 50 {
            out.push(staged);
        }
    }
    out
}

#[test]
fn criterion_1_roundtrip_identity() {
    let start = Instant::now();
    let corpus = corpus_500();
    let mut passes = 0;
    for staged in &corpus {
        let outcome = compact(staged, CompactionMode::Optimal);
        let rebuilt = reconstruct(&outcome.ceg).expect("compacted graphs reconstruct");
        if isomorphic(&rebuilt, staged) {
            passes += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(passes, corpus.len());
    assert!(
        elapsed < ROUNDTRIP_BUDGET,
        "round-trips took {elapsed:?}, budget {ROUNDTRIP_BUDGET:?}"
    );
    println!(
        "acceptance 1 (round-trip identity): PASS ({passes}/{}) in {elapsed:?}",
        corpus.len()
    );
}

#[test]
fn criterion_2_mode_equivalence() {
    let start = Instant::now();
    let corpus = corpus_500();
    let mut passes = 0;
    for staged in &corpus {
        let optimal = compact(staged, CompactionMode::Optimal).ceg;
        let baseline = compact(staged, CompactionMode::Baseline).ceg;
        if optimal.vertex_count() == baseline.vertex_count()
            && cegs_isomorphic(&optimal, &baseline)
        {
            passes += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(passes, corpus.len());
    println!(
        "acceptance 2 (mode equivalence): PASS ({passes}/{}) in {elapsed:?}",
        corpus.len()
    );
}

#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let corpus = small_corpus(200);
    let mut passes = 0;
    for staged in &corpus {
        let outcome = compact(staged, CompactionMode::Optimal);
        let accumulated = outcome.trace.accumulated_positions(staged);
        let oracle = positions_brute_force(staged).expect("small instances fit the guard");
        if accumulated == oracle {
            passes += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(passes, corpus.len());
    assert!(
        elapsed < ORACLE_BUDGET,
        "oracle comparisons took {elapsed:?}, budget {ORACLE_BUDGET:?}"
    );
    println!(
        "acceptance 3 (oracle equivalence): PASS ({passes}/{}) in {elapsed:?}",
        corpus.len()
    );
}

#[test]
fn criterion_4_path_preservation() {
    let start = Instant::now();
    let corpus = corpus_500();
    let mut violations = 0usize;
    let mut steps = 0usize;
    for staged in &corpus {
        let (_, snapshots) = compact_recording(staged, CompactionMode::Optimal);
        let mut previous_paths = paths(staged);
        let mut previous_vertices = staged.vertex_count();
        let mut previous_edges = staged.edge_count();
        for snapshot in &snapshots {
            steps += 1;
            let current = paths(snapshot);
            if current != previous_paths {
                violations += 1;
            }
            if snapshot.vertex_count() > previous_vertices
                || snapshot.edge_count() > previous_edges
            {
                violations += 1;
            }
            previous_paths = current;
            previous_vertices = snapshot.vertex_count();
            previous_edges = snapshot.edge_count();
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(violations, 0);
    println!(
        "acceptance 4 (path preservation): PASS (0 violations over {steps} steps) in {elapsed:?}"
    );
}

#[test]
fn criterion_5_early_stop_validity() {
    let start = Instant::now();
    let corpus = corpus_500();
    let mut passes = 0;
    let sample = &corpus[..200];
    for staged in sample {
        let optimal = compact(staged, CompactionMode::Optimal);
        let baseline = compact(staged, CompactionMode::Baseline);
        let clean = match optimal.trace.stop {
            StopReason::Fixpoint => {
                let stop_layer = optimal
                    .trace
                    .iterations
                    .last()
                    .expect("fixpoint stop implies an iteration")
                    .layer;
                baseline
                    .trace
                    .iterations
                    .iter()
                    .filter(|it| it.layer >= stop_layer)
                    .all(|it| it.absorbed.is_empty())
            }
            StopReason::FullDepth => true,
        };
        if clean {
            passes += 1;
        }
    }
    let elapsed = start.elapsed();
    assert_eq!(passes, sample.len());
    println!(
        "acceptance 5 (early-stop validity): PASS ({passes}/{}) in {elapsed:?}",
        sample.len()
    );
}

#[test]
fn criterion_6_efficiency_trend() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED + 2);
    let mut rows = Vec::new();
    let mut attempt = 0usize;
    while rows.len() < 50 {
        assert!(attempt < 500, "generator starves the deep corpus");
        let staged = random_staged_tree(
            GeneratorParams {
                depth: 8 + (attempt % 3),
                max_branching: 2 + (attempt % 2),
                stage_density: [0.6, 0.8, 1.0][attempt % 3],
            },
            &mut rng,
        );
        attempt += 1;
        let optimal = compact(&staged, CompactionMode::Optimal);
        let tree_depth = optimal.trace.depth;
        let stop_layer = match optimal.trace.stop {
            StopReason::Fixpoint => optimal
                .trace
                .iterations
                .last()
                .map(|it| it.layer)
                .unwrap_or(0),
            StopReason::FullDepth => continue,
        };
        if stop_layer >= tree_depth - 1 {
            continue;
        }
        let baseline = compact(&staged, CompactionMode::Baseline);
        rows.push((
            staged.situations().len(),
            tree_depth,
            baseline.trace.total_elapsed.as_secs_f64() * 1e3,
            baseline.ceg.vertex_count(),
            baseline.trace.iterations.len(),
            optimal.trace.total_elapsed.as_secs_f64() * 1e3,
            optimal.ceg.vertex_count(),
            optimal.trace.iterations.len(),
        ));
    }

    let always_fewer_iterations = rows.iter().all(|r| r.7 < r.4);
    let all_equal_sizes = rows.iter().all(|r| r.3 == r.6);
    let median = |mut xs: Vec<f64>| -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mid = xs.len() / 2;
        if xs.len().is_multiple_of(2) {
            (xs[mid - 1] + xs[mid]) / 2.0
        } else {
            xs[mid]
        }
    };
    let median_baseline = median(rows.iter().map(|r| r.2).collect());
    let median_optimal = median(rows.iter().map(|r| r.5).collect());

    let csv_path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("mode_comparison.csv");
    let mut writer = csv::Writer::from_path(&csv_path).expect("CSV file opens");
    writer
        .write_record([
            "instance",
            "situations",
            "depth",
            "t_baseline_ms",
            "v_baseline",
            "t_optimal_ms",
            "v_optimal",
            "equal",
        ])
        .unwrap();
    for (i, r) in rows.iter().enumerate() {
        writer
            .write_record([
                i.to_string(),
                r.0.to_string(),
                r.1.to_string(),
                format!("{:.4}", r.2),
                r.3.to_string(),
                format!("{:.4}", r.5),
                r.6.to_string(),
                (r.3 == r.6).to_string(),
            ])
            .unwrap();
    }
    writer.flush().unwrap();

    let elapsed = start.elapsed();
    assert!(all_equal_sizes);
    assert!(always_fewer_iterations);
    assert!(
        median_optimal <= median_baseline,
        "median optimal {median_optimal:.4} ms vs baseline {median_baseline:.4} ms"
    );
    println!(
        "acceptance 6 (efficiency trend): PASS (50/50, medians {median_optimal:.4} <= {median_baseline:.4} ms, CSV at {}) in {elapsed:?}",
        csv_path.display()
    );
}

#[test]
fn criterion_7_worked_examples() {
    let start = Instant::now();
    let mut checked = 0;

    let (twin, _) = samples::twin_fork();
    let (lopsided, _) = samples::lopsided_fork();
    let cases: [(&str, &StagedTree, usize); 2] =
        [("twin fork", &twin, 3), ("lopsided fork", &lopsided, 3)];
    for (name, staged, expected) in cases {
        let oracle_cells = positions_brute_force(staged).unwrap().cell_count();
        for mode in [CompactionMode::Optimal, CompactionMode::Baseline] {
            let ceg = compact(staged, mode).ceg;
            assert_eq!(ceg.vertex_count(), oracle_cells + 1, "{name}");
            assert_eq!(ceg.vertex_count(), expected, "{name}");
            checked += 1;
        }
    }

    for (staging, expected) in [
        (samples::DiseaseStaging::SeparateRecoveries, 11),
        (samples::DiseaseStaging::MergedRecoveries, 10),
    ] {
        let (staged, _) = samples::disease_tree(staging);
        let oracle_cells = positions_brute_force(&staged).unwrap().cell_count();
        assert_eq!(oracle_cells + 1, expected, "{staging:?}");
        for mode in [CompactionMode::Optimal, CompactionMode::Baseline] {
            let ceg = compact(&staged, mode).ceg;
            assert_eq!(ceg.vertex_count(), expected, "{staging:?}");
            checked += 1;
        }
    }

    let elapsed = start.elapsed();
    println!("acceptance 7 (worked examples): PASS ({checked}/8 compactions) in {elapsed:?}");
}

#[test]
fn criterion_8_degenerate_inputs() {
    let start = Instant::now();
    let mut checked = 0;

    let floret = samples::single_floret(4);
    let chain = samples::chain(6);
    let (disease_tree, _) = samples::disease_event_tree();
    let all_singleton = ceg::apply_staging(
        &disease_tree,
        &StagePartition::trivial(&disease_tree),
        ceg::DEFAULT_TOLERANCE,
    )
    .unwrap();

    for (name, staged) in [
        ("single floret", &floret),
        ("chain", &chain),
        ("all-singleton staging", &all_singleton),
    ] {
        let situations = staged.situations().len();
        for mode in [CompactionMode::Optimal, CompactionMode::Baseline] {
            let ceg = compact(staged, mode).ceg;
            assert_eq!(ceg.vertex_count(), situations + 1, "{name}");
            checked += 1;
        }
    }

    let elapsed = start.elapsed();
    println!("acceptance 8 (degenerate inputs): PASS ({checked}/6 compactions) in {elapsed:?}");
}
