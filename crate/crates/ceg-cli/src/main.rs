//! Batch pipeline around the ceg library: ingest event-path CSVs into
//! trees, propose stagings, compact staged trees into chain event graphs,
//! check graphs against their own reconstruction and benchmark the sweep
//! strategies against each other.
//!
//! Exit codes: 2 for unreadable or malformed inputs, 3 for a staging that
//! does not validate against its tree, 4 for a graph whose path structure
//! cannot be unfolded back into a staged tree, 1 for a failed round-trip
//! verdict.

use std::collections::BTreeMap;
use std::fmt::{Debug, Display};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ceg::strategies;
use ceg::{
    apply_staging, ceg_from_json, ceg_to_dot, ceg_to_json, compact_with, depth, ingest_records,
    key_names, naive_exact_stager, random_staged_tree, reconstruct, staging_from_json,
    staging_to_json, strategy_by_name, trace_to_json, tree_from_json, tree_to_json,
    cegs_isomorphic, ColouredDigraph, CompactionMode, CompactionStrategy, GeneratorParams,
    RecordTable, StagedTree, StopReason, TableReadError, VertexId, DEFAULT_SENTINEL,
    DEFAULT_TOLERANCE,
};
use clap::{Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Parser)]
#[command(name = "ceg", version, about = "Chain event graph pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an event tree from a CSV of observed event paths.
    Build {
        /// CSV file with one observation per row.
        #[arg(long)]
        csv: PathBuf,
        /// Comma-separated column names giving the event order.
        #[arg(long, value_delimiter = ',', required = true)]
        order: Vec<String>,
        /// Cell value marking a path that ends before the last column.
        #[arg(long, default_value = DEFAULT_SENTINEL)]
        sentinel: String,
        /// Output path for the tree JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Propose a stage partition from a tree's edge counts.
    Stage {
        /// Tree JSON produced by `build`.
        #[arg(long)]
        tree: PathBuf,
        /// Output path for the staging JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compact a staged tree into a chain event graph.
    Compact {
        /// Tree JSON produced by `build`.
        #[arg(long)]
        tree: PathBuf,
        /// Staging JSON naming the stages of the tree.
        #[arg(long)]
        staging: PathBuf,
        /// Sweep strategy, by registry name.
        #[arg(long, default_value = "optimal")]
        mode: String,
        /// Output path for the graph JSON.
        #[arg(long)]
        out: PathBuf,
        /// Also render the graph in DOT format to this path.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Also write the per-iteration merge trace JSON to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Rebuild a staged tree from a graph and check it compacts back.
    Roundtrip {
        /// Graph JSON produced by `compact`.
        #[arg(long)]
        ceg: PathBuf,
    },
    /// Compare both sweep strategies over a corpus or random instances.
    Bench {
        /// Directory of `<name>.tree.json` + `<name>.staging.json` bundles.
        #[arg(long, conflicts_with = "random")]
        corpus: Option<PathBuf>,
        /// Number of random staged trees to generate instead.
        #[arg(long)]
        random: Option<usize>,
        /// Depth of generated trees.
        #[arg(long, default_value_t = 6)]
        depth: usize,
        /// Maximum branching factor of generated trees.
        #[arg(long, default_value_t = 3)]
        branching: usize,
        /// Probability that a mergeable situation joins its stage.
        #[arg(long = "stage-density", default_value_t = 0.5)]
        stage_density: f64,
        /// Seed for the generator.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output path for the comparison CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum Failure {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    InvalidPartition(String),
    #[error("{0}")]
    Reconstruct(String),
    #[error("{0}")]
    VerdictNo(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::InvalidPartition(_) => 3,
            Failure::Reconstruct(_) => 4,
            Failure::VerdictNo(_) => 1,
        }
    }
}

/// Prefixes the message with the error's variant name so scripts can match
/// on a stable token while humans read the full sentence.
fn named<E: Debug + Display>(err: E) -> String {
    let debug = format!("{err:?}");
    let name: String = debug
        .chars()
        .take_while(|c| c.is_alphanumeric() || *c == '_')
        .collect();
    format!("{name}: {err}")
}

fn parse_failure<E: Debug + Display>(err: E) -> Failure {
    Failure::Parse(named(err))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("Io: cannot read {}: {e}", path.display())))
}

fn write_text(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, format!("{contents}\n"))
        .map_err(|e| Failure::Parse(format!("Io: cannot write {}: {e}", path.display())))
}

/// Staging tolerance, overridable through the CEG_TOLERANCE variable.
fn tolerance_from_env() -> Result<f64, Failure> {
    let Ok(raw) = std::env::var("CEG_TOLERANCE") else {
        return Ok(DEFAULT_TOLERANCE);
    };
    let value: f64 = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Parse(format!("Tolerance: CEG_TOLERANCE {raw:?} is not a number")))?;
    if !value.is_finite() || value < 0.0 {
        return Err(Failure::Parse(format!(
            "Tolerance: CEG_TOLERANCE must be a finite non-negative number, got {raw:?}"
        )));
    }
    Ok(value)
}

fn resolve_strategy(name: &str) -> Result<&'static dyn CompactionStrategy, Failure> {
    strategy_by_name(name).ok_or_else(|| {
        let known: Vec<&str> = strategies().iter().map(|s| s.name()).collect();
        Failure::Parse(format!(
            "UnknownMode: no strategy named {name:?}; registered: {}",
            known.join(", ")
        ))
    })
}

fn load_tree(path: &Path) -> Result<(ceg::EventTree, BTreeMap<String, VertexId>), Failure> {
    tree_from_json(&read_text(path)?).map_err(parse_failure)
}

fn load_staged(tree: &Path, staging: &Path, tolerance: f64) -> Result<StagedTree, Failure> {
    let (tree, index) = load_tree(tree)?;
    let partition = staging_from_json(&read_text(staging)?, &index).map_err(parse_failure)?;
    apply_staging(&tree, &partition, tolerance).map_err(|e| Failure::InvalidPartition(named(e)))
}

fn cmd_build(csv: &Path, order: &[String], sentinel: &str, out: &Path) -> Result<(), Failure> {
    let table = RecordTable::from_csv_path(csv).map_err(|e| match e {
        TableReadError::Csv(inner) => parse_failure(inner),
        TableReadError::Table(inner) => parse_failure(inner),
    })?;
    let tree = ingest_records(&table, order, sentinel).map_err(parse_failure)?;
    write_text(out, &tree_to_json(&tree))?;
    println!(
        "situations: {}, depth: {}, leaves: {}",
        tree.situations().len(),
        depth(&tree),
        tree.leaves().len()
    );
    Ok(())
}

fn cmd_stage(tree: &Path, out: &Path) -> Result<(), Failure> {
    let tolerance = tolerance_from_env()?;
    let (tree, index) = load_tree(tree)?;
    let partition = naive_exact_stager(&tree, tolerance).map_err(parse_failure)?;
    write_text(out, &staging_to_json(&partition, &key_names(&index)))?;
    let shared = partition.stages().iter().filter(|s| s.len() >= 2).count();
    println!(
        "stages: {} ({} with two or more members)",
        partition.stages().len(),
        shared
    );
    Ok(())
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::Fixpoint => "fixpoint",
        StopReason::FullDepth => "full-depth",
    }
}

fn cmd_compact(
    tree: &Path,
    staging: &Path,
    mode: &str,
    out: &Path,
    dot: Option<&Path>,
    trace: Option<&Path>,
) -> Result<(), Failure> {
    let strategy = resolve_strategy(mode)?;
    let tolerance = tolerance_from_env()?;
    let (_, index) = load_tree(tree)?;
    let staged = load_staged(tree, staging, tolerance)?;
    let outcome = compact_with(&staged, strategy);

    write_text(out, &ceg_to_json(&outcome.ceg))?;
    if let Some(path) = dot {
        write_text(path, &ceg_to_dot(&outcome.ceg, staged.display_colours()))?;
    }
    if let Some(path) = trace {
        write_text(path, &trace_to_json(&outcome.trace, &key_names(&index)))?;
    }
    println!(
        "{}: {} situations -> {} vertices, {} edges in {} iterations (stop: {})",
        outcome.trace.mode,
        staged.situations().len(),
        outcome.ceg.vertex_count(),
        outcome.ceg.edge_count(),
        outcome.trace.iterations.len(),
        stop_name(outcome.trace.stop),
    );
    Ok(())
}

fn cmd_roundtrip(path: &Path) -> Result<(), Failure> {
    let graph = ceg_from_json(&read_text(path)?).map_err(parse_failure)?;
    let staged = reconstruct(&graph).map_err(|e| Failure::Reconstruct(named(e)))?;
    let again = compact_with(&staged, CompactionMode::Optimal.strategy());
    if cegs_isomorphic(&graph, &again.ceg) {
        println!(
            "roundtrip: yes ({} vertices, {} edges)",
            graph.vertex_count(),
            graph.edge_count()
        );
        Ok(())
    } else {
        println!("roundtrip: no");
        Err(Failure::VerdictNo(format!(
            "recompacting the reconstruction gives {} vertices, the input has {}",
            again.ceg.vertex_count(),
            graph.vertex_count()
        )))
    }
}

struct BenchRow {
    instance: String,
    situations: usize,
    depth: usize,
    t_baseline_ms: f64,
    v_baseline: usize,
    t_optimal_ms: f64,
    v_optimal: usize,
}

fn bench_instances(
    corpus: Option<&Path>,
    random: Option<usize>,
    params: GeneratorParams,
    seed: u64,
    skipped: &mut Vec<String>,
) -> Result<Vec<(String, StagedTree)>, Failure> {
    let mut instances = Vec::new();
    if let Some(dir) = corpus {
        let tolerance = tolerance_from_env()?;
        let entries = fs::read_dir(dir)
            .map_err(|e| Failure::Parse(format!("Io: cannot read {}: {e}", dir.display())))?;
        let mut stems: Vec<String> = entries
            .filter_map(|entry| entry.ok())
            .filter_map(|entry| {
                let name = entry.file_name().to_string_lossy().into_owned();
                name.strip_suffix(".tree.json").map(str::to_string)
            })
            .collect();
        stems.sort();
        for stem in stems {
            let tree = dir.join(format!("{stem}.tree.json"));
            let staging = dir.join(format!("{stem}.staging.json"));
            match load_staged(&tree, &staging, tolerance) {
                Ok(staged) => instances.push((stem, staged)),
                Err(failure) => skipped.push(format!("{stem}: {failure}")),
            }
        }
    } else if let Some(count) = random {
        if params.depth < 1 || params.max_branching < 1 {
            return Err(Failure::Parse(
                "Generator: --depth and --branching must be at least 1".to_string(),
            ));
        }
        if !(0.0..=1.0).contains(&params.stage_density) {
            return Err(Failure::Parse(
                "Generator: --stage-density must lie in [0, 1]".to_string(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..count {
            instances.push((format!("random-{i}"), random_staged_tree(params, &mut rng)));
        }
    } else {
        return Err(Failure::Parse(
            "Bench: pass either --corpus or --random".to_string(),
        ));
    }
    Ok(instances)
}

fn cmd_bench(
    corpus: Option<&Path>,
    random: Option<usize>,
    params: GeneratorParams,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut skipped = Vec::new();
    let instances = bench_instances(corpus, random, params, seed, &mut skipped)?;

    let mut rows = Vec::with_capacity(instances.len());
    let mut unequal = Vec::new();
    for (name, staged) in &instances {
        let baseline = compact_with(staged, CompactionMode::Baseline.strategy());
        let optimal = compact_with(staged, CompactionMode::Optimal.strategy());
        if baseline.ceg.vertex_count() != optimal.ceg.vertex_count() {
            unequal.push(name.clone());
        }
        rows.push(BenchRow {
            instance: name.clone(),
            situations: staged.situations().len(),
            depth: baseline.trace.depth,
            t_baseline_ms: baseline.trace.total_elapsed.as_secs_f64() * 1e3,
            v_baseline: baseline.ceg.vertex_count(),
            t_optimal_ms: optimal.trace.total_elapsed.as_secs_f64() * 1e3,
            v_optimal: optimal.ceg.vertex_count(),
        });
    }

    let sink: Box<dyn io::Write> = match out {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| {
            Failure::Parse(format!("Io: cannot write {}: {e}", path.display()))
        })?),
        None => Box::new(io::stdout()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let emit = |writer: &mut csv::Writer<Box<dyn io::Write>>| -> csv::Result<()> {
        writer.write_record([
            "instance",
            "situations",
            "depth",
            "t_baseline_ms",
            "v_baseline",
            "t_optimal_ms",
            "v_optimal",
            "equal",
        ])?;
        for row in &rows {
            writer.write_record([
                row.instance.clone(),
                row.situations.to_string(),
                row.depth.to_string(),
                format!("{:.4}", row.t_baseline_ms),
                row.v_baseline.to_string(),
                format!("{:.4}", row.t_optimal_ms),
                row.v_optimal.to_string(),
                (row.v_baseline == row.v_optimal).to_string(),
            ])?;
        }
        writer.flush()?;
        Ok(())
    };
    emit(&mut writer).map_err(|e| Failure::Parse(format!("Io: cannot emit CSV: {e}")))?;

    for line in &skipped {
        eprintln!("skipped: {line}");
    }
    for name in &unequal {
        eprintln!("size mismatch between modes: {name}");
    }
    if out.is_some() {
        println!(
            "instances benchmarked: {} ({} skipped, {} size mismatches)",
            rows.len(),
            skipped.len(),
            unequal.len()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Build {
            csv,
            order,
            sentinel,
            out,
        } => cmd_build(&csv, &order, &sentinel, &out),
        Command::Stage { tree, out } => cmd_stage(&tree, &out),
        Command::Compact {
            tree,
            staging,
            mode,
            out,
            dot,
            trace,
        } => cmd_compact(
            &tree,
            &staging,
            &mode,
            &out,
            dot.as_deref(),
            trace.as_deref(),
        ),
        Command::Roundtrip { ceg } => cmd_roundtrip(&ceg),
        Command::Bench {
            corpus,
            random,
            depth,
            branching,
            stage_density,
            seed,
            out,
        } => cmd_bench(
            corpus.as_deref(),
            random,
            GeneratorParams {
                depth,
                max_branching: branching,
                stage_density,
            },
            seed,
            out.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
