//! Chain event graphs from staged trees.
//!
//! An event tree unfolds a process outcome by outcome; a stage partition
//! declares which situations share transition behaviour. This crate builds
//! such trees from record data, validates and applies stage partitions,
//! compacts staged trees into chain event graphs by a level-wise merge
//! sweep, reconstructs the tree back from a graph's path signatures, and
//! ships an independent brute-force oracle for the position partition,
//! JSON formats for every artefact, DOT rendering, and a random
//! staged-tree generator for tests and benchmarks.

pub mod compaction;
pub mod generate;
pub mod graph;
pub mod ingest;
pub mod io;
pub mod oracle;
pub mod roundtrip;
pub mod samples;
pub mod staging;

pub use graph::{
    depth, distance_partition, floret, paths, Ceg, Colour, ColouredDigraph, ColouredGraph,
    Edge, EventTree, PathSignature, VertexId, DEFAULT_TOLERANCE,
};
pub use compaction::{
    compact, compact_recording, compact_with, count_merge_work, strategies, strategy_by_name,
    CompactionMode, CompactionOutcome, CompactionStrategy, MergeTrace, StopReason,
};
pub use generate::{random_staged_tree, GeneratorParams};
pub use ingest::{
    add_sampling_zero, ingest_records, IngestError, RecordTable, SamplingZeroError,
    TableReadError, DEFAULT_SENTINEL,
};
pub use io::{
    ceg_from_json, ceg_to_dot, ceg_to_json, key_names, staging_from_json, staging_to_json,
    trace_to_json, tree_from_json, tree_to_json, FormatError,
};
pub use roundtrip::{
    cegs_isomorphic, isomorphic, reconstruct, reconstruct_from_paths, ReconstructError,
};
pub use staging::{apply_staging, naive_exact_stager, StagePartition, StagedTree};
