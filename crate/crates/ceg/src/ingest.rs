//! Building event trees with counts from tables of categorical records.
//!
//! Each retained row traces one root-to-leaf path through a prefix tree;
//! edge counts tally the rows traversing them. Value combinations never
//! observed simply have no branch. A reserved sentinel value ends a row's
//! path early, which is how processes whose futures close off mid-way
//! (and hence non-stratified trees) are written down. Unobserved but
//! possible outcomes can be added afterwards as zero-count edges.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, Trim};
use thiserror::Error;

use crate::graph::tree::{build_tree, EdgeRecord};
use crate::graph::{ColouredDigraph, Edge, EventTree, VertexId};

/// Cell value that terminates a row's path at the preceding vertex.
pub const DEFAULT_SENTINEL: &str = "NA-STOP";

/// A table of categorical records: named columns and rows of optional
/// values, missing cells marked rather than skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordTable {
    columns: Vec<String>,
    rows: Vec<Vec<Option<String>>>,
}

#[derive(Debug, Error, PartialEq)]
pub enum IngestError {
    #[error("no rows to retain")]
    EmptyTable,
    #[error("column {0:?} is not in the table")]
    UnknownColumn(String),
    #[error("column {0:?} appears more than once")]
    DuplicateColumn(String),
    #[error("row {0} does not have one cell per column")]
    RaggedRow(usize),
    #[error("some rows stop at {route:?} while others continue through it")]
    ConflictingTermination { route: String },
}

#[derive(Debug, Error)]
pub enum TableReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Table(#[from] IngestError),
}

impl RecordTable {
    /// Normalises cells by trimming surrounding whitespace; a cell that is
    /// empty after trimming counts as missing.
    pub fn new(
        columns: Vec<String>,
        rows: Vec<Vec<Option<String>>>,
    ) -> Result<Self, IngestError> {
        for (i, name) in columns.iter().enumerate() {
            if columns[..i].contains(name) {
                return Err(IngestError::DuplicateColumn(name.clone()));
            }
        }
        let mut normalised = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != columns.len() {
                return Err(IngestError::RaggedRow(i));
            }
            normalised.push(
                row.into_iter()
                    .map(|cell| {
                        cell.map(|v| v.trim().to_string())
                            .filter(|v| !v.is_empty())
                    })
                    .collect(),
            );
        }
        Ok(RecordTable {
            columns,
            rows: normalised,
        })
    }

    /// Reads a table from CSV with a header row. Whitespace around cells
    /// is trimmed and empty cells become missing values.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, TableReadError> {
        let mut csv = ReaderBuilder::new().trim(Trim::All).from_reader(reader);
        let columns: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for record in csv.records() {
            let record = record?;
            rows.push(
                record
                    .iter()
                    .map(|cell| {
                        if cell.is_empty() {
                            None
                        } else {
                            Some(cell.to_string())
                        }
                    })
                    .collect(),
            );
        }
        Ok(RecordTable::new(columns, rows)?)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, TableReadError> {
        let file = std::fs::File::open(path.as_ref()).map_err(csv::Error::from)?;
        RecordTable::from_csv_reader(file)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Option<String>>] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }
}

/// Builds the prefix tree of the table's rows read in the given column
/// order, counting how many rows traverse each edge.
///
/// A row is dropped when a missing value appears before its path ends;
/// a cell equal to `sentinel` ends the path at the vertex reached so far.
/// Rows whose paths are empty are not retained, and a table retaining no
/// rows is an error. The sum of root edge counts equals the number of
/// retained rows, and every situation's incoming count equals the sum of
/// its children's counts.
pub fn ingest_records<S: AsRef<str>>(
    table: &RecordTable,
    column_order: &[S],
    sentinel: &str,
) -> Result<EventTree, IngestError> {
    let mut picked: Vec<usize> = Vec::with_capacity(column_order.len());
    for name in column_order {
        let name = name.as_ref();
        let Some(ix) = table.columns.iter().position(|c| c == name) else {
            return Err(IngestError::UnknownColumn(name.to_string()));
        };
        if picked.contains(&ix) {
            return Err(IngestError::DuplicateColumn(name.to_string()));
        }
        picked.push(ix);
    }

    struct TrieNode {
        children: BTreeMap<String, usize>,
        counts: BTreeMap<String, u64>,
        route: String,
        ends_a_row: bool,
        passed_through: bool,
    }
    impl TrieNode {
        fn new(route: String) -> Self {
            TrieNode {
                children: BTreeMap::new(),
                counts: BTreeMap::new(),
                route,
                ends_a_row: false,
                passed_through: false,
            }
        }
    }

    let mut nodes = vec![TrieNode::new(String::new())];
    let mut retained = 0u64;
    'rows: for row in &table.rows {
        let mut path: Vec<&str> = Vec::new();
        for &ix in &picked {
            match &row[ix] {
                None => continue 'rows,
                Some(value) if value == sentinel => break,
                Some(value) => path.push(value),
            }
        }
        if path.is_empty() {
            continue;
        }
        retained += 1;
        let mut cur = 0usize;
        for &value in &path {
            nodes[cur].passed_through = true;
            *nodes[cur].counts.entry(value.to_string()).or_insert(0) += 1;
            cur = match nodes[cur].children.get(value) {
                Some(&child) => child,
                None => {
                    let route = if nodes[cur].route.is_empty() {
                        value.to_string()
                    } else {
                        format!("{}/{value}", nodes[cur].route)
                    };
                    let child = nodes.len();
                    nodes.push(TrieNode::new(route));
                    nodes[cur].children.insert(value.to_string(), child);
                    child
                }
            };
        }
        nodes[cur].ends_a_row = true;
    }
    if retained == 0 {
        return Err(IngestError::EmptyTable);
    }
    if let Some(route) = nodes
        .iter()
        .filter(|n| n.ends_a_row && n.passed_through)
        .map(|n| n.route.as_str())
        .min()
    {
        return Err(IngestError::ConflictingTermination {
            route: route.to_string(),
        });
    }

    let mut records = Vec::new();
    let mut stack = vec![0usize];
    while let Some(p) = stack.pop() {
        for (value, &c) in &nodes[p].children {
            let mut record = EdgeRecord::new(format!("v{p}"), format!("v{c}"), value.clone());
            record.count = Some(nodes[p].counts[value]);
            records.push(record);
            stack.push(c);
        }
    }
    let (tree, _) = build_tree(records).expect("prefix trie forms a tree");
    Ok(tree)
}

#[derive(Debug, Error, PartialEq)]
pub enum SamplingZeroError {
    #[error("no vertex at {0:?}")]
    PrefixNotFound(String),
    #[error("label {label:?} already leaves the vertex at {prefix:?}")]
    DuplicateSiblingLabel { prefix: String, label: String },
}

/// Adds an unobserved outcome below the vertex addressed by `prefix`:
/// a fresh leaf joined by an edge with count zero. No existing count
/// changes and the vertex count grows by exactly one. The prefix may
/// address a leaf, in which case the leaf becomes a situation.
pub fn add_sampling_zero<S: AsRef<str>>(
    tree: &EventTree,
    prefix: &[S],
    new_label: &str,
) -> Result<EventTree, SamplingZeroError> {
    let joined = || {
        prefix
            .iter()
            .map(|s| s.as_ref())
            .collect::<Vec<_>>()
            .join("/")
    };
    let mut at = tree.root();
    for step in prefix {
        let step = step.as_ref();
        match tree.out_edges(at).iter().find(|e| e.label == step) {
            Some(edge) => at = edge.target,
            None => return Err(SamplingZeroError::PrefixNotFound(joined())),
        }
    }
    if tree.out_edges(at).iter().any(|e| e.label == new_label) {
        return Err(SamplingZeroError::DuplicateSiblingLabel {
            prefix: joined(),
            label: new_label.to_string(),
        });
    }

    let fresh = VertexId::new(tree.vertex_count());
    let mut out: Vec<Vec<Edge>> = tree.vertex_ids().iter().map(|&v| tree.out_edges(v).to_vec()).collect();
    let mut parent: Vec<Option<VertexId>> = tree.vertex_ids().iter().map(|&v| tree.parent(v)).collect();
    let mut edge = Edge::new(at, fresh, new_label);
    edge.count = Some(0);
    out[at.index()].push(edge);
    out[at.index()].sort_by(|a, b| a.label.cmp(&b.label));
    out.push(Vec::new());
    parent.push(Some(at));
    Ok(EventTree::from_parts(out, parent, tree.root()))
}
