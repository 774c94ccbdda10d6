//! The chain event graph produced by compacting a staged tree: every
//! vertex is a position, all leaves have been melded into one sink, and
//! every root-to-sink path signature of the source tree survives exactly.

use std::collections::BTreeMap;

use super::{Colour, ColouredDigraph, Edge, VertexId};

/// A compacted staged tree. Vertices are numbered contiguously with the
/// root first and the sink last; out-edges are sorted by label and target.
#[derive(Debug, Clone)]
pub struct Ceg {
    out: Vec<Vec<Edge>>,
    colours: Vec<Colour>,
    root: VertexId,
    sink: VertexId,
}

impl Ceg {
    pub(crate) fn new(
        out: Vec<Vec<Edge>>,
        colours: Vec<Colour>,
        root: VertexId,
        sink: VertexId,
    ) -> Self {
        debug_assert_eq!(out.len(), colours.len());
        debug_assert!(out[sink.index()].is_empty());
        Ceg {
            out,
            colours,
            root,
            sink,
        }
    }

    /// Renumbers a working graph into canonical form. Live non-sink
    /// vertices are ordered by their original root path, the sink goes
    /// last, and edges are re-sorted.
    pub(crate) fn from_working(
        graph: &super::ColouredGraph,
        root_paths: &[Vec<String>],
    ) -> Self {
        let mut order: Vec<VertexId> = graph
            .live_vertices()
            .filter(|&v| v != graph.sink())
            .collect();
        order.sort_by(|a, b| root_paths[a.index()].cmp(&root_paths[b.index()]));
        order.push(graph.sink());

        let mut remap: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        for (i, &v) in order.iter().enumerate() {
            remap.insert(v, VertexId::new(i));
        }
        let mut out: Vec<Vec<Edge>> = Vec::with_capacity(order.len());
        let mut colours = Vec::with_capacity(order.len());
        for &v in &order {
            let mut edges: Vec<Edge> = graph
                .out_edges(v)
                .iter()
                .map(|e| Edge {
                    source: remap[&e.source],
                    target: remap[&e.target],
                    ..e.clone()
                })
                .collect();
            edges.sort_by(|a, b| a.label.cmp(&b.label).then(a.target.cmp(&b.target)));
            out.push(edges);
            colours.push(graph.colour(v).clone());
        }
        let root = remap[&graph.root()];
        let sink = remap[&graph.sink()];
        Ceg::new(out, colours, root, sink)
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }
}

impl ColouredDigraph for Ceg {
    fn root(&self) -> VertexId {
        self.root
    }

    fn vertex_ids(&self) -> Vec<VertexId> {
        (0..self.out.len()).map(VertexId::new).collect()
    }

    fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.out[v.index()]
    }

    fn colour(&self, v: VertexId) -> &Colour {
        &self.colours[v.index()]
    }

    fn vertex_count(&self) -> usize {
        self.out.len()
    }

    fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}
