//! The mutable working graph threaded through the merge sweep. Vertex
//! handles stay stable while vertices are retired, which lets the sweep
//! reuse the layering computed once up front.

use super::{Colour, ColouredDigraph, Edge, VertexId};

/// A rooted coloured multidigraph with a designated sink. Parallel edges
/// between one vertex pair are allowed as long as their labels differ.
#[derive(Debug, Clone)]
pub struct ColouredGraph {
    out: Vec<Vec<Edge>>,
    colours: Vec<Colour>,
    alive: Vec<bool>,
    root: VertexId,
    sink: VertexId,
}

impl ColouredGraph {
    pub(crate) fn new(
        out: Vec<Vec<Edge>>,
        colours: Vec<Colour>,
        alive: Vec<bool>,
        root: VertexId,
        sink: VertexId,
    ) -> Self {
        debug_assert_eq!(out.len(), colours.len());
        debug_assert_eq!(out.len(), alive.len());
        ColouredGraph {
            out,
            colours,
            alive,
            root,
            sink,
        }
    }

    pub fn sink(&self) -> VertexId {
        self.sink
    }

    pub fn is_alive(&self, v: VertexId) -> bool {
        self.alive[v.index()]
    }

    pub(crate) fn retire(&mut self, v: VertexId) {
        self.alive[v.index()] = false;
        self.out[v.index()].clear();
    }

    pub(crate) fn out_mut(&mut self, v: VertexId) -> &mut Vec<Edge> {
        &mut self.out[v.index()]
    }

    pub(crate) fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.alive
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| VertexId::new(i))
    }
}

impl ColouredDigraph for ColouredGraph {
    fn root(&self) -> VertexId {
        self.root
    }

    fn vertex_ids(&self) -> Vec<VertexId> {
        self.live_vertices().collect()
    }

    fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.out[v.index()]
    }

    fn colour(&self, v: VertexId) -> &Colour {
        &self.colours[v.index()]
    }

    fn vertex_count(&self) -> usize {
        self.alive.iter().filter(|&&a| a).count()
    }

    fn edge_count(&self) -> usize {
        self.live_vertices().map(|v| self.out[v.index()].len()).sum()
    }
}
