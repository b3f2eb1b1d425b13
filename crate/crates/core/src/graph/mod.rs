//! Immutable simple graphs and digraphs on vertex ids `0..n`.

mod algo;
mod enumerate;
mod set;
pub mod text;

pub use algo::{
    edge_boundary, girth, is_connected, reachable_set, shortest_cycle_within, vertex_boundary,
    Adjacency,
};
pub use enumerate::{
    count_connected_edge_subgraphs, count_connected_edge_subgraphs_with_cap,
    DEFAULT_ENUMERATION_CAP,
};
pub use set::VertexSet;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

/// Simple undirected graph in CSR form.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    neighbours: Vec<usize>,
}

impl Graph {
    /// Builds a graph, rejecting loops, repeated edges and out-of-range ids.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return input_err(format!("edge ({u}, {v}) out of range for n = {n}"));
            }
            if u == v {
                return input_err(format!("loop at vertex {u}"));
            }
            canon.push((u.min(v), u.max(v)));
        }
        canon.sort_unstable();
        if let Some(w) = canon.windows(2).find(|w| w[0] == w[1]) {
            return input_err(format!("repeated edge ({}, {})", w[0].0, w[0].1));
        }
        Ok(Self::from_canonical(n, canon))
    }

    /// `edges` must already be canonical, sorted and duplicate free.
    pub(crate) fn from_canonical(n: usize, edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbours = vec![0; offsets[n]];
        for &(u, v) in &edges {
            neighbours[fill[u]] = v;
            fill[u] += 1;
            neighbours[fill[v]] = u;
            fill[v] += 1;
        }
        for v in 0..n {
            neighbours[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Graph {
            n,
            edges,
            offsets,
            neighbours,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::from_canonical(n, edges)
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycles need at least 3 vertices");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn star(leaves: usize) -> Self {
        Self::new(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        Self::new(
            a + b,
            (0..a).flat_map(|u| (0..b).map(move |v| (u, a + v))),
        )
        .unwrap()
    }

    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Self::new(10, outer.chain(spokes).chain(inner)).unwrap()
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.neighbours[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// The common degree, if every vertex has the same one.
    pub fn regular_degree(&self) -> Option<usize> {
        if self.n == 0 {
            return Some(0);
        }
        let d = self.degree(0);
        (1..self.n).all(|v| self.degree(v) == d).then_some(d)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.neighbours(u).binary_search(&v).is_ok()
    }

    /// Spanning subgraph keeping the edges for which `keep` returns true.
    pub fn spanning_subgraph(&self, mut keep: impl FnMut(usize, (usize, usize)) -> bool) -> Graph {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, &e)| keep(i, e))
            .map(|(_, &e)| e)
            .collect();
        Graph::from_canonical(self.n, edges)
    }

    /// Vertices with at least one incident edge.
    pub fn non_isolated(&self) -> VertexSet {
        VertexSet::from_iter_in(self.n, (0..self.n).filter(|&v| self.degree(v) > 0))
    }

    /// Whether `other` is a spanning subgraph of `self`.
    pub fn contains_subgraph(&self, other: &Graph) -> bool {
        other.n == self.n && other.edges.iter().all(|&(u, v)| self.has_edge(u, v))
    }
}

/// Arc colour used by the gadget blow-up to tell the two in-arcs apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArcColour {
    Red,
    Blue,
}

/// Simple directed graph. Arc ids index the sorted arc list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiGraph {
    n: usize,
    arcs: Vec<(usize, usize)>,
    out_offsets: Vec<usize>,
    out: Vec<usize>,
    in_offsets: Vec<usize>,
    in_arcs: Vec<usize>,
    colours: Option<Vec<ArcColour>>,
}

impl DiGraph {
    pub fn new(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut arcs: Vec<_> = arcs.into_iter().collect();
        for &(u, v) in &arcs {
            if u >= n || v >= n {
                return input_err(format!("arc ({u}, {v}) out of range for n = {n}"));
            }
            if u == v {
                return input_err(format!("loop at vertex {u}"));
            }
        }
        arcs.sort_unstable();
        if let Some(w) = arcs.windows(2).find(|w| w[0] == w[1]) {
            return input_err(format!("repeated arc ({}, {})", w[0].0, w[0].1));
        }
        let mut out_offsets = vec![0; n + 1];
        let mut in_offsets = vec![0; n + 1];
        for &(u, v) in &arcs {
            out_offsets[u + 1] += 1;
            in_offsets[v + 1] += 1;
        }
        for i in 0..n {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out = arcs.iter().map(|&(_, v)| v).collect();
        let mut fill = in_offsets[..n].to_vec();
        let mut in_arcs = vec![0; arcs.len()];
        // arcs are sorted, so each in-list is filled in increasing arc id
        for (id, &(_, v)) in arcs.iter().enumerate() {
            in_arcs[fill[v]] = id;
            fill[v] += 1;
        }
        Ok(DiGraph {
            n,
            arcs,
            out_offsets,
            out,
            in_offsets,
            in_arcs,
            colours: None,
        })
    }

    /// Attaches per-arc colours, indexed by arc id.
    pub fn with_colours(mut self, colours: Vec<ArcColour>) -> Result<Self> {
        if colours.len() != self.arcs.len() {
            return input_err(format!(
                "{} colours supplied for {} arcs",
                colours.len(),
                self.arcs.len()
            ));
        }
        self.colours = Some(colours);
        Ok(self)
    }

    /// Colours in-arcs so that at every vertex the lowest-id in-arc is red and
    /// the others blue.
    pub fn with_canonical_in_colouring(self) -> Self {
        let mut colours = vec![ArcColour::Blue; self.arcs.len()];
        for v in 0..self.n {
            if let Some(&first) = self.in_arc_ids(v).first() {
                colours[first] = ArcColour::Red;
            }
        }
        self.with_colours(colours).expect("length matches")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn out_neighbours(&self, v: usize) -> &[usize] {
        &self.out[self.out_offsets[v]..self.out_offsets[v + 1]]
    }

    pub fn in_arc_ids(&self, v: usize) -> &[usize] {
        &self.in_arcs[self.in_offsets[v]..self.in_offsets[v + 1]]
    }

    pub fn in_neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_arc_ids(v).iter().map(|&a| self.arcs[a].0)
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_offsets[v + 1] - self.out_offsets[v]
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_offsets[v + 1] - self.in_offsets[v]
    }

    /// In- and out-degree equal to `d` everywhere.
    pub fn is_regular(&self, d: usize) -> bool {
        (0..self.n).all(|v| self.out_degree(v) == d && self.in_degree(v) == d)
    }

    pub fn colours(&self) -> Option<&[ArcColour]> {
        self.colours.as_deref()
    }

    pub fn colour(&self, arc: usize) -> Option<ArcColour> {
        self.colours.as_ref().map(|c| c[arc])
    }

    /// True when the two in-arcs at every vertex carry distinct colours.
    pub fn has_proper_in_colouring(&self) -> bool {
        let Some(colours) = &self.colours else {
            return false;
        };
        (0..self.n).all(|v| {
            let ids = self.in_arc_ids(v);
            let reds = ids.iter().filter(|&&a| colours[a] == ArcColour::Red).count();
            ids.len() <= 2 && reds <= 1 && ids.len() - reds <= 1
        })
    }

    /// Whether every vertex is reachable from every other.
    pub fn is_strongly_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        if reachable_set(self, 0).len() != self.n {
            return false;
        }
        let reversed =
            DiGraph::new(self.n, self.arcs.iter().map(|&(u, v)| (v, u))).expect("reverse is simple");
        reachable_set(&reversed, 0).len() == self.n
    }
}
