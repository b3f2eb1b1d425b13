use super::Graph;
use crate::error::{Error, Result};

/// Largest `t` accepted by [`count_connected_edge_subgraphs`].
pub const DEFAULT_ENUMERATION_CAP: usize = 8;

/// Number of connected `t`-edge subgraphs of `g` that contain vertex `v`.
pub fn count_connected_edge_subgraphs(g: &Graph, v: usize, t: usize) -> Result<u64> {
    count_connected_edge_subgraphs_with_cap(g, v, t, DEFAULT_ENUMERATION_CAP)
}

/// As [`count_connected_edge_subgraphs`] with an explicit cap on `t`.
pub fn count_connected_edge_subgraphs_with_cap(
    g: &Graph,
    v: usize,
    t: usize,
    cap: usize,
) -> Result<u64> {
    if t == 0 {
        return Err(Error::Input("t must be at least 1".into()));
    }
    if t > cap {
        return Err(Error::Capacity { requested: t, cap });
    }
    if v >= g.n() {
        return Err(Error::Input(format!("vertex {v} out of range")));
    }
    let index = EdgeIndex::new(g);
    let mut search = Search {
        g,
        index: &index,
        target: t,
        frontier: Vec::new(),
        in_frontier: vec![false; g.m()],
        banned: vec![false; g.m()],
        covered: vec![false; g.n()],
    };
    search.cover(v);
    Ok(search.run(0))
}

/// Edge ids incident to each vertex.
struct EdgeIndex {
    offsets: Vec<usize>,
    ids: Vec<usize>,
}

impl EdgeIndex {
    fn new(g: &Graph) -> Self {
        let mut offsets = vec![0; g.n() + 1];
        for &(a, b) in g.edges() {
            offsets[a + 1] += 1;
            offsets[b + 1] += 1;
        }
        for i in 0..g.n() {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut ids = vec![0; offsets[g.n()]];
        for (id, &(a, b)) in g.edges().iter().enumerate() {
            ids[fill[a]] = id;
            fill[a] += 1;
            ids[fill[b]] = id;
            fill[b] += 1;
        }
        EdgeIndex { offsets, ids }
    }

    fn incident(&self, v: usize) -> &[usize] {
        &self.ids[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Binary include/exclude branching over the frontier of edges touching the
/// covered vertices; every connected edge set is reached by exactly one path.
struct Search<'a> {
    g: &'a Graph,
    index: &'a EdgeIndex,
    target: usize,
    frontier: Vec<usize>,
    in_frontier: Vec<bool>,
    banned: Vec<bool>,
    covered: Vec<bool>,
}

impl Search<'_> {
    /// Marks `v` covered and pushes its fresh incident edges; returns how many.
    fn cover(&mut self, v: usize) -> usize {
        self.covered[v] = true;
        let mut pushed = 0;
        for &e in self.index.incident(v) {
            if !self.in_frontier[e] && !self.banned[e] {
                self.in_frontier[e] = true;
                self.frontier.push(e);
                pushed += 1;
            }
        }
        pushed
    }

    fn run(&mut self, chosen: usize) -> u64 {
        if chosen == self.target {
            return 1;
        }
        let Some(e) = self.frontier.pop() else {
            return 0;
        };
        let mut total = 0;

        // include e; chosen edges stay flagged in_frontier so they are never re-pushed
        let (a, b) = self.g.edges()[e];
        let fresh = if !self.covered[a] {
            Some(a)
        } else if !self.covered[b] {
            Some(b)
        } else {
            None
        };
        let pushed = fresh.map_or(0, |x| self.cover(x));
        total += self.run(chosen + 1);
        for _ in 0..pushed {
            let f = self.frontier.pop().unwrap();
            self.in_frontier[f] = false;
        }
        if let Some(x) = fresh {
            self.covered[x] = false;
        }

        // exclude e
        self.in_frontier[e] = false;
        self.banned[e] = true;
        total += self.run(chosen);
        self.banned[e] = false;

        self.in_frontier[e] = true;
        self.frontier.push(e);
        total
    }
}
