use std::collections::VecDeque;

use super::{DiGraph, Graph, VertexSet};
use crate::error::{input_err, Result};

/// Out-neighbourhoods: neighbours for undirected graphs, out-arcs for digraphs.
pub trait Adjacency {
    fn vertex_count(&self) -> usize;
    fn successors(&self, v: usize) -> &[usize];
}

impl Adjacency for Graph {
    fn vertex_count(&self) -> usize {
        self.n()
    }
    fn successors(&self, v: usize) -> &[usize] {
        self.neighbours(v)
    }
}

impl Adjacency for DiGraph {
    fn vertex_count(&self) -> usize {
        self.n()
    }
    fn successors(&self, v: usize) -> &[usize] {
        self.out_neighbours(v)
    }
}

fn check_range(n: usize, s: &VertexSet) -> Result<()> {
    if let Some(v) = s.iter().find(|&v| v >= n) {
        return input_err(format!("vertex {v} out of range for n = {n}"));
    }
    Ok(())
}

/// Vertices outside `s` that are (out-)neighbours of some vertex of `s`.
pub fn vertex_boundary<G: Adjacency>(g: &G, s: &VertexSet) -> Result<VertexSet> {
    let n = g.vertex_count();
    check_range(n, s)?;
    let mut out = VertexSet::new(n);
    for v in s.iter() {
        for &w in g.successors(v) {
            if !s.contains(w) {
                out.insert(w);
            }
        }
    }
    Ok(out)
}

/// Edges with exactly one endpoint in `s`, as `(inside, outside)` pairs.
pub fn edge_boundary(g: &Graph, s: &VertexSet) -> Result<Vec<(usize, usize)>> {
    check_range(g.n(), s)?;
    let mut out = Vec::new();
    for v in s.iter() {
        for &w in g.neighbours(v) {
            if !s.contains(w) {
                out.push((v, w));
            }
        }
    }
    Ok(out)
}

/// Every vertex reachable from `root` along directed paths, `root` included.
pub fn reachable_set<G: Adjacency>(g: &G, root: usize) -> VertexSet {
    let mut seen = VertexSet::new(g.vertex_count());
    seen.insert(root);
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        for &w in g.successors(v) {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen
}

pub fn is_connected(g: &Graph) -> bool {
    g.n() == 0 || reachable_set(g, 0).len() == g.n()
}

/// Length of the shortest cycle, or `None` for forests.
pub fn girth(g: &Graph) -> Option<usize> {
    shortest_cycle_within(g, g.n())
}

/// Length of the shortest cycle if it is at most `limit`, else `None`.
///
/// BFS from every vertex, truncated at depth `limit / 2`; a non-tree edge
/// between depths `a` and `b` closes a walk of length `a + b + 1` through the
/// root, and the minimum over all roots is exactly the girth.
pub fn shortest_cycle_within(g: &Graph, limit: usize) -> Option<usize> {
    let n = g.n();
    let max_depth = limit / 2;
    let mut best = usize::MAX;
    let mut depth = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut touched = Vec::new();
    let mut queue = VecDeque::new();
    for root in 0..n {
        for &v in &touched {
            depth[v] = usize::MAX;
            parent[v] = usize::MAX;
        }
        touched.clear();
        depth[root] = 0;
        touched.push(root);
        queue.clear();
        queue.push_back(root);
        'bfs: while let Some(u) = queue.pop_front() {
            // longer cycles through this root cannot beat the current best
            if 2 * depth[u] >= best || depth[u] > max_depth {
                break;
            }
            for &w in g.neighbours(u) {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = u;
                    touched.push(w);
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(depth[u] + depth[w] + 1);
                    if best == 3 {
                        break 'bfs;
                    }
                }
            }
        }
        if best == 3 {
            break;
        }
    }
    (best <= limit).then_some(best)
}
