//! Degeneracy, t-cores and vertex colourings.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::graph::{Graph, VertexSet};

/// A vertex ordering in which each vertex has few earlier neighbours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EliminationOrder {
    /// Reverse of the min-degree peeling order.
    pub order: Vec<usize>,
    /// `back_degrees[v]`: neighbours of `v` still present when `v` was peeled,
    /// i.e. neighbours preceding `v` in `order`.
    pub back_degrees: Vec<usize>,
}

impl EliminationOrder {
    pub fn colouring_number(&self) -> usize {
        self.back_degrees.iter().max().map_or(0, |d| d + 1)
    }
}

/// `𝒞(G)` (degeneracy + 1) and the ordering that witnesses it.
///
/// Peels a minimum-degree vertex at each step, lowest id first among ties.
pub fn colouring_number(g: &Graph) -> (usize, EliminationOrder) {
    let n = g.n();
    let mut degree = g.degrees();
    let max_deg = g.max_degree();
    let mut buckets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); max_deg + 1];
    for v in 0..n {
        buckets[degree[v]].insert(v);
    }
    let mut removed = vec![false; n];
    let mut peel = Vec::with_capacity(n);
    let mut back = vec![0; n];
    let mut low = 0;
    for _ in 0..n {
        while buckets[low].is_empty() {
            low += 1;
        }
        let v = buckets[low].pop_first().unwrap();
        removed[v] = true;
        back[v] = degree[v];
        peel.push(v);
        for &w in g.neighbours(v) {
            if !removed[w] {
                buckets[degree[w]].remove(&w);
                degree[w] -= 1;
                buckets[degree[w]].insert(w);
            }
        }
        low = low.saturating_sub(1);
    }
    peel.reverse();
    let order = EliminationOrder {
        order: peel,
        back_degrees: back,
    };
    (order.colouring_number(), order)
}

/// The t-core together with the vertices peeled to reach it, in peel order.
pub fn t_core_with_trace(g: &Graph, t: usize) -> (VertexSet, Vec<usize>) {
    let n = g.n();
    let mut degree = g.degrees();
    let mut alive = VertexSet::full(n);
    let mut queue: Vec<usize> = (0..n).filter(|&v| degree[v] < t).collect();
    let mut queued = VertexSet::from_iter_in(n, queue.iter().copied());
    let mut trace = Vec::new();
    let mut head = 0;
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        alive.remove(v);
        trace.push(v);
        for &w in g.neighbours(v) {
            if alive.contains(w) {
                degree[w] -= 1;
                if degree[w] < t && queued.insert(w) {
                    queue.push(w);
                }
            }
        }
    }
    (alive, trace)
}

/// The maximal induced subgraph of minimum degree at least `t` (possibly empty).
pub fn t_core(g: &Graph, t: usize) -> VertexSet {
    t_core_with_trace(g, t).0
}

/// Core number of every vertex: the largest `t` whose t-core contains it.
pub fn core_numbers(g: &Graph) -> Vec<usize> {
    let (_, order) = colouring_number(g);
    // running max of removal degrees along the peel order
    let mut core = vec![0; g.n()];
    let mut level = 0;
    for &v in order.order.iter().rev() {
        level = level.max(order.back_degrees[v]);
        core[v] = level;
    }
    core
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColouringResult {
    pub colour_of: Vec<usize>,
    pub num_colours: usize,
    /// True when `num_colours` is certified optimal.
    pub exact: bool,
    /// Best proven lower bound on the chromatic number.
    pub lower_bound: usize,
    /// Search nodes expanded (zero for heuristics).
    pub nodes: u64,
}

impl ColouringResult {
    fn heuristic(colour_of: Vec<usize>) -> Self {
        let num_colours = colour_of.iter().max().map_or(0, |c| c + 1);
        ColouringResult {
            colour_of,
            num_colours,
            exact: false,
            lower_bound: 0,
            nodes: 0,
        }
    }
}

/// True when no edge is monochromatic.
pub fn is_proper(g: &Graph, colour_of: &[usize]) -> bool {
    colour_of.len() == g.n() && g.edges().iter().all(|&(u, v)| colour_of[u] != colour_of[v])
}

/// First-fit colouring along `order.order`.
pub fn greedy_colour(g: &Graph, order: &EliminationOrder) -> Result<ColouringResult> {
    let n = g.n();
    let mut seen = VertexSet::new(n);
    if order.order.len() != n || !order.order.iter().all(|&v| v < n && seen.insert(v)) {
        return input_err("order is not a permutation of the vertices");
    }
    let mut colour = vec![usize::MAX; n];
    let mut used = Vec::new();
    for &v in &order.order {
        used.clear();
        used.extend(
            g.neighbours(v)
                .iter()
                .map(|&w| colour[w])
                .filter(|&c| c != usize::MAX),
        );
        used.sort_unstable();
        used.dedup();
        colour[v] = used
            .iter()
            .enumerate()
            .find(|&(i, &c)| i != c)
            .map_or(used.len(), |(i, _)| i);
    }
    Ok(ColouringResult::heuristic(colour))
}

/// Saturation-driven greedy colouring (DSATUR without backtracking).
pub fn dsatur_colour(g: &Graph) -> ColouringResult {
    let n = g.n();
    let mut colour = vec![usize::MAX; n];
    let mut nbr_colours: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colour[v] == usize::MAX)
            .max_by_key(|&v| (nbr_colours[v].len(), g.degree(v), std::cmp::Reverse(v)))
            .unwrap();
        let c = (0..).find(|c| !nbr_colours[v].contains(c)).unwrap();
        colour[v] = c;
        for &w in g.neighbours(v) {
            nbr_colours[w].insert(c);
        }
    }
    ColouringResult::heuristic(colour)
}

/// Size of a clique found greedily from every start vertex.
pub fn greedy_clique_bound(g: &Graph) -> usize {
    let n = g.n();
    let mut best = usize::from(n > 0);
    for start in 0..n {
        let mut cands: Vec<usize> = g.neighbours(start).to_vec();
        cands.sort_by_key(|&w| (std::cmp::Reverse(g.degree(w)), w));
        let mut clique = vec![start];
        for w in cands {
            if clique.iter().all(|&c| g.has_edge(c, w)) {
                clique.push(w);
            }
        }
        best = best.max(clique.len());
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactChromaticConfig {
    /// Node expansions before giving up.
    pub budget: u64,
    pub max_vertices: usize,
}

impl Default for ExactChromaticConfig {
    fn default() -> Self {
        ExactChromaticConfig {
            budget: 10_000_000,
            max_vertices: 40,
        }
    }
}

/// `χ(G)` by DSATUR branch and bound.
///
/// Seeded with a DSATUR upper bound and a greedy clique lower bound. When the
/// budget runs out the best colouring found is returned with `exact = false`.
pub fn chromatic_number_exact(g: &Graph, config: ExactChromaticConfig) -> Result<ColouringResult> {
    let n = g.n();
    if n > config.max_vertices {
        return input_err(format!(
            "exact colouring capped at {} vertices, got {n}",
            config.max_vertices
        ));
    }
    if n == 0 {
        return Ok(ColouringResult {
            colour_of: Vec::new(),
            num_colours: 0,
            exact: true,
            lower_bound: 0,
            nodes: 0,
        });
    }
    let upper = dsatur_colour(g);
    let lower = greedy_clique_bound(g);
    let mut search = BranchAndBound {
        g,
        colour: vec![NONE; n],
        // nbr_count[v][c]: coloured neighbours of v with colour c
        nbr_count: vec![vec![0; upper.num_colours]; n],
        saturation: vec![0; n],
        best: upper.num_colours,
        best_colouring: upper.colour_of,
        lower,
        nodes: 0,
        budget: config.budget,
        exhausted: false,
    };
    if search.best > lower {
        search.descend(0, 0);
    }
    Ok(ColouringResult {
        num_colours: search.best,
        colour_of: search.best_colouring,
        exact: !search.exhausted,
        lower_bound: if search.exhausted { lower } else { search.best },
        nodes: search.nodes,
    })
}

const NONE: usize = usize::MAX;

struct BranchAndBound<'a> {
    g: &'a Graph,
    colour: Vec<usize>,
    nbr_count: Vec<Vec<u32>>,
    saturation: Vec<usize>,
    best: usize,
    best_colouring: Vec<usize>,
    lower: usize,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl BranchAndBound<'_> {
    /// Returns true once an optimal colouring is known (search can stop).
    fn descend(&mut self, coloured: usize, used: usize) -> bool {
        if coloured == self.g.n() {
            self.best = used;
            self.best_colouring = self.colour.clone();
            return self.best == self.lower;
        }
        if self.nodes >= self.budget {
            self.exhausted = true;
            return true;
        }
        self.nodes += 1;

        let v = self.select();
        // colours above `used` are interchangeable, so try only one new colour
        for c in 0..=used {
            if c + 1 >= self.best {
                break;
            }
            if self.nbr_count[v][c] > 0 {
                continue;
            }
            self.assign(v, c);
            let done = self.descend(coloured + 1, used.max(c + 1));
            self.unassign(v, c);
            if done {
                return true;
            }
        }
        false
    }

    /// Uncoloured vertex of maximum saturation, then degree, then lowest id.
    fn select(&self) -> usize {
        let mut best = NONE;
        let mut key = (0, 0);
        for v in 0..self.g.n() {
            if self.colour[v] != NONE {
                continue;
            }
            let k = (self.saturation[v], self.g.degree(v));
            if best == NONE || k > key {
                best = v;
                key = k;
            }
        }
        best
    }

    fn assign(&mut self, v: usize, c: usize) {
        self.colour[v] = c;
        for &w in self.g.neighbours(v) {
            let slot = &mut self.nbr_count[w][c];
            if *slot == 0 {
                self.saturation[w] += 1;
            }
            *slot += 1;
        }
    }

    fn unassign(&mut self, v: usize, c: usize) {
        self.colour[v] = NONE;
        for &w in self.g.neighbours(v) {
            let slot = &mut self.nbr_count[w][c];
            *slot -= 1;
            if *slot == 0 {
                self.saturation[w] -= 1;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductColouringReport {
    pub part_chromatic: Vec<usize>,
    pub product: u128,
    pub whole_chromatic: usize,
    /// `product − χ(G)`; negative would contradict the product bound.
    pub margin: i128,
    pub holds: bool,
    /// All chromatic numbers involved were certified.
    pub exact: bool,
}

/// Checks `Π χ(part_i) ≥ χ(G)` for an edge partition of `g`.
pub fn product_colouring_check(
    g: &Graph,
    parts: &[Graph],
    config: ExactChromaticConfig,
) -> Result<ProductColouringReport> {
    if parts.iter().any(|p| p.n() != g.n()) {
        return input_err("parts must share the vertex set of g");
    }
    let total: usize = parts.iter().map(|p| p.m()).sum();
    let covered = parts
        .iter()
        .flat_map(|p| p.edges().iter().copied())
        .collect::<BTreeSet<_>>();
    if total != g.m() || covered.len() != g.m() || !covered.iter().all(|&(u, v)| g.has_edge(u, v)) {
        return input_err("parts do not partition the edge set of g");
    }
    let whole = chromatic_number_exact(g, config)?;
    let mut exact = whole.exact;
    let mut part_chromatic = Vec::with_capacity(parts.len());
    for p in parts {
        let r = chromatic_number_exact(p, config)?;
        exact &= r.exact;
        part_chromatic.push(r.num_colours);
    }
    let product = part_chromatic.iter().map(|&c| c as u128).product::<u128>();
    let margin = product as i128 - whole.num_colours as i128;
    Ok(ProductColouringReport {
        part_chromatic,
        product,
        whole_chromatic: whole.num_colours,
        margin,
        holds: margin >= 0,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;

    fn k4_minus_edge() -> Graph {
        Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]).unwrap()
    }

    /// Tries all k^n assignments.
    fn colourable_brute_force(g: &Graph, k: usize) -> bool {
        let n = g.n();
        let total = k.pow(n as u32);
        (0..total).any(|mut code| {
            let colour: Vec<usize> = (0..n)
                .map(|_| {
                    let c = code % k;
                    code /= k;
                    c
                })
                .collect();
            is_proper(g, &colour)
        })
    }

    fn brute_force_chromatic(g: &Graph) -> usize {
        if g.n() == 0 {
            return 0;
        }
        (1..=g.n()).find(|&k| colourable_brute_force(g, k)).unwrap()
    }

    fn random_graph(n: usize, seed: u64) -> Graph {
        let s = RngStream::new(seed, 0, "gnp");
        Graph::complete(n).spanning_subgraph(|_, (u, v)| s.edge_uniform(u, v) < 0.5)
    }

    #[test]
    fn colouring_number_examples() {
        assert_eq!(colouring_number(&Graph::complete(5)).0, 5);
        assert_eq!(colouring_number(&Graph::cycle(8)).0, 3);
        assert_eq!(colouring_number(&Graph::path(6)).0, 2);
        assert_eq!(colouring_number(&Graph::star(4)).0, 2);
        assert_eq!(colouring_number(&Graph::empty(3)).0, 1);
    }

    #[test]
    fn elimination_order_back_degrees_match_positions() {
        let g = random_graph(20, 3);
        let (_, order) = colouring_number(&g);
        let mut pos = vec![0; g.n()];
        for (i, &v) in order.order.iter().enumerate() {
            pos[v] = i;
        }
        for v in 0..g.n() {
            let earlier = g.neighbours(v).iter().filter(|&&w| pos[w] < pos[v]).count();
            assert_eq!(earlier, order.back_degrees[v]);
        }
    }

    #[test]
    fn t_core_examples() {
        let p = Graph::petersen();
        assert_eq!(t_core(&p, 3).len(), 10);
        assert!(t_core(&p, 4).is_empty());
        // the two degree-2 vertices peel first, leaving a single edge
        let (core, trace) = t_core_with_trace(&k4_minus_edge(), 3);
        assert!(core.is_empty());
        assert_eq!(&trace[..2], &[2, 3]);
    }

    #[test]
    fn core_numbers_agree_with_t_core() {
        for seed in 0..10 {
            let g = random_graph(18, seed);
            let core = core_numbers(&g);
            for t in 0..=g.max_degree() + 1 {
                let expect = t_core(&g, t);
                let got = VertexSet::from_iter_in(g.n(), (0..g.n()).filter(|&v| core[v] >= t));
                assert_eq!(got, expect, "seed {seed} t {t}");
            }
        }
    }

    #[test]
    fn greedy_examples() {
        let k4 = Graph::complete(4);
        let (_, order) = colouring_number(&k4);
        assert_eq!(greedy_colour(&k4, &order).unwrap().num_colours, 4);

        let c6 = Graph::cycle(6);
        let cyclic = EliminationOrder {
            order: (0..6).collect(),
            back_degrees: vec![0, 1, 1, 1, 1, 2],
        };
        let r = greedy_colour(&c6, &cyclic).unwrap();
        assert!(r.num_colours <= 3 && is_proper(&c6, &r.colour_of));

        let e5 = Graph::empty(5);
        let (_, order) = colouring_number(&e5);
        assert_eq!(greedy_colour(&e5, &order).unwrap().num_colours, 1);

        let bad = EliminationOrder {
            order: vec![0, 0, 1, 2, 3, 4],
            back_degrees: vec![0; 6],
        };
        assert!(greedy_colour(&c6, &bad).is_err());
    }

    #[test]
    fn greedy_on_degeneracy_order_is_bounded() {
        for seed in 0..20 {
            let g = random_graph(25, seed);
            let (c, order) = colouring_number(&g);
            let r = greedy_colour(&g, &order).unwrap();
            assert!(is_proper(&g, &r.colour_of));
            assert!(r.num_colours <= c);
        }
    }

    #[test]
    fn exact_examples() {
        let cfg = ExactChromaticConfig::default();
        let cases = [
            (Graph::cycle(5), 3),
            (Graph::petersen(), 3),
            (Graph::complete(7), 7),
            (Graph::empty(4), 1),
            (Graph::complete_bipartite(3, 4), 2),
        ];
        for (g, chi) in cases {
            let r = chromatic_number_exact(&g, cfg).unwrap();
            assert!(r.exact);
            assert_eq!(r.num_colours, chi);
            assert!(is_proper(&g, &r.colour_of));
        }
    }

    #[test]
    fn exact_matches_brute_force_oracle() {
        let cfg = ExactChromaticConfig::default();
        for seed in 0..60 {
            let n = 3 + (seed as usize % 6);
            let g = random_graph(n, 100 + seed);
            let r = chromatic_number_exact(&g, cfg).unwrap();
            assert!(r.exact);
            assert_eq!(r.num_colours, brute_force_chromatic(&g), "seed {seed}");
        }
    }

    #[test]
    fn budget_exhaustion_keeps_bounds() {
        let g = random_graph(35, 1);
        let r = chromatic_number_exact(
            &g,
            ExactChromaticConfig {
                budget: 1,
                max_vertices: 40,
            },
        )
        .unwrap();
        assert!(is_proper(&g, &r.colour_of));
        assert!(r.lower_bound <= r.num_colours);
        let too_big = Graph::empty(41);
        assert!(chromatic_number_exact(&too_big, ExactChromaticConfig::default()).is_err());
    }

    #[test]
    fn product_colouring_examples() {
        let cfg = ExactChromaticConfig::default();
        let k4 = Graph::complete(4);
        let matching = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        let rest = Graph::new(4, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let r = product_colouring_check(&k4, &[matching.clone(), rest], cfg).unwrap();
        assert_eq!(r.part_chromatic, vec![2, 2]);
        assert!(r.holds && r.exact);
        assert_eq!(r.margin, 0);

        let r = product_colouring_check(&k4, &[k4.clone(), Graph::empty(4)], cfg).unwrap();
        assert_eq!(r.product, 4);

        assert!(product_colouring_check(&k4, std::slice::from_ref(&matching), cfg).is_err());
        assert!(product_colouring_check(&k4, &[k4.clone(), matching], cfg).is_err());
    }
}
