//! Threshold bootstrap percolation, its equivalence with t-cores, the two
//! propagation processes on the base graphs, and super-vertex classification
//! on blow-ups.

use serde::{Deserialize, Serialize};

use crate::colouring::t_core;
use crate::error::{input_err, Result};
use crate::generators::{BlowUpLayout, ConstructionParams};
use crate::graph::{vertex_boundary, DiGraph, Graph, VertexSet};
use crate::sampling::RngStream;

/// Threshold that can never be met.
pub const NEVER: u32 = u32::MAX;

/// The random set attached to a process run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomSet {
    None,
    ProtectedEdges(Vec<(usize, usize)>),
    ResilientVertices(VertexSet),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationState {
    pub infected: VertexSet,
    pub random_set: RandomSet,
    /// Newly infected vertices per round, excluding the seed.
    pub round_trace: Vec<usize>,
    pub fixpoint_reached: bool,
}

/// Synchronous threshold process: each round infects every vertex with at
/// least `threshold_of(v)` infected neighbours. Returns the least fixpoint
/// containing `seed`.
pub fn bootstrap_percolate(
    g: &Graph,
    seed: &VertexSet,
    threshold_of: impl Fn(usize) -> u32,
) -> Result<PercolationState> {
    let n = g.n();
    if seed.universe() != n {
        return input_err(format!("seed universe {} does not match n = {n}", seed.universe()));
    }
    let threshold: Vec<u32> = (0..n).map(&threshold_of).collect();
    let mut infected = seed.clone();
    let mut hits = vec![0u32; n];
    let mut queued = vec![false; n];
    let mut next: Vec<usize> = (0..n)
        .filter(|&v| !infected.contains(v) && threshold[v] == 0)
        .collect();
    next.iter().for_each(|&v| queued[v] = true);

    let mut spread = |x: usize, hits: &mut [u32], infected: &VertexSet, next: &mut Vec<usize>| {
        for &w in g.neighbours(x) {
            if infected.contains(w) || queued[w] {
                continue;
            }
            hits[w] += 1;
            if hits[w] >= threshold[w] {
                queued[w] = true;
                next.push(w);
            }
        }
    };
    for x in seed.iter() {
        spread(x, &mut hits, &infected, &mut next);
    }
    let mut round_trace = Vec::new();
    while !next.is_empty() {
        let current = std::mem::take(&mut next);
        current.iter().for_each(|&v| {
            infected.insert(v);
        });
        round_trace.push(current.len());
        for &x in &current {
            spread(x, &mut hits, &infected, &mut next);
        }
    }
    Ok(PercolationState {
        infected,
        random_set: RandomSet::None,
        round_trace,
        fixpoint_reached: true,
    })
}

/// The t-core as the complement of a removal process: vertices of degree
/// below `t` start removed, and a vertex of degree `d ≥ t` is removed once
/// `d − t + 1` neighbours are.
pub fn t_core_via_percolation(g: &Graph, t: usize) -> VertexSet {
    let seed = VertexSet::from_iter_in(g.n(), (0..g.n()).filter(|&v| g.degree(v) < t));
    let state = bootstrap_percolate(g, &seed, |v| {
        let d = g.degree(v);
        if d < t {
            0
        } else {
            (d - t + 1) as u32
        }
    })
    .expect("seed matches graph");
    state.infected.complement()
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return input_err(format!("probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// Edges protected at rate `p`; edge `uv` is protected iff its uniform is
/// below `p`, so runs that share `stream` are coupled across `p`.
pub fn protected_edges(h: &Graph, p: f64, stream: &RngStream) -> Vec<bool> {
    h.edges()
        .iter()
        .map(|&(u, v)| stream.edge_uniform(u, v) < p)
        .collect()
}

/// Spread from `{root}`: an outside vertex joins with two infected
/// neighbours, or with one if it touches no protected edge.
pub fn thm3_process(h: &Graph, p_protect: f64, root: usize, stream: &RngStream) -> Result<PercolationState> {
    check_probability(p_protect)?;
    if root >= h.n() {
        return input_err(format!("root {root} out of range"));
    }
    let protected = protected_edges(h, p_protect, stream);
    let mut touches = vec![false; h.n()];
    for (&(u, v), _) in h.edges().iter().zip(&protected).filter(|(_, &p)| p) {
        touches[u] = true;
        touches[v] = true;
    }
    let seed = VertexSet::from_iter_in(h.n(), [root]);
    let mut state = bootstrap_percolate(h, &seed, |v| if touches[v] { 2 } else { 1 })?;
    state.random_set = RandomSet::ProtectedEdges(
        h.edges()
            .iter()
            .zip(&protected)
            .filter(|(_, &p)| p)
            .map(|(&e, _)| e)
            .collect(),
    );
    Ok(state)
}

/// Checks the stopping rule of [`thm3_process`] on its output.
pub fn thm3_fixpoint_holds(h: &Graph, state: &PercolationState) -> bool {
    let RandomSet::ProtectedEdges(protected) = &state.random_set else {
        return false;
    };
    let mut touches = vec![false; h.n()];
    for &(u, v) in protected {
        touches[u] = true;
        touches[v] = true;
    }
    (0..h.n()).filter(|&v| !state.infected.contains(v)).all(|v| {
        let hits = h.neighbours(v).iter().filter(|&&w| state.infected.contains(w)).count();
        hits == 0 || (hits == 1 && touches[v])
    })
}

/// Vertices placed in the resilient set at rate `p`.
pub fn resilient_vertices(n: usize, p: f64, stream: &RngStream) -> VertexSet {
    VertexSet::from_iter_in(n, (0..n).filter(|&v| stream.uniform(v as u64) < p))
}

/// Directed spread from `{root}` into out-neighbours outside the resilient set.
pub fn thm4_process(h: &DiGraph, p_resilient: f64, root: usize, stream: &RngStream) -> Result<PercolationState> {
    check_probability(p_resilient)?;
    if root >= h.n() {
        return input_err(format!("root {root} out of range"));
    }
    let resilient = resilient_vertices(h.n(), p_resilient, stream);
    let infected = directed_spread(h, root, |u| !resilient.contains(u));
    Ok(PercolationState {
        infected: infected.0,
        random_set: RandomSet::ResilientVertices(resilient),
        round_trace: infected.1,
        fixpoint_reached: true,
    })
}

fn directed_spread(h: &DiGraph, root: usize, admit: impl Fn(usize) -> bool) -> (VertexSet, Vec<usize>) {
    let mut seen = VertexSet::from_iter_in(h.n(), [root]);
    let mut frontier = vec![root];
    let mut trace = Vec::new();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for &x in &frontier {
            for &u in h.out_neighbours(x) {
                if admit(u) && seen.insert(u) {
                    next.push(u);
                }
            }
        }
        if !next.is_empty() {
            trace.push(next.len());
        }
        frontier = next;
    }
    (seen, trace)
}

/// Checks that every out-neighbour of the infected set is resilient.
pub fn thm4_fixpoint_holds(h: &DiGraph, state: &PercolationState) -> bool {
    let RandomSet::ResilientVertices(r) = &state.random_set else {
        return false;
    };
    vertex_boundary(h, &state.infected).is_ok_and(|b| b.is_subset(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperState {
    Dead,
    NearlyDead,
    Alive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperVertexStatus {
    pub t: usize,
    pub core: VertexSet,
    pub states: Vec<SuperState>,
    pub resilient: Vec<bool>,
    /// `surviving[v][j - 1]`: core vertices in layer `j` of super-vertex `v`.
    pub surviving: Vec<Vec<usize>>,
}

impl SuperVertexStatus {
    pub fn dead_count(&self) -> usize {
        self.states.iter().filter(|&&s| s == SuperState::Dead).count()
    }

    pub fn is_dead(&self, v: usize) -> bool {
        self.states[v] == SuperState::Dead
    }

    /// Dead or nearly dead.
    pub fn is_nearly_dead(&self, v: usize) -> bool {
        self.states[v] != SuperState::Alive
    }
}

fn check_layout(g: &Graph, layout: &BlowUpLayout) -> Result<()> {
    if layout.n() != g.n() {
        return input_err(format!(
            "layout covers {} vertices but the graph has {}",
            layout.n(),
            g.n()
        ));
    }
    Ok(())
}

fn surviving_counts(core: &VertexSet, layout: &BlowUpLayout) -> Vec<Vec<usize>> {
    (0..layout.num_super())
        .map(|v| {
            (1..=layout.num_layers())
                .map(|j| layout.layer(v, j).iter().filter(|&&x| core.contains(x)).count())
                .collect()
        })
        .collect()
}

/// Marks a super-vertex dead iff none of its vertices lies in the t-core.
pub fn classify_supervertices_thm3(
    g_half: &Graph,
    layout: &BlowUpLayout,
    t: usize,
) -> Result<SuperVertexStatus> {
    check_layout(g_half, layout)?;
    let core = t_core(g_half, t);
    let surviving = surviving_counts(&core, layout);
    let states = surviving
        .iter()
        .map(|c| {
            if c.iter().all(|&x| x == 0) {
                SuperState::Dead
            } else {
                SuperState::Alive
            }
        })
        .collect();
    Ok(SuperVertexStatus {
        t,
        core,
        states,
        resilient: vec![false; layout.num_super()],
        surviving,
    })
}

/// The connected set of dead super-vertices of `h` containing `root`; empty
/// when `root` is alive.
pub fn dead_component(h: &Graph, status: &SuperVertexStatus, root: usize) -> Result<VertexSet> {
    if h.n() != status.states.len() {
        return input_err("base graph does not match the classification");
    }
    let mut comp = VertexSet::new(h.n());
    if !status.is_dead(root) {
        return Ok(comp);
    }
    comp.insert(root);
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for &y in h.neighbours(x) {
            if status.is_dead(y) && comp.insert(y) {
                stack.push(y);
            }
        }
    }
    Ok(comp)
}

/// Whether layers `j` and `j + 1` of `v` form a resilient pair: on either
/// side, at least `k/s` vertices keep at least `k/4` edges to the other side.
pub fn is_resilient_pair(
    g_half: &Graph,
    layout: &BlowUpLayout,
    k: usize,
    s: usize,
    v: usize,
    j: usize,
) -> bool {
    let side = |from: usize, to: usize| {
        let targets = layout.layer(v, to);
        layout
            .layer(v, from)
            .iter()
            .filter(|&&x| {
                let edges = g_half
                    .neighbours(x)
                    .iter()
                    .filter(|&&y| layout.h_vertex_of(y) == v && layout.layer_of(y) == to)
                    .count();
                debug_assert!(edges <= targets.len());
                4 * edges >= k
            })
            .count()
    };
    side(j, j + 1) * s >= k || side(j + 1, j) * s >= k
}

/// Classifies each super-vertex of a layered blow-up as dead, nearly dead
/// (every middle layer `2..=s+2` has fewer than `k/s` core vertices) or
/// alive, and flags those containing a resilient pair.
pub fn resilient_pair_detect(
    g_half: &Graph,
    layout: &BlowUpLayout,
    params: &ConstructionParams,
) -> Result<SuperVertexStatus> {
    check_layout(g_half, layout)?;
    let (k, s) = (params.k, params.s);
    if layout.num_layers() != s + 3 || s < 2 {
        return input_err(format!(
            "layout has {} layers, expected s + 3 = {}",
            layout.num_layers(),
            s + 3
        ));
    }
    let core = t_core(g_half, params.t);
    let surviving = surviving_counts(&core, layout);
    let states = surviving
        .iter()
        .map(|c| {
            if c.iter().all(|&x| x == 0) {
                SuperState::Dead
            } else if (2..=s + 2).all(|j| c[j - 1] * s < k) {
                SuperState::NearlyDead
            } else {
                SuperState::Alive
            }
        })
        .collect();
    let resilient = (0..layout.num_super())
        .map(|v| (1..s + 3).any(|j| is_resilient_pair(g_half, layout, k, s, v, j)))
        .collect();
    Ok(SuperVertexStatus {
        t: params.t,
        core,
        states,
        resilient,
        surviving,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryAudit {
    pub root: usize,
    /// Nearly dead super-vertices reachable from the root through nearly dead ones.
    pub reached: VertexSet,
    pub boundary: Vec<usize>,
    /// Boundary super-vertices without a resilient pair.
    pub counterexamples: Vec<usize>,
}

impl BoundaryAudit {
    pub fn holds(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks that every out-neighbour of the nearly-dead set reachable from
/// `root` contains a resilient pair.
pub fn audit_resilient_boundary(
    h: &DiGraph,
    status: &SuperVertexStatus,
    root: usize,
) -> Result<BoundaryAudit> {
    if h.n() != status.states.len() || root >= h.n() {
        return input_err("digraph does not match the classification");
    }
    let reached = if status.is_nearly_dead(root) {
        directed_spread(h, root, |u| status.is_nearly_dead(u)).0
    } else {
        VertexSet::new(h.n())
    };
    let boundary = vertex_boundary(h, &reached)?.to_vec();
    let counterexamples = boundary.iter().copied().filter(|&v| !status.resilient[v]).collect();
    Ok(BoundaryAudit {
        root,
        reached,
        boundary,
        counterexamples,
    })
}
