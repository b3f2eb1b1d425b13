//! Random regular (di)graphs, expander filtering, and the two blow-up
//! constructions with their vertex layouts.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Error, Result};
use crate::graph::{shortest_cycle_within, ArcColour, DiGraph, Graph};
use crate::sampling::RngStream;
use crate::spectral::{second_eigenvalue_with, SpectralCertificate, SpectralConfig};

/// Resamples of the configuration model before giving up.
pub const REJECTION_CAP: usize = 100;

/// Pairs tails with shuffled heads; `None` when the pairing has a loop or repeated pair.
fn pair_stubs(stubs: &[usize], partner: &[usize]) -> Option<Vec<(usize, usize)>> {
    let mut pairs: Vec<_> = stubs.iter().copied().zip(partner.iter().copied()).collect();
    if pairs.iter().any(|&(u, v)| u == v) {
        return None;
    }
    pairs.sort_unstable();
    if pairs.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(pairs)
}

/// Simple `d`-regular graph from the configuration model. Stubs are paired
/// one random pair at a time; a pair that would create a loop or a repeated
/// edge is redrawn, and an attempt that gets stuck is restarted.
pub fn random_regular_graph(n: usize, d: usize, stream: &RngStream) -> Result<Graph> {
    if !(n * d).is_multiple_of(2) {
        return input_err(format!("n·d must be even (n = {n}, d = {d})"));
    }
    if d >= n {
        return input_err(format!("degree {d} needs more than {n} vertices"));
    }
    for attempt in 0..REJECTION_CAP {
        let mut rng = stream.derive(&format!("attempt{attempt}")).rng();
        if let Some(edges) = pair_incrementally(n, d, &mut rng) {
            return Ok(Graph::from_canonical(n, edges));
        }
    }
    Err(Error::Generation(format!(
        "no simple {d}-regular graph on {n} vertices after {REJECTION_CAP} attempts"
    )))
}

fn pair_incrementally(n: usize, d: usize, rng: &mut impl Rng) -> Option<Vec<(usize, usize)>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);
    let mut edges = Vec::with_capacity(n * d / 2);
    let mut misses = 0;
    while !stubs.is_empty() {
        let i = rng.gen_range(0..stubs.len());
        let j = rng.gen_range(0..stubs.len());
        let (u, v) = (stubs[i].min(stubs[j]), stubs[i].max(stubs[j]));
        if i == j || u == v || seen.contains(&(u, v)) {
            misses += 1;
            if misses > 100 + 10 * stubs.len() {
                return None;
            }
            continue;
        }
        misses = 0;
        seen.insert((u, v));
        edges.push((u, v));
        stubs.swap_remove(i.max(j));
        stubs.swap_remove(i.min(j));
    }
    edges.sort_unstable();
    Some(edges)
}

/// Simple digraph with every in- and out-degree 2, in-arcs coloured so the
/// lower arc id at each vertex is red.
pub fn random_two_regular_digraph(n: usize, stream: &RngStream) -> Result<DiGraph> {
    if n < 3 {
        return input_err("a simple 2-regular digraph needs at least 3 vertices");
    }
    let tails: Vec<usize> = (0..n).flat_map(|v| [v, v]).collect();
    for attempt in 0..REJECTION_CAP {
        let mut rng = stream.derive(&format!("attempt{attempt}")).rng();
        let mut heads = tails.clone();
        heads.shuffle(&mut rng);
        if let Some(arcs) = pair_stubs(&tails, &heads) {
            return Ok(DiGraph::new(n, arcs)?.with_canonical_in_colouring());
        }
    }
    Err(Error::Generation(format!(
        "no simple 2-regular digraph on {n} vertices after {REJECTION_CAP} attempts"
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderFilter {
    pub lambda2_max: f64,
    pub girth_min: usize,
    pub max_attempts: usize,
}

impl Default for ExpanderFilter {
    fn default() -> Self {
        ExpanderFilter {
            lambda2_max: 2.9,
            girth_min: 6,
            max_attempts: 20_000,
        }
    }
}

/// Draws random `d`-regular graphs until one has girth at least
/// `girth_min` and second eigenvalue at most `lambda2_max`.
pub fn filtered_regular_graph(
    n: usize,
    d: usize,
    filter: &ExpanderFilter,
    stream: &RngStream,
) -> Result<(Graph, SpectralCertificate)> {
    let config = SpectralConfig::default();
    for attempt in 0..filter.max_attempts {
        let g = random_regular_graph(n, d, &stream.derive(&format!("candidate{attempt}")))?;
        if filter.girth_min > 0 && shortest_cycle_within(&g, filter.girth_min - 1).is_some() {
            continue;
        }
        let mut cert = second_eigenvalue_with(&g, d, &config)?;
        if cert.lambda2 <= filter.lambda2_max {
            cert.girth_checked = Some(filter.girth_min);
            return Ok((g, cert));
        }
    }
    Err(Error::Generation(format!(
        "no {d}-regular graph on {n} vertices passed the filter in {} attempts",
        filter.max_attempts
    )))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionMode {
    Thm3,
    Thm4,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub mode: ConstructionMode,
    pub k: usize,
    pub alpha: f64,
    /// Layer parameter; zero for the plain blow-up.
    pub s: usize,
    /// Independent-set size per layer.
    pub m: usize,
    /// Core threshold.
    pub t: usize,
}

impl ConstructionParams {
    /// Plain blow-up: sets of size `k/3`, threshold `k/3 + ⌊αk⌋`.
    pub fn thm3(k: usize, alpha: f64) -> Result<Self> {
        if k == 0 || !k.is_multiple_of(3) {
            return input_err(format!("k = {k} must be a positive multiple of 3"));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return input_err(format!("alpha = {alpha} must lie in (0, 1)"));
        }
        Ok(ConstructionParams {
            mode: ConstructionMode::Thm3,
            k,
            alpha,
            s: 0,
            m: k / 3,
            t: k / 3 + (alpha * k as f64).floor() as usize,
        })
    }

    /// Layered gadget: `s + 3` layers of size `k/2 − k/2s`, threshold
    /// `⌈k/4 + 2k/s⌉`.
    pub fn thm4(k: usize, s: usize, alpha: f64) -> Result<Self> {
        if s < 2 {
            return input_err(format!("s = {s} must be at least 2"));
        }
        if k == 0 || !k.is_multiple_of(2 * s) {
            return input_err(format!("2s = {} must divide k = {k}", 2 * s));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return input_err(format!("alpha = {alpha} must lie in (0, 1)"));
        }
        Ok(ConstructionParams {
            mode: ConstructionMode::Thm4,
            k,
            alpha,
            s,
            m: k / 2 - k / (2 * s),
            t: (k * s + 8 * k).div_ceil(4 * s),
        })
    }

    pub fn layers(&self) -> usize {
        match self.mode {
            ConstructionMode::Thm3 => 1,
            ConstructionMode::Thm4 => self.s + 3,
        }
    }

    /// Parameter constraints of the asymptotic statements that `n` and the
    /// parameters fail; empty when in regime.
    pub fn regime_violations(&self, n: usize) -> Vec<String> {
        let mut out = Vec::new();
        let (k, a) = (self.k as f64, self.alpha);
        let ln_n = (n.max(1) as f64).ln();
        match self.mode {
            ConstructionMode::Thm3 => {
                if a >= 0.01 {
                    out.push(format!("alpha = {a} is not below 1/100"));
                }
                if ln_n < k.powi(3) * (3.0 / a).ln() {
                    out.push(format!("n = {n} is below (alpha/3)^(-k^3)"));
                }
            }
            ConstructionMode::Thm4 => {
                if a >= 1.0 / 16.0 {
                    out.push(format!("alpha = {a} is not below 1/16"));
                }
                let s = self.s as f64;
                if s < 2.0 / a || s > 4.0 / a {
                    out.push(format!("s = {} is outside [2/alpha, 4/alpha]", self.s));
                }
                if ln_n < k.powi(3) * (6.0 / a).ln() {
                    out.push(format!("n = {n} is below (alpha/6)^(-k^3)"));
                }
            }
        }
        out
    }
}

/// Position of every blown-up vertex: its super-vertex, layer (1-based) and
/// index within the layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlowUpLayout {
    h_vertex_of: Vec<usize>,
    layer_of: Vec<usize>,
    position_of: Vec<usize>,
    num_super: usize,
    num_layers: usize,
    /// `members[v * num_layers + (j - 1)]` lists the vertices of layer `j` at `v`.
    members: Vec<Vec<usize>>,
}

impl BlowUpLayout {
    /// Vertex `((v · layers) + (j − 1)) · size + pos` for every slot.
    fn regular(num_super: usize, num_layers: usize, size: usize) -> Self {
        let n = num_super * num_layers * size;
        let mut entries = Vec::with_capacity(n);
        for v in 0..num_super {
            for j in 1..=num_layers {
                for pos in 0..size {
                    entries.push((v, j, pos));
                }
            }
        }
        Self::from_entries(entries).expect("regular layout is consistent")
    }

    /// Builds a layout from `(super_vertex, layer, position)` per vertex.
    pub fn from_entries(entries: Vec<(usize, usize, usize)>) -> Result<Self> {
        let num_super = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
        let num_layers = entries.iter().map(|e| e.1).max().unwrap_or(0);
        if entries.iter().any(|e| e.1 == 0) {
            return input_err("layers are numbered from 1");
        }
        let mut members = vec![Vec::new(); num_super * num_layers];
        for (x, &(v, j, _)) in entries.iter().enumerate() {
            members[v * num_layers + j - 1].push(x);
        }
        for (x, &(v, j, pos)) in entries.iter().enumerate() {
            let slot = &members[v * num_layers + j - 1];
            if slot.get(pos) != Some(&x) {
                return input_err(format!(
                    "vertex {x} claims position {pos} in layer {j} of super-vertex {v}"
                ));
            }
        }
        Ok(BlowUpLayout {
            h_vertex_of: entries.iter().map(|e| e.0).collect(),
            layer_of: entries.iter().map(|e| e.1).collect(),
            position_of: entries.iter().map(|e| e.2).collect(),
            num_super,
            num_layers,
            members,
        })
    }

    pub fn n(&self) -> usize {
        self.h_vertex_of.len()
    }

    pub fn num_super(&self) -> usize {
        self.num_super
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn h_vertex_of(&self, x: usize) -> usize {
        self.h_vertex_of[x]
    }

    pub fn layer_of(&self, x: usize) -> usize {
        self.layer_of[x]
    }

    pub fn position_of(&self, x: usize) -> usize {
        self.position_of[x]
    }

    /// Vertices of layer `j` (1-based) at super-vertex `v`.
    pub fn layer(&self, v: usize, j: usize) -> &[usize] {
        assert!(j >= 1 && j <= self.num_layers, "layer {j} out of range");
        &self.members[v * self.num_layers + j - 1]
    }

    /// All vertices of super-vertex `v`, layer by layer.
    pub fn super_vertex(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (1..=self.num_layers).flat_map(move |j| self.layer(v, j).iter().copied())
    }

    /// Whether every layer has the same size.
    pub fn is_uniform(&self) -> bool {
        self.members.windows(2).all(|w| w[0].len() == w[1].len())
    }

    /// Checks that no edge of `g` joins two vertices of one layer.
    pub fn layers_independent(&self, g: &Graph) -> bool {
        g.n() == self.n()
            && g.edges().iter().all(|&(a, b)| {
                self.h_vertex_of[a] != self.h_vertex_of[b] || self.layer_of[a] != self.layer_of[b]
            })
    }

    /// Sidecar text: one `vertex super_vertex layer position` line per vertex.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# vertex super_vertex layer position\n");
        for x in 0..self.n() {
            writeln!(
                out,
                "{x} {} {} {}",
                self.h_vertex_of[x], self.layer_of[x], self.position_of[x]
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let nums: Vec<usize> = body
                .split_whitespace()
                .map(|t| t.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: i + 1,
                    message: "expected non-negative integers".into(),
                })?;
            let [x, v, j, pos] = nums[..] else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected `vertex super_vertex layer position`".into(),
                });
            };
            if x != entries.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected vertex {}, found {x}", entries.len()),
                });
            }
            entries.push((v, j, pos));
        }
        Self::from_entries(entries)
    }
}

/// Replaces every vertex of `h` by an independent `m`-set and every edge by a
/// complete bipartite graph.
pub fn blow_up(h: &Graph, m: usize) -> Result<(Graph, BlowUpLayout)> {
    if m == 0 {
        return input_err("blow-up set size must be at least 1");
    }
    let mut edges = Vec::with_capacity(h.m() * m * m);
    for &(u, v) in h.edges() {
        for i in 0..m {
            for j in 0..m {
                edges.push((u * m + i, v * m + j));
            }
        }
    }
    edges.sort_unstable();
    Ok((
        Graph::from_canonical(h.n() * m, edges),
        BlowUpLayout::regular(h.n(), 1, m),
    ))
}

/// Bipartite graph on two copies of `0..size` joining left `i` to right
/// `(i + j) mod size` for `j < degree`.
pub fn circulant_biregular(size: usize, degree: usize) -> Result<Vec<(usize, usize)>> {
    if degree > size {
        return input_err(format!("degree {degree} exceeds side size {size}"));
    }
    Ok((0..size)
        .flat_map(|i| (0..degree).map(move |j| (i, (i + j) % size)))
        .collect())
}

/// Layered gadget blow-up of a 2-regular digraph with coloured in-arcs.
pub fn gadget_blow_up(h: &DiGraph, params: &ConstructionParams) -> Result<(Graph, BlowUpLayout)> {
    if params.mode != ConstructionMode::Thm4 {
        return input_err("gadget blow-up needs layered parameters");
    }
    let (k, s) = (params.k, params.s);
    if s < 2 || k % (2 * s) != 0 || params.m != k / 2 - k / (2 * s) || params.m == 0 {
        return input_err(format!("inconsistent parameters k = {k}, s = {s}, m = {}", params.m));
    }
    if !h.is_regular(2) {
        return input_err("digraph must have all in- and out-degrees equal to 2");
    }
    if !h.has_proper_in_colouring() {
        return input_err("in-arcs must be properly red/blue coloured");
    }
    let layers = s + 3;
    let size = params.m;
    let r = k / (2 * s);
    let id = |v: usize, j: usize, pos: usize| (v * layers + j - 1) * size + pos;
    let bipartite = circulant_biregular(size, r)?;

    let mut edges = Vec::new();
    for v in 0..h.n() {
        for j in 1..layers {
            for a in 0..size {
                for b in 0..size {
                    edges.push((id(v, j, a), id(v, j + 1, b)));
                }
            }
        }
    }
    for (arc, &(u, v)) in h.arcs().iter().enumerate() {
        let target = match h.colour(arc) {
            Some(ArcColour::Red) => 1,
            _ => layers,
        };
        for j in 2..=s + 2 {
            for &(a, b) in &bipartite {
                let (x, y) = (id(u, j, a), id(v, target, b));
                edges.push((x.min(y), x.max(y)));
            }
        }
    }
    let g = Graph::new(h.n() * layers * size, edges)
        .map_err(|e| Error::Construction(format!("gadget edges are not simple: {e}")))?;
    let layout = BlowUpLayout::regular(h.n(), layers, size);

    if let Some(x) = (0..g.n()).find(|&x| g.degree(x) != k) {
        return Err(Error::Construction(format!(
            "vertex {x} has degree {} instead of {k}",
            g.degree(x)
        )));
    }
    if !layout.layers_independent(&g) {
        return Err(Error::Construction("a layer is not independent".into()));
    }
    Ok((g, layout))
}
