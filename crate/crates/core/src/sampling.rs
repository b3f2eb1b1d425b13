//! Random spanning subgraphs driven by counter-style random streams.
//!
//! Every per-edge decision is a pure function of the stream key and the edge's
//! endpoints, so results do not depend on iteration order or worker count, and
//! different thresholds applied to the same stream give nested subgraphs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};
use crate::graph::Graph;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash_str(s: &str) -> u64 {
    // FNV-1a, stable across platforms and releases
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

/// Serialised identity of an [`RngStream`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamId {
    pub master_seed: u64,
    pub trial: u64,
    pub purpose: String,
}

/// A reproducible random substream identified by `(master_seed, trial, purpose)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "StreamId", into = "StreamId")]
pub struct RngStream {
    id: StreamId,
    key: u64,
}

impl From<StreamId> for RngStream {
    fn from(id: StreamId) -> Self {
        RngStream::new(id.master_seed, id.trial, id.purpose)
    }
}

impl From<RngStream> for StreamId {
    fn from(s: RngStream) -> Self {
        s.id
    }
}

impl RngStream {
    pub fn new(master_seed: u64, trial: u64, purpose: impl Into<String>) -> Self {
        let purpose = purpose.into();
        let key = mix64(mix64(mix64(master_seed ^ GOLDEN) ^ trial) ^ hash_str(&purpose));
        RngStream {
            id: StreamId {
                master_seed,
                trial,
                purpose,
            },
            key,
        }
    }

    pub fn id(&self) -> &StreamId {
        &self.id
    }

    /// Child stream for a sub-purpose, e.g. `"sample"` → `"sample/round2"`.
    pub fn derive(&self, tag: &str) -> Self {
        Self::new(
            self.id.master_seed,
            self.id.trial,
            format!("{}/{tag}", self.id.purpose),
        )
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Uniform in `[0, 1)` at position `index` of the stream.
    #[inline]
    pub fn uniform(&self, index: u64) -> f64 {
        let bits = mix64(self.key ^ mix64(index.wrapping_mul(GOLDEN).wrapping_add(1)));
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform attached to the undirected edge `{u, v}`.
    #[inline]
    pub fn edge_uniform(&self, u: usize, v: usize) -> f64 {
        let (a, b) = (u.min(v) as u64, u.max(v) as u64);
        self.uniform((a << 32) | b)
    }

    /// Sequential generator for algorithms that need one (configuration model).
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.key)
    }
}

fn check_probability(p: f64, name: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return input_err(format!("{name} = {p} is not a probability"));
    }
    Ok(())
}

/// `G_p`: keeps each edge independently with probability `p`.
pub fn sample_subgraph(g: &Graph, p: f64, stream: &RngStream) -> Result<Graph> {
    check_probability(p, "p")?;
    Ok(g.spanning_subgraph(|_, (u, v)| stream.edge_uniform(u, v) < p))
}

/// Shared per-edge uniforms; thresholding them at `p < p'` gives nested subgraphs.
#[derive(Clone, Debug)]
pub struct CoupledEdges {
    uniforms: Vec<f64>,
}

impl CoupledEdges {
    pub fn new(g: &Graph, stream: &RngStream) -> Self {
        CoupledEdges {
            uniforms: g.edges().iter().map(|&(u, v)| stream.edge_uniform(u, v)).collect(),
        }
    }

    pub fn uniforms(&self) -> &[f64] {
        &self.uniforms
    }

    /// Same edges as `sample_subgraph(g, p, stream)` for the generating stream.
    pub fn subgraph_at(&self, g: &Graph, p: f64) -> Result<Graph> {
        check_probability(p, "p")?;
        Ok(g.spanning_subgraph(|i, _| self.uniforms[i] < p))
    }
}

/// Side assignment of each edge (indexed like `g.edges()`): `true` = first side.
pub fn edge_sides(g: &Graph, stream: &RngStream) -> Vec<bool> {
    g.edges()
        .iter()
        .map(|&(u, v)| stream.edge_uniform(u, v) < 0.5)
        .collect()
}

pub fn split_by_sides(g: &Graph, sides: &[bool]) -> (Graph, Graph) {
    assert_eq!(sides.len(), g.m());
    (
        g.spanning_subgraph(|i, _| sides[i]),
        g.spanning_subgraph(|i, _| !sides[i]),
    )
}

/// `(G_{1/2}, G \ G_{1/2})`: an edge-disjoint pair covering `g`.
pub fn complement_split(g: &Graph, stream: &RngStream) -> (Graph, Graph) {
    split_by_sides(g, &edge_sides(g, stream))
}

/// Assigns every edge independently and uniformly to one of `r` parts.
pub fn partition_split(g: &Graph, r: usize, stream: &RngStream) -> Result<Vec<Graph>> {
    if r == 0 {
        return input_err("r must be at least 1");
    }
    let part: Vec<usize> = g
        .edges()
        .iter()
        .map(|&(u, v)| ((stream.edge_uniform(u, v) * r as f64) as usize).min(r - 1))
        .collect();
    Ok((0..r)
        .map(|j| g.spanning_subgraph(|i, _| part[i] == j))
        .collect())
}

/// Deletion rates `(q1, q2)` whose composition deletes each edge with
/// probability exactly 1/2: `q1 + (1 - q1) q2 = 1/2`.
pub fn two_round_rates(first_rate: f64) -> (f64, f64) {
    (first_rate, (0.5 - first_rate) / (1.0 - first_rate))
}

#[derive(Clone, Debug)]
pub struct TwoRoundSample {
    pub round1_deleted: Vec<(usize, usize)>,
    pub round2_deleted: Vec<(usize, usize)>,
    pub final_graph: Graph,
    pub first_rate: f64,
    pub second_rate: f64,
}

/// `G_{1/2}` built by two independent deletion rounds at rates `α/3` and
/// `(1/2 − α/3)/(1 − α/3)`.
pub fn two_round_sample(g: &Graph, alpha: f64, stream: &RngStream) -> Result<TwoRoundSample> {
    if !(alpha > 0.0 && alpha < 1.5) {
        return input_err(format!("alpha = {alpha} must lie in (0, 3/2)"));
    }
    two_round_sample_with_rate(g, alpha / 3.0, stream)
}

/// Two-round deletion with an explicit first-round rate in `[0, 1/2]`.
pub fn two_round_sample_with_rate(
    g: &Graph,
    first_rate: f64,
    stream: &RngStream,
) -> Result<TwoRoundSample> {
    if !(0.0..=0.5).contains(&first_rate) {
        return input_err(format!("first-round rate {first_rate} must lie in [0, 1/2]"));
    }
    let (q1, q2) = two_round_rates(first_rate);
    let r1 = stream.derive("round1");
    let r2 = stream.derive("round2");
    let mut round1 = Vec::new();
    let mut round2 = Vec::new();
    let mut kept = Vec::new();
    for &(u, v) in g.edges() {
        if r1.edge_uniform(u, v) < q1 {
            round1.push((u, v));
        } else if r2.edge_uniform(u, v) < q2 {
            round2.push((u, v));
        } else {
            kept.push((u, v));
        }
    }
    Ok(TwoRoundSample {
        round1_deleted: round1,
        round2_deleted: round2,
        final_graph: Graph::from_canonical(g.n(), kept),
        first_rate: q1,
        second_rate: q2,
    })
}

impl TwoRoundSample {
    /// The graph after the first round only.
    pub fn after_first_round(&self, g: &Graph) -> Graph {
        let mut deleted = self.round1_deleted.iter().peekable();
        g.spanning_subgraph(|_, e| {
            if deleted.peek() == Some(&&e) {
                deleted.next();
                false
            } else {
                true
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    #[test]
    fn extreme_probabilities() {
        let g = Graph::petersen();
        let s = RngStream::new(1, 0, "t");
        assert_eq!(sample_subgraph(&g, 1.0, &s).unwrap(), g);
        assert_eq!(sample_subgraph(&g, 0.0, &s).unwrap().m(), 0);
        assert!(sample_subgraph(&g, 1.5, &s).is_err());
    }

    #[test]
    fn kept_edge_mean_within_three_sigma() {
        // 1000 edges, 10^4 trials of G_{1/2}: the mean kept count has
        // standard error sqrt(250 / 10^4)
        let g = Graph::complete(46); // 1035 edges; trim to exactly 1000
        let g = g.spanning_subgraph(|i, _| i < 1000);
        assert_eq!(g.m(), 1000);
        let trials = 10_000;
        let total: usize = (0..trials)
            .map(|t| sample_subgraph(&g, 0.5, &RngStream::new(7, t, "mean")).unwrap().m())
            .sum();
        let mean = total as f64 / trials as f64;
        let se = (250.0f64 / trials as f64).sqrt();
        assert!((mean - 500.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn complement_split_partitions_edges() {
        let g = Graph::complete(8);
        for t in 0..20 {
            let s = RngStream::new(3, t, "split");
            let (a, b) = complement_split(&g, &s);
            assert_eq!(a.m() + b.m(), g.m());
            assert!(a.edges().iter().all(|&(u, v)| !b.has_edge(u, v)));
            assert!(g.contains_subgraph(&a) && g.contains_subgraph(&b));
            // flipping every side bit mirrors the pair
            let flipped: Vec<bool> = edge_sides(&g, &s).iter().map(|b| !b).collect();
            let (c, d) = split_by_sides(&g, &flipped);
            assert_eq!((c, d), (b, a));
        }
    }

    #[test]
    fn partition_split_matches_complement_split_for_two_parts() {
        let g = Graph::complete(9);
        let s = RngStream::new(11, 4, "split");
        let parts = partition_split(&g, 2, &s).unwrap();
        let (a, b) = complement_split(&g, &s);
        assert_eq!(parts, vec![a, b]);
        assert_eq!(partition_split(&g, 1, &s).unwrap(), vec![g.clone()]);
        assert!(partition_split(&g, 0, &s).is_err());
    }

    #[test]
    fn two_round_rates_compose_to_half() {
        for alpha in [0.01, 0.1, 0.3, 0.9, 1.4] {
            let (q1, q2) = two_round_rates(alpha / 3.0);
            assert!((q1 + (1.0 - q1) * q2 - 0.5).abs() < 1e-15);
        }
        let (q1, q2) = two_round_rates(0.1);
        assert!((q1 - 0.1).abs() < 1e-15 && (q2 - 4.0 / 9.0).abs() < 1e-15);
        let (q1, q2) = two_round_rates(0.0);
        assert_eq!((q1, q2), (0.0, 0.5));
    }

    #[test]
    fn two_round_rounds_are_disjoint() {
        let g = Graph::complete(12);
        let s = RngStream::new(5, 0, "two");
        let tr = two_round_sample(&g, 0.3, &s).unwrap();
        assert_eq!(
            tr.round1_deleted.len() + tr.round2_deleted.len() + tr.final_graph.m(),
            g.m()
        );
        assert!(tr.round1_deleted.iter().all(|e| !tr.round2_deleted.contains(e)));
        let first = tr.after_first_round(&g);
        assert_eq!(first.m(), g.m() - tr.round1_deleted.len());
        assert!(first.contains_subgraph(&tr.final_graph));
        assert!(two_round_sample(&g, 0.0, &s).is_err());
        assert!(two_round_sample(&g, 1.5, &s).is_err());
    }

    #[test]
    fn per_edge_deletion_frequency_is_half() {
        // 2 * 10^4 trials on one edge: deletion count ~ Bin(2e4, 1/2)
        let g = Graph::complete(2);
        let trials = 20_000u64;
        let deleted = (0..trials)
            .filter(|&t| {
                let tr = two_round_sample(&g, 0.3, &RngStream::new(9, t, "freq")).unwrap();
                tr.final_graph.m() == 0
            })
            .count() as f64;
        let sigma = (trials as f64 * 0.25).sqrt();
        assert!((deleted - trials as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a = RngStream::new(1, 2, "x");
        let b = RngStream::new(1, 2, "x");
        let c = RngStream::new(1, 3, "x");
        let d = RngStream::new(1, 2, "y");
        assert_eq!(a.uniform(17), b.uniform(17));
        assert_ne!(a.uniform(17), c.uniform(17));
        assert_ne!(a.uniform(17), d.uniform(17));
        let json = serde_json::to_string(&a).unwrap();
        let back: RngStream = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }
}
