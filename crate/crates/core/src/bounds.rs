//! Binomial tails, the closed-form tail bounds for chromatic numbers and
//! resilient pairs, and near-disjoint block families.
//!
//! The asymptotic statements hide their constants; every such constant is a
//! [`BoundConstants`] field defaulting to 1. Those defaults are placeholders,
//! not derived values.

use serde::{Deserialize, Serialize};

use crate::error::{input_err, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundConstants {
    /// Rate in the `exp(−c·d)` bound for one part of a partition.
    pub c_shinkar: f64,
    pub c1: f64,
    pub c2: f64,
    /// Vertex expansion of the base digraph.
    pub c3: f64,
    /// Rate in the `(1 + c4)^{−k²}` resilient-pair bound.
    pub c4: f64,
    /// Girth constant.
    pub c_prime: f64,
    /// Spectral-gap constant.
    pub c_dprime: f64,
    /// Rate inside the three-regime lower-tail bound.
    pub c_tail: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        BoundConstants {
            c_shinkar: 1.0,
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
            c4: 1.0,
            c_prime: 1.0,
            c_dprime: 1.0,
            c_tail: 1.0,
        }
    }
}

impl BoundConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c_shinkar", self.c_shinkar),
            ("c1", self.c1),
            ("c2", self.c2),
            ("c3", self.c3),
            ("c4", self.c4),
            ("c_prime", self.c_prime),
            ("c_dprime", self.c_dprime),
            ("c_tail", self.c_tail),
        ];
        match fields.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            Some((name, v)) => input_err(format!("constant {name} = {v} must be positive")),
            None => Ok(()),
        }
    }
}

/// `ln C(n, j)`, accumulated term by term.
pub fn ln_choose(n: u64, j: u64) -> f64 {
    if j > n {
        return f64::NEG_INFINITY;
    }
    let j = j.min(n - j);
    (0..j).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `ln P(Bin(n, q) ≥ x)`.
pub fn ln_binom_tail_geq(n: u64, q: f64, x: u64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return input_err(format!("success probability {q} outside [0, 1]"));
    }
    if x > n + 1 {
        return input_err(format!("threshold {x} exceeds n + 1 = {}", n + 1));
    }
    if x == 0 {
        return Ok(0.0);
    }
    if x > n {
        return Ok(f64::NEG_INFINITY);
    }
    if q == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if q == 1.0 {
        return Ok(0.0);
    }
    let (lq, lp) = (q.ln(), (-q).ln_1p());
    let terms: Vec<f64> = (x..=n)
        .map(|j| ln_choose(n, j) + j as f64 * lq + (n - j) as f64 * lp)
        .collect();
    Ok(log_sum_exp(&terms).min(0.0))
}

/// `P(Bin(n, q) ≥ x)`.
pub fn binom_tail_geq(n: u64, q: f64, x: u64) -> Result<f64> {
    Ok(ln_binom_tail_geq(n, q, x)?.exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRegime {
    /// `√k/2 ≤ d ≤ √k`
    NearSqrt,
    /// `k^{1/3} ≤ d < √k/2`
    Middle,
    /// `d < k^{1/3}`
    Small,
    /// `d > √k`: no nontrivial statement.
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub regime: TailRegime,
    pub value: f64,
    /// The exponent `E` with `value = exp(−C·E)`, before clamping.
    pub exponent: f64,
}

/// The regime for `d`, decided with exact integer comparisons; boundary
/// values go to the regime with the larger `d`.
pub fn tail_regime(k: u64, d: u64) -> TailRegime {
    let (k, d) = (k as u128, d as u128);
    if d * d > k {
        TailRegime::Trivial
    } else if 4 * d * d >= k {
        TailRegime::NearSqrt
    } else if d * d * d >= k {
        TailRegime::Middle
    } else {
        TailRegime::Small
    }
}

/// The exponent of each regime's expression at `(k, d)`, ignoring ranges:
/// `(√k − d)²/√k`, `k/d`, `k(k − d³)/d³`.
pub fn tail_exponents(k: u64, d: u64) -> [f64; 3] {
    let (k, d) = (k as f64, d as f64);
    let r = k.sqrt();
    [(r - d).powi(2) / r, k / d, k * (k - d.powi(3)) / d.powi(3)]
}

/// Upper bound on `P(χ(G_{1/2}) ≤ d)` for `χ(G) = k`, with the hidden rate
/// taken from `constants.c_tail`.
pub fn theorem2_tail_bound(k: u64, d: u64, constants: &BoundConstants) -> Result<TailBound> {
    if d < 1 || d > k {
        return input_err(format!("d = {d} must lie in [1, k = {k}]"));
    }
    constants.validate()?;
    let regime = tail_regime(k, d);
    let e = tail_exponents(k, d);
    let exponent = match regime {
        TailRegime::NearSqrt => e[0],
        TailRegime::Middle => e[1],
        TailRegime::Small => e[2],
        TailRegime::Trivial => 0.0,
    };
    let value = (-constants.c_tail * exponent).exp().clamp(0.0, 1.0);
    Ok(TailBound {
        regime,
        value,
        exponent,
    })
}

/// Largest rate `C` for which `exp(−C·E) ≥ estimate`, i.e. the bound still
/// dominates a Monte Carlo estimate. `None` when the exponent vanishes.
pub fn fit_tail_rate(bound: &TailBound, estimate: f64) -> Option<f64> {
    if bound.exponent <= 0.0 {
        return None;
    }
    if estimate <= 0.0 {
        return Some(f64::INFINITY);
    }
    Some(-estimate.min(1.0).ln() / bound.exponent)
}

/// `pk / (2 ln n)`.
pub fn proposition_lower_bound(p: f64, k: f64, n: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) || k < 2.0 || n < 2.0 {
        return input_err("need p in (0, 1] and k, n ≥ 2");
    }
    Ok(p * k / (2.0 * n.ln()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResilientBound {
    pub value: f64,
    pub ln_value: f64,
    /// `(1 + c4)^{−k²}`.
    pub comparison: f64,
    pub below_comparison: bool,
}

/// `(s + 2)·C(M, k/s)·P(Bin(M, 1/2 + 1/2s) ≥ ⌈k/4⌉)^{k/s}` with
/// `M = k/2 − k/2s`, evaluated in log-space.
pub fn resilient_pair_probability_bound(
    k: u64,
    s: u64,
    constants: &BoundConstants,
) -> Result<ResilientBound> {
    if s < 2 || k == 0 || !k.is_multiple_of(2 * s) {
        return input_err(format!("need s ≥ 2 and 2s | k (k = {k}, s = {s})"));
    }
    constants.validate()?;
    let m = k / 2 - k / (2 * s);
    let block = k / s;
    let q = 0.5 + 0.5 / s as f64;
    let tail = ln_binom_tail_geq(m, q, k.div_ceil(4).min(m + 1))?;
    let ln_value = (((s + 2) as f64).ln() + ln_choose(m, block) + block as f64 * tail).min(0.0);
    let ln_cmp = -((k * k) as f64) * constants.c4.ln_1p();
    Ok(ResilientBound {
        value: ln_value.exp(),
        ln_value,
        comparison: ln_cmp.exp(),
        below_comparison: ln_value <= ln_cmp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyConstruction {
    AffinePlane,
    TruncatedAffinePlane,
    Partition,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockFamily {
    pub construction: FamilyConstruction,
    /// Blocks of `0..k`, each sorted.
    pub blocks: Vec<Vec<usize>>,
}

impl BlockFamily {
    /// Largest intersection between two distinct blocks.
    pub fn max_pairwise_intersection(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.blocks.iter().enumerate() {
            for b in &self.blocks[i + 1..] {
                let common = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
                best = best.max(common);
            }
        }
        best
    }
}

fn is_prime(q: usize) -> bool {
    q >= 2 && (2..).take_while(|i| i * i <= q).all(|i| !q.is_multiple_of(i))
}

/// Lines of the affine plane over `Z_q`, with point `(x, y)` numbered
/// `x·q + y` and points numbered `k` or above dropped.
fn affine_lines(q: usize, k: usize) -> Vec<Vec<usize>> {
    let mut lines = Vec::with_capacity(q * q + q);
    for slope in 0..q {
        for icpt in 0..q {
            lines.push((0..q).map(|x| x * q + (slope * x + icpt) % q).collect::<Vec<_>>());
        }
    }
    for x in 0..q {
        lines.push((0..q).map(|y| x * q + y).collect());
    }
    for line in &mut lines {
        line.retain(|&p| p < k);
        line.sort_unstable();
    }
    lines
}

/// Subsets of `0..k` of size at least `block_size` meeting pairwise in at
/// most one element.
pub fn near_disjoint_family(k: usize, block_size: usize) -> Result<BlockFamily> {
    if block_size == 0 || block_size > k {
        return input_err(format!("block size {block_size} must lie in [1, k = {k}]"));
    }
    let root = (k as f64).sqrt().round() as usize;
    if root * root == k && is_prime(root) && block_size <= root {
        return Ok(BlockFamily {
            construction: FamilyConstruction::AffinePlane,
            blocks: affine_lines(root, k),
        });
    }

    let parts = k / block_size;
    let mut partition: Vec<Vec<usize>> = (0..parts)
        .map(|i| (i * block_size..(i + 1) * block_size).collect())
        .collect();
    partition.last_mut().unwrap().extend(parts * block_size..k);

    let mut q = block_size.max((k as f64).sqrt().ceil() as usize);
    while !is_prime(q) {
        q += 1;
    }
    let truncated: Vec<Vec<usize>> = affine_lines(q, k)
        .into_iter()
        .filter(|l| l.len() >= block_size)
        .collect();
    Ok(if truncated.len() > partition.len() {
        BlockFamily {
            construction: FamilyConstruction::TruncatedAffinePlane,
            blocks: truncated,
        }
    } else {
        BlockFamily {
            construction: FamilyConstruction::Partition,
            blocks: partition,
        }
    })
}
