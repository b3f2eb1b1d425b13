//! Named batteries of invariant checks at fixed seeds.

use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use super::stats::chi_square_homogeneity;
use crate::colouring::{t_core, ExactChromaticConfig};
use crate::error::{Error, Result};
use crate::generators::{random_regular_graph, random_two_regular_digraph};
use crate::graph::{
    count_connected_edge_subgraphs, is_connected, reachable_set, vertex_boundary, Graph, VertexSet,
};
use crate::percolation::{
    t_core_via_percolation, thm3_fixpoint_holds, thm3_process, thm4_fixpoint_holds, thm4_process,
};
use crate::sampling::{
    complement_split, partition_split, sample_subgraph, two_round_rates, two_round_sample,
    RngStream,
};
use crate::spectral::{verify_alon_milman, verify_vertex_expansion, CheckMode};

pub const SUITES: [&str; 7] = [
    "alon_milman",
    "tree_lemma",
    "core_oracle",
    "two_round",
    "product_colouring",
    "fixpoints",
    "expansion",
];

/// Significance of every chi-square test in the suites.
pub const CHI_SQUARE_SIGNIFICANCE: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        writeln!(f, "suite {} (seed {}): {verdict}", self.suite, self.seed)?;
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            writeln!(f, "  [{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

struct Builder {
    checks: Vec<Check>,
}

impl Builder {
    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    let mut b = Builder { checks: Vec::new() };
    match name {
        "alon_milman" => alon_milman(&mut b, seed)?,
        "tree_lemma" => tree_lemma(&mut b, seed)?,
        "core_oracle" => core_oracle(&mut b, seed)?,
        "two_round" => two_round(&mut b, seed)?,
        "product_colouring" => product_colouring(&mut b, seed)?,
        "fixpoints" => fixpoints(&mut b, seed)?,
        "expansion" => expansion(&mut b, seed)?,
        other => {
            return Err(Error::Input(format!(
                "unknown suite `{other}`; expected one of {}",
                SUITES.join(", ")
            )))
        }
    }
    Ok(SuiteReport {
        suite: name.into(),
        seed,
        passed: b.checks.iter().all(|c| c.passed),
        checks: b.checks,
    })
}

/// Connected regular graphs on at most 12 vertices.
pub fn small_regular_graphs(seed: u64, count: usize) -> Result<Vec<Graph>> {
    let shapes = [(6, 3), (8, 3), (10, 3), (12, 3), (7, 4), (9, 4), (11, 4), (12, 5)];
    let mut out = Vec::new();
    let mut i = 0u64;
    while out.len() < count {
        let (n, d) = shapes[i as usize % shapes.len()];
        let g = random_regular_graph(n, d, &RngStream::new(seed, i, "small-regular"))?;
        if is_connected(&g) {
            out.push(g);
        }
        i += 1;
    }
    Ok(out)
}

fn alon_milman(b: &mut Builder, seed: u64) -> Result<()> {
    let graphs = small_regular_graphs(seed, 30)?;
    let mut violations = 0;
    let mut subsets = 0;
    let mut tightest = f64::INFINITY;
    for g in &graphs {
        let r = verify_alon_milman(g, &RngStream::new(seed, 0, "alon-milman"))?;
        violations += r.violation_count;
        subsets += r.subsets_checked;
        tightest = tightest.min(r.tightest_ratio);
    }
    b.check(
        "exhaustive",
        violations == 0,
        format!("{} graphs, {subsets} subsets, {violations} violations, tightest ratio {tightest:.4}", graphs.len()),
    );
    let big = random_regular_graph(60, 3, &RngStream::new(seed, 0, "alon-milman-big"))?;
    let r = verify_alon_milman(&big, &RngStream::new(seed, 1, "alon-milman"))?;
    b.check(
        "sampled",
        r.violation_count == 0 && r.mode == CheckMode::Sampled,
        format!("n = 60, {} subsets, λ₂ = {:.6}", r.subsets_checked, r.lambda2),
    );
    Ok(())
}

/// Graphs of maximum degree at most 4 on 8 to 14 vertices.
pub fn bounded_degree_graphs(seed: u64, count: usize) -> Result<Vec<Graph>> {
    (0..count)
        .map(|i| {
            let n = 8 + i % 7;
            let d = if n % 2 == 0 && i % 2 == 0 { 3 } else { 4 };
            let g = random_regular_graph(n, d, &RngStream::new(seed, i as u64, "bounded-degree"))?;
            // thin some graphs so that not every instance is regular
            if i % 3 == 0 {
                sample_subgraph(&g, 0.8, &RngStream::new(seed, i as u64, "thin"))
            } else {
                Ok(g)
            }
        })
        .collect()
}

fn tree_lemma(b: &mut Builder, seed: u64) -> Result<()> {
    let graphs = bounded_degree_graphs(seed, 20)?;
    let mut violations = Vec::new();
    let mut counted = 0u64;
    let mut worst: f64 = 0.0;
    for (gi, g) in graphs.iter().enumerate() {
        let delta = g.max_degree() as f64;
        for v in 0..g.n() {
            for t in 1..=6 {
                let c = count_connected_edge_subgraphs(g, v, t)?;
                let bound = (std::f64::consts::E * delta).powi(t as i32);
                counted += 1;
                worst = worst.max(c as f64 / bound);
                if c as f64 >= bound {
                    violations.push(format!("graph {gi} v {v} t {t}: {c}"));
                }
            }
        }
    }
    b.check(
        "count below (eΔ)^t",
        violations.is_empty(),
        format!(
            "{counted} (graph, vertex, t) cases, max count/bound {worst:.3e}, {} violations {}",
            violations.len(),
            violations.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    );
    Ok(())
}

/// Random graphs at density 1/2 on 2 to 40 vertices.
pub fn oracle_graphs(seed: u64, count: usize) -> Result<Vec<Graph>> {
    (0..count as u64)
        .map(|i| {
            let s = RngStream::new(seed, i, "core-oracle");
            let n = 2 + (s.uniform(0) * 39.0) as usize;
            sample_subgraph(&Graph::complete(n), 0.5, &s.derive("graph"))
        })
        .collect()
}

fn core_oracle(b: &mut Builder, seed: u64) -> Result<()> {
    let graphs = oracle_graphs(seed, 500)?;
    let matches = graphs
        .iter()
        .filter(|g| (0..=g.max_degree() + 1).all(|t| t_core(g, t) == t_core_via_percolation(g, t)))
        .count();
    b.check(
        "peeling = percolation",
        matches == graphs.len(),
        format!("{matches}/{} graphs match for every t", graphs.len()),
    );
    Ok(())
}

fn two_round(b: &mut Builder, seed: u64) -> Result<()> {
    let half = Ratio::new(1i128, 2);
    for (num, den) in [(1i128, 100i128), (1, 10), (3, 10)] {
        let alpha = Ratio::new(num, den);
        let q1 = alpha / 3;
        let q2 = (half - q1) / (Ratio::from_integer(1) - q1);
        let total = q1 + (Ratio::from_integer(1) - q1) * q2;
        let (f1, f2) = two_round_rates(num as f64 / den as f64 / 3.0);
        let float_total = f1 + (1.0 - f1) * f2;
        b.check(
            &format!("identity at alpha = {num}/{den}"),
            total == half && (float_total - 0.5).abs() < 1e-15,
            format!("exact total {total}, floating total {float_total}"),
        );
    }

    let g = random_regular_graph(20, 5, &RngStream::new(seed, 0, "two-round-graph"))?;
    let trials = 100_000u64;
    let (hist_two, hist_one) = kept_edge_histograms(&g, 0.3, trials, seed)?;
    let r = chi_square_homogeneity(&hist_two, &hist_one, CHI_SQUARE_SIGNIFICANCE, 10)?;
    b.check(
        "two-round vs one-round histogram",
        r.passed,
        format!(
            "{} edges, {trials} trials each, χ² = {:.3} on {} df, critical {:.3}",
            g.m(),
            r.statistic,
            r.df,
            r.critical
        ),
    );
    Ok(())
}

/// Histograms of kept-edge counts under two-round deletion and under a
/// single `p = 1/2` sample.
pub fn kept_edge_histograms(g: &Graph, alpha: f64, trials: u64, seed: u64) -> Result<(Vec<u64>, Vec<u64>)> {
    let mut two = vec![0u64; g.m() + 1];
    let mut one = vec![0u64; g.m() + 1];
    for i in 0..trials {
        let s = two_round_sample(g, alpha, &RngStream::new(seed, i, "two-round"))?;
        two[s.final_graph.m()] += 1;
        let o = sample_subgraph(g, 0.5, &RngStream::new(seed, i, "one-round"))?;
        one[o.m()] += 1;
    }
    Ok((two, one))
}

fn product_colouring(b: &mut Builder, seed: u64) -> Result<()> {
    let config = ExactChromaticConfig::default();
    let (mut two_bad, mut three_bad, mut inexact) = (0, 0, 0);
    let trials = 200u64;
    for i in 0..trials {
        let s = RngStream::new(seed, i, "product");
        let n = 6 + (s.uniform(0) * 9.0) as usize;
        let g = sample_subgraph(&Graph::complete(n), 0.5, &s.derive("graph"))?;
        let (a, c) = complement_split(&g, &s.derive("split2"));
        let r2 = crate::colouring::product_colouring_check(&g, &[a, c], config)?;
        let parts = partition_split(&g, 3, &s.derive("split3"))?;
        let r3 = crate::colouring::product_colouring_check(&g, &parts, config)?;
        two_bad += !r2.holds as u32;
        three_bad += !r3.holds as u32;
        inexact += (!r2.exact) as u32 + (!r3.exact) as u32;
    }
    b.check(
        "two-way splits",
        two_bad == 0 && inexact == 0,
        format!("{trials} trials, {two_bad} violations"),
    );
    b.check(
        "three-way splits",
        three_bad == 0 && inexact == 0,
        format!("{trials} trials, {three_bad} violations, {inexact} inexact"),
    );
    Ok(())
}

fn fixpoints(b: &mut Builder, seed: u64) -> Result<()> {
    let sweep = [0.0, 1e-3, 1e-2, 1e-1, 0.5];
    let h = random_regular_graph(500, 3, &RngStream::new(seed, 0, "fixpoint-graph"))?;
    let (mut audit_fail, mut mono_fail, mut zero_fail) = (0, 0, 0);
    for trial in 0..50u64 {
        let s = RngStream::new(seed, trial, "protect");
        let root = trial as usize % h.n();
        let mut prev = usize::MAX;
        for &p in &sweep {
            let st = thm3_process(&h, p, root, &s)?;
            audit_fail += !thm3_fixpoint_holds(&h, &st) as u32;
            mono_fail += (st.infected.len() > prev) as u32;
            if p == 0.0 {
                zero_fail += (st.infected != reachable_set(&h, root)) as u32;
            }
            prev = st.infected.len();
        }
    }
    b.check(
        "protected-edge spread",
        audit_fail + mono_fail + zero_fail == 0,
        format!("50 trials: {audit_fail} audit failures, {mono_fail} monotonicity failures, {zero_fail} p = 0 mismatches"),
    );

    let (mut audit_fail, mut mono_fail, mut zero_fail) = (0, 0, 0);
    for trial in 0..50u64 {
        let d = random_two_regular_digraph(500, &RngStream::new(seed, trial, "fixpoint-digraph"))?;
        let s = RngStream::new(seed, trial, "resilient");
        let root = trial as usize % d.n();
        let mut prev = usize::MAX;
        for &p in &sweep {
            let st = thm4_process(&d, p, root, &s)?;
            audit_fail += !thm4_fixpoint_holds(&d, &st) as u32;
            mono_fail += (st.infected.len() > prev) as u32;
            if p == 0.0 {
                zero_fail += (st.infected != reachable_set(&d, root)) as u32;
            }
            prev = st.infected.len();
        }
    }
    b.check(
        "resilient-vertex spread",
        audit_fail + mono_fail + zero_fail == 0,
        format!("50 trials: {audit_fail} audit failures, {mono_fail} monotonicity failures, {zero_fail} p = 0 mismatches"),
    );
    Ok(())
}

fn expansion(b: &mut Builder, seed: u64) -> Result<()> {
    let mut mismatches = 0;
    let mut witness_bad = 0;
    let mut min_c3 = f64::INFINITY;
    for i in 0..20u64 {
        let n = 6 + (i as usize % 11);
        let s = RngStream::new(seed, i, "expansion");
        let h = random_two_regular_digraph(n, &s)?;
        let cert = verify_vertex_expansion(&h, &s)?;
        mismatches += ((cert.c3_hat > 0.0) != h.is_strongly_connected()) as u32;
        let w = VertexSet::from_iter_in(n, cert.witness.iter().copied());
        witness_bad += (vertex_boundary(&h, &w)?.len() != cert.witness_boundary) as u32;
        min_c3 = min_c3.min(cert.c3_hat);
    }
    b.check(
        "exhaustive small digraphs",
        mismatches == 0 && witness_bad == 0,
        format!("20 digraphs n ≤ 16, min expansion {min_c3:.3}, {mismatches} connectivity mismatches, {witness_bad} bad witnesses"),
    );
    let h = random_two_regular_digraph(1000, &RngStream::new(seed, 0, "expansion-big"))?;
    let cert = verify_vertex_expansion(&h, &RngStream::new(seed, 1, "expansion-big"))?;
    b.check(
        "sampled n = 1000",
        cert.c3_hat > 0.0 || !h.is_strongly_connected(),
        format!("sampled expansion {:.4} over {} subsets", cert.c3_hat, cert.samples.unwrap_or(0)),
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", 1).is_err());
    }

    #[test]
    fn quick_suites_pass() {
        for name in ["alon_milman", "core_oracle", "fixpoints", "expansion"] {
            let r = run_suite(name, 1).unwrap();
            assert!(r.passed, "{r}");
        }
    }
}
