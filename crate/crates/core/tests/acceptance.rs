use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use randcol::bounds::{binom_tail_geq, resilient_pair_probability_bound, BoundConstants};
use randcol::colouring::{chromatic_number_exact, product_colouring_check, t_core, ExactChromaticConfig};
use randcol::generators::{
    blow_up, filtered_regular_graph, gadget_blow_up, random_regular_graph,
    random_two_regular_digraph, ConstructionParams, ExpanderFilter,
};
use randcol::graph::{count_connected_edge_subgraphs, is_connected, reachable_set};
use randcol::harness::stats::chi_square_homogeneity;
use randcol::harness::verify::{bounded_degree_graphs, kept_edge_histograms, oracle_graphs, small_regular_graphs};
use randcol::harness::{run_experiment_with_threads, to_ndjson_string, ExperimentConfig, MetricSummary};
use randcol::percolation::{t_core_via_percolation, thm3_fixpoint_holds, thm3_process, thm4_fixpoint_holds, thm4_process};
use randcol::sampling::{complement_split, partition_split, sample_subgraph, RngStream};
use randcol::spectral::{verify_alon_milman, CheckMode};
use randcol::{Graph, Result};

const SEED: u64 = 20240611;
const SWEEP: [f64; 5] = [0.0, 1e-4, 1e-3, 1e-2, 1e-1];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        passed,
        detail: detail.into(),
    })
}

fn core_oracle() -> Result<Outcome> {
    let graphs = oracle_graphs(SEED, 500)?;
    let mut mismatches = 0;
    let mut cases = 0;
    for g in &graphs {
        for t in 0..=g.max_degree() + 1 {
            cases += 1;
            mismatches += (t_core(g, t) != t_core_via_percolation(g, t)) as usize;
        }
    }
    let max_n = graphs.iter().map(Graph::n).max().unwrap_or(0);
    outcome(
        mismatches == 0,
        format!("{} graphs (n ≤ {max_n}), {cases} (graph, t) cases, {mismatches} mismatches", graphs.len()),
    )
}

fn tree_count() -> Result<Outcome> {
    let graphs = bounded_degree_graphs(SEED, 20)?;
    let mut violations = 0;
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for g in &graphs {
        assert!(g.max_degree() <= 4);
        let bound = std::f64::consts::E * g.max_degree() as f64;
        for v in 0..g.n() {
            for t in 1..=6 {
                let c = count_connected_edge_subgraphs(g, v, t)? as f64;
                let b = bound.powi(t as i32);
                cases += 1;
                worst = worst.max(c / b);
                violations += (c >= b) as usize;
            }
        }
    }
    outcome(
        violations == 0,
        format!("{cases} (graph, vertex, t) cases, max count/bound {worst:.3e}, {violations} violations"),
    )
}

fn alon_milman() -> Result<Outcome> {
    let graphs = small_regular_graphs(SEED, 30)?;
    let mut violations = 0;
    let mut subsets = 0;
    let mut all_exhaustive = true;
    for (i, g) in graphs.iter().enumerate() {
        assert!(g.n() <= 12 && is_connected(g) && g.regular_degree().is_some());
        let r = verify_alon_milman(g, &RngStream::new(SEED, i as u64, "alon-milman"))?;
        all_exhaustive &= r.mode == CheckMode::Exhaustive;
        violations += r.violation_count;
        subsets += r.subsets_checked;
    }
    outcome(
        violations == 0 && all_exhaustive,
        format!("{} graphs, {subsets} subsets, exhaustive {all_exhaustive}, {violations} violations", graphs.len()),
    )
}

fn two_round() -> Result<Outcome> {
    let half = Ratio::new(1i64, 2);
    let one = Ratio::from_integer(1i64);
    let mut identity_ok = true;
    for alpha in [Ratio::new(1i64, 100), Ratio::new(1, 10), Ratio::new(3, 10)] {
        let q1 = alpha / 3;
        let q2 = (half - q1) / (one - q1);
        identity_ok &= q1 + (one - q1) * q2 == half;
    }
    let g = random_regular_graph(20, 5, &RngStream::new(SEED, 0, "fixed-50"))?;
    assert_eq!(g.m(), 50);
    let mut stats = Vec::new();
    let mut chi_ok = true;
    for (i, alpha) in [0.01, 0.1, 0.3].into_iter().enumerate() {
        let (two, one) = kept_edge_histograms(&g, alpha, 100_000, SEED + i as u64)?;
        let r = chi_square_homogeneity(&two, &one, 0.001, 10)?;
        chi_ok &= r.passed;
        stats.push(format!("α={alpha}: χ²={:.2}/{:.2} ({} df)", r.statistic, r.critical, r.df));
    }
    outcome(
        identity_ok && chi_ok,
        format!("exact identity {identity_ok}; {}", stats.join(", ")),
    )
}

fn product_colouring() -> Result<Outcome> {
    let config = ExactChromaticConfig::default();
    let (mut two_bad, mut three_bad, mut inexact) = (0, 0, 0);
    for i in 0..200u64 {
        let s = RngStream::new(SEED, i, "product");
        let n = 6 + (s.uniform(0) * 9.0) as usize;
        let g = sample_subgraph(&Graph::complete(n), 0.5, &s.derive("graph"))?;
        let (a, b) = complement_split(&g, &s.derive("split2"));
        let r2 = product_colouring_check(&g, &[a, b], config)?;
        let r3 = product_colouring_check(&g, &partition_split(&g, 3, &s.derive("split3"))?, config)?;
        two_bad += !r2.holds as usize;
        three_bad += !r3.holds as usize;
        inexact += !r2.exact as usize + !r3.exact as usize;
    }
    outcome(
        two_bad == 0 && three_bad == 0 && inexact == 0,
        format!("200 trials n ≤ 14: {two_bad} two-way and {three_bad} three-way violations, {inexact} inexact"),
    )
}

fn proposition() -> Result<Outcome> {
    let config = ExactChromaticConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [15usize, 20, 25] {
        let k = chromatic_number_exact(&Graph::complete(n), config)?;
        let bound = 0.5 * k.num_colours as f64 / (2.0 * (n as f64).ln());
        let (mut fails, mut inexact, mut min_chi) = (0, 0, usize::MAX);
        for i in 0..500u64 {
            let gp = sample_subgraph(&Graph::complete(n), 0.5, &RngStream::new(SEED, i, format!("prop-{n}")))?;
            let r = chromatic_number_exact(&gp, config)?;
            inexact += !r.exact as usize;
            fails += ((r.num_colours as f64) < bound) as usize;
            min_chi = min_chi.min(r.num_colours);
        }
        ok &= fails == 0 && inexact == 0 && k.exact;
        parts.push(format!("n={n}: bound {bound:.3}, min χ {min_chi}, {fails} below"));
    }
    outcome(ok, parts.join("; "))
}

fn protected_spread() -> Result<Outcome> {
    let stream = RngStream::new(SEED, 0, "cubic-2000");
    let (h, cert) = filtered_regular_graph(2000, 3, &ExpanderFilter::default(), &stream)?;
    let (mut zero_bad, mut mono_bad, mut audit_bad) = (0, 0, 0);
    for trial in 0..200u64 {
        let s = RngStream::new(SEED, trial, "protect");
        let root = (s.uniform(u64::MAX) * h.n() as f64) as usize;
        let mut prev = usize::MAX;
        for &p in &SWEEP {
            let st = thm3_process(&h, p, root, &s)?;
            if p == 0.0 {
                zero_bad += (st.infected.len() != h.n()) as usize;
            }
            mono_bad += (st.infected.len() > prev) as usize;
            audit_bad += !thm3_fixpoint_holds(&h, &st) as usize;
            prev = st.infected.len();
        }
    }
    outcome(
        zero_bad + mono_bad + audit_bad == 0 && cert.lambda2 <= 2.9,
        format!(
            "λ₂ = {:.4}; 200 trials: {zero_bad} p=0 failures, {mono_bad} monotonicity failures, {audit_bad} audit failures",
            cert.lambda2
        ),
    )
}

fn resilient_spread() -> Result<Outcome> {
    let (mut zero_bad, mut mono_bad, mut audit_bad) = (0, 0, 0);
    for trial in 0..200u64 {
        let h = random_two_regular_digraph(2000, &RngStream::new(SEED, trial, "digraph-2000"))?;
        let s = RngStream::new(SEED, trial, "resilient");
        let root = (s.uniform(u64::MAX) * h.n() as f64) as usize;
        let mut prev = usize::MAX;
        for &p in &SWEEP {
            let st = thm4_process(&h, p, root, &s)?;
            if p == 0.0 {
                zero_bad += (st.infected != reachable_set(&h, root)) as usize;
            }
            mono_bad += (st.infected.len() > prev) as usize;
            audit_bad += !thm4_fixpoint_holds(&h, &st) as usize;
            prev = st.infected.len();
        }
    }
    outcome(
        zero_bad + mono_bad + audit_bad == 0,
        format!("200 trials: {zero_bad} p=0 mismatches, {mono_bad} monotonicity failures, {audit_bad} audit failures"),
    )
}

fn construction_audits() -> Result<Outcome> {
    let mut bad = Vec::new();
    for (k, s, n) in [(12usize, 3usize, 20usize), (24, 4, 20), (64, 16, 10)] {
        let h = random_two_regular_digraph(n, &RngStream::new(SEED, k as u64, "gadget-base"))?;
        let params = ConstructionParams::thm4(k, s, 0.09)?;
        let (g, layout) = gadget_blow_up(&h, &params)?;
        let expected = n * (s + 3) * (k / 2 - k / (2 * s));
        if g.n() != expected || g.regular_degree() != Some(k) || !layout.layers_independent(&g) {
            bad.push(format!("({k},{s},{n})"));
        }
    }
    for k in [12usize, 24, 48] {
        let h = random_regular_graph(20, 3, &RngStream::new(SEED, k as u64, "blow-up-base"))?;
        let (g, _) = blow_up(&h, k / 3)?;
        if g.regular_degree() != Some(k) {
            bad.push(format!("blow_up k={k}"));
        }
    }
    outcome(
        bad.is_empty(),
        format!("3 gadget audits, 3 blow-up audits, violations: [{}]", bad.join(", ")),
    )
}

const DESK_EXPERIMENT: &str = r#"
master_seed = 12
trials = 100

[experiment]
kind = "core_emptiness"
t = [5, 6]

[experiment.sampling]
mode = "two_round"
alpha = 0.09

[experiment.graph]
type = "blow_up"
m = 4

[experiment.graph.base]
type = "expander"
n = 200
d = 3
"#;

fn desk_experiment() -> Result<Outcome> {
    let config = ExperimentConfig::from_toml(DESK_EXPERIMENT)?;
    let first = run_experiment_with_threads(&config, Some(4))?;
    let second = run_experiment_with_threads(&config, Some(1))?;
    let identical = to_ndjson_string(&first)? == to_ndjson_string(&second)?;
    let out_of_regime = first.header.regime.in_regime == Some(false);

    let mut nested = true;
    for r in &first.records {
        let num = |key: &str| r.metrics[key].as_u64().unwrap();
        let flag = |key: &str| r.metrics[key].as_bool().unwrap();
        nested &= r.error.is_none()
            && num("core_size@6") <= num("core_size@5")
            && num("dead@6") >= num("dead@5")
            && (!flag("core_empty@5") || flag("core_empty@6"));
    }
    let proportion = |t: usize| match &first.aggregate.metrics[&format!("core_empty@{t}")] {
        MetricSummary::Proportion { proportion, .. } => *proportion,
        _ => f64::NAN,
    };
    let (p5, p6) = (proportion(5), proportion(6));
    outcome(
        identical && out_of_regime && nested && (0.0..=1.0).contains(&p5) && p5 <= p6,
        format!(
            "empty-core proportion {p5:.2} at t=5, {p6:.2} at t=6; reproducible {identical}; \
             out of regime {out_of_regime}; per-trial cores nested {nested}"
        ),
    )
}

fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn exact_tail(n: u64, q: &BigRational, x: u64) -> BigRational {
    let one = BigRational::one();
    let mut total = BigRational::zero();
    let mut coef = BigInt::one();
    for j in 0..=n {
        if j >= x {
            let mut term = BigRational::from(coef.clone());
            for _ in 0..j {
                term *= q;
            }
            for _ in j..n {
                term *= &one - q;
            }
            total += term;
        }
        coef = coef * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    total
}

fn to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap()
}

fn bounds_arithmetic() -> Result<Outcome> {
    let qs = [(1, 4), (1, 2), (1, 3), (2, 3), (1, 10), (7, 12), (5, 8), (99, 100)];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for (a, b) in qs {
        let q = rational(a, b);
        for n in 0..=20u64 {
            for x in 0..=n + 1 {
                let exact = to_f64(&exact_tail(n, &q, x));
                let got = binom_tail_geq(n, a as f64 / b as f64, x)?;
                let err = if exact == 0.0 { got.abs() } else { ((got - exact) / exact).abs() };
                worst = worst.max(err);
                cases += 1;
            }
        }
    }
    let (k, s) = (12u64, 3u64);
    let m = k / 2 - k / (2 * s);
    let block = k / s;
    let q = rational(1, 2) + rational(1, 2 * s);
    let mut choose = BigRational::one();
    for i in 0..block {
        choose *= rational(m - i, i + 1);
    }
    let mut exact = BigRational::from(BigInt::from(s + 2)) * choose;
    let tail = exact_tail(m, &q, k.div_ceil(4));
    for _ in 0..block {
        exact *= &tail;
    }
    let exact = to_f64(&exact);
    let got = resilient_pair_probability_bound(k, s, &BoundConstants::default())?.value;
    let rel = ((got - exact) / exact).abs();
    outcome(
        worst <= 1e-12 && rel <= 1e-12,
        format!("{cases} tail cases, worst relative error {worst:.2e}; resilient bound {got:.12} vs {exact:.12} (rel {rel:.2e})"),
    )
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("core oracle equivalence", Duration::from_secs(30), core_oracle),
        ("connected edge-subgraph count", Duration::from_secs(60), tree_count),
        ("edge expansion from spectral gap", Duration::from_secs(60), alon_milman),
        ("two-round sampling identity", Duration::from_secs(60), two_round),
        ("product colouring inequality", Duration::from_secs(300), product_colouring),
        ("chromatic lower bound on K_n", Duration::from_secs(600), proposition),
        ("protected-edge spread", Duration::from_secs(120), protected_spread),
        ("resilient-vertex spread", Duration::from_secs(120), resilient_spread),
        ("construction audits", Duration::from_secs(60), construction_audits),
        ("blow-up desk experiment", Duration::from_secs(300), desk_experiment),
        ("bounds arithmetic", Duration::from_secs(10), bounds_arithmetic),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed <= *limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += !passed as usize;
        println!(
            "criterion {:>2}: {} {name} [{:.1}s / {}s] {detail}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
