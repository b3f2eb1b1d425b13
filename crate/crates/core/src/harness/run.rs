use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{BuiltGraph, DigraphSource, Experiment, ExperimentConfig, GraphSource, Sampling};
use super::stats::{mean, sample_variance, wilson_interval, Z95};
use super::verify::run_suite;
use crate::bounds::{fit_tail_rate, proposition_lower_bound, theorem2_tail_bound, BoundConstants};
use crate::colouring::{
    chromatic_number_exact, colouring_number, product_colouring_check, ColouringResult,
    ExactChromaticConfig,
};
use crate::error::{Error, Result};
use crate::generators::{ConstructionMode, ConstructionParams};
use crate::graph::{reachable_set, DiGraph};
use crate::percolation::{
    classify_supervertices_thm3, dead_component, thm3_fixpoint_holds, thm3_process,
    thm4_fixpoint_holds, thm4_process,
};
use crate::sampling::{
    complement_split, partition_split, sample_subgraph, two_round_sample, RngStream, StreamId,
};

pub type Metrics = BTreeMap<String, Value>;

/// Environment variable capping worker threads.
pub const THREADS_VAR: &str = "RANDCOL_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub stream: StreamId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub metrics: Metrics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MetricSummary {
    Numeric {
        count: usize,
        mean: f64,
        variance: f64,
        min: f64,
        max: f64,
    },
    Proportion {
        count: u64,
        successes: u64,
        proportion: f64,
        wilson_low: f64,
        wilson_high: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeMetadata {
    /// Whether the experiment maps onto one of the asymptotic statements.
    pub applicable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<ConstructionMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_regime: Option<bool>,
    pub violations: Vec<String>,
}

impl RegimeMetadata {
    fn not_applicable() -> Self {
        RegimeMetadata {
            applicable: false,
            mode: None,
            in_regime: None,
            violations: Vec::new(),
        }
    }

    fn from_violations(mode: ConstructionMode, violations: Vec<String>) -> Self {
        RegimeMetadata {
            applicable: true,
            mode: Some(mode),
            in_regime: Some(violations.is_empty()),
            violations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub config: ExperimentConfig,
    pub regime: RegimeMetadata,
    /// Facts about shared inputs, such as the size of a fixed graph.
    pub context: Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub failed: usize,
    pub metrics: BTreeMap<String, MetricSummary>,
    /// Experiment-specific derived values.
    pub extras: Metrics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub header: Header,
    pub records: Vec<TrialRecord>,
    pub aggregate: Aggregate,
}

/// Summaries of every numeric or boolean metric over successful trials.
pub fn summarise(records: &[TrialRecord]) -> BTreeMap<String, MetricSummary> {
    let mut numeric: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut flags: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.error.is_none()) {
        for (key, value) in &r.metrics {
            match value {
                Value::Bool(b) => {
                    let e = flags.entry(key).or_default();
                    e.0 += *b as u64;
                    e.1 += 1;
                }
                Value::Number(x) => numeric.entry(key).or_default().push(x.as_f64().unwrap()),
                _ => {}
            }
        }
    }
    let mut out = BTreeMap::new();
    for (key, xs) in numeric {
        out.insert(
            key.to_string(),
            MetricSummary::Numeric {
                count: xs.len(),
                mean: mean(&xs),
                variance: sample_variance(&xs),
                min: xs.iter().copied().fold(f64::INFINITY, f64::min),
                max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            },
        );
    }
    for (key, (successes, count)) in flags {
        let (wilson_low, wilson_high) = wilson_interval(successes, count, Z95);
        out.insert(
            key.to_string(),
            MetricSummary::Proportion {
                count,
                successes,
                proportion: successes as f64 / count as f64,
                wilson_low,
                wilson_high,
            },
        );
    }
    out
}

fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

#[cfg(feature = "parallel")]
fn map_trials<F>(trials: usize, threads: Option<usize>, f: F) -> Vec<TrialRecord>
where
    F: Fn(usize) -> TrialRecord + Sync + Send,
{
    use rayon::prelude::*;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    match builder.build() {
        Ok(pool) => pool.install(|| (0..trials).into_par_iter().map(&f).collect()),
        Err(_) => (0..trials).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_trials<F>(trials: usize, _threads: Option<usize>, f: F) -> Vec<TrialRecord>
where
    F: Fn(usize) -> TrialRecord,
{
    (0..trials).map(f).collect()
}

/// Inputs shared by all trials, derived from the config alone.
struct Shared {
    graph: Option<BuiltGraph>,
    digraph: Option<DiGraph>,
    chi_whole: Option<ColouringResult>,
}

fn shared_stream(config: &ExperimentConfig) -> RngStream {
    RngStream::new(config.master_seed, 0, "shared-graph")
}

fn chromatic_config(budget: u64) -> ExactChromaticConfig {
    ExactChromaticConfig {
        budget,
        ..ExactChromaticConfig::default()
    }
}

fn prepare(config: &ExperimentConfig) -> Result<(Shared, Metrics)> {
    let mut context = Metrics::new();
    let fixed_graph = |source: &GraphSource| -> Result<Option<BuiltGraph>> {
        if source.per_trial() {
            return Ok(None);
        }
        source.build(&shared_stream(config)).map(Some)
    };
    let mut shared = Shared {
        graph: None,
        digraph: None,
        chi_whole: None,
    };
    match &config.experiment {
        Experiment::CoreEmptiness { graph, .. }
        | Experiment::Thm3Sweep { graph, .. }
        | Experiment::ProductColouring { graph, .. } => shared.graph = fixed_graph(graph)?,
        Experiment::ChromaticTail { graph, budget, .. }
        | Experiment::PropositionCheck { graph, budget, .. } => {
            shared.graph = fixed_graph(graph)?;
            if let Some(b) = &shared.graph {
                let chi = chromatic_number_exact(&b.graph, chromatic_config(*budget))?;
                context.insert("chi_whole".into(), json!(chi.num_colours));
                context.insert("chi_whole_exact".into(), json!(chi.exact));
                shared.chi_whole = Some(chi);
            }
        }
        Experiment::Thm4Sweep { digraph, .. } => {
            if let DigraphSource::File { .. } = digraph {
                shared.digraph = Some(digraph.build(&shared_stream(config))?);
            }
        }
        Experiment::VerifySuite { .. } => {}
    }
    if let Some(b) = &shared.graph {
        context.insert("n".into(), json!(b.graph.n()));
        context.insert("m".into(), json!(b.graph.m()));
        if let Some(h) = &b.base {
            context.insert("base_n".into(), json!(h.n()));
            context.insert("base_m".into(), json!(h.m()));
        }
    }
    if let Some(h) = &shared.digraph {
        context.insert("n".into(), json!(h.n()));
    }
    Ok((shared, context))
}

fn regime_metadata(config: &ExperimentConfig, shared: &Shared) -> RegimeMetadata {
    match &config.experiment {
        Experiment::CoreEmptiness {
            sampling: Sampling::TwoRound { alpha },
            ..
        } => {
            let Some(BuiltGraph {
                graph,
                base: Some(h),
                layout: Some(layout),
            }) = &shared.graph
            else {
                return RegimeMetadata::not_applicable();
            };
            let Some(k) = graph.regular_degree() else {
                return RegimeMetadata::from_violations(
                    ConstructionMode::Thm3,
                    vec!["blown-up graph is not regular".into()],
                );
            };
            match ConstructionParams::thm3(k, *alpha) {
                Ok(params) => {
                    let mut v = params.regime_violations(h.n());
                    if h.regular_degree() != Some(3) {
                        v.push("base graph is not cubic".into());
                    }
                    if layout.layer(0, 1).len() != params.m {
                        v.push(format!("blow-up sets have size {}, not k/3", layout.layer(0, 1).len()));
                    }
                    RegimeMetadata::from_violations(ConstructionMode::Thm3, v)
                }
                Err(e) => RegimeMetadata::from_violations(ConstructionMode::Thm3, vec![e.to_string()]),
            }
        }
        Experiment::Thm4Sweep {
            digraph,
            regime: Some(r),
            ..
        } => {
            let n = match (digraph, &shared.digraph) {
                (DigraphSource::Random { n }, _) => *n,
                (_, Some(h)) => h.n(),
                _ => 0,
            };
            match ConstructionParams::thm4(r.k, r.s, r.alpha) {
                Ok(p) => RegimeMetadata::from_violations(ConstructionMode::Thm4, p.regime_violations(n)),
                Err(e) => RegimeMetadata::from_violations(ConstructionMode::Thm4, vec![e.to_string()]),
            }
        }
        _ => RegimeMetadata::not_applicable(),
    }
}

/// Key for a metric measured at parameter value `x`.
fn at(name: &str, x: impl std::fmt::Display) -> String {
    format!("{name}@{x}")
}

fn graph_for_trial(source: &GraphSource, shared: &Shared, stream: &RngStream) -> Result<BuiltGraph> {
    match &shared.graph {
        Some(g) => Ok(g.clone()),
        None => source.build(&stream.derive("graph")),
    }
}

fn pick_root(root: Option<usize>, n: usize, stream: &RngStream) -> Result<usize> {
    match root {
        Some(r) if r < n => Ok(r),
        Some(r) => Err(Error::Input(format!("root {r} out of range for n = {n}"))),
        None => Ok(((stream.derive("root").uniform(0) * n as f64) as usize).min(n - 1)),
    }
}

/// Records `χ ≤ d` when the exact search settles it, `null` otherwise.
fn chi_at_most(res: &ColouringResult, d: u64) -> Value {
    let d = d as usize;
    if res.num_colours <= d {
        json!(true)
    } else if res.exact || res.lower_bound > d {
        json!(false)
    } else {
        Value::Null
    }
}

fn trial_metrics(config: &ExperimentConfig, shared: &Shared, stream: &RngStream) -> Result<Metrics> {
    let mut m = Metrics::new();
    match &config.experiment {
        Experiment::CoreEmptiness { graph, sampling, t } => {
            let built = graph_for_trial(graph, shared, stream)?;
            let g = &built.graph;
            let mut root = None;
            let sample = match sampling {
                Sampling::OneRound { p } => sample_subgraph(g, *p, &stream.derive("sample"))?,
                Sampling::TwoRound { alpha } => {
                    let s = two_round_sample(g, *alpha, &stream.derive("sample"))?;
                    if let Some(layout) = &built.layout {
                        let first = s.after_first_round(g);
                        root = (0..layout.num_super())
                            .find(|&v| layout.super_vertex(v).all(|x| first.degree(x) == 0));
                        m.insert("root_found".into(), json!(root.is_some()));
                    }
                    s.final_graph
                }
            };
            m.insert("edges_kept".into(), json!(sample.m()));
            for &tt in t {
                match (&built.layout, &built.base) {
                    (Some(layout), base) => {
                        let st = classify_supervertices_thm3(&sample, layout, tt)?;
                        m.insert(at("core_size", tt), json!(st.core.len()));
                        m.insert(at("core_empty", tt), json!(st.core.is_empty()));
                        m.insert(at("dead", tt), json!(st.dead_count()));
                        if let (Some(h), Some(r)) = (base, root) {
                            m.insert(at("dead_component", tt), json!(dead_component(h, &st, r)?.len()));
                        }
                    }
                    (None, _) => {
                        let core = crate::colouring::t_core(&sample, tt);
                        m.insert(at("core_size", tt), json!(core.len()));
                        m.insert(at("core_empty", tt), json!(core.is_empty()));
                    }
                }
            }
        }
        Experiment::ChromaticTail { graph, p, d, budget } => {
            let built = graph_for_trial(graph, shared, stream)?;
            let gp = sample_subgraph(&built.graph, *p, &stream.derive("sample"))?;
            let res = chromatic_number_exact(&gp, chromatic_config(*budget))?;
            m.insert("chi".into(), json!(res.num_colours));
            m.insert("chi_exact".into(), json!(res.exact));
            m.insert("chi_lower".into(), json!(res.lower_bound));
            m.insert("colouring_number".into(), json!(colouring_number(&gp).0));
            for &dd in d {
                m.insert(at("chi_at_most", dd), chi_at_most(&res, dd));
            }
        }
        Experiment::PropositionCheck { graph, p, budget } => {
            let built = graph_for_trial(graph, shared, stream)?;
            let g = &built.graph;
            let k = match &shared.chi_whole {
                Some(c) => c.clone(),
                None => chromatic_number_exact(g, chromatic_config(*budget))?,
            };
            let bound = proposition_lower_bound(*p, k.num_colours as f64, g.n() as f64)?;
            let gp = sample_subgraph(g, *p, &stream.derive("sample"))?;
            let res = chromatic_number_exact(&gp, chromatic_config(*budget))?;
            m.insert("k".into(), json!(k.num_colours));
            m.insert("bound".into(), json!(bound));
            m.insert("chi".into(), json!(res.num_colours));
            m.insert("chi_exact".into(), json!(res.exact && k.exact));
            let holds = if res.lower_bound as f64 >= bound {
                json!(true)
            } else if res.exact {
                json!(res.num_colours as f64 >= bound)
            } else {
                Value::Null
            };
            m.insert("holds".into(), holds);
        }
        Experiment::Thm3Sweep { graph, p, root } => {
            let h = graph_for_trial(graph, shared, stream)?.graph;
            let r = pick_root(*root, h.n(), stream)?;
            let protect = stream.derive("protect");
            m.insert("root".into(), json!(r));
            let mut sizes = Vec::new();
            for &pp in p {
                let st = thm3_process(&h, pp, r, &protect)?;
                m.insert(at("v0", pp), json!(st.infected.len()));
                m.insert(at("rounds", pp), json!(st.round_trace.len()));
                m.insert(at("full", pp), json!(st.infected.len() == h.n()));
                m.insert(at("fixpoint_ok", pp), json!(thm3_fixpoint_holds(&h, &st)));
                sizes.push((pp, st.infected.len()));
            }
            m.insert("monotone".into(), json!(monotone_in_p(&mut sizes)));
        }
        Experiment::Thm4Sweep {
            digraph, p, root, ..
        } => {
            let h = match &shared.digraph {
                Some(h) => h.clone(),
                None => digraph.build(&stream.derive("digraph"))?,
            };
            let r = pick_root(*root, h.n(), stream)?;
            let resilient = stream.derive("resilient");
            m.insert("root".into(), json!(r));
            m.insert("reachable_all".into(), json!(reachable_set(&h, r).len() == h.n()));
            m.insert("strongly_connected".into(), json!(h.is_strongly_connected()));
            let mut sizes = Vec::new();
            for &pp in p {
                let st = thm4_process(&h, pp, r, &resilient)?;
                m.insert(at("v0", pp), json!(st.infected.len()));
                m.insert(at("rounds", pp), json!(st.round_trace.len()));
                m.insert(at("full", pp), json!(st.infected.len() == h.n()));
                m.insert(at("fixpoint_ok", pp), json!(thm4_fixpoint_holds(&h, &st)));
                sizes.push((pp, st.infected.len()));
            }
            m.insert("monotone".into(), json!(monotone_in_p(&mut sizes)));
        }
        Experiment::ProductColouring { graph, parts, budget } => {
            let g = graph_for_trial(graph, shared, stream)?.graph;
            let split = stream.derive("split");
            let pieces = if *parts == 2 {
                let (a, b) = complement_split(&g, &split);
                vec![a, b]
            } else {
                partition_split(&g, *parts, &split)?
            };
            let report = product_colouring_check(&g, &pieces, chromatic_config(*budget))?;
            for (i, c) in report.part_chromatic.iter().enumerate() {
                m.insert(format!("part_chi{i}"), json!(c));
            }
            m.insert("whole_chi".into(), json!(report.whole_chromatic));
            m.insert("product".into(), json!(report.product as f64));
            m.insert("margin".into(), json!(report.margin as f64));
            m.insert("holds".into(), json!(report.holds));
            m.insert("exact".into(), json!(report.exact));
        }
        Experiment::VerifySuite { suite } => {
            let report = run_suite(suite, config.master_seed)?;
            m.insert("passed".into(), json!(report.passed));
            m.insert("checks".into(), json!(report.checks.len()));
            m.insert("report".into(), serde_json::to_value(&report)?);
        }
    }
    Ok(m)
}

/// True when sizes never increase as `p` increases.
fn monotone_in_p(sizes: &mut [(f64, usize)]) -> bool {
    sizes.sort_by(|a, b| a.0.total_cmp(&b.0));
    sizes.windows(2).all(|w| w[0].1 >= w[1].1)
}

fn extras(config: &ExperimentConfig, shared: &Shared, summary: &BTreeMap<String, MetricSummary>) -> Result<Metrics> {
    let mut out = Metrics::new();
    if let (Experiment::ChromaticTail { d, .. }, Some(chi)) = (&config.experiment, &shared.chi_whole) {
        let k = chi.num_colours as u64;
        for &dd in d {
            if dd < 1 || dd > k {
                continue;
            }
            let bound = theorem2_tail_bound(k, dd, &BoundConstants::default())?;
            let estimate = match summary.get(&at("chi_at_most", dd)) {
                Some(MetricSummary::Proportion { proportion, .. }) => Some(*proportion),
                _ => None,
            };
            out.insert(
                at("tail_bound", dd),
                json!({
                    "regime": bound.regime,
                    "exponent": bound.exponent,
                    "value_unit_rate": bound.value,
                    "fitted_rate": estimate.and_then(|e| fit_tail_rate(&bound, e)),
                }),
            );
        }
    }
    Ok(out)
}

/// Recomputes one trial from the config alone.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialRecord> {
    let (shared, _) = prepare(config)?;
    Ok(one_trial(config, &shared, trial))
}

fn one_trial(config: &ExperimentConfig, shared: &Shared, trial: usize) -> TrialRecord {
    let start = config.record_timing.then(Instant::now);
    let stream = RngStream::new(config.master_seed, trial as u64, "trial");
    let (metrics, error) = match trial_metrics(config, shared, &stream) {
        Ok(m) => (m, None),
        Err(e) => (Metrics::new(), Some(e.to_string())),
    };
    TrialRecord {
        trial,
        stream: stream.id().clone(),
        error,
        metrics,
        wall_ms: start.map(|s| s.elapsed().as_secs_f64() * 1e3),
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with_threads(config, thread_cap())
}

/// As [`run_experiment`] with an explicit worker cap.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    threads: Option<usize>,
) -> Result<ExperimentOutput> {
    config.validate()?;
    let (shared, context) = prepare(config)?;
    let regime = regime_metadata(config, &shared);
    let trials = match config.experiment {
        Experiment::VerifySuite { .. } => 1,
        _ => config.trials,
    };
    let records = map_trials(trials, threads, |i| one_trial(config, &shared, i));
    let metrics = summarise(&records);
    let extras = extras(config, &shared, &metrics)?;
    let aggregate = Aggregate {
        trials: records.len(),
        failed: records.iter().filter(|r| r.error.is_some()).count(),
        metrics,
        extras,
    };
    Ok(ExperimentOutput {
        header: Header {
            config: config.clone(),
            regime,
            context,
        },
        records,
        aggregate,
    })
}
