use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{
    blow_up, filtered_regular_graph, random_regular_graph, random_two_regular_digraph,
    BlowUpLayout, ExpanderFilter,
};
use crate::graph::text::parse;
use crate::graph::{DiGraph, Graph};
use crate::sampling::{sample_subgraph, RngStream};

/// A Monte Carlo experiment, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub trials: usize,
    /// Where the NDJSON result goes; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Also write a CSV projection here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Adds per-trial wall time to records, which makes outputs differ
    /// between runs.
    #[serde(default)]
    pub record_timing: bool,
    pub experiment: Experiment,
}

fn default_half() -> f64 {
    0.5
}

fn default_budget() -> u64 {
    10_000_000
}

fn default_parts() -> usize {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Experiment {
    /// t-cores of a random subgraph, coupled across the listed thresholds.
    CoreEmptiness {
        graph: GraphSource,
        sampling: Sampling,
        t: Vec<usize>,
    },
    /// Exact χ of `G_p`, tabulated against the listed `d`.
    ChromaticTail {
        graph: GraphSource,
        #[serde(default = "default_half")]
        p: f64,
        d: Vec<u64>,
        #[serde(default = "default_budget")]
        budget: u64,
    },
    /// χ(G_p) against `pk / (2 ln n)` with `k = χ(G)`.
    PropositionCheck {
        graph: GraphSource,
        #[serde(default = "default_half")]
        p: f64,
        #[serde(default = "default_budget")]
        budget: u64,
    },
    /// Protected-edge spread on an undirected base graph, coupled across `p`.
    Thm3Sweep {
        graph: GraphSource,
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<usize>,
    },
    /// Directed spread avoiding resilient vertices, coupled across `p`.
    Thm4Sweep {
        digraph: DigraphSource,
        p: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        root: Option<usize>,
        /// Layered parameters, used only to report regime metadata.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        regime: Option<LayeredRegime>,
    },
    /// Π χ(part) ≥ χ(G) for random edge splits.
    ProductColouring {
        graph: GraphSource,
        #[serde(default = "default_parts")]
        parts: usize,
        #[serde(default = "default_budget")]
        budget: u64,
    },
    /// Runs a named verification suite once.
    VerifySuite { suite: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayeredRegime {
    pub k: usize,
    pub s: usize,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sampling {
    OneRound { p: f64 },
    /// Two deletion rounds at rates `α/3` and `(1/2 − α/3)/(1 − α/3)`.
    TwoRound { alpha: f64 },
}

fn default_lambda2_max() -> f64 {
    ExpanderFilter::default().lambda2_max
}

fn default_girth_min() -> usize {
    ExpanderFilter::default().girth_min
}

fn default_attempts() -> usize {
    ExpanderFilter::default().max_attempts
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    Complete {
        n: usize,
    },
    Gnp {
        n: usize,
        p: f64,
        /// Draw a fresh graph for every trial instead of one shared graph.
        #[serde(default)]
        per_trial: bool,
    },
    RandomRegular {
        n: usize,
        d: usize,
        #[serde(default)]
        per_trial: bool,
    },
    Expander {
        n: usize,
        d: usize,
        #[serde(default = "default_lambda2_max")]
        lambda2_max: f64,
        #[serde(default = "default_girth_min")]
        girth_min: usize,
        #[serde(default = "default_attempts")]
        max_attempts: usize,
    },
    BlowUp {
        base: Box<GraphSource>,
        m: usize,
    },
    File {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DigraphSource {
    /// A fresh random 2-regular digraph per trial.
    Random { n: usize },
    File { path: PathBuf },
}

/// A resolved graph; blow-ups keep their base graph and layout.
#[derive(Clone, Debug)]
pub struct BuiltGraph {
    pub graph: Graph,
    pub base: Option<Graph>,
    pub layout: Option<BlowUpLayout>,
}

impl GraphSource {
    /// Whether the graph changes from trial to trial.
    pub fn per_trial(&self) -> bool {
        match self {
            GraphSource::Gnp { per_trial, .. } | GraphSource::RandomRegular { per_trial, .. } => {
                *per_trial
            }
            GraphSource::BlowUp { base, .. } => base.per_trial(),
            _ => false,
        }
    }

    pub fn build(&self, stream: &RngStream) -> Result<BuiltGraph> {
        let plain = |graph| {
            Ok(BuiltGraph {
                graph,
                base: None,
                layout: None,
            })
        };
        match self {
            GraphSource::Complete { n } => plain(Graph::complete(*n)),
            GraphSource::Gnp { n, p, .. } => {
                plain(sample_subgraph(&Graph::complete(*n), *p, stream)?)
            }
            GraphSource::RandomRegular { n, d, .. } => plain(random_regular_graph(*n, *d, stream)?),
            GraphSource::Expander {
                n,
                d,
                lambda2_max,
                girth_min,
                max_attempts,
            } => {
                let filter = ExpanderFilter {
                    lambda2_max: *lambda2_max,
                    girth_min: *girth_min,
                    max_attempts: *max_attempts,
                };
                plain(filtered_regular_graph(*n, *d, &filter, stream)?.0)
            }
            GraphSource::BlowUp { base, m } => {
                let h = base.build(&stream.derive("base"))?.graph;
                let (graph, layout) = blow_up(&h, *m)?;
                Ok(BuiltGraph {
                    graph,
                    base: Some(h),
                    layout: Some(layout),
                })
            }
            GraphSource::File { path } => plain(read_graph(path)?),
        }
    }
}

impl DigraphSource {
    pub fn build(&self, stream: &RngStream) -> Result<DiGraph> {
        match self {
            DigraphSource::Random { n } => random_two_regular_digraph(*n, stream),
            DigraphSource::File { path } => {
                let text = std::fs::read_to_string(path)?;
                let h = parse(&text)?.into_directed()?;
                Ok(match h.colours() {
                    Some(_) => h,
                    None => h.with_canonical_in_colouring(),
                })
            }
        }
    }
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    parse(&text)?.into_undirected()
}

fn check_p(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.master_seed > i64::MAX as u64 {
            return Err(Error::Config("master_seed must fit in a signed 64-bit integer".into()));
        }
        let nonempty = |name: &str, len: usize| {
            if len == 0 {
                Err(Error::Config(format!("{name} list must not be empty")))
            } else {
                Ok(())
            }
        };
        match &self.experiment {
            Experiment::CoreEmptiness { t, sampling, .. } => {
                nonempty("t", t.len())?;
                match sampling {
                    Sampling::OneRound { p } => check_p("p", *p)?,
                    Sampling::TwoRound { alpha } => {
                        if !(*alpha > 0.0 && *alpha < 1.5) {
                            return Err(Error::Config(format!("alpha = {alpha} outside (0, 3/2)")));
                        }
                    }
                }
            }
            Experiment::ChromaticTail { p, d, .. } => {
                check_p("p", *p)?;
                nonempty("d", d.len())?;
            }
            Experiment::PropositionCheck { p, .. } => check_p("p", *p)?,
            Experiment::Thm3Sweep { p, .. } | Experiment::Thm4Sweep { p, .. } => {
                nonempty("p", p.len())?;
                for &x in p {
                    check_p("p", x)?;
                }
            }
            Experiment::ProductColouring { parts, .. } => {
                if *parts == 0 {
                    return Err(Error::Config("parts must be at least 1".into()));
                }
            }
            Experiment::VerifySuite { suite } => {
                if !super::verify::SUITES.contains(&suite.as_str()) {
                    return Err(Error::Config(format!("unknown suite `{suite}`")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
master_seed = 7
trials = 10

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
n = 40
d = 3
"#;

    #[test]
    fn parses_and_round_trips() {
        let c = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let Experiment::CoreEmptiness { graph, .. } = &c.experiment else {
            panic!("wrong kind");
        };
        let GraphSource::BlowUp { base, m: 4 } = graph else {
            panic!("wrong source");
        };
        assert!(matches!(**base, GraphSource::Expander { girth_min: 6, .. }));
        let again = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("trials = 10", "trials = 0")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("t = [5, 6]", "t = []")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("kind = \"core_emptiness\"", "kind = \"nope\"")).is_err());
        assert!(ExperimentConfig::from_toml(&SAMPLE.replace("m = 4", "m = 4\nextra = 1")).is_err());
        let suite = "master_seed = 1\ntrials = 1\n[experiment]\nkind = \"verify_suite\"\nsuite = \"bogus\"\n";
        assert!(ExperimentConfig::from_toml(suite).is_err());
    }
}
