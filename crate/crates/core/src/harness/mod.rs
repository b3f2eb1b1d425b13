//! Experiment configuration, seeded Monte Carlo runs, result files and
//! verification suites.

mod config;
mod output;
mod run;
pub mod stats;
pub mod verify;

pub use config::{
    read_graph, BuiltGraph, DigraphSource, Experiment, ExperimentConfig, GraphSource,
    LayeredRegime, Sampling,
};
pub use output::{read_ndjson, to_ndjson_string, write_csv, write_ndjson};
pub use run::{
    run_experiment, run_experiment_with_threads, run_trial, summarise, Aggregate,
    ExperimentOutput, Header, MetricSummary, Metrics, RegimeMetadata, TrialRecord, THREADS_VAR,
};
pub use verify::{run_suite, SuiteReport, SUITES};
