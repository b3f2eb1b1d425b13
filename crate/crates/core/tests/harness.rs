use randcol::harness::{
    read_ndjson, run_experiment_with_threads, run_trial, summarise, to_ndjson_string, write_csv,
    ExperimentConfig, MetricSummary,
};

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

const THM3: &str = r#"
master_seed = 3
trials = 24

[experiment]
kind = "thm3_sweep"
p = [0.0, 0.001, 0.01, 0.1, 0.5]

[experiment.graph]
type = "random_regular"
n = 300
d = 3
"#;

const THM4: &str = r#"
master_seed = 4
trials = 40

[experiment]
kind = "thm4_sweep"
p = [0.0, 0.01, 0.1]

[experiment.digraph]
type = "random"
n = 200
"#;

const CORE: &str = r#"
master_seed = 5
trials = 100

[experiment]
kind = "core_emptiness"
t = [7]

[experiment.sampling]
mode = "one_round"
p = 0.5

[experiment.graph]
type = "blow_up"
m = 2

[experiment.graph.base]
type = "complete"
n = 4
"#;

fn proportion(s: &MetricSummary) -> f64 {
    match s {
        MetricSummary::Proportion { proportion, .. } => *proportion,
        other => panic!("expected a proportion, got {other:?}"),
    }
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let c = config(THM3);
    let a = to_ndjson_string(&run_experiment_with_threads(&c, Some(1)).unwrap()).unwrap();
    let b = to_ndjson_string(&run_experiment_with_threads(&c, Some(3)).unwrap()).unwrap();
    let again = to_ndjson_string(&run_experiment_with_threads(&c, None).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, again);
    assert_eq!(a.lines().count(), 24 + 2);
}

#[test]
fn ndjson_round_trips_and_aggregate_matches_records() {
    let out = run_experiment_with_threads(&config(THM3), Some(2)).unwrap();
    let parsed = read_ndjson(&to_ndjson_string(&out).unwrap()).unwrap();
    assert_eq!(parsed.records, out.records);
    assert_eq!(parsed.header, out.header);
    assert_eq!(summarise(&parsed.records), parsed.aggregate.metrics);
    assert_eq!(parsed.aggregate.failed, 0);
    assert_eq!(proportion(&parsed.aggregate.metrics["monotone"]), 1.0);
    assert_eq!(proportion(&parsed.aggregate.metrics["fixpoint_ok@0.5"]), 1.0);
}

#[test]
fn single_trial_reproduces_its_record() {
    let c = config(THM4);
    let out = run_experiment_with_threads(&c, Some(2)).unwrap();
    for i in [0, 17, 39] {
        assert_eq!(run_trial(&c, i).unwrap(), out.records[i]);
    }
}

#[test]
fn zero_resilience_fills_exactly_the_reachable_trials() {
    let out = run_experiment_with_threads(&config(THM4), Some(2)).unwrap();
    for r in &out.records {
        assert_eq!(r.metrics["full@0"], r.metrics["reachable_all"]);
        assert_eq!(r.metrics["monotone"], true);
    }
    let m = &out.aggregate.metrics;
    assert_eq!(proportion(&m["full@0"]), proportion(&m["reachable_all"]));
}

#[test]
fn sparse_blow_up_core_is_always_empty() {
    // blow_up(K4, 2) is 6-regular, so no sample has a 7-core
    let out = run_experiment_with_threads(&config(CORE), Some(2)).unwrap();
    assert_eq!(proportion(&out.aggregate.metrics["core_empty@7"]), 1.0);
    assert_eq!(out.header.regime.in_regime, None);
}

#[test]
fn csv_has_one_row_per_trial() {
    let out = run_experiment_with_threads(&config(THM4), Some(1)).unwrap();
    let mut buf = Vec::new();
    write_csv(&out, &mut buf).unwrap();
    let mut rdr = csv::Reader::from_reader(buf.as_slice());
    let head = rdr.headers().unwrap().clone();
    assert_eq!(&head[0], "trial");
    assert!(head.iter().any(|h| h == "v0@0.1"));
    assert!(!head.iter().any(|h| h == "wall_ms"));
    assert_eq!(rdr.records().count(), 40);
}

#[test]
fn timing_is_opt_in() {
    let mut c = config(THM4);
    c.trials = 3;
    assert!(run_experiment_with_threads(&c, Some(1)).unwrap().records.iter().all(|r| r.wall_ms.is_none()));
    c.record_timing = true;
    assert!(run_experiment_with_threads(&c, Some(1)).unwrap().records.iter().all(|r| r.wall_ms.is_some()));
}

#[test]
fn graph_files_are_read_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k5.txt");
    let g = randcol::Graph::complete(5);
    std::fs::write(&path, randcol::graph::text::write_graph(&g)).unwrap();
    let text = format!(
        "master_seed = 1\ntrials = 5\n[experiment]\nkind = \"product_colouring\"\n[experiment.graph]\ntype = \"file\"\npath = {:?}\n",
        path
    );
    let out = run_experiment_with_threads(&config(&text), Some(1)).unwrap();
    assert!(out.records.iter().all(|r| r.metrics["whole_chi"] == 5 && r.metrics["holds"] == true));
}

#[test]
fn shipped_configs_parse_and_round_trip() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::load(&path).unwrap();
            assert_eq!(ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
