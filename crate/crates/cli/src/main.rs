use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use randcol::colouring::{chromatic_number_exact, colouring_number, t_core, ExactChromaticConfig};
use randcol::generators::{
    blow_up, filtered_regular_graph, gadget_blow_up, random_two_regular_digraph, ConstructionParams,
    ExpanderFilter,
};
use randcol::graph::text::{parse, write_digraph, write_graph, ParsedGraph};
use randcol::harness::{run_experiment, run_suite, write_csv, write_ndjson, ExperimentConfig, SUITES};
use randcol::percolation::{bootstrap_percolate, thm3_fixpoint_holds, thm3_process, thm4_fixpoint_holds, thm4_process};
use randcol::sampling::{sample_subgraph, two_round_sample, RngStream};
use randcol::{DiGraph, Graph, VertexSet};

#[derive(Parser)]
#[command(name = "randcol", version, about = "Colourings and cores of random subgraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random regular graph filtered for girth and spectral gap.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = ExpanderFilter::default().lambda2_max)]
        lambda2_max: f64,
        #[arg(long, default_value_t = ExpanderFilter::default().girth_min)]
        girth_min: usize,
        #[arg(long, default_value_t = ExpanderFilter::default().max_attempts)]
        max_attempts: usize,
        /// Emit a random 2-regular digraph with coloured in-arcs instead.
        #[arg(long)]
        directed: bool,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Blow a base graph up into a k-regular graph.
    Construct {
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        alpha: f64,
        /// Layer parameter (thm4 only).
        #[arg(long, default_value_t = 0)]
        s: usize,
        /// Base graph: cubic for thm3, 2-regular digraph for thm4.
        #[arg(long)]
        h_file: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Where to write the vertex layout.
        #[arg(long)]
        layout: Option<PathBuf>,
    },
    /// Random subgraph of a graph.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, conflicts_with = "alpha", required_unless_present = "alpha")]
        p: Option<f64>,
        /// Two deletion rounds composing to p = 1/2.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// t-core of a graph.
    Core {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        t: usize,
    },
    /// Exact chromatic number by branch and bound.
    Chroma {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = ExactChromaticConfig::default().budget)]
        budget: u64,
    },
    /// Threshold spread from a root.
    Percolate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum)]
        process: Process,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        root: usize,
        /// Infection threshold for the plain process.
        #[arg(long, default_value_t = 2)]
        threshold: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo experiment described by a TOML file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Named invariant suite; exits non-zero on any failed check.
    Verify {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Thm3,
    Thm4,
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    Thm3,
    Thm4,
    Threshold,
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_any(path: &Path) -> anyhow::Result<ParsedGraph> {
    Ok(parse(&read_input(path)?)?)
}

fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    Ok(read_any(path)?.into_undirected()?)
}

fn read_digraph(path: &Path) -> anyhow::Result<DiGraph> {
    let h = read_any(path)?.into_directed()?;
    Ok(if h.colours().is_some() { h } else { h.with_canonical_in_colouring() })
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn print_json(v: &serde_json::Value) -> anyhow::Result<()> {
    writeln!(io::stdout().lock(), "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Generate {
            n,
            d,
            seed,
            lambda2_max,
            girth_min,
            max_attempts,
            directed,
            out,
        } => {
            let stream = RngStream::new(seed, 0, "generate");
            let text = if directed {
                write_digraph(&random_two_regular_digraph(n, &stream)?.with_canonical_in_colouring())
            } else {
                let filter = ExpanderFilter {
                    lambda2_max,
                    girth_min,
                    max_attempts,
                };
                let (g, cert) = filtered_regular_graph(n, d, &filter, &stream)?;
                format!(
                    "# {d}-regular, lambda2 = {:.9}, girth >= {girth_min}, seed {seed}\n{}",
                    cert.lambda2,
                    write_graph(&g)
                )
            };
            emit(out.as_deref(), &text)?;
        }
        Command::Construct {
            mode,
            k,
            alpha,
            s,
            h_file,
            out,
            layout,
        } => {
            let (params, g, lay, base_n) = match mode {
                Mode::Thm3 => {
                    let params = ConstructionParams::thm3(k, alpha)?;
                    let h = read_graph(&h_file)?;
                    if h.regular_degree() != Some(3) {
                        eprintln!("warning: base graph is not cubic, so the result is not {k}-regular");
                    }
                    let (g, lay) = blow_up(&h, params.m)?;
                    (params, g, lay, h.n())
                }
                Mode::Thm4 => {
                    let params = ConstructionParams::thm4(k, s, alpha)?;
                    let h = read_digraph(&h_file)?;
                    let (g, lay) = gadget_blow_up(&h, &params)?;
                    (params, g, lay, h.n())
                }
            };
            for v in params.regime_violations(base_n) {
                eprintln!("out of regime: {v}");
            }
            eprintln!(
                "{} vertices, {} edges, {} layers of size {}, core threshold t = {}",
                g.n(),
                g.m(),
                params.layers(),
                params.m,
                params.t
            );
            emit(out.as_deref(), &write_graph(&g))?;
            if let Some(path) = layout {
                fs::write(&path, lay.to_text()).with_context(|| format!("writing {}", path.display()))?;
            }
        }
        Command::Sample {
            graph,
            p,
            alpha,
            seed,
            out,
        } => {
            let g = read_graph(&graph)?;
            let stream = RngStream::new(seed, 0, "sample");
            let sample = match (p, alpha) {
                (Some(p), _) => sample_subgraph(&g, p, &stream)?,
                (None, Some(a)) => {
                    let s = two_round_sample(&g, a, &stream)?;
                    eprintln!(
                        "round 1 deleted {} edges (rate {:.6}), round 2 deleted {} (rate {:.6})",
                        s.round1_deleted.len(),
                        s.first_rate,
                        s.round2_deleted.len(),
                        s.second_rate
                    );
                    s.final_graph
                }
                (None, None) => bail!("one of --p or --alpha is required"),
            };
            emit(out.as_deref(), &write_graph(&sample))?;
        }
        Command::Core { graph, t } => {
            let g = read_graph(&graph)?;
            let core = t_core(&g, t);
            print_json(&json!({ "t": t, "size": core.len(), "vertices": core.to_vec() }))?;
        }
        Command::Chroma { graph, budget } => {
            let g = read_graph(&graph)?;
            let config = ExactChromaticConfig {
                budget,
                ..ExactChromaticConfig::default()
            };
            let r = chromatic_number_exact(&g, config)?;
            print_json(&json!({
                "chromatic_number": r.num_colours,
                "exact": r.exact,
                "lower_bound": r.lower_bound,
                "colouring_number": colouring_number(&g).0,
                "nodes": r.nodes,
                "colour_of": r.colour_of,
            }))?;
        }
        Command::Percolate {
            graph,
            process,
            p,
            root,
            threshold,
            seed,
        } => {
            let stream = RngStream::new(seed, 0, "percolate");
            let (state, audit) = match process {
                Process::Thm3 => {
                    let h = read_graph(&graph)?;
                    let st = thm3_process(&h, p, root, &stream)?;
                    let ok = thm3_fixpoint_holds(&h, &st);
                    (st, ok)
                }
                Process::Thm4 => {
                    let h = read_digraph(&graph)?;
                    let st = thm4_process(&h, p, root, &stream)?;
                    let ok = thm4_fixpoint_holds(&h, &st);
                    (st, ok)
                }
                Process::Threshold => {
                    let g = read_graph(&graph)?;
                    if root >= g.n() {
                        bail!("root {root} out of range for n = {}", g.n());
                    }
                    let seed_set = VertexSet::from_iter_in(g.n(), [root]);
                    (bootstrap_percolate(&g, &seed_set, |_| threshold)?, true)
                }
            };
            print_json(&json!({
                "infected": state.infected.len(),
                "rounds": state.round_trace.len(),
                "round_trace": state.round_trace,
                "fixpoint_audit": audit,
                "state": state,
            }))?;
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let out = run_experiment(&cfg)?;
            match &cfg.output {
                Some(path) => {
                    let mut f = io::BufWriter::new(
                        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
                    );
                    write_ndjson(&out, &mut f)?;
                    f.flush()?;
                }
                None => write_ndjson(&out, &mut io::stdout().lock())?,
            }
            if let Some(path) = &cfg.csv {
                write_csv(&out, fs::File::create(path).with_context(|| format!("creating {}", path.display()))?)?;
            }
            if out.aggregate.failed > 0 {
                eprintln!("{} of {} trials failed", out.aggregate.failed, out.aggregate.trials);
            }
        }
        Command::Verify { suite, seed, json } => {
            let report = run_suite(&suite, seed)?;
            write!(io::stdout().lock(), "{report}")?;
            if let Some(path) = json {
                fs::write(&path, serde_json::to_string_pretty(&report)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<randcol::Error>()
                .is_some_and(|r| matches!(r, randcol::Error::Io(io) if io.kind() == io::ErrorKind::BrokenPipe))
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
