//! Command-line front end for the gradient-circuit library.
//!
//! Subcommands mirror the library's public API: `grad` builds and
//! evaluates a first-order gradient plan, `higher` does the same for
//! k-th-order derivatives, `cost` prints the static cost model, `qad`
//! runs the per-parameter method selector, `bench` trains the three
//! built-in benchmarks, and `sweep` tabulates the direct/reversed
//! circuit-count ratio over commutation structure.
//!
//! Results are JSON on stdout (CSV where selected).  Exit code 0 means
//! success; bad input of any kind — unreadable files, malformed values,
//! out-of-range indices — exits with code 2.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;

use qgrad::benchmarks::{
    embedded_iris, ising_target, load_iris, qft3, ratio_sweep, read_graph, toffoli, train_qaoa,
    train_qaqc, train_qnn, wstate, Graph, Selection, Topology, TrainConfig, TrainRecord,
    TrainResult, DEFAULT_SWEEP_GRID,
};
use qgrad::{
    build_plan, cost_report, dht_korder, kfold_ht, nested_commutator_oracle, select, Error,
    ErrorTable, GradMethod, Metric, Pqc,
};

#[derive(Parser)]
#[command(
    name = "qgrad",
    version,
    about = "Construct, cost, simulate, and evaluate gradient-estimation circuits \
             for parameterized quantum circuits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one first-order partial derivative via a gradient plan
    Grad {
        /// PQC description file (JSON)
        #[arg(long)]
        pqc: PathBuf,
        /// Comma-separated parameter values (default: all zeros)
        #[arg(long)]
        theta: Option<String>,
        /// 1-based parameter index
        #[arg(long)]
        param: usize,
        /// fd | psr | ht | dht | rht | rdht
        #[arg(long)]
        method: String,
        /// Estimate by sampling this many shots per task instead of exactly
        #[arg(long)]
        shots: Option<usize>,
        /// Sampling seed (with --shots)
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate a k-th-order partial derivative
    Higher {
        /// PQC description file (JSON)
        #[arg(long)]
        pqc: PathBuf,
        /// Comma-separated parameter values (default: all zeros)
        #[arg(long)]
        theta: Option<String>,
        /// Comma-separated 1-based gate indices, duplicates allowed (e.g. 1,1,2)
        #[arg(long)]
        indices: String,
        /// kfold | dhtk | oracle
        #[arg(long)]
        method: String,
    },
    /// Static per-method cost reports for one parameter
    Cost {
        /// PQC description file (JSON)
        #[arg(long)]
        pqc: PathBuf,
        /// Comma-separated parameter values (default: all zeros)
        #[arg(long)]
        theta: Option<String>,
        /// 1-based parameter index
        #[arg(long)]
        param: usize,
        /// Gate error rates (JSON: {"cnot": p, "1q": p, "measure": p})
        #[arg(long)]
        errors: Option<PathBuf>,
        /// json | csv
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Select the cheapest gradient method per parameter
    Qad {
        /// PQC description file (JSON)
        #[arg(long)]
        pqc: PathBuf,
        /// Comma-separated parameter values (default: all zeros)
        #[arg(long)]
        theta: Option<String>,
        /// count | efr
        #[arg(long, default_value = "count")]
        metric: String,
        /// Gate error rates (JSON: {"cnot": p, "1q": p, "measure": p})
        #[arg(long)]
        errors: Option<PathBuf>,
        /// json | csv
        #[arg(long, default_value = "json")]
        format: String,
    },
    /// Train a built-in benchmark and report the budget and loss trace
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Tabulate direct/reversed circuit-count ratios over commutation structure
    Sweep {
        /// Qubit count for the synthetic operator sums (>= 4)
        #[arg(long)]
        n: usize,
        /// Comma-separated commuting fractions in (0, 1]
        #[arg(long)]
        grid: Option<String>,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// MaxCut on a graph with the alternating cost/mixer ansatz
    Qaoa {
        /// Edge-list file, one "u v" pair per line (default: triangle)
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        layers: usize,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Compile a named target with the Ising ansatz via the overlap test
    Qaqc {
        /// qft | toffoli | wstate | ising
        #[arg(long, default_value = "ising")]
        target: String,
        #[arg(long, default_value_t = 2)]
        layers: usize,
        /// ring | line
        #[arg(long, default_value = "ring")]
        topology: String,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Two-class iris classifier on the fixed 4-qubit ansatz
    Qnn {
        /// Iris-format CSV (default: the embedded dataset)
        #[arg(long)]
        data: Option<PathBuf>,
        #[command(flatten)]
        train: TrainArgs,
    },
}

#[derive(clap::Args)]
struct TrainArgs {
    /// psr | ht | dht | rht | rdht for a fixed method, or qad
    #[arg(long, default_value = "qad")]
    method: String,
    /// QAD metric when --method qad: count | efr
    #[arg(long, default_value = "count")]
    metric: String,
    /// Gradient-descent steps
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the per-iteration trace as CSV (iteration, loss, distinct_circuits)
    #[arg(long)]
    trace: Option<PathBuf>,
}

impl TrainArgs {
    fn selection(&self) -> qgrad::Result<Selection> {
        if self.method.eq_ignore_ascii_case("qad") {
            Ok(Selection::Qad(self.metric.parse()?))
        } else {
            self.method.parse()
        }
    }

    fn config(&self, default_steps: usize, default_rate: f64) -> qgrad::Result<TrainConfig> {
        Ok(TrainConfig {
            selection: self.selection()?,
            steps: self.steps.unwrap_or(default_steps),
            learning_rate: self.learning_rate.unwrap_or(default_rate),
            seed: self.seed,
        })
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Grad {
            pqc,
            theta,
            param,
            method,
            shots,
            seed,
        } => {
            let pqc = load_pqc(&pqc)?;
            let theta = parse_theta(theta.as_deref(), pqc.param_count())?;
            let method: GradMethod = method.parse::<GradMethod>()?;
            let plan = build_plan(&pqc, &theta, param, method)?;
            let mut doc = json!({
                "method": method,
                "param": param,
                "distinct_circuits": plan.distinct_circuit_count(),
                "tasks": plan.tasks().len(),
            });
            match shots {
                Some(shots) => {
                    let (value, stderr) = plan.evaluate_sampled(shots, seed)?;
                    doc["value"] = value.into();
                    doc["stderr"] = stderr.into();
                    doc["shots"] = shots.into();
                    doc["seed"] = seed.into();
                }
                None => doc["value"] = plan.evaluate()?.into(),
            }
            emit(&doc)
        }
        Command::Higher {
            pqc,
            theta,
            indices,
            method,
        } => {
            let pqc = load_pqc(&pqc)?;
            let theta = parse_theta(theta.as_deref(), pqc.param_count())?;
            let indices = parse_indices(&indices)?;
            let doc = match method.to_ascii_lowercase().as_str() {
                "oracle" => {
                    let value = nested_commutator_oracle(&pqc, &theta, &indices)?;
                    // The oracle is a dense evaluation on the bare
                    // register: no estimation circuits are built.
                    json!({
                        "method": "oracle",
                        "indices": indices,
                        "value": value,
                        "distinct_circuits": serde_json::Value::Null,
                        "qubits": pqc.qubit_count(),
                        "depth": pqc.param_count(),
                    })
                }
                name @ ("kfold" | "dhtk") => {
                    let plan = if name == "kfold" {
                        kfold_ht(&pqc, &theta, &indices)?
                    } else {
                        dht_korder(&pqc, &theta, &indices)?
                    };
                    json!({
                        "method": name,
                        "indices": plan.indices().indices(),
                        "value": plan.evaluate()?,
                        "distinct_circuits": plan.distinct_circuit_count(),
                        "qubits": plan.qubits(),
                        "depth": plan.depth(),
                        "tasks": plan.tasks().len(),
                    })
                }
                other => return Err(Error::UnknownMethod(other.to_string()).into()),
            };
            emit(&doc)
        }
        Command::Cost {
            pqc,
            theta,
            param,
            errors,
            format,
        } => {
            let pqc = load_pqc(&pqc)?;
            let theta = parse_theta(theta.as_deref(), pqc.param_count())?;
            let table = load_errors(errors.as_deref())?;
            let reports = GradMethod::HARDWARE
                .iter()
                .map(|&m| cost_report(&pqc, &theta, param, m, &table))
                .collect::<qgrad::Result<Vec<_>>>()?;
            match parse_format(&format)? {
                Format::Json => emit(&serde_json::to_value(&reports)?),
                Format::Csv => {
                    use std::fmt::Write as _;
                    let mut text =
                        String::from("method,distinct_circuits,qubits,depth,cnot_count,efr\n");
                    for r in &reports {
                        writeln!(
                            text,
                            "{},{},{},{},{},{}",
                            r.method, r.distinct_circuits, r.qubits, r.depth, r.cnot_count, r.efr
                        )
                        .expect("writing to a String cannot fail");
                    }
                    emit_text(&text)
                }
            }
        }
        Command::Qad {
            pqc,
            theta,
            metric,
            errors,
            format,
        } => {
            let pqc = load_pqc(&pqc)?;
            let theta = parse_theta(theta.as_deref(), pqc.param_count())?;
            let metric: Metric = metric.parse()?;
            let table = load_errors(errors.as_deref())?;
            let assignment = select(&pqc, &theta, metric, &table)?;
            match parse_format(&format)? {
                Format::Json => {
                    let mut doc = serde_json::to_value(&assignment)?;
                    doc["total_distinct_circuits"] = assignment.total_distinct_circuits().into();
                    emit(&doc)
                }
                Format::Csv => {
                    use std::fmt::Write as _;
                    let mut text =
                        String::from("param,method,via_decomposition,distinct_circuits,efr\n");
                    for choice in &assignment.choices {
                        let chosen = choice
                            .candidates
                            .iter()
                            .find(|c| c.method == choice.chosen)
                            .expect("chosen method is always among the candidates");
                        writeln!(
                            text,
                            "{},{},{},{},{}",
                            choice.param,
                            choice.chosen,
                            choice.via_decomposition,
                            chosen.distinct_circuits,
                            chosen.efr
                        )
                        .expect("writing to a String cannot fail");
                    }
                    emit_text(&text)
                }
            }
        }
        Command::Bench(bench) => run_bench(bench),
        Command::Sweep { n, grid } => {
            let grid = match grid {
                Some(text) => parse_f64_list(&text)?,
                None => DEFAULT_SWEEP_GRID.to_vec(),
            };
            let sweep = ratio_sweep(n, &grid)?;
            emit(&serde_json::to_value(&sweep)?)
        }
    }
}

fn run_bench(bench: BenchCommand) -> anyhow::Result<()> {
    match bench {
        BenchCommand::Qaoa {
            graph,
            layers,
            train,
        } => {
            let graph = match graph {
                Some(path) => {
                    read_graph(&path).with_context(|| format!("graph {}", path.display()))?
                }
                None => Graph::triangle(),
            };
            let config = train.config(60, 0.1)?;
            let result = train_qaoa(&graph, layers, &config)?;
            let mut doc = bench_summary("qaoa", &config, &result)?;
            doc["nodes"] = graph.node_count().into();
            doc["edges"] = graph.edges().len().into();
            doc["layers"] = layers.into();
            doc["max_cut"] = graph.max_cut().into();
            // loss = sum of edge ZZ expectations; cut = (|E| - loss) / 2.
            doc["expected_cut"] = ((graph.edges().len() as f64 - result.final_loss()) / 2.0).into();
            finish_bench(&doc, &train, &result)
        }
        BenchCommand::Qaqc {
            target,
            layers,
            topology,
            train,
        } => {
            let topology: Topology = topology.parse()?;
            let circuit = match target.to_ascii_lowercase().as_str() {
                "qft" => qft3()?,
                "toffoli" => toffoli()?,
                "wstate" => wstate()?,
                "ising" => ising_target(3, layers, 42)?.0,
                other => {
                    anyhow::bail!(
                        "unknown target {other:?}: expected qft, toffoli, wstate, or ising"
                    )
                }
            };
            let config = train.config(200, 0.1)?;
            let result = train_qaqc(&circuit, layers, topology, &config)?;
            let mut doc = bench_summary("qaqc", &config, &result)?;
            doc["target"] = target.to_ascii_lowercase().into();
            doc["layers"] = layers.into();
            doc["topology"] = topology.to_string().into();
            finish_bench(&doc, &train, &result)
        }
        BenchCommand::Qnn { data, train } => {
            let samples = match &data {
                Some(path) => {
                    load_iris(path).with_context(|| format!("data {}", path.display()))?
                }
                None => embedded_iris()?,
            };
            let config = train.config(50, 0.05)?;
            let result = train_qnn(&samples, &config)?;
            let mut doc = bench_summary("qnn", &config, &result)?;
            doc["samples"] = samples.len().into();
            finish_bench(&doc, &train, &result)
        }
    }
}

fn bench_summary(
    name: &str,
    config: &TrainConfig,
    result: &TrainResult,
) -> anyhow::Result<serde_json::Value> {
    let mut doc = json!({
        "benchmark": name,
        "selection": config.selection.to_string(),
        "steps": config.steps,
        "learning_rate": config.learning_rate,
        "seed": config.seed,
        "parameters": result.theta.len(),
        "circuits_per_iteration": result.circuits_per_iteration,
        "initial_loss": result.records.first().map(|r| r.loss),
        "final_loss": result.final_loss(),
    });
    if let Some(assignment) = &result.assignment {
        doc["methods"] = serde_json::to_value(assignment.methods())?;
    }
    Ok(doc)
}

fn finish_bench(
    doc: &serde_json::Value,
    train: &TrainArgs,
    result: &TrainResult,
) -> anyhow::Result<()> {
    if let Some(path) = &train.trace {
        write_trace(path, &result.records)?;
    }
    emit(doc)
}

fn write_trace(path: &Path, records: &[TrainRecord]) -> anyhow::Result<()> {
    use std::fmt::Write as _;
    let mut text = String::from("iteration,loss,distinct_circuits\n");
    for r in records {
        writeln!(text, "{},{},{}", r.iteration, r.loss, r.distinct_circuits)
            .expect("writing to a String cannot fail");
    }
    std::fs::write(path, text).with_context(|| format!("trace {}", path.display()))
}

fn load_pqc(path: &Path) -> anyhow::Result<Pqc> {
    Pqc::from_json_file(path).with_context(|| format!("pqc {}", path.display()))
}

fn load_errors(path: Option<&Path>) -> anyhow::Result<ErrorTable> {
    match path {
        Some(p) => ErrorTable::from_json_file(p).with_context(|| format!("errors {}", p.display())),
        None => Ok(ErrorTable::default()),
    }
}

/// Parses `--theta`: comma-separated reals, or all zeros when absent.
fn parse_theta(text: Option<&str>, params: usize) -> anyhow::Result<Vec<f64>> {
    match text {
        None => Ok(vec![0.0; params]),
        Some(text) => parse_f64_list(text),
    }
}

fn parse_f64_list(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|field| {
            let field = field.trim();
            field
                .parse::<f64>()
                .with_context(|| format!("bad numeric entry {field:?}"))
        })
        .collect()
}

fn parse_indices(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|field| {
            let field = field.trim();
            field
                .parse::<usize>()
                .with_context(|| format!("bad index entry {field:?}"))
        })
        .collect()
}

enum Format {
    Json,
    Csv,
}

fn parse_format(text: &str) -> anyhow::Result<Format> {
    match text.to_ascii_lowercase().as_str() {
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        other => anyhow::bail!("unknown format {other:?}: expected json or csv"),
    }
}

fn emit(doc: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(doc)?;
    text.push('\n');
    emit_text(&text)
}

/// Writes to stdout, treating a closed pipe (e.g. `qgrad ... | head`) as
/// a clean exit rather than an error.
fn emit_text(text: &str) -> anyhow::Result<()> {
    use std::io::Write as _;
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => std::process::exit(0),
        other => other.context("writing to stdout"),
    }
}
