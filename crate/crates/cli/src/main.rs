//! `patrol` — command-line front end for the patrolling toolkit.
//!
//! Every subcommand reads and writes compact JSON (one object per
//! invocation) so outputs can be piped back into other subcommands;
//! `--out FILE` redirects the payload to a file. Randomized subcommands
//! take a `--seed` and echo it in their output, and results are
//! byte-identical across runs and thread counts for a fixed command line.
//!
//! Exit status: 0 on success, 1 on any domain, I/O, or numerical error
//! (reported on stderr as `error: ...`), 2 on command-line usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use patrol_core::evidence::{
    self, CharPolySample, DominanceCheck, DominanceViolation, SweepReport, SymmetrySample,
};
use patrol_core::game::{game_value, intruder_best_response};
use patrol_core::graph::{build_complete, build_line, build_star, classify_tau};
use patrol_core::hitting::{enumerate_hitting, hitting_profile, hitting_profile_vectorized};
use patrol_core::io::{self, ChainJson};
use patrol_core::solver::{solve_maximin, SolveConfig};
use patrol_core::strategies::{complete_kron, line_optimal, random_walk, star_optimal};
use patrol_core::{
    DiGraph, Error, GameInstance, MarkovChain, Result, TauClass,
};

/// Engines must agree to this tolerance for `oracle` to succeed.
const ORACLE_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "patrol", version, about = "Patrolling strategies on directed graphs")]
struct Cli {
    /// Worker threads for parallel work (0 = one per core). Thread count
    /// never changes any output byte.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Game value of a chain: the intruder's best capture probability.
    Eval(EvalArgs),
    /// The attack pair the intruder would pick against a chain.
    BestResponse(EvalArgs),
    /// Universal cap tau / n that no strategy on n nodes can beat.
    Bound {
        #[arg(long)]
        n: usize,
        /// Attack window length.
        #[arg(long)]
        tau: usize,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// How an attack window relates to a graph's geometry.
    Classify {
        #[command(flatten)]
        source: GraphSource,
        /// Attack window length.
        #[arg(long)]
        tau: usize,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Emit a closed-form strategy as chain JSON.
    Build {
        /// Strategy family to instantiate.
        #[arg(long, value_enum)]
        topology: StrategyKind,
        /// Node count.
        #[arg(long)]
        n: usize,
        /// Window length; only complete-kron is tuned to one.
        #[arg(long)]
        tau: Option<usize>,
        /// Write the chain here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Search for the strategy maximizing the game value on a graph.
    Solve(SolveArgs),
    /// Randomized and algebraic verification harnesses.
    Evidence {
        #[command(subcommand)]
        harness: EvidenceCmd,
    },
    /// Cross-check the three hitting engines on bundled fixtures.
    Oracle {
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// Chain input shared by `eval` and `best-response`.
#[derive(Args)]
struct EvalArgs {
    /// Chain JSON file; its support defines the graph unless --graph pins one.
    #[arg(long, value_name = "FILE")]
    chain: PathBuf,
    /// Graph JSON file the chain must be supported on.
    #[arg(long, value_name = "FILE")]
    graph: Option<PathBuf>,
    /// Attack window length.
    #[arg(long)]
    tau: usize,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

/// A graph given either as a file or as a named topology with a size.
#[derive(Args)]
struct GraphSource {
    /// Graph JSON file ({"n": 4, "edges": [[1,2], ...]}, 1-based labels).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["topology", "n"])]
    graph: Option<PathBuf>,
    /// Built-in topology, sized by --n.
    #[arg(long, value_enum, requires = "n")]
    topology: Option<TopologyKind>,
    /// Node count for --topology.
    #[arg(long, requires = "topology")]
    n: Option<usize>,
}

impl GraphSource {
    fn build(&self) -> Result<DiGraph> {
        match (&self.graph, self.topology, self.n) {
            (Some(path), None, None) => io::load_graph(path),
            (None, Some(kind), Some(n)) => match kind {
                TopologyKind::Star => build_star(n),
                TopologyKind::Line => build_line(n),
                TopologyKind::Complete => build_complete(n),
            },
            _ => Err(Error::Config(
                "provide a graph as --graph FILE or as --topology NAME --n N".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TopologyKind {
    Star,
    Line,
    Complete,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyKind {
    /// Hub-centered strategy that is optimal on the star.
    Star,
    /// Balanced interior strategy on the line.
    Line,
    /// Block-cyclic strategy on the complete graph (needs --tau dividing n).
    CompleteKron,
    /// Uniform random walk on the complete graph with self-loops.
    RandomWalk,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Attack window length.
    #[arg(long)]
    tau: usize,
    /// Master seed for the randomized restarts (echoed in the output).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent search starts (defaults to the built-in portfolio size).
    #[arg(long)]
    restarts: Option<usize>,
    /// Write the improvement trace here as CSV (evaluations,value).
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EvidenceCmd {
    /// Monte Carlo search for line strategies beating the balanced one.
    Sweep {
        /// Line length (nodes).
        #[arg(long)]
        n: usize,
        /// Attack window length (at least n - 1).
        #[arg(long)]
        tau: usize,
        /// Random parameter vectors to draw.
        #[arg(long, default_value_t = 5000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// A sample within this of the reference counts as an improvement.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Reflection identity of the line objective on random instances.
    Symmetry {
        /// Line length (nodes).
        #[arg(long)]
        n: usize,
        /// Attack window length.
        #[arg(long)]
        tau: usize,
        /// Random parameter vectors to draw.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest |f(x) - f(1-x)| counted as a pass.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// json for the summary, csv for one row per sample.
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Characteristic-polynomial recurrence identities on random instances.
    Charpoly {
        /// Line length (nodes).
        #[arg(long)]
        n: usize,
        /// Random parameter vectors to draw.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Arguments evaluated per parameter vector, uniform on [-2, 2].
        #[arg(long, default_value_t = 10)]
        lambdas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest identity residual counted as a pass.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// json for the summary, csv for one row per evaluation.
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Audit the dominance rules against random chains on a graph.
    Dominance {
        #[command(flatten)]
        source: GraphSource,
        /// Attack window length.
        #[arg(long)]
        tau: usize,
        /// Random chains to audit.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// json for the summary, csv for one row per violation.
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
        /// Write the report here instead of standard output.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Serialize)]
struct EvalOut {
    n: usize,
    tau: usize,
    value: f64,
    bound: f64,
    gap: f64,
}

#[derive(Serialize)]
struct BestResponseOut {
    pair: (usize, usize),
    value: f64,
    bound: f64,
    gap: f64,
}

#[derive(Serialize)]
struct BoundOut {
    bound: f64,
}

#[derive(Serialize)]
struct ClassifyOut {
    n: usize,
    tau: usize,
    #[serde(flatten)]
    class: TauClass,
}

#[derive(Serialize)]
struct SolveOut {
    seed: u64,
    n: usize,
    tau: usize,
    value: f64,
    bound: f64,
    gap: f64,
    evaluations: u64,
    #[serde(flatten)]
    class: TauClass,
    chain: ChainJson,
}

#[derive(Serialize)]
struct SweepOut {
    seed: u64,
    tol: f64,
    #[serde(flatten)]
    report: SweepReport,
}

#[derive(Serialize)]
struct SymmetryOut {
    seed: u64,
    n: usize,
    tau: usize,
    samples: usize,
    tol: f64,
    failures: usize,
    max_difference: f64,
}

#[derive(Serialize)]
struct CharPolyOut {
    seed: u64,
    n: usize,
    samples: usize,
    lambdas: usize,
    tol: f64,
    failures: usize,
    max_tail_gap: f64,
    max_recurrence_gap: f64,
}

#[derive(Serialize)]
struct DominanceOut {
    seed: u64,
    n: usize,
    tau: usize,
    samples: usize,
    violations: Vec<DominanceViolation>,
}

#[derive(Serialize)]
struct OracleFixtureOut {
    name: String,
    n: usize,
    tau: usize,
    max_discrepancy: f64,
}

#[derive(Serialize)]
struct OracleOut {
    tol: f64,
    fixtures: Vec<OracleFixtureOut>,
    max_discrepancy: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // The pool can be installed only once per process; later calls with
        // the same setting are harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

/// Prints `text` followed by a newline, or writes it to `out`.
fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, &format!("{text}\n")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(payload: &T, out: Option<&Path>) -> Result<()> {
    emit(&serde_json::to_string(payload)?, out)
}

fn load_eval_chain(args: &EvalArgs) -> Result<MarkovChain> {
    match &args.graph {
        Some(graph) => io::load_chain_on(&args.chain, &io::load_graph(graph)?),
        None => io::load_chain(&args.chain),
    }
}

fn check_positive(name: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(Error::Domain(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Eval(args) => {
            let chain = load_eval_chain(&args)?;
            let value = game_value(&chain, args.tau)?;
            let bound = args.tau as f64 / chain.n() as f64;
            emit_json(
                &EvalOut { n: chain.n(), tau: args.tau, value, bound, gap: bound - value },
                args.out.as_deref(),
            )
        }
        Command::BestResponse(args) => {
            let chain = load_eval_chain(&args)?;
            let br = intruder_best_response(&chain, args.tau)?;
            let bound = args.tau as f64 / chain.n() as f64;
            emit_json(
                &BestResponseOut {
                    pair: br.pair,
                    value: br.value,
                    bound,
                    gap: bound - br.value,
                },
                args.out.as_deref(),
            )
        }
        Command::Bound { n, tau, out } => {
            check_positive("n", n)?;
            check_positive("tau", tau)?;
            emit_json(&BoundOut { bound: tau as f64 / n as f64 }, out.as_deref())
        }
        Command::Classify { source, tau, out } => {
            let g = source.build()?;
            let class = classify_tau(&g, tau)?;
            emit_json(&ClassifyOut { n: g.n(), tau, class }, out.as_deref())
        }
        Command::Build { topology, n, tau, out } => {
            if tau.is_some() && topology != StrategyKind::CompleteKron {
                return Err(Error::Config(
                    "--tau only applies to --topology complete-kron".into(),
                ));
            }
            let chain = match topology {
                StrategyKind::Star => star_optimal(n)?,
                StrategyKind::Line => line_optimal(n)?,
                StrategyKind::CompleteKron => {
                    let tau = tau.ok_or_else(|| {
                        Error::Config("--topology complete-kron needs --tau".into())
                    })?;
                    complete_kron(n, tau)?
                }
                StrategyKind::RandomWalk => random_walk(n)?,
            };
            emit(&io::chain_to_json(&chain), out.as_deref())
        }
        Command::Solve(args) => {
            let g = args.source.build()?;
            let inst = GameInstance::new(g, args.tau)?;
            let mut cfg = SolveConfig { seed: args.seed, ..SolveConfig::default() };
            if let Some(restarts) = args.restarts {
                cfg.restarts = restarts;
            }
            let report = solve_maximin(&inst, &cfg)?;
            if let Some(path) = &args.trace {
                let mut csv = String::from("evaluations,value\n");
                for (evals, value) in &report.trace {
                    csv.push_str(&format!("{evals},{value:.17e}\n"));
                }
                io::write_text(path, &csv)?;
            }
            emit_json(
                &SolveOut {
                    seed: args.seed,
                    n: report.best.n(),
                    tau: args.tau,
                    value: report.value,
                    bound: report.bound,
                    gap: report.gap,
                    evaluations: report.evaluations,
                    class: report.tau_class,
                    chain: ChainJson::from(&report.best),
                },
                args.out.as_deref(),
            )
        }
        Command::Evidence { harness } => run_evidence(harness),
        Command::Oracle { out } => run_oracle(out.as_deref()),
    }
}

fn run_evidence(harness: EvidenceCmd) -> Result<()> {
    match harness {
        EvidenceCmd::Sweep { n, tau, samples, seed, tol, out } => {
            let report = evidence::conjecture_sweep(n, tau, samples, seed, tol)?;
            emit_json(&SweepOut { seed, tol, report }, out.as_deref())
        }
        EvidenceCmd::Symmetry { n, tau, samples, seed, tol, format, out } => {
            let rows = evidence::symmetry_sweep(n, tau, samples, seed)?;
            match format {
                OutputFormat::Csv => emit(&symmetry_csv(&rows), out.as_deref()),
                OutputFormat::Json => {
                    let failures = rows.iter().filter(|s| s.difference > tol).count();
                    let max_difference =
                        rows.iter().map(|s| s.difference).fold(0.0, f64::max);
                    emit_json(
                        &SymmetryOut { seed, n, tau, samples, tol, failures, max_difference },
                        out.as_deref(),
                    )
                }
            }
        }
        EvidenceCmd::Charpoly { n, samples, lambdas, seed, tol, format, out } => {
            let rows = evidence::char_poly_sweep(n, samples, lambdas, seed)?;
            match format {
                OutputFormat::Csv => emit(&charpoly_csv(&rows), out.as_deref()),
                OutputFormat::Json => {
                    let failures = rows
                        .iter()
                        .filter(|s| s.tail_gap > tol || s.recurrence_gap > tol)
                        .count();
                    let max_tail_gap = rows.iter().map(|s| s.tail_gap).fold(0.0, f64::max);
                    let max_recurrence_gap =
                        rows.iter().map(|s| s.recurrence_gap).fold(0.0, f64::max);
                    emit_json(
                        &CharPolyOut {
                            seed,
                            n,
                            samples,
                            lambdas,
                            tol,
                            failures,
                            max_tail_gap,
                            max_recurrence_gap,
                        },
                        out.as_deref(),
                    )
                }
            }
        }
        EvidenceCmd::Dominance { source, tau, samples, seed, format, out } => {
            let g = source.build()?;
            let violations = evidence::audit_dominance(&g, tau, samples, seed)?;
            match format {
                OutputFormat::Csv => emit(&dominance_csv(&violations), out.as_deref()),
                OutputFormat::Json => emit_json(
                    &DominanceOut { seed, n: g.n(), tau, samples, violations },
                    out.as_deref(),
                ),
            }
        }
    }
}

fn symmetry_csv(rows: &[SymmetrySample]) -> String {
    let mut csv = String::from("index,f_x,f_reflected,difference");
    for s in rows {
        csv.push_str(&format!(
            "\n{},{:.17e},{:.17e},{:.17e}",
            s.index, s.f_x, s.f_reflected, s.difference
        ));
    }
    csv
}

fn charpoly_csv(rows: &[CharPolySample]) -> String {
    let mut csv = String::from("index,lambda,g,h,tail_gap,recurrence_gap");
    for s in rows {
        csv.push_str(&format!(
            "\n{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
            s.index, s.lambda, s.g, s.h, s.tail_gap, s.recurrence_gap
        ));
    }
    csv
}

fn dominance_csv(rows: &[DominanceViolation]) -> String {
    let mut csv = String::from("chain_index,check,pair_i,pair_j,witness,expected_at_most,observed");
    for v in rows {
        let check = match v.check {
            DominanceCheck::CutBefore => "cut_before",
            DominanceCheck::CutBehind => "cut_behind",
            DominanceCheck::Leaf => "leaf",
            DominanceCheck::LeafTransform => "leaf_transform",
        };
        let witness = v.witness.map(|w| w.to_string()).unwrap_or_default();
        csv.push_str(&format!(
            "\n{},{},{},{},{},{:.17e},{:.17e}",
            v.chain_index, check, v.pair.0, v.pair.1, witness, v.expected_at_most, v.observed
        ));
    }
    csv
}

/// Closed-form chains whose hitting numbers all three engines can afford.
fn oracle_fixtures() -> Result<Vec<(String, MarkovChain, usize)>> {
    let mut fixtures = Vec::new();
    for n in 3..=6 {
        fixtures.push((format!("star-{n}"), star_optimal(n)?, 4));
        fixtures.push((format!("line-{n}"), line_optimal(n)?, n));
    }
    for (n, tau) in [(3, 3), (4, 2), (5, 5), (6, 3)] {
        fixtures.push((format!("complete-{n}"), complete_kron(n, tau)?, tau));
    }
    Ok(fixtures)
}

/// Largest disagreement between the step recursion, the vectorized
/// operator, and per-pair path enumeration on one chain.
fn engine_discrepancy(chain: &MarkovChain, tau: usize) -> Result<f64> {
    let recursive = hitting_profile(chain, tau)?;
    let vectorized = hitting_profile_vectorized(chain, tau)?;
    let mut max = 0.0f64;
    for k in 1..=tau {
        max = max.max((recursive.step(k) - vectorized.step(k)).abs().max());
    }
    for i in 1..=chain.n() {
        for j in 1..=chain.n() {
            let enumerated = enumerate_hitting(chain, i, j, tau)?;
            max = max.max((recursive.capture(i, j) - enumerated).abs());
        }
    }
    Ok(max)
}

fn run_oracle(out: Option<&Path>) -> Result<()> {
    let mut fixtures = Vec::new();
    let mut max_discrepancy = 0.0f64;
    for (name, chain, tau) in oracle_fixtures()? {
        let gap = engine_discrepancy(&chain, tau)?;
        max_discrepancy = max_discrepancy.max(gap);
        fixtures.push(OracleFixtureOut { name, n: chain.n(), tau, max_discrepancy: gap });
    }
    emit_json(&OracleOut { tol: ORACLE_TOL, fixtures, max_discrepancy }, out)?;
    if max_discrepancy > ORACLE_TOL {
        return Err(Error::Numerical(format!(
            "hitting engines disagree by {max_discrepancy:.3e}, beyond {ORACLE_TOL:.0e}"
        )));
    }
    Ok(())
}
