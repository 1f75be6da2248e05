//! Command-line front end.
//!
//! ```text
//! fetree solve TREE.json              [--format json|csv] [--out PATH]
//! fetree transform TREE.json --alpha A --betas BETAS.json [--utilities U.json]
//! fetree limits-check [--num-trees N] [--seed S]
//! fetree sample-bound MODEL.json [--alpha-max N] [--trials T] [--seed S]
//! ```
//!
//! Exit codes: 0 success, 1 input/parse failure, 2 validation or domain
//! error. Diagnostics go to stderr as one JSON object per line.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use crate::classic::{self, TypedTree};
use crate::error::{Error, Result};
use crate::free_energy::{transform_tree, TrajectoryUtilities};
use crate::output::format_real;
use crate::random::{self, KindPattern, DEFAULT_SEED};
use crate::sampling::{check_bound, monte_carlo_max, BoundReport, SampleModel};
use crate::solver::{self, SolveResult};
use crate::temperature::InverseTemperature;
use crate::tree::DecisionTree;

/// Exponent magnitude above which `solve` warns about precision.
pub const EXPONENT_WARNING: f64 = 1e4;

/// Discrepancy threshold for `limits-check`.
pub const LIMITS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "fetree",
    version,
    about = "Free-energy solver for generalized decision trees"
)]
pub struct Cli {
    /// Seed for every random component.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,

    /// Write the result to PATH instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format (default: csv for sample-bound, json otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a tree: per-node value, log-partition and policy.
    Solve { tree: PathBuf },
    /// Re-express a uniform-temperature tree with per-node temperatures.
    Transform {
        tree: PathBuf,
        /// Uniform source temperature (finite, nonzero); overrides the tree's betas.
        #[arg(long, allow_hyphen_values = true)]
        alpha: String,
        /// JSON object mapping node id to target beta; unlisted nodes keep alpha.
        #[arg(long)]
        betas: PathBuf,
        /// JSON object mapping every node id to its utility. Defaults to
        /// accumulated rewards plus leaf values.
        #[arg(long)]
        utilities: Option<PathBuf>,
    },
    /// Compare the limit-temperature solver against the classic rules.
    LimitsCheck {
        #[arg(long, default_value_t = 200)]
        num_trees: usize,
    },
    /// Boltzmann vs best-of-alpha sampling sweep for alpha = 1..=alpha_max.
    SampleBound {
        model: PathBuf,
        #[arg(long, default_value_t = 64)]
        alpha_max: u32,
        /// Monte Carlo trials per alpha; 0 disables the empirical column.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Parses `args` and runs the command, writing results to `out` (unless
/// `--out` is given) and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    diagnostic(err, "usage", &e.kind().to_string());
                    2
                }
            };
        }
    };
    match execute(&cli, err) {
        Ok(text) => match emit(&cli.out, &text, out) {
            Ok(()) => 0,
            Err(e) => {
                diagnostic(err, e.kind(), &e.to_string());
                e.exit_code()
            }
        },
        Err(Failure::Error(e)) => {
            diagnostic(err, e.kind(), &e.to_string());
            e.exit_code()
        }
        Err(Failure::Check(text)) => match emit(&cli.out, &text, out) {
            Ok(()) => 2,
            Err(e) => {
                diagnostic(err, e.kind(), &e.to_string());
                e.exit_code()
            }
        },
    }
}

enum Failure {
    Error(Error),
    /// Report produced, but the check it describes failed.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn diagnostic(err: &mut dyn Write, kind: &str, message: &str) {
    let line = serde_json::json!({ "error": kind, "message": message });
    let _ = writeln!(err, "{line}");
}

fn warning(err: &mut dyn Write, kind: &str, message: &str) {
    let line = serde_json::json!({ "warning": kind, "message": message });
    let _ = writeln!(err, "{line}");
}

fn emit(path: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn execute(cli: &Cli, err: &mut dyn Write) -> std::result::Result<String, Failure> {
    match &cli.command {
        Command::Solve { tree } => {
            let tree = DecisionTree::from_json(&read(tree)?)?;
            let result = solver::solve(&tree);
            for id in solver::large_exponent_nodes(&tree, &result, EXPONENT_WARNING) {
                warning(
                    err,
                    "large_exponent",
                    &format!(
                        "node `{}`: |beta * (R + V)| exceeds {EXPONENT_WARNING:e}",
                        tree.node(id).name
                    ),
                );
            }
            Ok(match cli.format.unwrap_or(Format::Json) {
                Format::Json => solve_json(&tree, &result),
                Format::Csv => solve_csv(&tree, &result),
            })
        }
        Command::Transform {
            tree,
            alpha,
            betas,
            utilities,
        } => {
            if cli.format == Some(Format::Csv) {
                return Err(Error::InvalidArgument("transform writes JSON only".into()).into());
            }
            let alpha: InverseTemperature = alpha.parse()?;
            if !alpha.is_finite() {
                return Err(Error::InvalidTemperature(format!(
                    "alpha must be finite and nonzero, got {alpha}"
                ))
                .into());
            }
            let source = DecisionTree::from_json(&read(tree)?)?.with_uniform_beta(alpha);
            let utilities = match utilities {
                Some(path) => {
                    let map: HashMap<String, f64> = parse_json(&read(path)?)?;
                    let values = source
                        .nodes()
                        .iter()
                        .map(|n| {
                            map.get(&n.name).copied().ok_or_else(|| {
                                Error::InvalidArgument(format!("no utility for node `{}`", n.name))
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    TrajectoryUtilities::new(&source, values)?
                }
                None => TrajectoryUtilities::from_rewards(&source),
            };
            let map: HashMap<String, InverseTemperature> = parse_json(&read(betas)?)?;
            if let Some(unknown) = map.keys().find(|k| source.find(k).is_none()) {
                return Err(Error::UnknownNode(unknown.clone()).into());
            }
            let targets: Vec<InverseTemperature> = source
                .nodes()
                .iter()
                .map(|n| map.get(&n.name).copied().unwrap_or(alpha))
                .collect();
            let out = transform_tree(&source, &utilities, &targets)?;
            Ok(out.to_json() + "\n")
        }
        Command::LimitsCheck { num_trees } => {
            if *num_trees == 0 {
                return Err(Error::InvalidArgument("num-trees must be positive".into()).into());
            }
            let report = limits_check(cli.seed, *num_trees)?;
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => serde_json::to_string_pretty(&report).unwrap() + "\n",
                Format::Csv => {
                    let mut s = String::from("rule,oracle,trees,max_abs_discrepancy,pass\n");
                    for r in &report.rules {
                        s += &format!(
                            "{},{},{},{},{}\n",
                            r.rule,
                            r.oracle,
                            r.trees,
                            format_real(r.max_abs_discrepancy),
                            r.pass
                        );
                    }
                    s
                }
            };
            if report.pass {
                Ok(text)
            } else {
                Err(Failure::Check(text))
            }
        }
        Command::SampleBound {
            model,
            alpha_max,
            trials,
        } => {
            if *alpha_max < 1 {
                return Err(Error::InvalidArgument("alpha-max must be at least 1".into()).into());
            }
            let model = SampleModel::from_json(&read(model)?)?;
            let alphas: Vec<u32> = (1..=*alpha_max).collect();
            let reports = check_bound(&model, &alphas)?;
            let mut empirical = Vec::with_capacity(reports.len());
            for r in &reports {
                empirical.push(if *trials == 0 {
                    None
                } else {
                    let seed = random::mix_seed(cli.seed, r.alpha as u64);
                    let mc = monte_carlo_max(&model, r.alpha, *trials, seed)?;
                    Some(mc.total_variation(&r.m_alpha)?)
                });
            }
            Ok(match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => sample_bound_csv(&reports, &empirical),
                Format::Json => sample_bound_json(&reports, &empirical, *trials),
            })
        }
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolvedEdge<'a> {
    label: &'a str,
    child: &'a str,
    p: f64,
}

#[derive(Serialize)]
struct SolvedNode<'a> {
    id: &'a str,
    depth: usize,
    beta: InverseTemperature,
    value: f64,
    log_partition: Option<f64>,
    policy: Vec<SolvedEdge<'a>>,
}

#[derive(Serialize)]
struct SolvedTree<'a> {
    horizon: usize,
    root: &'a str,
    root_value: f64,
    nodes: Vec<SolvedNode<'a>>,
}

fn solve_json(tree: &DecisionTree, result: &SolveResult) -> String {
    let nodes = tree
        .nodes()
        .iter()
        .map(|n| SolvedNode {
            id: &n.name,
            depth: tree.depth(n.id),
            beta: n.beta,
            value: result.value(n.id),
            log_partition: result.log_partition(n.id),
            policy: n
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| SolvedEdge {
                    label: &e.label,
                    child: &tree.node(e.child).name,
                    p: result.policy.edge_prob(n.id, i),
                })
                .collect(),
        })
        .collect();
    let doc = SolvedTree {
        horizon: tree.horizon(),
        root: &tree.node(tree.root()).name,
        root_value: result.root_value(),
        nodes,
    };
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn solve_csv(tree: &DecisionTree, result: &SolveResult) -> String {
    let mut s = String::from("node,depth,beta,value,log_partition,label,child,policy\n");
    for n in tree.nodes() {
        let head = format!(
            "{},{},{},{},{}",
            csv_field(&n.name),
            tree.depth(n.id),
            n.beta,
            format_real(result.value(n.id)),
            result
                .log_partition(n.id)
                .map(format_real)
                .unwrap_or_default()
        );
        if n.is_leaf() {
            s += &format!("{head},,,\n");
        }
        for (i, e) in n.edges.iter().enumerate() {
            s += &format!(
                "{head},{},{},{}\n",
                csv_field(&e.label),
                csv_field(&tree.node(e.child).name),
                format_real(result.policy.edge_prob(n.id, i))
            );
        }
    }
    s
}

// ---------------------------------------------------------------------------
// limits-check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct RuleReport {
    pub rule: &'static str,
    pub oracle: &'static str,
    pub trees: usize,
    pub max_abs_discrepancy: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitsReport {
    pub seed: u64,
    pub num_trees: usize,
    pub tolerance: f64,
    pub rules: Vec<RuleReport>,
    pub pass: bool,
}

/// Solves `num_trees` seeded random trees per rule with limit temperatures
/// and compares the root value against the matching classic oracle.
pub fn limits_check(seed: u64, num_trees: usize) -> Result<LimitsReport> {
    type Oracle = fn(&TypedTree) -> Result<f64>;
    let rules: [(
        &'static str,
        &'static str,
        KindPattern,
        Option<usize>,
        Oracle,
    ); 5] = [
        (
            "expectimax",
            "classic::expectimax",
            KindPattern::Expectimax,
            None,
            classic::expectimax,
        ),
        (
            "minimax",
            "classic::minimax",
            KindPattern::Minimax,
            None,
            classic::minimax,
        ),
        (
            "expectiminimax",
            "classic::expectiminimax",
            KindPattern::Expectiminimax,
            None,
            classic::expectiminimax,
        ),
        (
            "mixed",
            "classic::expectiminimax",
            KindPattern::Mixed,
            None,
            classic::expectiminimax,
        ),
        (
            "bellman",
            "classic::bellman_backup",
            KindPattern::Expectimax,
            Some(2),
            classic::bellman_backup,
        ),
    ];
    let mut reports = Vec::with_capacity(rules.len());
    for (k, (rule, oracle_name, pattern, fixed_depth, oracle)) in rules.into_iter().enumerate() {
        let mut rng = random::rng(random::mix_seed(seed, k as u64));
        let mut worst = 0.0f64;
        for _ in 0..num_trees {
            let depth = fixed_depth.unwrap_or_else(|| rng.gen_range(1..=5));
            let typed = random::random_typed_tree(&mut rng, depth, 1..=4, pattern);
            let expected = oracle(&typed)?;
            let got = solver::solve(&typed.to_decision_tree()?).root_value();
            worst = worst.max((got - expected).abs());
        }
        reports.push(RuleReport {
            rule,
            oracle: oracle_name,
            trees: num_trees,
            max_abs_discrepancy: worst,
            pass: worst < LIMITS_TOLERANCE,
        });
    }
    let pass = reports.iter().all(|r| r.pass);
    Ok(LimitsReport {
        seed,
        num_trees,
        tolerance: LIMITS_TOLERANCE,
        rules: reports,
        pass,
    })
}

// ---------------------------------------------------------------------------
// sample-bound
// ---------------------------------------------------------------------------

fn sample_bound_csv(reports: &[BoundReport], empirical: &[Option<f64>]) -> String {
    let mut s = format!("{},mc_total_variation\n", BoundReport::CSV_HEADER);
    for (r, mc) in reports.iter().zip(empirical) {
        s += &format!(
            "{},{}\n",
            r.csv_row(),
            mc.map(format_real).unwrap_or_default()
        );
    }
    s
}

#[derive(Serialize)]
struct SampleRow<'a> {
    #[serde(flatten)]
    report: &'a BoundReport,
    mc_total_variation: Option<f64>,
}

fn sample_bound_json(reports: &[BoundReport], empirical: &[Option<f64>], trials: u64) -> String {
    let rows: Vec<SampleRow> = reports
        .iter()
        .zip(empirical)
        .map(|(report, &mc_total_variation)| SampleRow {
            report,
            mc_total_variation,
        })
        .collect();
    let doc = serde_json::json!({ "trials": trials, "rows": rows });
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}
