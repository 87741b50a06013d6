use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

#[derive(Debug, Parser)]
#[command(
    name = "dilates",
    version,
    about = "Bounds, biclique partitions and empirical checks for sums of dilates",
    args_override_self = true
)]
pub struct Cli {
    /// JSON object of flag values for the subcommand; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Every exponent bound for a coefficient tuple.
    Bounds(BoundsArgs),
    /// Biclique partition of a digit graph or a bipartite graph file.
    Decompose(DecomposeArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Enumerate a generalized arithmetic progression and check its bounds.
    Gap(GapArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Plunnecke,
    Bukh,
    Binbound,
    Decomposition,
    MainTheorem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    StarRows,
    StarCols,
    Greedy,
    Exact,
}

#[derive(Debug, Clone, Args)]
pub struct CoefficientArgs {
    /// Comma-separated nonzero integers, e.g. 3,-5,6.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub lambdas: Option<String>,
    /// Repeat the whole list this many times.
    #[arg(long, default_value_t = 1, value_name = "N")]
    pub repeat: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Largest seed subset in the greedy beam search.
    #[arg(long, default_value_t = 4)]
    pub max_q: usize,
    #[arg(long, default_value_t = 32)]
    pub beam_width: usize,
    /// Greedy time budget in seconds.
    #[arg(long, value_name = "SECS")]
    pub time_budget: Option<f64>,
    /// Edge limit of the exact solver.
    #[arg(long, default_value_t = 12)]
    pub max_edges: usize,
    /// Extra greedy passes with seeded tie-breaking.
    #[arg(long, default_value_t = 0)]
    pub restarts: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub coefficients: CoefficientArgs,
    /// Report a single bound instead of the full report.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub coefficients: CoefficientArgs,
    /// Bipartite graph JSON: {"left","right","edges"} or {"lambdas","r","edges"}.
    #[arg(long, value_name = "FILE", conflicts_with = "lambdas")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "greedy")]
    pub algo: AlgoArg,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Summary format on stdout.
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    /// Write the decomposition JSON here.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// ruzsa, plunnecke, corollary5, prop6 or dilates.
    pub suite: String,
    #[arg(long)]
    pub universe: Option<u32>,
    #[arg(long)]
    pub max_set_size: Option<usize>,
    #[arg(long)]
    pub max_h: Option<usize>,
    #[arg(long)]
    pub lambda_max: Option<u32>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Enumerate every instance instead of sampling.
    #[arg(long)]
    pub exhaustive: bool,
    #[arg(long)]
    pub max_fold: Option<u32>,
    #[arg(long)]
    pub max_sets: Option<usize>,
    #[arg(long)]
    pub max_pair_fold: Option<u32>,
    #[arg(long)]
    pub max_instances: Option<u64>,
    /// Cardinality cap for intermediate sumsets.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Edge limit of the exact solver.
    #[arg(long)]
    pub max_edges: Option<usize>,
    /// Write every trial record here as JSONL.
    #[arg(long, value_name = "FILE")]
    pub log: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GapArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub base: i64,
    /// Comma-separated differences.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub diffs: String,
    /// Comma-separated lengths.
    #[arg(long, value_name = "LIST")]
    pub lengths: String,
    /// Also check the dilate-sum bound for these coefficients.
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    pub lambdas: Option<String>,
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> anyhow::Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        bail!("malformed {what} list {text:?}");
    }
    items
        .into_iter()
        .map(|s| s.parse::<T>().map_err(|e| anyhow::anyhow!("bad {what} entry {s:?}: {e}")))
        .collect()
}

const SUBCOMMANDS: [&str; 4] = ["bounds", "decompose", "verify", "gap"];

/// Expands `--config FILE` into flag tokens placed right after the
/// subcommand, so flags given on the command line override them.
pub fn expand_config(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut it = argv.into_iter();
    while let Some(tok) = it.next() {
        if tok == "--config" {
            path = Some(it.next().context("--config needs a file")?);
        } else if let Some(p) = tok.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(tok);
        }
    }
    let Some(path) = path else { return Ok(rest) };

    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let value: Value =
        serde_json::from_str(&text).with_context(|| format!("parsing config {path}"))?;
    let Value::Object(map) = value else { bail!("config {path} must be a JSON object") };

    let mut tokens = Vec::new();
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => tokens.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                tokens.push(format!("{flag}={}", parts.join(",")));
            }
            other => tokens.push(format!("{flag}={}", scalar(&other)?)),
        }
    }

    let at = rest
        .iter()
        .position(|t| SUBCOMMANDS.contains(&t.as_str()))
        .map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, tokens);
    Ok(rest)
}

fn scalar(v: &Value) -> anyhow::Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => bail!("config values must be scalars or lists of scalars"),
    }
}
