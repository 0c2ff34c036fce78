//! `pgmkit` command-line tool.
//!
//! Machine-readable results go to stdout as JSON; messages go to stderr.
//! Exit codes: 0 success, 1 runtime or data error, 2 usage error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use pgmkit::approx::classify;
use pgmkit::io::{self, Format};
use pgmkit::metrics;
use pgmkit::params::fit_mle;
use pgmkit::simulate::generate_dataset;
use pgmkit::structure::{cpdag_from_dag, learn_structure, PdagGraph, SkeletonOptions};
use pgmkit::{
    infer, load_csv, DagStructure, Dataset, Engine, Evidence, Network, PgmError, PotentialTable,
    SamplerConfig, Workers,
};

#[derive(Parser)]
#[command(name = "pgmkit", version, about = "Discrete Bayesian network learning and inference")]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Print progress and timing to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a CPDAG and one consistent DAG from a CSV file (PC-stable).
    LearnStructure(LearnStructureArgs),
    /// Fit CPTs for a given structure by maximum likelihood.
    LearnParams(LearnParamsArgs),
    /// Posterior marginals under evidence.
    Infer(InferArgs),
    /// Forward-sample a CSV dataset from a network.
    Generate(GenerateArgs),
    /// Compare learned structures or posteriors.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Rewrite a network in another format.
    Convert(ConvertArgs),
    /// Predict a class column of a CSV file and report accuracy.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct LearnStructureArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Largest conditioning-set size; -1 is unlimited.
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    depth: i64,
    /// Output prefix for `<prefix>.cpdag.json` and `<prefix>.dag.bif-structure.json`.
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct LearnParamsArgs {
    #[arg(long)]
    data: PathBuf,
    /// Structure as JSON (structure or network document) or BIF.
    #[arg(long)]
    structure: PathBuf,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pseudocount: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SamplerArgs {
    /// Sample count for sampling engines.
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SamplerArgs {
    fn config(&self) -> Result<SamplerConfig> {
        if self.n == 0 {
            return Err(usage("--n must be positive"));
        }
        Ok(SamplerConfig::with_samples(self.n, self.seed))
    }
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    engine: Engine,
    /// Observations as `VAR=state,...`.
    #[arg(long, default_value = "")]
    evidence: String,
    /// Variables to report as `VAR,...`; default is every unobserved variable.
    #[arg(long)]
    query: Option<String>,
    #[command(flatten)]
    sampler: SamplerArgs,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Structural Hamming distance. DAG inputs are compared through their CPDAGs.
    Shd {
        #[arg(long)]
        learned: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Mean Hellinger distance between two `infer` outputs.
    Hellinger {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    to: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    class_var: String,
    #[arg(long, default_value = "jt")]
    engine: Engine,
    #[command(flatten)]
    sampler: SamplerArgs,
}

/// A problem with the invocation rather than with the data.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_network(path: &Path) -> Result<Network> {
    let text = read(path)?;
    io::read_network(&text, path.to_str())
        .with_context(|| format!("cannot load network {}", path.display()))
}

fn load_data(path: &Path) -> Result<Dataset> {
    load_csv(&read(path)?, true).with_context(|| format!("cannot load data {}", path.display()))
}

fn load_structure(path: &Path) -> Result<DagStructure> {
    let text = read(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || text.trim_start().starts_with('{');
    let s = if is_json {
        io::structure_from_json(&text)
    } else {
        io::parse_bif(&text).map(|n| n.structure())
    };
    s.with_context(|| format!("cannot load structure {}", path.display()))
}

fn print(v: &Value) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn learn_structure_cmd(a: &LearnStructureArgs, verbose: bool) -> Result<()> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return Err(usage("alpha must be in (0,1)"));
    }
    let max_depth = match a.depth {
        -1 => None,
        d if d >= 0 => Some(d as usize),
        _ => return Err(usage("depth must be -1 (unlimited) or nonnegative")),
    };
    let data = load_data(&a.data)?;
    let opts = SkeletonOptions { alpha: a.alpha, max_depth, ..Default::default() };
    let start = Instant::now();
    let learned = learn_structure(&data, &opts)?;
    let wall = start.elapsed().as_secs_f64();
    let names: Vec<String> = data.variables().iter().map(|v| v.name.clone()).collect();
    let cpdag_path = format!("{}.cpdag.json", a.out);
    let dag_path = format!("{}.dag.bif-structure.json", a.out);
    write(Path::new(&cpdag_path), &io::pdag_to_json(&learned.cpdag, &names))?;
    write(Path::new(&dag_path), &io::structure_to_json(&learned.dag))?;
    if verbose {
        eprintln!("learned {} edges with {} CI tests in {wall:.3}s", learned.cpdag.edge_count(), learned.ci_tests);
    }
    let directed = learned.cpdag.edges().filter(|e| e.2).count();
    print(&json!({
        "variables": data.n_vars(),
        "rows": data.n_rows(),
        "edges": learned.cpdag.edge_count(),
        "directed_edges": directed,
        "ci_tests": learned.ci_tests,
        "wall_time_s": wall,
        "cpdag": cpdag_path,
        "dag": dag_path,
    }));
    Ok(())
}

fn learn_params_cmd(a: &LearnParamsArgs) -> Result<()> {
    if !(a.pseudocount >= 0.0) || !a.pseudocount.is_finite() {
        return Err(usage("pseudocount must be a nonnegative number"));
    }
    let structure = load_structure(&a.structure)?;
    let data = load_data(&a.data)?.align_to(&structure.variables)?;
    let mut net = fit_mle(&structure, &data, a.pseudocount)?;
    if let Some(stem) = a.out.file_stem().and_then(|s| s.to_str()) {
        net.name = stem.to_string();
    }
    write(&a.out, &io::write_bif(&net))?;
    print(&json!({ "variables": net.n(), "rows": data.n_rows(), "out": a.out }));
    Ok(())
}

/// Parse `VAR=state,...`; unknown names are usage errors.
fn parse_evidence(net: &Network, text: &str) -> Result<Evidence> {
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (var, state) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("evidence item '{item}' is not VAR=state")))?;
        pairs.push((var.trim(), state.trim()));
    }
    Evidence::from_names(net, &pairs).map_err(|e| usage(e.to_string()))
}

fn parse_query(net: &Network, text: Option<&str>, ev: &Evidence) -> Result<Vec<usize>> {
    match text {
        None => Ok((0..net.n()).filter(|&v| !ev.contains(v)).collect()),
        Some(t) => t
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| net.find(name).ok_or_else(|| usage(format!("unknown query variable {name}"))))
            .collect(),
    }
}

fn distribution(net: &Network, v: usize, values: &[f64]) -> Value {
    let mut m = Map::new();
    for (s, p) in net.variable(v).states.iter().zip(values) {
        m.insert(s.clone(), json!(p));
    }
    Value::Object(m)
}

fn infer_cmd(a: &InferArgs) -> Result<()> {
    let net = load_network(&a.model)?;
    let ev = parse_evidence(&net, &a.evidence)?;
    let query = parse_query(&net, a.query.as_deref(), &ev)?;
    let cfg = a.sampler.config()?;
    let post = infer(&net, &ev, a.engine, &cfg)?;
    let mut marginals = Map::new();
    for v in query {
        let values = match ev.get(v) {
            Some(s) => (0..net.card(v)).map(|k| if k == s { 1.0 } else { 0.0 }).collect(),
            None => post.marginals.get(v).expect("unobserved variable").values().to_vec(),
        };
        marginals.insert(net.variable(v).name.clone(), distribution(&net, v, &values));
    }
    print(&json!({
        "engine": a.engine.name(),
        "marginals": marginals,
        "diagnostics": post.diagnostics,
    }));
    Ok(())
}

fn generate_cmd(a: &GenerateArgs) -> Result<()> {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let net = load_network(&a.model)?;
    let data = generate_dataset(&net, a.n, a.seed)?;
    write(&a.out, &data.to_csv())?;
    print(&json!({ "rows": a.n, "seed": a.seed, "out": a.out }));
    Ok(())
}

/// A graph file as a CPDAG: CPDAG documents are taken as is, structures and
/// networks (JSON or BIF) are converted.
fn load_cpdag(path: &Path) -> Result<(PdagGraph, Vec<String>)> {
    let text = read(path)?;
    if let Ok(Value::Object(doc)) = serde_json::from_str::<Value>(&text) {
        if doc.contains_key("edges") {
            return io::pdag_from_json(&text)
                .with_context(|| format!("cannot load CPDAG {}", path.display()));
        }
    }
    let s = load_structure(path)?;
    let names = s.variables.iter().map(|v| v.name.clone()).collect();
    Ok((cpdag_from_dag(&s.parents), names))
}

fn shd_cmd(learned: &Path, truth: &Path) -> Result<()> {
    let (a, names_a) = load_cpdag(learned)?;
    let (b, names_b) = load_cpdag(truth)?;
    let mut sorted_a = names_a.clone();
    let mut sorted_b = names_b.clone();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return Err(PgmError::VariableMismatch(format!(
            "learned has [{}], truth has [{}]",
            names_a.join(", "),
            names_b.join(", ")
        ))
        .into());
    }
    // Put the truth graph in the learned graph's variable order.
    let perm: Vec<usize> = names_b
        .iter()
        .map(|n| names_a.iter().position(|m| m == n).expect("same names"))
        .collect();
    let d = metrics::shd(&a, &b.relabel(&perm))?;
    print(&json!({ "shd": d }));
    Ok(())
}

/// Marginals of an `infer` output (or a bare `{var: {state: p}}` map) as
/// ordered (variable, [(state, p)]) pairs.
fn load_marginals(path: &Path) -> Result<Vec<(String, Vec<(String, f64)>)>> {
    let text = read(path)?;
    let doc: Value = serde_json::from_str(&text)
        .with_context(|| format!("{} is not valid JSON", path.display()))?;
    let map = doc.get("marginals").unwrap_or(&doc);
    let bad = || anyhow::anyhow!("{} does not hold marginals", path.display());
    let map = map.as_object().ok_or_else(bad)?;
    map.iter()
        .map(|(var, dist)| {
            let dist = dist.as_object().ok_or_else(bad)?;
            let entries = dist
                .iter()
                .map(|(s, p)| p.as_f64().map(|p| (s.clone(), p)).ok_or_else(bad))
                .collect::<Result<_>>()?;
            Ok((var.clone(), entries))
        })
        .collect()
}

fn hellinger_cmd(a: &Path, b: &Path) -> Result<()> {
    let ma = load_marginals(a)?;
    let mb = load_marginals(b)?;
    if ma.is_empty() || ma.len() != mb.len() {
        return Err(PgmError::VariableMismatch("marginal files cover different variables".into()).into());
    }
    let mut per_var = Map::new();
    let mut total = 0.0;
    for (var, pa) in &ma {
        let pb = mb
            .iter()
            .find(|(n, _)| n == var)
            .map(|(_, d)| d)
            .ok_or_else(|| PgmError::VariableMismatch(format!("{var} missing from {}", b.display())))?;
        let mut qa = Vec::with_capacity(pa.len());
        let mut qb = Vec::with_capacity(pa.len());
        for (state, p) in pa {
            let q = pb.iter().find(|(s, _)| s == state).map(|(_, q)| *q).ok_or_else(|| {
                PgmError::VariableMismatch(format!("state {state} of {var} missing from {}", b.display()))
            })?;
            qa.push(*p);
            qb.push(q);
        }
        if pb.len() != pa.len() {
            return Err(PgmError::VariableMismatch(format!("{var} has different states")).into());
        }
        let scope = [(0, qa.len())];
        let h = metrics::hellinger(&PotentialTable::new(&scope, qa)?, &PotentialTable::new(&scope, qb)?)?;
        total += h;
        per_var.insert(var.clone(), json!(h));
    }
    print(&json!({ "hellinger": total / ma.len() as f64, "per_variable": per_var }));
    Ok(())
}

fn convert_cmd(a: &ConvertArgs) -> Result<()> {
    let net = load_network(&a.input)?;
    let text = match a.to {
        Format::Bif => io::write_bif(&net),
        Format::Dot => io::write_dot(&net),
        Format::Json => io::network_to_json(&net),
    };
    write(&a.out, &text)?;
    print(&json!({ "variables": net.n(), "out": a.out }));
    Ok(())
}

fn classify_cmd(a: &ClassifyArgs) -> Result<()> {
    let net = load_network(&a.model)?;
    let class = net
        .find(&a.class_var)
        .ok_or_else(|| usage(format!("unknown class variable {}", a.class_var)))?;
    let data = load_data(&a.data)?;
    let cfg = a.sampler.config()?;
    let r = classify(&net, &data, class, a.engine, &cfg)?;
    print(&json!({
        "engine": a.engine.name(),
        "rows": r.predictions.len(),
        "accuracy": r.accuracy,
        "majority_baseline": r.majority_baseline,
    }));
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let start = Instant::now();
    let out = Workers(cli.workers).install(|| match &cli.command {
        Command::LearnStructure(a) => learn_structure_cmd(a, cli.verbose),
        Command::LearnParams(a) => learn_params_cmd(a),
        Command::Infer(a) => infer_cmd(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Eval(EvalCommand::Shd { learned, truth }) => shd_cmd(learned, truth),
        Command::Eval(EvalCommand::Hellinger { a, b }) => hellinger_cmd(a, b),
        Command::Convert(a) => convert_cmd(a),
        Command::Classify(a) => classify_cmd(a),
    });
    if cli.verbose {
        eprintln!("done in {:.3}s with {} workers", start.elapsed().as_secs_f64(), Workers(cli.workers).resolved());
    }
    out
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
