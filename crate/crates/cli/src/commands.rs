use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use graphext::datasets::{load_graph_set, parse_graph_lines, save_graph_set, DatasetKind, DatasetSpec};
use graphext::eval::{points_to_csv, sweep_with_reports};
use graphext::game::FnOracle;
use graphext::gnn::cycle_detector;
use graphext::{
    enumerate_sampler_expectation, exact_shapley, explain_graph, explain_link, explain_node,
    init_model, ArchSpec, CoalitionStructure, Error, ExplainConfig, Graph, ImportanceReport,
    ModelSpec, NodeSet, Result, SampleConfig, Scale, TableOracle, ValueOracle,
};

/// Largest componentwise gap tolerated between the exact and the expected
/// sampler values.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_LEVELS: &str = "0.5,0.6,0.7,0.8,0.9";

#[derive(Debug, Args, Serialize)]
pub struct GenDatasetArgs {
    /// ba-shapes or ba-2motifs
    #[arg(long)]
    pub kind: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of graphs (ba-2motifs only).
    #[arg(long)]
    pub count: Option<usize>,
    /// Output directory; receives graphs.jsonl, meta.json and manifest.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct GenModelArgs {
    /// Architecture descriptor (JSON).
    #[arg(long, required_unless_present = "cycle_detector")]
    pub arch: Option<PathBuf>,
    /// Emit the hand-built cycle detector with this sharpness instead.
    #[arg(long, conflicts_with = "arch")]
    pub cycle_detector: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskArg {
    Graph,
    Node,
    Link,
}

#[derive(Debug, Args, Serialize)]
pub struct ExplainArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// A graph JSON file, or a JSON-lines dataset together with --index.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    #[arg(long, value_enum, default_value_t = TaskArg::Graph)]
    pub task: TaskArg,
    /// Target node of a node task.
    #[arg(long)]
    pub target: Option<usize>,
    /// Endpoints of a link task, as `u,v`.
    #[arg(long, value_delimiter = ',')]
    pub pair: Option<Vec<usize>>,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    #[arg(long, default_value_t = graphext::sampler::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// prob or logit
    #[arg(long, default_value = "prob")]
    pub scale: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory of per-graph reports; missing ones are computed and stored.
    #[arg(long)]
    pub reports: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = DEFAULT_LEVELS)]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = graphext::sampler::DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixtureKind {
    Additive,
    Externality,
    Random,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    /// Player count of a built-in fixture.
    #[arg(long, required_unless_present = "fixture")]
    pub n: Option<usize>,
    /// A table fixture (JSON list of {"s", "p", "v"} entries).
    #[arg(long, conflicts_with = "n")]
    pub fixture: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FixtureKind::Externality)]
    pub kind: FixtureKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the verification report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn gen_dataset(a: &GenDatasetArgs) -> Result<Vec<PathBuf>> {
    let kind: DatasetKind = a.kind.parse()?;
    let mut spec = DatasetSpec::for_kind(kind, a.seed)?;
    if let Some(count) = a.count {
        if kind != DatasetKind::Ba2Motifs {
            return Err(Error::InvalidArgument("--count applies to ba-2motifs only".into()));
        }
        spec.count = count;
    }
    let set = spec.generate()?;
    fs::create_dir_all(&a.out)?;
    let path = a.out.join("graphs.jsonl");
    save_graph_set(&set, &path)?;
    info!("wrote {} graphs to {}", set.len(), path.display());
    Ok(vec![path, graphext::datasets::meta_path(&a.out.join("graphs.jsonl"))])
}

pub fn gen_model(a: &GenModelArgs) -> Result<Vec<PathBuf>> {
    let model = match (&a.arch, a.cycle_detector) {
        (_, Some(k)) => cycle_detector(k),
        (Some(path), None) => {
            let arch: ArchSpec = serde_json::from_str(&read(path)?)?;
            init_model(&arch, a.seed)?
        }
        (None, None) => return Err(Error::InvalidArgument("give --arch or --cycle-detector".into())),
    };
    write(&a.out, &(model.to_json() + "\n"))?;
    Ok(vec![a.out.clone()])
}

fn load_graph(path: &Path, index: usize) -> Result<Graph> {
    let text = read(path)?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        let mut graphs = parse_graph_lines(&text)?;
        if index >= graphs.len() {
            return Err(Error::InvalidArgument(format!(
                "--index {index} but {} holds {} graphs",
                path.display(),
                graphs.len()
            )));
        }
        Ok(graphs.swap_remove(index))
    } else {
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn explain(a: &ExplainArgs) -> Result<Vec<PathBuf>> {
    let model = ModelSpec::from_json(&read(&a.model)?)?;
    let g = load_graph(&a.graph, a.index)?;
    let scale: Scale = a.scale.parse()?;
    let cfg = ExplainConfig {
        sampling: SampleConfig::new(a.samples, a.seed).with_workers(a.workers),
        scale,
    };
    let report = match a.task {
        TaskArg::Graph => explain_graph(&model, &g, &cfg)?,
        TaskArg::Node => {
            let target = a.target.ok_or_else(|| Error::InvalidArgument("node task needs --target".into()))?;
            explain_node(&model, &g, target, a.hops, &cfg)?
        }
        TaskArg::Link => {
            let (u, v) = match a.pair.as_deref() {
                Some(&[u, v]) => (u, v),
                _ => return Err(Error::InvalidArgument("link task needs --pair u,v".into())),
            };
            explain_link(&model, &g, (u, v), a.hops, &cfg)?
        }
    };
    write(&a.out, &(report.to_json() + "\n"))?;
    info!("explained class {} over {} nodes", report.explained_class, report.len());
    Ok(vec![a.out.clone()])
}

pub fn evaluate(a: &EvaluateArgs) -> Result<Vec<PathBuf>> {
    let model = ModelSpec::from_json(&read(&a.model)?)?;
    let set = load_graph_set(&a.dataset)?;
    if set.is_empty() {
        return Err(Error::InvalidArgument(format!("{} holds no graphs", a.dataset.display())));
    }
    let cfg = ExplainConfig::from(SampleConfig::new(a.samples, a.seed).with_workers(a.workers));
    let mut outputs = vec![a.out.clone()];
    let mut reports = Vec::with_capacity(set.len());
    for (i, g) in set.graphs.iter().enumerate() {
        let cached = a.reports.as_ref().map(|d| d.join(format!("graph_{i}.json")));
        let report = match &cached {
            Some(p) if p.exists() => ImportanceReport::from_json(&read(p)?)?,
            _ => {
                let r = explain_graph(&model, g, &cfg)?;
                if let Some(p) = &cached {
                    write(p, &(r.to_json() + "\n"))?;
                    outputs.push(p.clone());
                }
                r
            }
        };
        if report.config.samples != a.samples || report.config.seed != a.seed {
            warn!("report for graph {i} was computed with different sampling settings");
        }
        reports.push(report);
    }
    let points = sweep_with_reports(&model, &set.graphs, &reports, &a.levels)?;
    write(&a.out, &points_to_csv(&points))?;
    Ok(outputs)
}

/// Additive worths `Σ (i + 1)`, blind to the partition.
fn additive(s: &NodeSet, _: &CoalitionStructure) -> Result<f64> {
    Ok(s.iter().map(|i| (i + 1) as f64).sum())
}

/// Additive worths plus player-dependent terms that depend on how the
/// outsiders are organized.
fn externality(s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
    let outside: Vec<&NodeSet> = p.blocks().iter().filter(|b| *b != s).collect();
    let spread = outside.len() as f64;
    let weight: f64 = s.iter().map(|i| i as f64).sum();
    let pressure: f64 =
        outside.iter().map(|b| (b.len() * (b.first().unwrap_or(0) + 1)) as f64).sum();
    Ok(additive(s, p)? + 0.3 * weight * spread - 0.1 * pressure)
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub exact: Vec<f64>,
    pub expectation: Option<Vec<f64>>,
    pub max_discrepancy: Option<f64>,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs both enumerations. The exact values are always reported; a failure
/// of the expectation path is returned after the report is emitted.
pub fn oracle(a: &OracleArgs) -> Result<Vec<PathBuf>> {
    let (n, table);
    if let Some(path) = &a.fixture {
        let t = TableOracle::from_json(&read(path)?)?;
        n = t.num_players();
        table = Some(t);
    } else {
        n = a.n.expect("clap requires --n without --fixture");
        table = match a.kind {
            FixtureKind::Random => Some(TableOracle::random(n, a.seed)?),
            _ => None,
        };
    }
    let run = |v: &dyn ValueOracle| -> Result<(Vec<f64>, Result<Vec<f64>>)> {
        let exact = exact_shapley(v, n)?;
        Ok((exact, enumerate_sampler_expectation(v, n)))
    };
    let (exact, expectation) = match (&table, a.kind) {
        (Some(t), _) => run(t)?,
        (None, FixtureKind::Additive) => run(&FnOracle(additive))?,
        (None, _) => run(&FnOracle(externality))?,
    };
    let (expectation, failure) = match expectation {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e)),
    };
    let max_discrepancy = expectation.as_ref().map(|e| {
        exact.iter().zip(e).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    });
    let report = OracleReport {
        n,
        exact,
        expectation,
        max_discrepancy,
        tolerance: ORACLE_TOLERANCE,
        error: failure.as_ref().map(ToString::to_string),
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    print!("{text}");
    let mut outputs = Vec::new();
    if let Some(out) = &a.out {
        write(out, &text)?;
        outputs.push(out.clone());
    }
    if let Some(e) = failure {
        return Err(e);
    }
    match max_discrepancy {
        Some(d) if d <= ORACLE_TOLERANCE => Ok(outputs),
        Some(d) => Err(Error::Oracle(format!("discrepancy {d:e} exceeds {ORACLE_TOLERANCE:e}"))),
        None => unreachable!("expectation present when no failure"),
    }
}

pub fn parameters<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).unwrap_or(serde_json::Value::Null)
}
