//! Synthetic Barabási–Albert benchmarks with planted motifs, and JSON-lines
//! storage for labeled graph collections.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeSet};
use crate::rng::{below, stream_rng, StreamRng};

pub const BA_SHAPES_BASE: usize = 300;
pub const BA_SHAPES_HOUSES: usize = 80;
pub const BA_SHAPES_ATTACH: usize = 5;
pub const BA_2MOTIFS_COUNT: usize = 1000;
pub const BA_2MOTIFS_BASE: usize = 20;
pub const BA_2MOTIFS_ATTACH: usize = 1;
pub const MOTIF_SIZE: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    BaShapes,
    #[serde(rename = "ba_2motifs")]
    Ba2Motifs,
    Custom,
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "ba_shapes" => Ok(DatasetKind::BaShapes),
            "ba_2motifs" => Ok(DatasetKind::Ba2Motifs),
            "custom" => Ok(DatasetKind::Custom),
            other => Err(Error::InvalidArgument(format!("unknown dataset kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotifShape {
    /// A 4-cycle with a roof apex: 5 nodes, 6 edges.
    House,
    /// A 5-cycle.
    Cycle,
}

impl MotifShape {
    /// Local edges and per-node roles. House roles: 1 apex, 2 middle,
    /// 3 bottom. Cycle nodes all get role 1.
    fn layout(self) -> (&'static [(usize, usize)], [usize; MOTIF_SIZE]) {
        match self {
            MotifShape::House => {
                (&[(0, 1), (0, 2), (1, 2), (1, 3), (2, 4), (3, 4)], [1, 2, 2, 3, 3])
            }
            MotifShape::Cycle => (&[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)], [1; MOTIF_SIZE]),
        }
    }
}

/// Generator parameters. `count` is the number of graphs for `ba_2motifs`
/// and `motifs` the number of houses for `ba_shapes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub seed: u64,
    pub count: usize,
    pub base_nodes: usize,
    pub m_attach: usize,
    pub motifs: usize,
    /// Motif planted for class 0 and class 1 of `ba_2motifs`.
    pub motif_shapes: [MotifShape; 2],
}

impl DatasetSpec {
    pub fn ba_shapes(seed: u64) -> Self {
        DatasetSpec {
            kind: DatasetKind::BaShapes,
            seed,
            count: 1,
            base_nodes: BA_SHAPES_BASE,
            m_attach: BA_SHAPES_ATTACH,
            motifs: BA_SHAPES_HOUSES,
            motif_shapes: [MotifShape::House, MotifShape::House],
        }
    }

    pub fn ba_2motifs(seed: u64) -> Self {
        DatasetSpec {
            kind: DatasetKind::Ba2Motifs,
            seed,
            count: BA_2MOTIFS_COUNT,
            base_nodes: BA_2MOTIFS_BASE,
            m_attach: BA_2MOTIFS_ATTACH,
            motifs: 1,
            motif_shapes: [MotifShape::House, MotifShape::Cycle],
        }
    }

    pub fn for_kind(kind: DatasetKind, seed: u64) -> Result<Self> {
        match kind {
            DatasetKind::BaShapes => Ok(Self::ba_shapes(seed)),
            DatasetKind::Ba2Motifs => Ok(Self::ba_2motifs(seed)),
            DatasetKind::Custom => {
                Err(Error::InvalidArgument("custom datasets are loaded, not generated".into()))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == DatasetKind::Custom {
            return Err(Error::InvalidArgument("custom datasets have no generator".into()));
        }
        check_ba(self.base_nodes, self.m_attach)?;
        if self.count == 0 {
            return Err(Error::InvalidArgument("count must be at least 1".into()));
        }
        if self.kind == DatasetKind::BaShapes && self.count != 1 {
            return Err(Error::InvalidArgument("ba_shapes is a single graph".into()));
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<LabeledGraphSet> {
        self.validate()?;
        match self.kind {
            DatasetKind::BaShapes => shapes_from_spec(self),
            DatasetKind::Ba2Motifs => motifs_from_spec(self),
            DatasetKind::Custom => unreachable!("rejected by validate"),
        }
    }
}

/// A labeled graph collection. Graph-level labels live on the graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraphSet {
    pub graphs: Vec<Graph>,
    pub num_classes: usize,
    /// Per-node classes, one vector per graph.
    pub node_labels: Option<Vec<Vec<usize>>>,
    /// Planted explanation nodes, one set per graph.
    pub ground_truth: Option<Vec<NodeSet>>,
    pub spec: Option<DatasetSpec>,
}

impl LabeledGraphSet {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn labels(&self) -> Vec<Option<usize>> {
        self.graphs.iter().map(Graph::label).collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.graphs.iter().enumerate() {
            if let Some(l) = g.label() {
                if l >= self.num_classes {
                    return Err(Error::InvalidArgument(format!(
                        "graph {i} has label {l} but the set has {} classes",
                        self.num_classes
                    )));
                }
            }
        }
        if let Some(nl) = &self.node_labels {
            if nl.len() != self.graphs.len()
                || nl.iter().zip(&self.graphs).any(|(l, g)| l.len() != g.num_nodes())
            {
                return Err(Error::InvalidArgument("node labels do not match the graphs".into()));
            }
        }
        if let Some(gt) = &self.ground_truth {
            if gt.len() != self.graphs.len() {
                return Err(Error::InvalidArgument("ground truth does not match the graphs".into()));
            }
            for (s, g) in gt.iter().zip(&self.graphs) {
                s.check_bounds(g.num_nodes())?;
            }
        }
        Ok(())
    }
}

fn check_ba(n: usize, m: usize) -> Result<()> {
    if m < 1 || m >= n {
        return Err(Error::InvalidArgument(format!(
            "preferential attachment needs 1 <= m_attach < n, got m_attach = {m}, n = {n}"
        )));
    }
    Ok(())
}

fn constant_features(n: usize) -> Vec<Vec<f64>> {
    vec![vec![1.0]; n]
}

/// Preferential-attachment edges: an `m`-clique, then each new node links to
/// `m` distinct earlier nodes chosen with probability proportional to degree.
fn ba_edges(n: usize, m: usize, rng: &mut StreamRng) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + (n - m) * m);
    // Each endpoint occurrence; sampling from it is degree-proportional.
    let mut ends: Vec<usize> = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    let mut chosen = Vec::with_capacity(m);
    for v in m..n {
        chosen.clear();
        while chosen.len() < m {
            let u = if ends.is_empty() { below(rng, v) } else { ends[below(rng, ends.len())] };
            if !chosen.contains(&u) {
                chosen.push(u);
            }
        }
        for &u in &chosen {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    edges
}

/// A Barabási–Albert graph with constant scalar features.
pub fn generate_ba(n: usize, m_attach: usize, seed: u64) -> Result<Graph> {
    check_ba(n, m_attach)?;
    let edges = ba_edges(n, m_attach, &mut stream_rng(seed, 0));
    Graph::new(1, constant_features(n), edges)
}

/// Appends a motif at index `offset` and links it to one random base node.
/// Returns the motif's roles.
fn plant(
    edges: &mut Vec<(usize, usize)>,
    shape: MotifShape,
    offset: usize,
    base: usize,
    rng: &mut StreamRng,
) -> [usize; MOTIF_SIZE] {
    let (local, roles) = shape.layout();
    edges.extend(local.iter().map(|&(a, b)| (offset + a, offset + b)));
    let anchor = below(rng, base);
    let entry = offset + below(rng, MOTIF_SIZE);
    edges.push((anchor, entry));
    roles
}

fn shapes_from_spec(spec: &DatasetSpec) -> Result<LabeledGraphSet> {
    let mut rng = stream_rng(spec.seed, 0);
    let base = spec.base_nodes;
    let mut edges = ba_edges(base, spec.m_attach, &mut rng);
    let n = base + spec.motifs * MOTIF_SIZE;
    let mut node_labels = vec![0; n];
    for h in 0..spec.motifs {
        let offset = base + h * MOTIF_SIZE;
        let roles = plant(&mut edges, spec.motif_shapes[0], offset, base, &mut rng);
        node_labels[offset..offset + MOTIF_SIZE].copy_from_slice(&roles);
    }
    let graph =
        Graph::new(1, constant_features(n), edges)?.with_name(Some("ba_shapes".to_string()));
    Ok(LabeledGraphSet {
        graphs: vec![graph],
        num_classes: 4,
        node_labels: Some(vec![node_labels]),
        ground_truth: Some(vec![NodeSet::new(base..n)]),
        spec: Some(*spec),
    })
}

/// One BA base graph with a single planted house; node classes 0 for the
/// base and 1, 2, 3 for the house's apex, middle and bottom nodes.
pub fn generate_ba_shapes(seed: u64) -> LabeledGraphSet {
    DatasetSpec::ba_shapes(seed).generate().expect("default parameters are valid")
}

fn motifs_from_spec(spec: &DatasetSpec) -> Result<LabeledGraphSet> {
    let base = spec.base_nodes;
    let n = base + MOTIF_SIZE;
    let graphs: Vec<Graph> = (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(spec.seed, i as u64);
            let label = i % 2;
            let mut edges = ba_edges(base, spec.m_attach, &mut rng);
            plant(&mut edges, spec.motif_shapes[label], base, base, &mut rng);
            Ok(Graph::new(1, constant_features(n), edges)?
                .with_label(Some(label))
                .with_name(Some(format!("ba_2motifs_{i}"))))
        })
        .collect::<Result<_>>()?;
    let ground_truth = vec![NodeSet::new(base..n); graphs.len()];
    Ok(LabeledGraphSet {
        graphs,
        num_classes: 2,
        node_labels: None,
        ground_truth: Some(ground_truth),
        spec: Some(*spec),
    })
}

/// `count` graphs, each a BA base plus one motif, labels alternating
/// 0 (house), 1 (cycle). Ground truth is the motif's node indices.
pub fn generate_ba_2motifs(count: usize, seed: u64) -> Result<LabeledGraphSet> {
    DatasetSpec { count, ..DatasetSpec::ba_2motifs(seed) }.generate()
}

/// The `meta.json` sidecar of a saved set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    pub kind: DatasetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub num_graphs: usize,
    pub num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<DatasetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Vec<NodeSet>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_labels: Option<Vec<Vec<usize>>>,
}

impl DatasetMeta {
    pub fn of(set: &LabeledGraphSet) -> Self {
        DatasetMeta {
            kind: set.spec.map_or(DatasetKind::Custom, |s| s.kind),
            seed: set.spec.map(|s| s.seed),
            num_graphs: set.len(),
            num_classes: set.num_classes,
            spec: set.spec,
            ground_truth: set.ground_truth.clone(),
            node_labels: set.node_labels.clone(),
        }
    }
}

pub const META_FILE: &str = "meta.json";

/// Sidecar location for a dataset file: `meta.json` in the same directory.
pub fn meta_path(path: &Path) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from(META_FILE), |d| d.join(META_FILE))
}

/// Writes one graph per line, plus the `meta.json` sidecar.
pub fn save_graph_set(set: &LabeledGraphSet, path: &Path) -> Result<()> {
    set.validate()?;
    let mut out = BufWriter::new(fs::File::create(path)?);
    for g in &set.graphs {
        serde_json::to_writer(&mut out, g)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    let meta = serde_json::to_string_pretty(&DatasetMeta::of(set))?;
    fs::write(meta_path(path), meta + "\n")?;
    Ok(())
}

/// Parses JSON-lines graphs. Blank lines are skipped; errors name the
/// 1-based line.
pub fn parse_graph_lines(text: &str) -> Result<Vec<Graph>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })
        })
        .collect()
}

/// Reads a JSON-lines file and its `meta.json` sidecar if present. Without
/// a sidecar the set is `custom` and the class count is inferred from the
/// largest label.
pub fn load_graph_set(path: &Path) -> Result<LabeledGraphSet> {
    let graphs = parse_graph_lines(&fs::read_to_string(path)?)?;
    let meta_file = meta_path(path);
    let set = if meta_file.exists() {
        let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(&meta_file)?)?;
        if meta.num_graphs != graphs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} lists {} graphs, {} has {}",
                meta_file.display(),
                meta.num_graphs,
                path.display(),
                graphs.len()
            )));
        }
        LabeledGraphSet {
            graphs,
            num_classes: meta.num_classes,
            node_labels: meta.node_labels,
            ground_truth: meta.ground_truth,
            spec: meta.spec,
        }
    } else {
        let num_classes = graphs.iter().filter_map(Graph::label).max().map_or(0, |l| l + 1);
        LabeledGraphSet { graphs, num_classes, node_labels: None, ground_truth: None, spec: None }
    };
    set.validate()?;
    Ok(set)
}

/// An Erdős–Rényi graph with `num_edges` distinct uniform edges.
pub fn generate_gnm(n: usize, num_edges: usize, seed: u64) -> Result<Graph> {
    let max = n * n.saturating_sub(1) / 2;
    if num_edges > max {
        return Err(Error::InvalidArgument(format!("{num_edges} edges exceed {max} pairs")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut edges = std::collections::BTreeSet::new();
    while edges.len() < num_edges {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    Graph::new(1, constant_features(n), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::connected_components;

    fn connected(g: &Graph) -> bool {
        connected_components(g, &NodeSet::full(g.num_nodes())).unwrap().len() == 1
    }

    #[test]
    fn ba_edge_count_and_connectivity() {
        for (n, m) in [(2, 1), (10, 1), (10, 3), (30, 5), (7, 6)] {
            for seed in 0..5 {
                let g = generate_ba(n, m, seed).unwrap();
                assert_eq!(g.num_edges(), m * (m - 1) / 2 + (n - m) * m);
                assert!(connected(&g));
            }
        }
        assert!(generate_ba(5, 0, 0).is_err());
        assert!(generate_ba(5, 5, 0).is_err());
    }

    #[test]
    fn one_step_past_the_clique_is_complete() {
        for m in 1..6 {
            let g = generate_ba(m + 1, m, 3).unwrap();
            assert_eq!(g.num_edges(), (m + 1) * m / 2);
        }
    }

    #[test]
    fn ba_is_seed_deterministic() {
        assert_eq!(generate_ba(50, 2, 9).unwrap(), generate_ba(50, 2, 9).unwrap());
        assert_ne!(generate_ba(50, 2, 9).unwrap(), generate_ba(50, 2, 10).unwrap());
    }

    #[test]
    fn ba_degrees_are_heavier_tailed_than_random() {
        let (n, m) = (200, 2);
        let max_deg = |g: &Graph| (0..g.num_nodes()).map(|i| g.degree(i)).max().unwrap();
        let mut wins = 0;
        for seed in 0..50 {
            let ba = generate_ba(n, m, seed).unwrap();
            let er = generate_gnm(n, ba.num_edges(), seed + 1000).unwrap();
            if max_deg(&ba) > max_deg(&er) {
                wins += 1;
            }
        }
        assert!(wins >= 45, "BA max degree exceeded ER in only {wins}/50 seeds");
    }

    #[test]
    fn ba_shapes_bookkeeping() {
        let set = generate_ba_shapes(0);
        assert_eq!(set.len(), 1);
        let g = &set.graphs[0];
        assert_eq!(g.num_nodes(), 700);
        assert_eq!(set.num_classes, 4);
        let labels = &set.node_labels.as_ref().unwrap()[0];
        assert_eq!(labels.iter().filter(|&&l| l != 0).count(), 400);
        let base_edges = 10 + 295 * 5;
        assert_eq!(g.num_edges(), base_edges + 80 * 7);
        for h in 0..80 {
            let nodes: Vec<usize> = (300 + 5 * h..305 + 5 * h).collect();
            let internal = g.edges().iter().filter(|(u, v)| nodes.contains(u) && nodes.contains(v)).count();
            let leaving = g.edges().iter().filter(|(u, v)| nodes.contains(u) != nodes.contains(v)).count();
            assert_eq!((internal, leaving), (6, 1));
            assert_eq!(labels[nodes[0]..=nodes[4]], [1, 2, 2, 3, 3]);
        }
        assert!(connected(g));
        assert_eq!(generate_ba_shapes(0), set);
    }

    #[test]
    fn ba_2motifs_shape() {
        let set = generate_ba_2motifs(BA_2MOTIFS_COUNT, 1).unwrap();
        assert_eq!(set.len(), 1000);
        assert_eq!(set.num_classes, 2);
        assert!(set.graphs.iter().all(|g| g.num_nodes() == 25));
        let ones = set.labels().iter().filter(|l| **l == Some(1)).count();
        assert_eq!(ones, 500);
        for (g, gt) in set.graphs.iter().zip(set.ground_truth.as_ref().unwrap()) {
            assert_eq!(gt.as_slice(), &[20, 21, 22, 23, 24]);
            let internal = g.edges().iter().filter(|(u, v)| *u >= 20 && *v >= 20).count();
            let expected = if g.label() == Some(0) { 6 } else { 5 };
            assert_eq!(internal, expected);
            assert_eq!(g.edges().iter().filter(|(u, v)| *u < 20 && *v >= 20).count(), 1);
            assert!(connected(g));
        }
        assert!(generate_ba_2motifs(0, 1).is_err());
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("ba-2motifs".parse::<DatasetKind>().unwrap(), DatasetKind::Ba2Motifs);
        assert_eq!("ba_shapes".parse::<DatasetKind>().unwrap(), DatasetKind::BaShapes);
        assert!("mutag".parse::<DatasetKind>().is_err());
        assert_eq!(serde_json::to_string(&DatasetKind::Ba2Motifs).unwrap(), "\"ba_2motifs\"");
    }

    #[test]
    fn parse_errors_name_the_line() {
        let good = r#"{"num_nodes":2,"feature_dim":1,"features":[[1.0],[1.0]],"edges":[[0,1]]}"#;
        assert_eq!(parse_graph_lines("").unwrap().len(), 0);
        assert_eq!(parse_graph_lines(&format!("{good}\n\n{good}\n")).unwrap().len(), 2);
        let bad = r#"{"num_nodes":2,"feature_dim":1,"features":[[1.0],[1.0]],"edges":[[0,7]]}"#;
        match parse_graph_lines(&format!("{good}\n{bad}\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }
}
