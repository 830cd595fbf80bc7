//! Fidelity and sparsity metrics over feature-masked graphs.
//!
//! Masking here zeroes node features and keeps every edge. This is unrelated
//! to the structural masking of the coalition game.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explainer::{explain_graph, top_k_mask, ExplainConfig, ImportanceReport};
use crate::gnn::ModelSpec;
use crate::graph::Graph;

/// A graph with a node mask. `true` keeps a node's features.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedGraph<'a> {
    pub base: &'a Graph,
    pub mask: Vec<bool>,
}

impl<'a> MaskedGraph<'a> {
    pub fn new(base: &'a Graph, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != base.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "mask has length {}, graph has {} nodes",
                mask.len(),
                base.num_nodes()
            )));
        }
        Ok(MaskedGraph { base, mask })
    }

    /// `(X ⊙ M, A)`.
    pub fn retained(&self) -> Graph {
        self.base.with_feature_mask(&self.mask).expect("length checked")
    }

    /// `(X ⊙ (1 − M), A)`.
    pub fn complement(&self) -> Graph {
        let inv: Vec<bool> = self.mask.iter().map(|b| !b).collect();
        self.base.with_feature_mask(&inv).expect("length checked")
    }

    pub fn selected(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// One evaluation item: a masked graph and the class the model predicted on
/// the unmasked graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityItem<'a> {
    pub masked: MaskedGraph<'a>,
    pub label: usize,
}

impl<'a> FidelityItem<'a> {
    pub fn new(graph: &'a Graph, mask: Vec<bool>, label: usize) -> Result<Self> {
        Ok(FidelityItem { masked: MaskedGraph::new(graph, mask)?, label })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityPoint {
    pub sparsity: f64,
    pub fidelity_plus: f64,
    pub fidelity_minus: f64,
    pub k_mean: f64,
}

fn prob(m: &ModelSpec, g: &Graph, class: usize) -> Result<f64> {
    Ok(m.forward(g)?.probabilities[class])
}

fn mean_drop<F>(m: &ModelSpec, items: &[FidelityItem<'_>], realize: F) -> Result<f64>
where
    F: Fn(&MaskedGraph<'_>) -> Graph + Sync,
{
    if items.is_empty() {
        return Err(Error::InvalidArgument("no items to evaluate".into()));
    }
    for it in items {
        m.check_class(it.label)?;
    }
    let drops: Vec<f64> = items
        .par_iter()
        .map(|it| {
            let full = prob(m, it.masked.base, it.label)?;
            let masked = prob(m, &realize(&it.masked), it.label)?;
            Ok(full - masked)
        })
        .collect::<Result<_>>()?;
    Ok(drops.iter().sum::<f64>() / items.len() as f64)
}

/// Mean of `f(G)_y − f(G^{1−M})_y`.
pub fn fidelity_plus(m: &ModelSpec, items: &[FidelityItem<'_>]) -> Result<f64> {
    mean_drop(m, items, |mg| mg.complement())
}

/// Mean of `f(G)_y − f(G^M)_y`.
pub fn fidelity_minus(m: &ModelSpec, items: &[FidelityItem<'_>]) -> Result<f64> {
    mean_drop(m, items, |mg| mg.retained())
}

/// Mean fraction of nodes left unselected.
pub fn sparsity(items: &[FidelityItem<'_>]) -> Result<f64> {
    if items.is_empty() {
        return Err(Error::InvalidArgument("no items to evaluate".into()));
    }
    let mut total = 0.0;
    for it in items {
        let n = it.masked.base.num_nodes();
        if n == 0 {
            return Err(Error::InvalidArgument("sparsity of a zero-node graph".into()));
        }
        total += 1.0 - it.masked.selected() as f64 / n as f64;
    }
    Ok(total / items.len() as f64)
}

/// Mask size for a target sparsity: `round((1 − level)·n)` clamped to `[1, n]`.
pub fn k_for_level(level: f64, n: usize) -> usize {
    (((1.0 - level) * n as f64).round() as usize).clamp(1, n.max(1))
}

fn check_levels(levels: &[f64]) -> Result<()> {
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::InvalidArgument(format!("sparsity level {l} is outside (0, 1)")));
    }
    Ok(())
}

/// Explains every graph once, then evaluates each sparsity level from the
/// shared rankings. Points come back sorted by realized sparsity.
pub fn sparsity_sweep(
    m: &ModelSpec,
    graphs: &[Graph],
    cfg: &ExplainConfig,
    levels: &[f64],
) -> Result<Vec<FidelityPoint>> {
    check_levels(levels)?;
    let reports: Vec<ImportanceReport> =
        graphs.iter().map(|g| explain_graph(m, g, cfg)).collect::<Result<_>>()?;
    sweep_with_reports(m, graphs, &reports, levels)
}

/// [`sparsity_sweep`] over precomputed graph-task reports.
pub fn sweep_with_reports(
    m: &ModelSpec,
    graphs: &[Graph],
    reports: &[ImportanceReport],
    levels: &[f64],
) -> Result<Vec<FidelityPoint>> {
    check_levels(levels)?;
    if graphs.len() != reports.len() {
        return Err(Error::InvalidArgument(format!(
            "{} graphs but {} reports",
            graphs.len(),
            reports.len()
        )));
    }
    for (g, r) in graphs.iter().zip(reports) {
        if r.len() != g.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "report covers {} nodes, graph has {}",
                r.len(),
                g.num_nodes()
            )));
        }
    }
    let mut points = Vec::with_capacity(levels.len());
    for &level in levels {
        let mut items = Vec::with_capacity(graphs.len());
        let mut k_total = 0usize;
        for (g, r) in graphs.iter().zip(reports) {
            let k = k_for_level(level, g.num_nodes());
            k_total += k;
            let chosen = top_k_mask(r, k)?;
            let mask = (0..g.num_nodes()).map(|i| chosen.contains(i)).collect();
            items.push(FidelityItem::new(g, mask, r.explained_class)?);
        }
        points.push(FidelityPoint {
            sparsity: sparsity(&items)?,
            fidelity_plus: fidelity_plus(m, &items)?,
            fidelity_minus: fidelity_minus(m, &items)?,
            k_mean: k_total as f64 / graphs.len() as f64,
        });
    }
    points.sort_by(|a, b| a.sparsity.total_cmp(&b.sparsity));
    Ok(points)
}

pub fn points_to_csv(points: &[FidelityPoint]) -> String {
    let mut out = String::from("sparsity,fidelity_plus,fidelity_minus,k_mean\n");
    for p in points {
        out.push_str(&format!("{},{},{},{}\n", p.sparsity, p.fidelity_plus, p.fidelity_minus, p.k_mean));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gnn::{cycle_detector, Activation, DenseLayer, LayerKind, LayerSpec, OutputKind, Readout};
    use crate::sampler::SampleConfig;

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    /// GIN 1→1 identity aggregation, sum readout, logits `[0, pooled]`.
    fn linear_model(head_weight: f64) -> ModelSpec {
        ModelSpec::new(
            vec![LayerSpec {
                kind: LayerKind::Gin,
                weight: vec![vec![1.0]],
                bias: vec![0.0],
                epsilon: Some(0.0),
                activation: Activation::Identity,
            }],
            Readout::Sum,
            vec![DenseLayer {
                weight: vec![vec![0.0, head_weight]],
                bias: vec![0.0, 0.0],
                activation: Activation::Identity,
            }],
            2,
            OutputKind::Softmax,
        )
        .unwrap()
    }

    fn path3() -> Graph {
        Graph::new(1, vec![vec![1.0], vec![2.0], vec![3.0]], [(0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn hand_computed_three_node_case() {
        // Aggregation x_i + sum of neighbors gives (3, 6, 5) on the full path,
        // total 14. Keeping node 0 leaves features (1, 0, 0) -> (1, 1, 0) = 2;
        // its complement (0, 2, 3) -> (2, 5, 5) = 12.
        let m = linear_model(1.0);
        let g = path3();
        let items = [FidelityItem::new(&g, vec![true, false, false], 1).unwrap()];
        let plus = fidelity_plus(&m, &items).unwrap();
        let minus = fidelity_minus(&m, &items).unwrap();
        assert!((plus - (sigmoid(14.0) - sigmoid(12.0))).abs() < 1e-12);
        assert!((minus - (sigmoid(14.0) - sigmoid(2.0))).abs() < 1e-12);
        let direct = m.forward(&g).unwrap().probabilities[1]
            - m.forward(&g.with_feature_mask(&[false, true, true]).unwrap()).unwrap().probabilities[1];
        assert_eq!(plus, direct);
    }

    #[test]
    fn trivial_masks_and_constant_models() {
        let m = linear_model(1.0);
        let g = path3();
        let none = [FidelityItem::new(&g, vec![false; 3], 1).unwrap()];
        let all = [FidelityItem::new(&g, vec![true; 3], 0).unwrap()];
        assert_eq!(fidelity_plus(&m, &none).unwrap(), 0.0);
        assert_eq!(fidelity_minus(&m, &all).unwrap(), 0.0);
        assert_eq!(sparsity(&none).unwrap(), 1.0);
        assert_eq!(sparsity(&all).unwrap(), 0.0);

        let flat = linear_model(0.0);
        let some = [FidelityItem::new(&g, vec![true, false, true], 0).unwrap()];
        assert_eq!(fidelity_plus(&flat, &some).unwrap(), 0.0);
        assert_eq!(fidelity_minus(&flat, &some).unwrap(), 0.0);
    }

    #[test]
    fn sparsity_arithmetic() {
        let g = Graph::new(1, vec![vec![1.0]; 10], []).unwrap();
        let mask = |k: usize| (0..10).map(|i| i < k).collect::<Vec<_>>();
        let items =
            [FidelityItem::new(&g, mask(2), 0).unwrap(), FidelityItem::new(&g, mask(3), 0).unwrap()];
        assert!((sparsity(&items).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn invalid_inputs() {
        let m = linear_model(1.0);
        let g = path3();
        assert!(FidelityItem::new(&g, vec![true], 0).is_err());
        assert!(fidelity_plus(&m, &[]).is_err());
        assert!(sparsity(&[]).is_err());
        let bad = [FidelityItem::new(&g, vec![true; 3], 5).unwrap()];
        assert!(fidelity_minus(&m, &bad).is_err());
        let empty = Graph::empty(1);
        assert!(sparsity(&[FidelityItem::new(&empty, vec![], 0).unwrap()]).is_err());
    }

    #[test]
    fn k_rounding() {
        assert_eq!(k_for_level(0.8, 25), 5);
        assert_eq!(k_for_level(0.99, 25), 1);
        assert_eq!(k_for_level(0.01, 25), 25);
        assert_eq!(k_for_level(0.5, 5), 3);
    }

    fn two_cycles() -> Vec<Graph> {
        // A triangle hanging off a path, and a square with a tail.
        vec![
            Graph::new(1, vec![vec![1.0]; 6], [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (3, 5)]).unwrap(),
            Graph::new(1, vec![vec![1.0]; 6], [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5)]).unwrap(),
        ]
    }

    #[test]
    fn sweep_shapes_and_full_mask() {
        let m = cycle_detector(10.0);
        let graphs = two_cycles();
        let cfg = ExplainConfig::from(SampleConfig::new(30, 1));
        let levels = [0.9, 0.01, 0.5, 0.3, 0.7];
        let points = sparsity_sweep(&m, &graphs, &cfg, &levels).unwrap();
        assert_eq!(points.len(), 5);
        assert!(points.windows(2).all(|w| w[0].sparsity <= w[1].sparsity));
        assert_eq!(points[0].k_mean, 6.0);
        assert_eq!(points[0].sparsity, 0.0);
        assert_eq!(points[0].fidelity_minus, 0.0);
        for p in &points {
            assert!((-1.0..=1.0).contains(&p.fidelity_plus));
            assert!((-1.0..=1.0).contains(&p.fidelity_minus));
        }
        let csv = points_to_csv(&points);
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.starts_with("sparsity,fidelity_plus,fidelity_minus,k_mean\n"));
        assert!(sparsity_sweep(&m, &graphs, &cfg, &[1.0]).is_err());
    }
}
