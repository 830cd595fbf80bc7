//! A small deterministic inference engine for GCN/GIN classifiers.
//!
//! Models are plain data ([`ModelSpec`]) and evaluation is a pure function of
//! the model and the input graph, so a model can be shared across threads
//! and every forward pass is bit-reproducible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Gcn,
    Gin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Identity => x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    Sum,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Softmax,
    Logits,
}

/// Which number of a [`Prediction`] a score refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Prob,
    Logit,
}

impl std::str::FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prob" => Ok(Scale::Prob),
            "logit" => Ok(Scale::Logit),
            other => Err(Error::InvalidArgument(format!("unknown scale `{other}`"))),
        }
    }
}

/// One message-passing layer. `weight` is `in_dim x out_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub weight: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Self-weight `(1 + epsilon)` of a GIN layer; absent for GCN.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub activation: Activation,
}

/// A fully connected layer of the classification head.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseLayer {
    pub weight: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

fn matrix_shape(w: &[Vec<f64>], what: &str) -> Result<(usize, usize)> {
    let rows = w.len();
    let cols = w.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::ModelShape(format!("{what}: empty weight matrix")));
    }
    if w.iter().any(|r| r.len() != cols) {
        return Err(Error::ModelShape(format!("{what}: ragged weight matrix")));
    }
    Ok((rows, cols))
}

/// `x W + b` followed by the activation.
fn affine(x: &[f64], weight: &[Vec<f64>], bias: &[f64], act: Activation) -> Vec<f64> {
    let mut out = bias.to_vec();
    for (xk, row) in x.iter().zip(weight) {
        if *xk == 0.0 {
            continue;
        }
        for (o, w) in out.iter_mut().zip(row) {
            *o += xk * w;
        }
    }
    for o in &mut out {
        *o = act.apply(*o);
    }
    out
}

impl LayerSpec {
    pub fn in_dim(&self) -> usize {
        self.weight.len()
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    fn validate(&self, index: usize) -> Result<()> {
        let what = format!("layer {index}");
        let (_, cols) = matrix_shape(&self.weight, &what)?;
        if self.bias.len() != cols {
            return Err(Error::ModelShape(format!(
                "{what}: bias has length {}, weight has {cols} columns",
                self.bias.len()
            )));
        }
        match (self.kind, self.epsilon) {
            (LayerKind::Gin, None) => {
                Err(Error::ModelShape(format!("{what}: gin layer needs epsilon")))
            }
            (LayerKind::Gcn, Some(_)) => {
                Err(Error::ModelShape(format!("{what}: gcn layer takes no epsilon")))
            }
            _ => Ok(()),
        }
    }

    fn propagate(&self, g: &Graph, h: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let dim = self.in_dim();
        (0..g.num_nodes())
            .map(|i| {
                let mut agg = vec![0.0; dim];
                match self.kind {
                    LayerKind::Gcn => {
                        let di = g.degree(i) as f64 + 1.0;
                        let self_norm = 1.0 / di;
                        for (a, x) in agg.iter_mut().zip(&h[i]) {
                            *a += x * self_norm;
                        }
                        for &j in g.neighbors(i) {
                            let norm = 1.0 / (di * (g.degree(j) as f64 + 1.0)).sqrt();
                            for (a, x) in agg.iter_mut().zip(&h[j]) {
                                *a += x * norm;
                            }
                        }
                    }
                    LayerKind::Gin => {
                        let self_weight = 1.0 + self.epsilon.unwrap_or(0.0);
                        for (a, x) in agg.iter_mut().zip(&h[i]) {
                            *a += x * self_weight;
                        }
                        for &j in g.neighbors(i) {
                            for (a, x) in agg.iter_mut().zip(&h[j]) {
                                *a += x;
                            }
                        }
                    }
                }
                affine(&agg, &self.weight, &self.bias, self.activation)
            })
            .collect()
    }
}

impl DenseLayer {
    pub fn in_dim(&self) -> usize {
        self.weight.len()
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }
}

/// Model output for one input.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub logits: Vec<f64>,
    /// Softmax of `logits`.
    pub probabilities: Vec<f64>,
    /// Argmax of `logits`, lowest index on ties.
    pub label: usize,
}

impl Prediction {
    fn from_logits(logits: Vec<f64>) -> Self {
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let probabilities = exps.iter().map(|e| e / total).collect();
        let mut label = 0;
        for (c, &z) in logits.iter().enumerate() {
            if z > logits[label] {
                label = c;
            }
        }
        Prediction { logits, probabilities, label }
    }

    pub fn score(&self, class: usize, scale: Scale) -> Result<f64> {
        let v = match scale {
            Scale::Prob => &self.probabilities,
            Scale::Logit => &self.logits,
        };
        v.get(class).copied().ok_or(Error::ClassOutOfRange { class, num_classes: v.len() })
    }
}

/// A GCN/GIN classifier: message-passing layers, a pooling readout and an
/// MLP head.
///
/// `output` records what the model natively emits. Probabilities are always
/// available as the softmax of the logits; `output` selects the default
/// score scale ([`ModelSpec::default_scale`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRecord", into = "ModelRecord")]
pub struct ModelSpec {
    layers: Vec<LayerSpec>,
    readout: Readout,
    head: Vec<DenseLayer>,
    num_classes: usize,
    output: OutputKind,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    layers: Vec<LayerSpec>,
    readout: Readout,
    head: Vec<DenseLayer>,
    num_classes: usize,
    output: OutputKind,
}

impl TryFrom<ModelRecord> for ModelSpec {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        ModelSpec::new(r.layers, r.readout, r.head, r.num_classes, r.output)
    }
}

impl From<ModelSpec> for ModelRecord {
    fn from(m: ModelSpec) -> Self {
        ModelRecord {
            layers: m.layers,
            readout: m.readout,
            head: m.head,
            num_classes: m.num_classes,
            output: m.output,
        }
    }
}

impl ModelSpec {
    pub fn new(
        layers: Vec<LayerSpec>,
        readout: Readout,
        head: Vec<DenseLayer>,
        num_classes: usize,
        output: OutputKind,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::ModelShape("model needs at least one layer".into()));
        }
        if num_classes < 2 {
            return Err(Error::ModelShape(format!("num_classes must be >= 2, got {num_classes}")));
        }
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i)?;
            if i > 0 && layer.in_dim() != layers[i - 1].out_dim() {
                return Err(Error::ModelShape(format!(
                    "layer {i} expects input dim {}, previous layer outputs {}",
                    layer.in_dim(),
                    layers[i - 1].out_dim()
                )));
            }
        }
        let mut dim = layers[layers.len() - 1].out_dim();
        for (i, dense) in head.iter().enumerate() {
            let what = format!("head layer {i}");
            let (rows, cols) = matrix_shape(&dense.weight, &what)?;
            if rows != dim {
                return Err(Error::ModelShape(format!(
                    "{what} expects input dim {rows}, previous layer outputs {dim}"
                )));
            }
            if dense.bias.len() != cols {
                return Err(Error::ModelShape(format!("{what}: bias length mismatch")));
            }
            dim = cols;
        }
        if dim != num_classes {
            return Err(Error::ModelShape(format!(
                "head outputs {dim} values, model declares {num_classes} classes"
            )));
        }
        Ok(ModelSpec { layers, readout, head, num_classes, output })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn head(&self) -> &[DenseLayer] {
        &self.head
    }

    pub fn readout(&self) -> Readout {
        self.readout
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn output(&self) -> OutputKind {
        self.output
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn embedding_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn default_scale(&self) -> Scale {
        match self.output {
            OutputKind::Softmax => Scale::Prob,
            OutputKind::Logits => Scale::Logit,
        }
    }

    /// Final-layer embedding of every node.
    pub fn node_embeddings(&self, g: &Graph) -> Result<Vec<Vec<f64>>> {
        if g.feature_dim() != self.input_dim() {
            return Err(Error::ModelShape(format!(
                "graph has feature dim {}, model expects {}",
                g.feature_dim(),
                self.input_dim()
            )));
        }
        let mut h: Vec<Vec<f64>> = (0..g.num_nodes()).map(|i| g.features_of(i).to_vec()).collect();
        for layer in &self.layers {
            h = layer.propagate(g, &h);
        }
        Ok(h)
    }

    fn apply_head(&self, mut x: Vec<f64>) -> Prediction {
        for dense in &self.head {
            x = affine(&x, &dense.weight, &dense.bias, dense.activation);
        }
        Prediction::from_logits(x)
    }

    /// Graph-level prediction. A graph without nodes pools to the zero vector.
    pub fn forward(&self, g: &Graph) -> Result<Prediction> {
        let h = self.node_embeddings(g)?;
        let mut pooled = vec![0.0; self.embedding_dim()];
        for row in &h {
            for (p, x) in pooled.iter_mut().zip(row) {
                *p += x;
            }
        }
        if self.readout == Readout::Mean && !h.is_empty() {
            let n = h.len() as f64;
            for p in &mut pooled {
                *p /= n;
            }
        }
        Ok(self.apply_head(pooled))
    }

    /// Node-level prediction: the head applied to `target`'s embedding, no
    /// readout.
    pub fn forward_node(&self, g: &Graph, target: usize) -> Result<Prediction> {
        g.check_node(target)?;
        let mut h = self.node_embeddings(g)?;
        Ok(self.apply_head(h.swap_remove(target)))
    }

    /// Link-level prediction: the head applied to the elementwise product of
    /// both endpoint embeddings.
    pub fn forward_link(&self, g: &Graph, u: usize, v: usize) -> Result<Prediction> {
        g.check_node(u)?;
        g.check_node(v)?;
        let h = self.node_embeddings(g)?;
        let x = h[u].iter().zip(&h[v]).map(|(a, b)| a * b).collect();
        Ok(self.apply_head(x))
    }

    pub fn check_class(&self, class: usize) -> Result<()> {
        if class < self.num_classes {
            Ok(())
        } else {
            Err(Error::ClassOutOfRange { class, num_classes: self.num_classes })
        }
    }
}

/// `f(G)_y` on the requested scale.
pub fn forward_class_score(m: &ModelSpec, g: &Graph, class: usize, scale: Scale) -> Result<f64> {
    m.check_class(class)?;
    m.forward(g)?.score(class, scale)
}

/// Shape description used to initialize a model from a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchSpec {
    pub kind: LayerKind,
    /// Input feature dim followed by the output dim of every layer.
    pub dims: Vec<usize>,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "default_readout")]
    pub readout: Readout,
    /// Hidden widths of the head MLP; empty means a single linear layer.
    #[serde(default)]
    pub head_hidden: Vec<usize>,
    pub num_classes: usize,
    #[serde(default = "default_output")]
    pub output: OutputKind,
}

fn default_readout() -> Readout {
    Readout::Sum
}

fn default_output() -> OutputKind {
    OutputKind::Softmax
}

impl ArchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.len() < 2 {
            return Err(Error::ModelShape("dims needs an input dim and at least one layer".into()));
        }
        if self.dims.iter().chain(&self.head_hidden).any(|&d| d == 0) {
            return Err(Error::ModelShape("all dims must be positive".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::ModelShape("num_classes must be >= 2".into()));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::ModelShape("epsilon must be finite".into()));
        }
        Ok(())
    }
}

/// Deterministic model initialization.
///
/// Every weight and bias of a layer with fan-in `d` is drawn uniformly from
/// `[-1/sqrt(d), 1/sqrt(d)]`, layer by layer, weights row-major before the
/// bias, from a ChaCha20 stream keyed by `seed`. Message-passing and hidden
/// head layers use ReLU; the last head layer is linear.
pub fn init_model(arch: &ArchSpec, seed: u64) -> Result<ModelSpec> {
    arch.validate()?;
    let mut rng = stream_rng(seed, 0);
    let mut draw = |fan_in: usize, fan_out: usize| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let mut sample = || (2.0 * rng.gen::<f64>() - 1.0) * bound;
        let weight: Vec<Vec<f64>> =
            (0..fan_in).map(|_| (0..fan_out).map(|_| sample()).collect()).collect();
        let bias: Vec<f64> = (0..fan_out).map(|_| sample()).collect();
        (weight, bias)
    };
    let layers = arch
        .dims
        .windows(2)
        .map(|w| {
            let (weight, bias) = draw(w[0], w[1]);
            LayerSpec {
                kind: arch.kind,
                weight,
                bias,
                epsilon: (arch.kind == LayerKind::Gin).then_some(arch.epsilon),
                activation: Activation::Relu,
            }
        })
        .collect();
    let mut widths = vec![*arch.dims.last().unwrap()];
    widths.extend(&arch.head_hidden);
    widths.push(arch.num_classes);
    let last = widths.len() - 2;
    let head = widths
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let (weight, bias) = draw(w[0], w[1]);
            let activation = if i == last { Activation::Identity } else { Activation::Relu };
            DenseLayer { weight, bias, activation }
        })
        .collect();
    ModelSpec::new(layers, arch.readout, head, arch.num_classes, arch.output)
}

/// A hand-built two-class model whose class-1 probability fires on graphs
/// that contain a cycle.
///
/// With constant unit features one linear GIN layer (`epsilon = 0`) maps
/// node `i` to `(1 + deg_i) / 2 - 3/2`; the sum readout is then
/// `|E| - |V|`, i.e. the cyclomatic number minus one for a connected
/// graph. The head turns that into the logit `sharpness * (|E| - |V| + 1/2)`
/// for class 1 against a constant 0 for class 0. Trees score
/// `sigmoid(-sharpness / 2)`, graphs with one independent cycle
/// `sigmoid(sharpness / 2)`.
pub fn cycle_detector(sharpness: f64) -> ModelSpec {
    let layers = vec![LayerSpec {
        kind: LayerKind::Gin,
        weight: vec![vec![0.5]],
        bias: vec![-1.5],
        epsilon: Some(0.0),
        activation: Activation::Identity,
    }];
    let head = vec![DenseLayer {
        weight: vec![vec![0.0, sharpness]],
        bias: vec![0.0, 0.5 * sharpness],
        activation: Activation::Identity,
    }];
    ModelSpec::new(layers, Readout::Sum, head, 2, OutputKind::Softmax)
        .expect("cycle detector shape is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gin_identity(weight: Vec<Vec<f64>>, bias: Vec<f64>) -> LayerSpec {
        LayerSpec {
            kind: LayerKind::Gin,
            weight,
            bias,
            epsilon: Some(0.0),
            activation: Activation::Identity,
        }
    }

    fn identity_head(dim: usize) -> DenseLayer {
        let weight = (0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        DenseLayer { weight, bias: vec![0.0; dim], activation: Activation::Identity }
    }

    #[test]
    fn single_node_gin_collapses_to_affine_map() {
        let w = vec![vec![1.0, -2.0], vec![0.5, 3.0]];
        let b = vec![0.25, -1.0];
        let m = ModelSpec::new(
            vec![gin_identity(w, b)],
            Readout::Sum,
            vec![identity_head(2)],
            2,
            OutputKind::Logits,
        )
        .unwrap();
        let g = Graph::new(2, vec![vec![2.0, 4.0]], []).unwrap();
        let p = m.forward(&g).unwrap();
        assert_eq!(p.logits, vec![2.0 + 2.0 + 0.25, -4.0 + 12.0 - 1.0]);
        assert_eq!(p.label, 1);
    }

    #[test]
    fn empty_graph_with_zero_biases_is_uniform() {
        let mut arch_model = init_model(
            &ArchSpec {
                kind: LayerKind::Gcn,
                dims: vec![3, 4],
                epsilon: 0.0,
                readout: Readout::Mean,
                head_hidden: vec![5],
                num_classes: 3,
                output: OutputKind::Softmax,
            },
            11,
        )
        .unwrap();
        for l in &mut arch_model.layers {
            l.bias.fill(0.0);
        }
        for d in &mut arch_model.head {
            d.bias.fill(0.0);
        }
        let p = arch_model.forward(&Graph::empty(3)).unwrap();
        for q in &p.probabilities {
            assert!((q - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(p.label, 0);
    }

    #[test]
    fn two_disconnected_copies_double_the_logits() {
        let m = ModelSpec::new(
            vec![gin_identity(vec![vec![1.5, -0.5]], vec![0.0, 0.0])],
            Readout::Sum,
            vec![identity_head(2)],
            2,
            OutputKind::Logits,
        )
        .unwrap();
        let one = Graph::new(1, vec![vec![0.7]], []).unwrap();
        let two = Graph::new(1, vec![vec![0.7], vec![0.7]], []).unwrap();
        let a = m.forward(&one).unwrap().logits;
        let b = m.forward(&two).unwrap().logits;
        assert_eq!(b, a.iter().map(|x| 2.0 * x).collect::<Vec<_>>());
    }

    #[test]
    fn gcn_normalization_on_an_edge() {
        // Two connected nodes, both degree 1: every coefficient is 1/2.
        let m = ModelSpec::new(
            vec![LayerSpec {
                kind: LayerKind::Gcn,
                weight: vec![vec![1.0]],
                bias: vec![0.0],
                epsilon: None,
                activation: Activation::Identity,
            }],
            Readout::Sum,
            vec![DenseLayer {
                weight: vec![vec![1.0, 0.0]],
                bias: vec![0.0, 0.0],
                activation: Activation::Identity,
            }],
            2,
            OutputKind::Logits,
        )
        .unwrap();
        let g = Graph::new(1, vec![vec![2.0], vec![6.0]], [(0, 1)]).unwrap();
        let h = m.node_embeddings(&g).unwrap();
        assert_eq!(h, vec![vec![4.0], vec![4.0]]);
    }

    #[test]
    fn shape_errors() {
        let arch = ArchSpec {
            kind: LayerKind::Gin,
            dims: vec![3, 4],
            epsilon: 0.1,
            readout: Readout::Sum,
            head_hidden: vec![],
            num_classes: 2,
            output: OutputKind::Softmax,
        };
        let m = init_model(&arch, 1).unwrap();
        let g = Graph::new(2, vec![vec![1.0, 2.0]], []).unwrap();
        assert!(matches!(m.forward(&g), Err(Error::ModelShape(_))));
        let g = Graph::new(3, vec![vec![1.0, 2.0, 3.0]], []).unwrap();
        assert!(matches!(
            forward_class_score(&m, &g, 2, Scale::Prob),
            Err(Error::ClassOutOfRange { class: 2, num_classes: 2 })
        ));

        let mut bad = m.clone();
        bad.layers[0].epsilon = None;
        assert!(ModelSpec::new(bad.layers, bad.readout, bad.head, 2, bad.output).is_err());
        assert!(init_model(&ArchSpec { dims: vec![3], ..arch.clone() }, 1).is_err());
        assert!(init_model(&ArchSpec { num_classes: 1, ..arch }, 1).is_err());
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let arch = ArchSpec {
            kind: LayerKind::Gin,
            dims: vec![10, 16, 16, 8],
            epsilon: 0.0,
            readout: Readout::Sum,
            head_hidden: vec![8],
            num_classes: 2,
            output: OutputKind::Softmax,
        };
        let a = init_model(&arch, 5).unwrap();
        let b = init_model(&arch, 5).unwrap();
        let c = init_model(&arch, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let shapes: Vec<_> = a.layers().iter().map(|l| (l.in_dim(), l.out_dim())).collect();
        assert_eq!(shapes, vec![(10, 16), (16, 16), (16, 8)]);
        for l in a.layers() {
            let bound = 1.0 / (l.in_dim() as f64).sqrt();
            assert!(l.weight.iter().flatten().chain(&l.bias).all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let arch = ArchSpec {
            kind: LayerKind::Gcn,
            dims: vec![4, 6, 6],
            epsilon: 0.0,
            readout: Readout::Mean,
            head_hidden: vec![3],
            num_classes: 3,
            output: OutputKind::Softmax,
        };
        let m = init_model(&arch, 99).unwrap();
        let back = ModelSpec::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert!(ModelSpec::from_json(r#"{"layers":[],"readout":"sum","head":[],"num_classes":2,"output":"softmax"}"#).is_err());
    }

    #[test]
    fn cycle_detector_separates_trees_from_cycles() {
        let m = cycle_detector(10.0);
        let ones = |n: usize| vec![vec![1.0]; n];
        let path = Graph::new(1, ones(4), [(0, 1), (1, 2), (2, 3)]).unwrap();
        let cycle = Graph::new(1, ones(4), [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let tree_p = forward_class_score(&m, &path, 1, Scale::Prob).unwrap();
        let cyc_p = forward_class_score(&m, &cycle, 1, Scale::Prob).unwrap();
        let sigmoid = |x: f64| 1.0 / (1.0 + (-x).exp());
        assert!((tree_p - sigmoid(-5.0)).abs() < 1e-12);
        assert!((cyc_p - sigmoid(5.0)).abs() < 1e-12);
    }

    fn arch_strategy() -> impl Strategy<Value = (ArchSpec, u64)> {
        (
            prop_oneof![Just(LayerKind::Gcn), Just(LayerKind::Gin)],
            prop_oneof![Just(Readout::Sum), Just(Readout::Mean)],
            any::<u64>(),
        )
            .prop_map(|(kind, readout, seed)| {
                (
                    ArchSpec {
                        kind,
                        dims: vec![3, 5, 4],
                        epsilon: 0.2,
                        readout,
                        head_hidden: vec![4],
                        num_classes: 3,
                        output: OutputKind::Softmax,
                    },
                    seed,
                )
            })
    }

    proptest! {
        #[test]
        fn permutation_equivariance(
            (arch, seed) in arch_strategy(),
            feats in proptest::collection::vec(-2.0f64..2.0, 18),
            edge_bits in proptest::collection::vec(any::<bool>(), 15),
            perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(),
        ) {
            let m = init_model(&arch, seed).unwrap();
            let pairs: Vec<(usize, usize)> = (0..6).flat_map(|u| (u + 1..6).map(move |v| (u, v))).collect();
            let edges: Vec<_> = pairs.iter().zip(&edge_bits).filter(|(_, b)| **b).map(|(e, _)| *e).collect();
            let g = Graph::from_flat(6, 3, feats.clone(), edges.clone()).unwrap();
            // Node i of g becomes node perm[i] of h.
            let mut pf = vec![0.0; 18];
            for i in 0..6 {
                pf[perm[i] * 3..perm[i] * 3 + 3].copy_from_slice(&feats[i * 3..i * 3 + 3]);
            }
            let h = Graph::from_flat(6, 3, pf, edges.iter().map(|&(u, v)| (perm[u], perm[v]))).unwrap();
            let a = m.forward(&g).unwrap();
            let b = m.forward(&h).unwrap();
            for (x, y) in a.logits.iter().zip(&b.logits) {
                prop_assert!((x - y).abs() < 1e-9);
            }
            let total: f64 = a.probabilities.iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(a.probabilities.iter().all(|p| *p >= 0.0));
            prop_assert_eq!(m.forward(&g).unwrap(), a);
        }
    }
}
