//! Node-importance explanations for graph, node and link predictions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{network_value_with, ValueOracle};
use crate::gnn::{ModelSpec, Scale};
use crate::graph::{
    components_by, induced_subgraph, k_hop_neighborhood, CoalitionStructure, Graph, NodeSet,
};
use crate::sampler::{estimate_shapley, SampleConfig, ShapleyEstimate};

/// Scores a whole graph, e.g. `f(G)_y`.
pub trait GraphScorer: Sync {
    fn score(&self, g: &Graph) -> Result<f64>;
}

/// Scores the prediction for one node of a graph.
pub trait NodeScorer: Sync {
    fn score(&self, g: &Graph, target: usize) -> Result<f64>;
}

/// Scores the prediction for a node pair of a graph.
pub trait LinkScorer: Sync {
    fn score(&self, g: &Graph, u: usize, v: usize) -> Result<f64>;
}

impl<F: Fn(&Graph) -> Result<f64> + Sync> GraphScorer for F {
    fn score(&self, g: &Graph) -> Result<f64> {
        self(g)
    }
}

impl<F: Fn(&Graph, usize) -> Result<f64> + Sync> NodeScorer for F {
    fn score(&self, g: &Graph, target: usize) -> Result<f64> {
        self(g, target)
    }
}

impl<F: Fn(&Graph, usize, usize) -> Result<f64> + Sync> LinkScorer for F {
    fn score(&self, g: &Graph, u: usize, v: usize) -> Result<f64> {
        self(g, u, v)
    }
}

/// A model's score for a fixed class on a fixed scale.
#[derive(Debug, Clone, Copy)]
pub struct ModelScorer<'a> {
    pub model: &'a ModelSpec,
    pub class: usize,
    pub scale: Scale,
}

impl GraphScorer for ModelScorer<'_> {
    fn score(&self, g: &Graph) -> Result<f64> {
        self.model.forward(g)?.score(self.class, self.scale)
    }
}

impl NodeScorer for ModelScorer<'_> {
    fn score(&self, g: &Graph, target: usize) -> Result<f64> {
        self.model.forward_node(g, target)?.score(self.class, self.scale)
    }
}

impl LinkScorer for ModelScorer<'_> {
    fn score(&self, g: &Graph, u: usize, v: usize) -> Result<f64> {
        self.model.forward_link(g, u, v)?.score(self.class, self.scale)
    }
}

/// The graph-classification game: every node is a player and the worth of
/// `(S, P)` is the network value of `S`.
pub struct GraphGame<'a, S> {
    graph: &'a Graph,
    scorer: S,
}

impl<'a, S: GraphScorer> GraphGame<'a, S> {
    pub fn new(graph: &'a Graph, scorer: S) -> Self {
        GraphGame { graph, scorer }
    }

    pub fn num_players(&self) -> usize {
        self.graph.num_nodes()
    }
}

impl<S: GraphScorer> ValueOracle for GraphGame<'_, S> {
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
        network_value_with(self.graph, s, p, |sub| self.scorer.score(sub))
    }
}

/// Shared machinery of the node and link games: a local subgraph, a set of
/// pinned anchor nodes that are never players, and everything else as
/// players.
struct AnchoredGame {
    /// The extracted neighborhood.
    sub: Graph,
    /// Original index of every node of `sub`.
    original: Vec<usize>,
    /// Anchor positions in `sub`.
    anchors: Vec<usize>,
    /// Player `k` is node `players[k]` of `sub`.
    players: Vec<usize>,
    /// Position of each `sub` node among the players, if it is one.
    player_of: Vec<Option<usize>>,
}

impl AnchoredGame {
    fn extract(g: &Graph, anchors: &[usize], hops: usize) -> Result<Self> {
        if hops < 1 {
            return Err(Error::InvalidArgument("hops must be at least 1".into()));
        }
        let keep = k_hop_neighborhood(g, anchors, hops)?;
        let induced = induced_subgraph(g, &keep)?;
        let local = |x: usize| induced.original.binary_search(&x).expect("anchor is kept");
        let anchors: Vec<usize> = anchors.iter().map(|&a| local(a)).collect();
        let players: Vec<usize> =
            (0..induced.graph.num_nodes()).filter(|i| !anchors.contains(i)).collect();
        let mut player_of = vec![None; induced.graph.num_nodes()];
        for (k, &i) in players.iter().enumerate() {
            player_of[i] = Some(k);
        }
        Ok(AnchoredGame {
            sub: induced.graph,
            original: induced.original,
            anchors,
            players,
            player_of,
        })
    }

    fn num_players(&self) -> usize {
        self.players.len()
    }

    /// Sums `score(G[T ∪ anchors], anchor positions)` over the components
    /// `T` of `s` that touch an anchor; other components are worth nothing.
    fn value<F>(&self, s: &NodeSet, p: &CoalitionStructure, mut score: F) -> Result<f64>
    where
        F: FnMut(&Graph, &[usize]) -> Result<f64>,
    {
        if p.num_players() != self.num_players() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} players, game has {}",
                p.num_players(),
                self.num_players()
            )));
        }
        s.check_bounds(self.num_players())?;
        let member = p.membership();
        let mut in_s = vec![false; self.num_players()];
        for k in s.iter() {
            in_s[k] = true;
        }
        let components = components_by(s, |k, out| {
            let node = self.players[k];
            out.extend(self.sub.neighbors(node).iter().filter_map(|&j| self.player_of[j]).filter(
                |&l| in_s[l] && member[l] == member[k],
            ));
        });
        let mut total = 0.0;
        for comp in components {
            let touches = comp.iter().any(|k| {
                let node = self.players[k];
                self.anchors.iter().any(|&a| self.sub.has_edge(node, a))
            });
            if !touches {
                continue;
            }
            let nodes: NodeSet =
                comp.iter().map(|k| self.players[k]).chain(self.anchors.iter().copied()).collect();
            let induced = induced_subgraph(&self.sub, &nodes)?;
            let anchor_pos: Vec<usize> = self
                .anchors
                .iter()
                .map(|a| nodes.as_slice().binary_search(a).expect("anchor present"))
                .collect();
            total += score(&induced.graph, &anchor_pos)?;
        }
        Ok(total)
    }
}

/// The node-classification game around one target node. Players are the
/// nodes of the target's `hops`-hop neighborhood other than the target.
pub struct NodeGame<S> {
    inner: AnchoredGame,
    scorer: S,
}

impl<S: NodeScorer> NodeGame<S> {
    pub fn new(g: &Graph, target: usize, hops: usize, scorer: S) -> Result<Self> {
        g.check_node(target)?;
        Ok(NodeGame { inner: AnchoredGame::extract(g, &[target], hops)?, scorer })
    }

    pub fn num_players(&self) -> usize {
        self.inner.num_players()
    }

    /// Original index of every player.
    pub fn player_ids(&self) -> Vec<usize> {
        self.inner.players.iter().map(|&i| self.inner.original[i]).collect()
    }

    /// The extracted neighborhood and the target's position in it.
    pub fn subgraph(&self) -> (&Graph, usize) {
        (&self.inner.sub, self.inner.anchors[0])
    }
}

impl<S: NodeScorer> ValueOracle for NodeGame<S> {
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
        self.inner.value(s, p, |g, anchors| self.scorer.score(g, anchors[0]))
    }
}

/// The link-prediction game around a node pair. Players are the nodes of
/// the union of both `hops`-hop neighborhoods other than the pair.
pub struct LinkGame<S> {
    inner: AnchoredGame,
    scorer: S,
}

impl<S: LinkScorer> LinkGame<S> {
    pub fn new(g: &Graph, pair: (usize, usize), hops: usize, scorer: S) -> Result<Self> {
        g.check_node(pair.0)?;
        g.check_node(pair.1)?;
        if pair.0 == pair.1 {
            return Err(Error::InvalidArgument("link endpoints must differ".into()));
        }
        Ok(LinkGame { inner: AnchoredGame::extract(g, &[pair.0, pair.1], hops)?, scorer })
    }

    pub fn num_players(&self) -> usize {
        self.inner.num_players()
    }

    pub fn player_ids(&self) -> Vec<usize> {
        self.inner.players.iter().map(|&i| self.inner.original[i]).collect()
    }

    /// The extracted neighborhood and both endpoint positions in it.
    pub fn subgraph(&self) -> (&Graph, usize, usize) {
        (&self.inner.sub, self.inner.anchors[0], self.inner.anchors[1])
    }
}

impl<S: LinkScorer> ValueOracle for LinkGame<S> {
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
        self.inner.value(s, p, |g, a| self.scorer.score(g, a[0], a[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Graph,
    Node,
    Link,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExplanationTask {
    Graph,
    Node { target: usize, hops: usize },
    Link { pair: (usize, usize), hops: usize },
}

impl ExplanationTask {
    pub fn kind(&self) -> TaskKind {
        match self {
            ExplanationTask::Graph => TaskKind::Graph,
            ExplanationTask::Node { .. } => TaskKind::Node,
            ExplanationTask::Link { .. } => TaskKind::Link,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExplainConfig {
    pub sampling: SampleConfig,
    pub scale: Scale,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig { sampling: SampleConfig::default(), scale: Scale::Prob }
    }
}

impl From<SampleConfig> for ExplainConfig {
    fn from(sampling: SampleConfig) -> Self {
        ExplainConfig { sampling, scale: Scale::Prob }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub samples: usize,
    pub seed: u64,
    pub scale: Scale,
}

/// Per-node Shapley estimates in original node indices, ascending.
///
/// Pinned nodes (the target of a node task, the pair of a link task) are
/// not players; they are listed with a zero value and always lead a top-k
/// selection.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceReport {
    pub task: TaskKind,
    pub explained_class: usize,
    pub node_ids: Vec<usize>,
    pub shapley: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub pinned: Vec<usize>,
    pub config: ReportConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportRecord {
    task: TaskKind,
    explained_class: usize,
    nodes: Vec<NodeRecord>,
    pinned: Vec<usize>,
    config: ReportConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    id: usize,
    shapley: f64,
    std_error: f64,
}

impl ImportanceReport {
    fn build(
        task: TaskKind,
        explained_class: usize,
        players: Vec<usize>,
        estimate: &ShapleyEstimate,
        pinned: Vec<usize>,
        config: ReportConfig,
    ) -> Self {
        let mut rows: Vec<(usize, f64, f64)> = players
            .into_iter()
            .zip(&estimate.values)
            .zip(&estimate.std_errors)
            .map(|((id, v), se)| (id, *v, *se))
            .chain(pinned.iter().map(|&id| (id, 0.0, 0.0)))
            .collect();
        rows.sort_by_key(|r| r.0);
        let mut pinned = pinned;
        pinned.sort_unstable();
        ImportanceReport {
            task,
            explained_class,
            node_ids: rows.iter().map(|r| r.0).collect(),
            shapley: rows.iter().map(|r| r.1).collect(),
            std_errors: rows.iter().map(|r| r.2).collect(),
            pinned,
            config,
        }
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    /// Shapley value of an original node id.
    pub fn value_of(&self, id: usize) -> Option<f64> {
        self.node_ids.binary_search(&id).ok().map(|k| self.shapley[k])
    }

    /// Positions into `node_ids`, by descending Shapley value, lower id first
    /// on ties.
    fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.shapley[b]
                .partial_cmp(&self.shapley[a])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(self.node_ids[a].cmp(&self.node_ids[b]))
        });
        order
    }

    /// JSON form, nodes sorted by descending Shapley value.
    pub fn to_json(&self) -> String {
        let record = ReportRecord {
            task: self.task,
            explained_class: self.explained_class,
            nodes: self
                .ranking()
                .into_iter()
                .map(|k| NodeRecord {
                    id: self.node_ids[k],
                    shapley: self.shapley[k],
                    std_error: self.std_errors[k],
                })
                .collect(),
            pinned: self.pinned.clone(),
            config: self.config,
        };
        serde_json::to_string_pretty(&record).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: ReportRecord = serde_json::from_str(text)?;
        let mut nodes = record.nodes;
        nodes.sort_by_key(|n| n.id);
        if nodes.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(Error::InvalidArgument("report lists a node twice".into()));
        }
        let mut pinned = record.pinned;
        pinned.sort_unstable();
        if let Some(p) = pinned.iter().find(|p| nodes.binary_search_by_key(p, |n| &n.id).is_err()) {
            return Err(Error::InvalidArgument(format!("pinned node {p} is not in the report")));
        }
        Ok(ImportanceReport {
            task: record.task,
            explained_class: record.explained_class,
            node_ids: nodes.iter().map(|n| n.id).collect(),
            shapley: nodes.iter().map(|n| n.shapley).collect(),
            std_errors: nodes.iter().map(|n| n.std_error).collect(),
            pinned,
            config: record.config,
        })
    }
}

fn report_config(cfg: &ExplainConfig) -> ReportConfig {
    ReportConfig { samples: cfg.sampling.num_samples, seed: cfg.sampling.seed, scale: cfg.scale }
}

/// Explains a graph-level prediction. The explained class is the label the
/// model predicts on the full graph.
pub fn explain_graph(m: &ModelSpec, g: &Graph, cfg: &ExplainConfig) -> Result<ImportanceReport> {
    if g.num_nodes() == 0 {
        return Err(Error::InvalidArgument("cannot explain an empty graph".into()));
    }
    let class = m.forward(g)?.label;
    let scorer = ModelScorer { model: m, class, scale: cfg.scale };
    explain_graph_with(g, scorer, class, cfg)
}

/// [`explain_graph`] with an arbitrary scorer.
pub fn explain_graph_with<S: GraphScorer>(
    g: &Graph,
    scorer: S,
    explained_class: usize,
    cfg: &ExplainConfig,
) -> Result<ImportanceReport> {
    let game = GraphGame::new(g, scorer);
    let est = estimate_shapley(&game, g.num_nodes(), &cfg.sampling)?;
    Ok(ImportanceReport::build(
        TaskKind::Graph,
        explained_class,
        (0..g.num_nodes()).collect(),
        &est,
        Vec::new(),
        report_config(cfg),
    ))
}

/// Explains a node classifier's prediction for `target`. The explained
/// class is the label predicted for the target on the full graph.
pub fn explain_node(
    m: &ModelSpec,
    g: &Graph,
    target: usize,
    hops: usize,
    cfg: &ExplainConfig,
) -> Result<ImportanceReport> {
    g.check_node(target)?;
    let class = m.forward_node(g, target)?.label;
    let scorer = ModelScorer { model: m, class, scale: cfg.scale };
    explain_node_with(g, target, hops, scorer, class, cfg)
}

pub fn explain_node_with<S: NodeScorer>(
    g: &Graph,
    target: usize,
    hops: usize,
    scorer: S,
    explained_class: usize,
    cfg: &ExplainConfig,
) -> Result<ImportanceReport> {
    let game = NodeGame::new(g, target, hops, scorer)?;
    let est = estimate_players(&game, game.num_players(), cfg)?;
    Ok(ImportanceReport::build(
        TaskKind::Node,
        explained_class,
        game.player_ids(),
        &est,
        vec![target],
        report_config(cfg),
    ))
}

/// Explains a link predictor's output for `pair`. The explained class is the
/// label predicted for the pair on the full graph.
pub fn explain_link(
    m: &ModelSpec,
    g: &Graph,
    pair: (usize, usize),
    hops: usize,
    cfg: &ExplainConfig,
) -> Result<ImportanceReport> {
    g.check_node(pair.0)?;
    g.check_node(pair.1)?;
    let class = m.forward_link(g, pair.0, pair.1)?.label;
    let scorer = ModelScorer { model: m, class, scale: cfg.scale };
    explain_link_with(g, pair, hops, scorer, class, cfg)
}

pub fn explain_link_with<S: LinkScorer>(
    g: &Graph,
    pair: (usize, usize),
    hops: usize,
    scorer: S,
    explained_class: usize,
    cfg: &ExplainConfig,
) -> Result<ImportanceReport> {
    let game = LinkGame::new(g, pair, hops, scorer)?;
    let est = estimate_players(&game, game.num_players(), cfg)?;
    Ok(ImportanceReport::build(
        TaskKind::Link,
        explained_class,
        game.player_ids(),
        &est,
        vec![pair.0, pair.1],
        report_config(cfg),
    ))
}

/// Sampling over a possibly empty player set.
fn estimate_players<V: ValueOracle>(v: &V, n: usize, cfg: &ExplainConfig) -> Result<ShapleyEstimate> {
    if n == 0 {
        cfg.sampling.validate()?;
        return Ok(ShapleyEstimate {
            values: Vec::new(),
            std_errors: Vec::new(),
            num_samples: cfg.sampling.num_samples,
            total_oracle_calls: 0,
        });
    }
    estimate_shapley(v, n, &cfg.sampling)
}

/// The `k` most important nodes: pinned nodes first, then by descending
/// Shapley value with lower ids winning ties.
pub fn top_k_mask(r: &ImportanceReport, k: usize) -> Result<NodeSet> {
    if k == 0 || k > r.len() || k < r.pinned.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in [max(1, {}), {}]",
            r.pinned.len(),
            r.len()
        )));
    }
    let mut chosen: Vec<usize> = r.pinned.clone();
    chosen.extend(
        r.ranking()
            .into_iter()
            .map(|pos| r.node_ids[pos])
            .filter(|id| !r.pinned.contains(id))
            .take(k - r.pinned.len()),
    );
    Ok(NodeSet::new(chosen))
}
