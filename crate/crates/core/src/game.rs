//! The partition-function-form game over graph nodes.
//!
//! A value oracle assigns a worth to every embedded coalition `(S, P)`.
//! [`GnnValueOracle`] realizes the network value function: the graph is cut
//! along the blocks of `P`, `S` falls apart into connected components, and
//! the worth of `S` is the sum of the model's class score over those
//! components. [`exact_shapley`] computes the externality-aware Shapley
//! value by enumerating every embedded coalition.

use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gnn::{forward_class_score, ModelSpec, Scale};
use crate::graph::{components_by, induced_subgraph, CoalitionStructure, Graph, NodeSet};
use crate::rng::stream_rng;

/// Default player cap for [`exact_shapley`]; Bell(8) = 4140 partitions.
pub const DEFAULT_EXACT_CAP: usize = 8;

/// Hard upper bound for partition enumeration.
pub const MAX_ENUMERATION_PLAYERS: usize = 10;

/// Worth of embedded coalitions.
///
/// Implementations must be deterministic and total, and `V(∅, P)` must be
/// zero.
pub trait ValueOracle: Sync {
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64>;
}

/// Adapts a closure into a [`ValueOracle`].
pub struct FnOracle<F>(pub F);

impl<F> ValueOracle for FnOracle<F>
where
    F: Fn(&NodeSet, &CoalitionStructure) -> Result<f64> + Sync,
{
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        (self.0)(s, p)
    }
}

/// Value oracle backed by an explicit table, mostly for fixtures.
///
/// Lookups of entries not in the table return 0, or fail in strict mode.
#[derive(Debug, Clone, Default)]
pub struct TableOracle {
    entries: HashMap<(NodeSet, CoalitionStructure), f64>,
    strict: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableEntry {
    s: Vec<usize>,
    p: Vec<Vec<usize>>,
    v: f64,
}

impl TableOracle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn insert(&mut self, s: NodeSet, p: CoalitionStructure, v: f64) {
        self.entries.insert((s, p), v);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of players, inferred from the stored partitions.
    pub fn num_players(&self) -> usize {
        self.entries.keys().map(|(_, p)| p.num_players()).max().unwrap_or(0)
    }

    /// Tabulates `f` on every embedded coalition of `n` players.
    pub fn tabulate<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&NodeSet, &CoalitionStructure) -> f64,
    {
        let mut table = TableOracle::new();
        for p in enumerate_partitions(n)? {
            for s in p.blocks() {
                let v = f(s, &p);
                table.insert(s.clone(), p.clone(), v);
            }
        }
        Ok(table)
    }

    /// A game with independent uniform worths in `[-1, 1]` for every
    /// embedded coalition, so every coalition feels the partition of the
    /// rest.
    pub fn random(n: usize, seed: u64) -> Result<Self> {
        let mut rng = stream_rng(seed, 0);
        Self::tabulate(n, |_, _| 2.0 * rng.gen::<f64>() - 1.0)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: Vec<TableEntry> = serde_json::from_str(text)?;
        let n = raw
            .iter()
            .flat_map(|e| e.p.iter().flatten())
            .map(|&i| i + 1)
            .max()
            .unwrap_or(0);
        let mut table = TableOracle::new();
        for e in raw {
            let p = CoalitionStructure::new(n, e.p.into_iter().map(NodeSet::new).collect())?;
            let s = NodeSet::new(e.s);
            if !s.is_empty() && !p.contains_block(&s) {
                return Err(Error::InvalidPartition(format!("{s} is not a block of {p}")));
            }
            table.insert(s, p, e.v);
        }
        Ok(table)
    }

    /// Entries sorted by `(P, S)` for stable output.
    pub fn to_json(&self) -> String {
        let mut keys: Vec<_> = self.entries.iter().collect();
        keys.sort_by(|a, b| (&a.0 .1.blocks(), &a.0 .0).cmp(&(&b.0 .1.blocks(), &b.0 .0)));
        let raw: Vec<TableEntry> = keys
            .into_iter()
            .map(|((s, p), v)| TableEntry {
                s: s.as_slice().to_vec(),
                p: p.blocks().iter().map(|b| b.as_slice().to_vec()).collect(),
                v: *v,
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("table serializes")
    }
}

impl ValueOracle for TableOracle {
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
        if s.is_empty() {
            return Ok(0.0);
        }
        match self.entries.get(&(s.clone(), p.clone())) {
            Some(v) => Ok(*v),
            None if self.strict => Err(Error::Oracle(format!("no table entry for ({s}, {p})"))),
            None => Ok(0.0),
        }
    }
}

/// Network value of `s` under `p`, with a caller-supplied component score.
///
/// Edges survive only inside a block of `p`; `s` is split into connected
/// components over the surviving edges between its own members, and each
/// component's node-induced subgraph is scored.
pub fn network_value_with<F>(g: &Graph, s: &NodeSet, p: &CoalitionStructure, mut score: F) -> Result<f64>
where
    F: FnMut(&Graph) -> Result<f64>,
{
    if p.num_players() != g.num_nodes() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, graph has {} nodes",
            p.num_players(),
            g.num_nodes()
        )));
    }
    s.check_bounds(g.num_nodes())?;
    let member = p.membership();
    let mut in_s = vec![false; g.num_nodes()];
    for i in s.iter() {
        in_s[i] = true;
    }
    let components = components_by(s, |u, out| {
        out.extend(g.neighbors(u).iter().copied().filter(|&v| in_s[v] && member[v] == member[u]));
    });
    let mut total = 0.0;
    for comp in &components {
        // Members of a component share a block, so the induced subgraph of
        // g equals that of the partition-restricted graph.
        total += score(&induced_subgraph(g, comp)?.graph)?;
    }
    Ok(total)
}

/// Network value `V(S, P)`: the sum of `f(G_R)_y` over the components `R`
/// of `s` in the partition-restricted graph.
pub fn network_value(
    g: &Graph,
    m: &ModelSpec,
    class: usize,
    s: &NodeSet,
    p: &CoalitionStructure,
    scale: Scale,
) -> Result<f64> {
    m.check_class(class)?;
    network_value_with(g, s, p, |sub| forward_class_score(m, sub, class, scale))
}

type CacheKey = (NodeSet, CoalitionStructure);

/// [`network_value`] as a [`ValueOracle`] over the nodes of one graph.
pub struct GnnValueOracle<'a> {
    model: &'a ModelSpec,
    graph: &'a Graph,
    class: usize,
    scale: Scale,
    cache: Option<Mutex<HashMap<CacheKey, f64>>>,
}

impl<'a> GnnValueOracle<'a> {
    pub fn new(model: &'a ModelSpec, graph: &'a Graph, class: usize, scale: Scale) -> Result<Self> {
        model.check_class(class)?;
        if graph.feature_dim() != model.input_dim() {
            return Err(Error::ModelShape(format!(
                "graph has feature dim {}, model expects {}",
                graph.feature_dim(),
                model.input_dim()
            )));
        }
        Ok(GnnValueOracle { model, graph, class, scale, cache: None })
    }

    /// Memoize values by `(S, P)`.
    pub fn with_cache(mut self) -> Self {
        self.cache = Some(Mutex::new(HashMap::new()));
        self
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }
}

impl ValueOracle for GnnValueOracle<'_> {
    fn value(&self, s: &NodeSet, p: &CoalitionStructure) -> Result<f64> {
        let Some(cache) = &self.cache else {
            return network_value(self.graph, self.model, self.class, s, p, self.scale);
        };
        let key = (s.clone(), p.clone());
        if let Some(v) = cache.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = network_value(self.graph, self.model, self.class, s, p, self.scale)?;
        cache.lock().unwrap().insert(key, v);
        Ok(v)
    }
}

/// Moves every member of `s` out of its block into a new block `s`.
/// Emptied blocks disappear.
pub fn transfer(p: &CoalitionStructure, s: &NodeSet) -> Result<CoalitionStructure> {
    s.check_bounds(p.num_players())?;
    let mut blocks: Vec<NodeSet> = p
        .blocks()
        .iter()
        .map(|b| b.iter().filter(|&i| !s.contains(i)).collect::<NodeSet>())
        .filter(|b| !b.is_empty())
        .collect();
    if !s.is_empty() {
        blocks.push(s.clone());
    }
    Ok(CoalitionStructure::from_blocks_unchecked(p.num_players(), blocks))
}

/// Restricted growth strings of length `n` in lexicographic order.
///
/// `a[0] = 0` and `a[i] <= 1 + max(a[..i])`; each string labels one set
/// partition.
#[derive(Debug, Clone)]
pub struct RestrictedGrowthStrings {
    current: Vec<usize>,
    /// `prefix_max[i] = max(current[..=i])`.
    prefix_max: Vec<usize>,
    done: bool,
}

impl RestrictedGrowthStrings {
    pub fn new(n: usize) -> Self {
        RestrictedGrowthStrings { current: vec![0; n], prefix_max: vec![0; n], done: false }
    }
}

impl Iterator for RestrictedGrowthStrings {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let n = self.current.len();
        // Rightmost position that can still grow.
        let pos = (1..n).rev().find(|&i| self.current[i] <= self.prefix_max[i - 1]);
        match pos {
            None => self.done = true,
            Some(i) => {
                self.current[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.current[i]);
                for j in i + 1..n {
                    self.current[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
            }
        }
        Some(out)
    }
}

/// Every set partition of `{0, .., n-1}` exactly once, in restricted growth
/// string order.
pub fn enumerate_partitions(n: usize) -> Result<Vec<CoalitionStructure>> {
    if n > MAX_ENUMERATION_PLAYERS {
        return Err(Error::Capacity { what: "partition enumeration", n, cap: MAX_ENUMERATION_PLAYERS });
    }
    Ok(RestrictedGrowthStrings::new(n).map(|a| CoalitionStructure::from_labels(&a)).collect())
}

fn factorials(n: usize) -> Vec<u128> {
    let mut f = vec![1u128; n + 1];
    for k in 1..=n {
        f[k] = f[k - 1] * k as u128;
    }
    f
}

/// Exact externality-aware Shapley value with the default player cap.
pub fn exact_shapley<V: ValueOracle + ?Sized>(v: &V, n: usize) -> Result<Vec<f64>> {
    exact_shapley_capped(v, n, DEFAULT_EXACT_CAP)
}

/// Exact externality-aware Shapley value:
///
/// ```text
/// phi_i = sum over (S, P) of  prod_{T in P \ S} (|T|-1)! / (n-|S|)!  * beta_i(S) * V(S, P)
/// beta_i(S) =  (|S|-1)! (n-|S|)! / n!      if i in S
///           = -|S|! (n-|S|-1)! / n!        otherwise
/// ```
///
/// Every coefficient is brought to the common denominator `(n!)^2` with an
/// exact integer numerator; the division happens once per player at the end.
pub fn exact_shapley_capped<V: ValueOracle + ?Sized>(v: &V, n: usize, cap: usize) -> Result<Vec<f64>> {
    let cap = cap.min(MAX_ENUMERATION_PLAYERS);
    if n > cap {
        return Err(Error::Capacity { what: "exact Shapley enumeration", n, cap });
    }
    let fact = factorials(n);
    let mut acc = vec![0.0f64; n];
    for p in enumerate_partitions(n)? {
        for (b, s) in p.blocks().iter().enumerate() {
            let worth = v.value(s, &p)?;
            if worth == 0.0 {
                continue;
            }
            let others: u128 = p
                .blocks()
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != b)
                .map(|(_, t)| fact[t.len() - 1])
                .product();
            let k = s.len();
            let inside = (others * fact[k - 1] * fact[n]) as f64;
            let outside = if k < n { (others * fact[k] * fact[n] / (n - k) as u128) as f64 } else { 0.0 };
            for (i, a) in acc.iter_mut().enumerate() {
                if s.contains(i) {
                    *a += inside * worth;
                } else {
                    *a -= outside * worth;
                }
            }
        }
    }
    let denominator = (fact[n] * fact[n]) as f64;
    Ok(acc.into_iter().map(|a| a / denominator).collect())
}
