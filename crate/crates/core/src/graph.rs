//! Undirected attributed graphs, node sets, coalition structures and the
//! structural operations the game is built on: node-induced subgraphs,
//! partition-restricted graphs and connected components.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An undirected graph with a dense node-feature matrix.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Self-loops are
/// never stored; the inference engine adds them where a layer needs them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct Graph {
    num_nodes: usize,
    feature_dim: usize,
    features: Vec<f64>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    label: Option<usize>,
    name: Option<String>,
}

impl Graph {
    /// Builds a graph from feature rows and an edge list.
    ///
    /// Edge orientation is normalized. Self-loops, duplicate edges, ragged
    /// feature rows and out-of-range endpoints are rejected.
    pub fn new<I>(feature_dim: usize, features: Vec<Vec<f64>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let num_nodes = features.len();
        let mut flat = Vec::with_capacity(num_nodes * feature_dim);
        for (i, row) in features.iter().enumerate() {
            if row.len() != feature_dim {
                return Err(Error::InvalidGraph(format!(
                    "feature row {i} has length {}, expected {feature_dim}",
                    row.len()
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(num_nodes, feature_dim, flat, edges)
    }

    /// Same as [`Graph::new`] with a row-major feature buffer.
    pub fn from_flat<I>(
        num_nodes: usize,
        feature_dim: usize,
        features: Vec<f64>,
        edges: I,
    ) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if features.len() != num_nodes * feature_dim {
            return Err(Error::InvalidGraph(format!(
                "feature buffer has {} entries, expected {num_nodes} x {feature_dim}",
                features.len()
            )));
        }
        let mut list = Vec::new();
        for (a, b) in edges {
            for x in [a, b] {
                if x >= num_nodes {
                    return Err(Error::InvalidNode { index: x, num_nodes });
                }
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            list.push((a.min(b), a.max(b)));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "duplicate edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted_edges(num_nodes, feature_dim, features, list))
    }

    /// Internal constructor for edge lists already known to be valid.
    fn from_sorted_edges(
        num_nodes: usize,
        feature_dim: usize,
        features: Vec<f64>,
        edges: Vec<(usize, usize)>,
    ) -> Self {
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        Graph {
            num_nodes,
            feature_dim,
            features,
            edges,
            adjacency,
            label: None,
            name: None,
        }
    }

    /// A graph with no nodes.
    pub fn empty(feature_dim: usize) -> Self {
        Self::from_sorted_edges(0, feature_dim, Vec::new(), Vec::new())
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Feature row of node `i`.
    pub fn features_of(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    /// Row-major feature buffer.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn with_label(mut self, label: Option<usize>) -> Self {
        self.label = label;
        self
    }

    pub fn with_name(mut self, name: Option<String>) -> Self {
        self.name = name;
        self
    }

    /// Copy of this graph with the rows of unmasked nodes set to zero.
    /// Structure is untouched.
    pub fn with_feature_mask(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.num_nodes {
            return Err(Error::InvalidArgument(format!(
                "mask has length {}, graph has {} nodes",
                mask.len(),
                self.num_nodes
            )));
        }
        let mut out = self.clone();
        for (i, &keep) in mask.iter().enumerate() {
            if !keep {
                out.features[i * self.feature_dim..(i + 1) * self.feature_dim].fill(0.0);
            }
        }
        Ok(out)
    }

    /// Copy of this graph keeping only the edges accepted by `keep`.
    pub fn filter_edges<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(usize, usize) -> bool,
    {
        let edges = self.edges.iter().copied().filter(|&(u, v)| keep(u, v)).collect();
        Self::from_sorted_edges(self.num_nodes, self.feature_dim, self.features.clone(), edges)
            .with_label(self.label)
            .with_name(self.name.clone())
    }

    pub fn check_node(&self, i: usize) -> Result<()> {
        if i < self.num_nodes {
            Ok(())
        } else {
            Err(Error::InvalidNode { index: i, num_nodes: self.num_nodes })
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    num_nodes: usize,
    feature_dim: usize,
    features: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl TryFrom<GraphRecord> for Graph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        if r.features.len() != r.num_nodes {
            return Err(Error::InvalidGraph(format!(
                "num_nodes is {} but features has {} rows",
                r.num_nodes,
                r.features.len()
            )));
        }
        if let Some([u, v]) = r.edges.iter().find(|[u, v]| u >= v) {
            return Err(Error::InvalidGraph(format!("edge [{u}, {v}] must satisfy u < v")));
        }
        let g = Graph::new(r.feature_dim, r.features, r.edges.iter().map(|&[u, v]| (u, v)))?;
        Ok(g.with_label(r.label).with_name(r.name))
    }
}

impl From<Graph> for GraphRecord {
    fn from(g: Graph) -> Self {
        let features = (0..g.num_nodes).map(|i| g.features_of(i).to_vec()).collect();
        GraphRecord {
            num_nodes: g.num_nodes,
            feature_dim: g.feature_dim,
            features,
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
            label: g.label,
            name: g.name,
        }
    }
}

/// A sorted, duplicate-free set of node indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        NodeSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn first(&self) -> Option<usize> {
        self.0.first().copied()
    }

    pub fn insert(&mut self, i: usize) {
        if let Err(pos) = self.0.binary_search(&i) {
            self.0.insert(pos, i);
        }
    }

    /// Fails if any member is `>= n`.
    pub fn check_bounds(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n => Err(Error::InvalidNode { index: last, num_nodes: n }),
            _ => Ok(()),
        }
    }
}

impl From<Vec<usize>> for NodeSet {
    fn from(v: Vec<usize>) -> Self {
        NodeSet::new(v)
    }
}

impl From<NodeSet> for Vec<usize> {
    fn from(s: NodeSet) -> Self {
        s.0
    }
}

impl FromIterator<usize> for NodeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        NodeSet::new(iter)
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// A partition of `{0, .., n-1}` into non-empty blocks.
///
/// Blocks are kept in canonical order (ascending smallest member), so two
/// structures describing the same partition compare equal and hash alike.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct CoalitionStructure {
    num_players: usize,
    blocks: Vec<NodeSet>,
}

impl CoalitionStructure {
    pub fn new(num_players: usize, blocks: Vec<NodeSet>) -> Result<Self> {
        let mut seen = vec![false; num_players];
        let mut covered = 0;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            b.check_bounds(num_players)
                .map_err(|e| Error::InvalidPartition(e.to_string()))?;
            for i in b.iter() {
                if seen[i] {
                    return Err(Error::InvalidPartition(format!("player {i} appears twice")));
                }
                seen[i] = true;
                covered += 1;
            }
        }
        if covered != num_players {
            let missing = seen.iter().position(|s| !s).unwrap_or(0);
            return Err(Error::InvalidPartition(format!("player {missing} is in no block")));
        }
        Ok(Self::from_blocks_unchecked(num_players, blocks))
    }

    pub(crate) fn from_blocks_unchecked(num_players: usize, mut blocks: Vec<NodeSet>) -> Self {
        blocks.sort_unstable_by_key(|b| b.first());
        CoalitionStructure { num_players, blocks }
    }

    /// Builds a partition from a block label per player (e.g. a restricted
    /// growth string).
    pub fn from_labels(labels: &[usize]) -> Self {
        let k = labels.iter().map(|&l| l + 1).max().unwrap_or(0);
        let mut blocks = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            blocks[l].push(i);
        }
        let blocks = blocks.into_iter().filter(|b| !b.is_empty()).map(NodeSet).collect();
        Self::from_blocks_unchecked(labels.len(), blocks)
    }

    /// The single-block partition `{N}`.
    pub fn grand(n: usize) -> Self {
        let blocks = if n == 0 { Vec::new() } else { vec![NodeSet::full(n)] };
        CoalitionStructure { num_players: n, blocks }
    }

    pub fn singletons(n: usize) -> Self {
        CoalitionStructure { num_players: n, blocks: (0..n).map(|i| NodeSet(vec![i])).collect() }
    }

    pub fn num_players(&self) -> usize {
        self.num_players
    }

    pub fn blocks(&self) -> &[NodeSet] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of every player.
    pub fn membership(&self) -> Vec<usize> {
        let mut m = vec![0; self.num_players];
        for (b, block) in self.blocks.iter().enumerate() {
            for i in block.iter() {
                m[i] = b;
            }
        }
        m
    }

    pub fn block_of(&self, i: usize) -> Option<&NodeSet> {
        self.blocks.iter().find(|b| b.contains(i))
    }

    pub fn contains_block(&self, s: &NodeSet) -> bool {
        self.blocks.iter().any(|b| b == s)
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, b) in self.blocks.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}}")
    }
}

/// A node-induced subgraph together with the original index of each node.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSubgraph {
    pub graph: Graph,
    pub original: Vec<usize>,
}

/// Removes every node outside `s` and all edges touching them. Nodes are
/// renumbered densely in ascending original order.
pub fn induced_subgraph(g: &Graph, s: &NodeSet) -> Result<InducedSubgraph> {
    s.check_bounds(g.num_nodes())?;
    let mut local = vec![usize::MAX; g.num_nodes()];
    for (k, i) in s.iter().enumerate() {
        local[i] = k;
    }
    let d = g.feature_dim();
    let mut features = Vec::with_capacity(s.len() * d);
    for i in s.iter() {
        features.extend_from_slice(g.features_of(i));
    }
    // Originals are ascending and the mapping is monotone, so the filtered
    // edge list stays sorted.
    let edges = g
        .edges()
        .iter()
        .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
        .map(|&(u, v)| (local[u], local[v]))
        .collect();
    Ok(InducedSubgraph {
        graph: Graph::from_sorted_edges(s.len(), d, features, edges),
        original: s.as_slice().to_vec(),
    })
}

/// Keeps exactly the edges whose endpoints share a block of `p`.
pub fn partition_restricted_graph(g: &Graph, p: &CoalitionStructure) -> Result<Graph> {
    if p.num_players() != g.num_nodes() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, graph has {} nodes",
            p.num_players(),
            g.num_nodes()
        )));
    }
    let member = p.membership();
    Ok(g.filter_edges(|u, v| member[u] == member[v]))
}

/// Connected components of the subgraph induced by `within`, ordered by
/// smallest member.
pub fn connected_components(g: &Graph, within: &NodeSet) -> Result<Vec<NodeSet>> {
    within.check_bounds(g.num_nodes())?;
    let mut inside = vec![false; g.num_nodes()];
    for i in within.iter() {
        inside[i] = true;
    }
    Ok(components_by(within, |u, out| {
        out.extend(g.neighbors(u).iter().copied().filter(|&v| inside[v]));
    }))
}

/// Breadth-first component search over `starts`, with neighbor expansion
/// supplied by the caller. `expand` must only yield nodes of `starts`.
pub(crate) fn components_by<F>(starts: &NodeSet, mut expand: F) -> Vec<NodeSet>
where
    F: FnMut(usize, &mut Vec<usize>),
{
    let mut visited = std::collections::BTreeSet::new();
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    let mut buf = Vec::new();
    for start in starts.iter() {
        if !visited.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            buf.clear();
            expand(u, &mut buf);
            for &v in &buf {
                if visited.insert(v) {
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        components.push(NodeSet::new(comp));
    }
    components
}

/// Nodes within `hops` edges of any node in `centers`.
pub fn k_hop_neighborhood(g: &Graph, centers: &[usize], hops: usize) -> Result<NodeSet> {
    let mut dist = vec![usize::MAX; g.num_nodes()];
    let mut queue = VecDeque::new();
    for &c in centers {
        g.check_node(c)?;
        if dist[c] != 0 {
            dist[c] = 0;
            queue.push_back(c);
        }
    }
    while let Some(u) = queue.pop_front() {
        if dist[u] == hops {
            continue;
        }
        for &v in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    Ok((0..g.num_nodes()).filter(|&i| dist[i] != usize::MAX).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit_features(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| vec![i as f64]).collect()
    }

    fn path3() -> Graph {
        Graph::new(1, unit_features(3), [(0, 1), (1, 2)]).unwrap()
    }

    fn triangle() -> Graph {
        Graph::new(1, unit_features(3), [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert!(matches!(
            Graph::new(1, unit_features(2), [(0, 2)]),
            Err(Error::InvalidNode { index: 2, .. })
        ));
        assert!(Graph::new(1, unit_features(2), [(1, 1)]).is_err());
        assert!(Graph::new(1, unit_features(2), [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, unit_features(2), []).is_err());
    }

    #[test]
    fn induced_full_set_is_identity() {
        let g = triangle();
        let sub = induced_subgraph(&g, &NodeSet::full(3)).unwrap();
        assert_eq!(sub.graph, g);
        assert_eq!(sub.original, vec![0, 1, 2]);
    }

    #[test]
    fn induced_pair_of_triangle() {
        let sub = induced_subgraph(&triangle(), &NodeSet::new([0, 1])).unwrap();
        assert_eq!(sub.graph.num_nodes(), 2);
        assert_eq!(sub.graph.edges(), &[(0, 1)]);
        assert_eq!(sub.graph.features_of(1), &[1.0]);
    }

    #[test]
    fn induced_empty_set() {
        let sub = induced_subgraph(&triangle(), &NodeSet::empty()).unwrap();
        assert_eq!(sub.graph.num_nodes(), 0);
        assert_eq!(sub.graph.num_edges(), 0);
    }

    #[test]
    fn induced_reindexes_and_maps_back() {
        let sub = induced_subgraph(&path3(), &NodeSet::new([1, 2])).unwrap();
        assert_eq!(sub.graph.edges(), &[(0, 1)]);
        assert_eq!(sub.original, vec![1, 2]);
        assert_eq!(sub.graph.features_of(0), &[1.0]);
    }

    #[test]
    fn induced_out_of_range() {
        assert!(matches!(
            induced_subgraph(&path3(), &NodeSet::new([0, 5])),
            Err(Error::InvalidNode { index: 5, .. })
        ));
    }

    #[test]
    fn restricted_graph_cases() {
        let g = path3();
        assert_eq!(partition_restricted_graph(&g, &CoalitionStructure::grand(3)).unwrap(), g);
        assert_eq!(
            partition_restricted_graph(&g, &CoalitionStructure::singletons(3)).unwrap().num_edges(),
            0
        );
        let p = CoalitionStructure::new(3, vec![NodeSet::new([0, 1]), NodeSet::new([2])]).unwrap();
        assert_eq!(partition_restricted_graph(&g, &p).unwrap().edges(), &[(0, 1)]);
        assert!(partition_restricted_graph(&g, &CoalitionStructure::grand(4)).is_err());
    }

    #[test]
    fn components_cases() {
        let g = path3();
        assert_eq!(
            connected_components(&g, &NodeSet::new([0, 2])).unwrap(),
            vec![NodeSet::new([0]), NodeSet::new([2])]
        );
        assert_eq!(connected_components(&g, &NodeSet::full(3)).unwrap(), vec![NodeSet::full(3)]);
        assert!(connected_components(&g, &NodeSet::empty()).unwrap().is_empty());
    }

    #[test]
    fn partition_validation() {
        assert!(CoalitionStructure::new(3, vec![NodeSet::new([0, 1])]).is_err());
        assert!(CoalitionStructure::new(2, vec![NodeSet::new([0, 1]), NodeSet::new([1])]).is_err());
        assert!(CoalitionStructure::new(2, vec![NodeSet::new([0, 1]), NodeSet::empty()]).is_err());
        let a = CoalitionStructure::new(3, vec![NodeSet::new([2]), NodeSet::new([0, 1])]).unwrap();
        let b = CoalitionStructure::from_labels(&[0, 0, 1]);
        assert_eq!(a, b);
    }

    #[test]
    fn json_rejects_unknown_keys_and_bad_orientation() {
        let ok = r#"{"num_nodes":2,"feature_dim":1,"features":[[1.0],[2.0]],"edges":[[0,1]],"label":1}"#;
        let g: Graph = serde_json::from_str(ok).unwrap();
        assert_eq!(g.label(), Some(1));
        let extra = r#"{"num_nodes":2,"feature_dim":1,"features":[[1.0],[2.0]],"edges":[],"colour":1}"#;
        assert!(serde_json::from_str::<Graph>(extra).is_err());
        let flipped = r#"{"num_nodes":2,"feature_dim":1,"features":[[1.0],[2.0]],"edges":[[1,0]]}"#;
        assert!(serde_json::from_str::<Graph>(flipped).is_err());
    }

    #[test]
    fn k_hop() {
        let g = Graph::new(1, unit_features(5), [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(k_hop_neighborhood(&g, &[0], 2).unwrap(), NodeSet::new([0, 1, 2]));
        assert_eq!(k_hop_neighborhood(&g, &[0, 4], 1).unwrap(), NodeSet::new([0, 1, 3, 4]));
    }

    prop_compose! {
        fn arb_graph()(n in 0usize..9)
            (edges in proptest::collection::vec((0..n.max(1), 0..n.max(1)), 0..20),
             feats in proptest::collection::vec(-3.0f64..3.0, n * 2),
             n in Just(n)) -> Graph {
            let edges: std::collections::BTreeSet<_> = edges
                .into_iter()
                .filter(|(a, b)| a != b && *a < n && *b < n)
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect();
            Graph::from_flat(n, 2, feats, edges).unwrap()
        }
    }

    fn arb_graph_and_labels() -> impl Strategy<Value = (Graph, Vec<usize>)> {
        arb_graph().prop_flat_map(|g| {
            let n = g.num_nodes();
            (Just(g), proptest::collection::vec(0usize..3, n))
        })
    }

    proptest! {
        #[test]
        fn restricted_edges_are_subset((g, labels) in arb_graph_and_labels()) {
            let p = CoalitionStructure::from_labels(&labels);
            let r = partition_restricted_graph(&g, &p).unwrap();
            let all_intra = g.edges().iter().all(|&(u, v)| labels[u] == labels[v]);
            prop_assert!(r.edges().iter().all(|e| g.edges().contains(e)));
            prop_assert_eq!(r.edges().len() == g.edges().len(), all_intra);
            prop_assert_eq!(r.features(), g.features());
        }

        #[test]
        fn components_partition_within((g, labels) in arb_graph_and_labels()) {
            let within: NodeSet = labels.iter().enumerate().filter(|(_, &l)| l > 0).map(|(i, _)| i).collect();
            let comps = connected_components(&g, &within).unwrap();
            let mut union: Vec<usize> = comps.iter().flat_map(|c| c.iter()).collect();
            let total = union.len();
            union.sort_unstable();
            union.dedup();
            prop_assert_eq!(total, union.len());
            prop_assert_eq!(union, within.as_slice().to_vec());
            let firsts: Vec<_> = comps.iter().map(|c| c.first().unwrap()).collect();
            prop_assert!(firsts.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn induced_is_idempotent((g, labels) in arb_graph_and_labels()) {
            let s: NodeSet = labels.iter().enumerate().filter(|(_, &l)| l != 1).map(|(i, _)| i).collect();
            let once = induced_subgraph(&g, &s).unwrap().graph;
            let twice = induced_subgraph(&once, &NodeSet::full(once.num_nodes())).unwrap().graph;
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn json_round_trip(g in arb_graph(), label in proptest::option::of(0usize..4)) {
            let g = g.with_label(label).with_name(Some("g".into()));
            let text = serde_json::to_string(&g).unwrap();
            let back: Graph = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back, g);
        }
    }
}
