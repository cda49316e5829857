//! Networks: construction, threshold assignment, statistics and the JSON
//! network file.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from_seed;

/// Dense node index in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Labeling rule of a node.
///
/// `Monotone` labels a node when its labeled-neighbor fraction reaches its
/// threshold (`ν ≥ φ`); `Antagonistic` is the complement and labels a node
/// while the fraction is still below the threshold (`ν < φ`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    #[serde(rename = "gcm")]
    Monotone,
    #[serde(rename = "agcm")]
    Antagonistic,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Monotone => "gcm",
            Rule::Antagonistic => "agcm",
        }
    }

    pub fn complement(self) -> Rule {
        match self {
            Rule::Monotone => Rule::Antagonistic,
            Rule::Antagonistic => Rule::Monotone,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Rule {
    type Err = NetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gcm" => Ok(Rule::Monotone),
            "agcm" => Ok(Rule::Antagonistic),
            other => Err(NetError::UnknownRule(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub rule: Rule,
    pub phi: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum NetError {
    #[error("edge probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("network must have at least one node")]
    Empty,
    #[error("node {index} has id {id}; ids must be dense and in order")]
    NonDenseId { index: usize, id: NodeId },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
    #[error("{what} refers to node {id}, but the network has {n} nodes")]
    UnknownNode { what: &'static str, id: NodeId, n: usize },
    #[error("unknown rule name {0:?} (expected \"gcm\" or \"agcm\")")]
    UnknownRule(String),
    #[error("statistics require an undirected network")]
    Directed,
    #[error("malformed network file at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// How [`assign_thresholds`] draws thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    UniformRandom,
    Constant(f64),
}

/// An immutable network.
///
/// For undirected networks every edge is stored once as `(u, v)` with
/// `u < v`; directed edges point from source to target. The neighborhood used
/// by the dynamics is the in-neighborhood (all neighbors when undirected).
#[derive(Debug, Clone)]
pub struct Network {
    directed: bool,
    nodes: Vec<NodeSpec>,
    edges: Vec<(NodeId, NodeId)>,
    seeds: BTreeSet<NodeId>,
    inputs: IndexMap<String, NodeId>,
    outputs: IndexMap<String, NodeId>,
    thresholds_assigned: bool,
    in_adj: Vec<Vec<NodeId>>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.directed == other.directed
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.seeds == other.seeds
            && self.inputs == other.inputs
            && self.outputs == other.outputs
    }
}

impl Network {
    /// Build a network, checking every structural invariant.
    ///
    /// Undirected edges given as `(v, u)` with `v > u` are normalized to
    /// `(u, v)`; a pair given both ways is a duplicate.
    pub fn new(
        directed: bool,
        nodes: Vec<NodeSpec>,
        edges: Vec<(NodeId, NodeId)>,
        seeds: BTreeSet<NodeId>,
    ) -> Result<Self, NetError> {
        Self::with_ports(directed, nodes, edges, seeds, IndexMap::new(), IndexMap::new())
    }

    /// Like [`Network::new`], with named input and output nodes.
    pub fn with_ports(
        directed: bool,
        nodes: Vec<NodeSpec>,
        edges: Vec<(NodeId, NodeId)>,
        seeds: BTreeSet<NodeId>,
        inputs: IndexMap<String, NodeId>,
        outputs: IndexMap<String, NodeId>,
    ) -> Result<Self, NetError> {
        let n = nodes.len();
        if n == 0 {
            return Err(NetError::Empty);
        }
        for (index, spec) in nodes.iter().enumerate() {
            if spec.id.index() != index {
                return Err(NetError::NonDenseId { index, id: spec.id });
            }
            check_phi(spec.phi)?;
        }
        let check = |what: &'static str, id: NodeId| {
            if id.index() < n {
                Ok(())
            } else {
                Err(NetError::UnknownNode { what, id, n })
            }
        };
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            check("edge", u)?;
            check("edge", v)?;
            if u == v {
                return Err(NetError::SelfLoop(u));
            }
            let e = if directed || u < v { (u, v) } else { (v, u) };
            if !seen.insert(e) {
                return Err(NetError::DuplicateEdge(e.0, e.1));
            }
            normalized.push(e);
        }
        for &s in &seeds {
            check("seed", s)?;
        }
        for &id in inputs.values() {
            check("input", id)?;
        }
        for &id in outputs.values() {
            check("output", id)?;
        }
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &normalized {
            in_adj[v.index()].push(u);
            if !directed {
                in_adj[u.index()].push(v);
            }
        }
        Ok(Network { directed, nodes, edges: normalized, seeds, inputs, outputs, thresholds_assigned: true, in_adj })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &NodeSpec {
        &self.nodes[id.index()]
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn seeds(&self) -> &BTreeSet<NodeId> {
        &self.seeds
    }

    pub fn inputs(&self) -> &IndexMap<String, NodeId> {
        &self.inputs
    }

    pub fn outputs(&self) -> &IndexMap<String, NodeId> {
        &self.outputs
    }

    /// False for a freshly generated graph whose nodes still carry
    /// placeholder thresholds. The engine refuses to run such networks.
    pub fn thresholds_assigned(&self) -> bool {
        self.thresholds_assigned
    }

    /// Nodes whose labels count towards `ν` of `u`.
    pub fn in_neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.in_adj[u.index()]
    }

    pub fn in_degree(&self, u: NodeId) -> usize {
        self.in_adj[u.index()].len()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId::from)
    }

    pub fn with_seeds(mut self, seeds: BTreeSet<NodeId>) -> Result<Self, NetError> {
        let n = self.len();
        if let Some(&id) = seeds.iter().find(|s| s.index() >= n) {
            return Err(NetError::UnknownNode { what: "seed", id, n });
        }
        self.seeds = seeds;
        Ok(self)
    }

    /// Replace every node's rule with `f(rule)`, keeping thresholds.
    pub fn map_rules(mut self, f: impl Fn(Rule) -> Rule) -> Self {
        for node in &mut self.nodes {
            node.rule = f(node.rule);
        }
        self
    }

    /// Replace a single node's threshold.
    pub fn with_phi(mut self, id: NodeId, phi: f64) -> Result<Self, NetError> {
        check_phi(phi)?;
        self.nodes[id.index()].phi = phi;
        Ok(self)
    }

    /// Topological order of a directed network (smallest ready id first), or
    /// `None` if the network is undirected or has a cycle.
    pub fn topological_order(&self) -> Option<Vec<NodeId>> {
        if !self.directed {
            return None;
        }
        let n = self.len();
        let mut indeg: Vec<usize> = self.in_adj.iter().map(Vec::len).collect();
        let mut out_adj = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            out_adj[u.index()].push(v);
        }
        let mut ready: BTreeSet<NodeId> = self.node_ids().filter(|u| indeg[u.index()] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(u) = ready.pop_first() {
            order.push(u);
            for &v in &out_adj[u.index()] {
                indeg[v.index()] -= 1;
                if indeg[v.index()] == 0 {
                    ready.insert(v);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}

fn check_phi(phi: f64) -> Result<(), NetError> {
    if (0.0..=1.0).contains(&phi) {
        Ok(())
    } else {
        Err(NetError::InvalidThreshold(phi))
    }
}

/// Sample `G(n, p)`: every one of the `n(n−1)/2` pairs is present
/// independently with probability `p`.
///
/// Pairs are visited in lexicographic order and the gaps between included
/// pairs are drawn from the geometric distribution (Batagelj and Brandes),
/// which is distributionally identical to one coin per pair but costs
/// `O(n + m)`. Nodes get the placeholder `(Monotone, φ = 0)` and the network
/// is flagged as unassigned until [`assign_thresholds`] runs.
pub fn generate_er(n: usize, p: f64, rng_seed: u64) -> Result<Network, NetError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(NetError::InvalidProbability(p));
    }
    if n == 0 {
        return Err(NetError::Empty);
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut edges = Vec::new();
    if p >= 1.0 {
        for v in 1..n {
            for u in 0..v {
                edges.push((NodeId::from(u), NodeId::from(v)));
            }
        }
    } else if p > 0.0 {
        let log_q = (1.0 - p).ln();
        // Pairs (u, v) with u < v, enumerated as v = 1.., u = 0..v.
        let mut v: usize = 1;
        let mut u: i64 = -1;
        while v < n {
            let r: f64 = rng.gen();
            let skip = ((1.0 - r).ln() / log_q).floor();
            u += 1 + if skip.is_finite() { skip.min(n as f64 * n as f64) as i64 } else { n as i64 * n as i64 };
            while v < n && u >= v as i64 {
                u -= v as i64;
                v += 1;
            }
            if v < n {
                edges.push((NodeId::from(u as usize), NodeId::from(v)));
            }
        }
    }
    let nodes = (0..n).map(|i| NodeSpec { id: NodeId::from(i), rule: Rule::Monotone, phi: 0.0 }).collect();
    let mut net = Network::new(false, nodes, edges, BTreeSet::new())?;
    net.thresholds_assigned = false;
    Ok(net)
}

/// Edge probability giving expected mean degree `z` in `G(n, p)`.
pub fn p_for_mean_degree(n: usize, z: f64) -> f64 {
    if n <= 1 {
        0.0
    } else {
        (z / (n - 1) as f64).clamp(0.0, 1.0)
    }
}

/// Give every node `rule` and a threshold drawn according to `mode`.
pub fn assign_thresholds(
    network: Network,
    mode: ThresholdMode,
    rule: Rule,
    rng_seed: u64,
) -> Result<Network, NetError> {
    if network.is_empty() {
        return Err(NetError::Empty);
    }
    let mut net = network;
    match mode {
        ThresholdMode::Constant(phi) => {
            check_phi(phi)?;
            for node in &mut net.nodes {
                node.rule = rule;
                node.phi = phi;
            }
        }
        ThresholdMode::UniformRandom => {
            let mut rng = rng_from_seed(rng_seed);
            for node in &mut net.nodes {
                node.rule = rule;
                // gen::<f64>() is uniform on [0, 1).
                node.phi = rng.gen::<f64>();
            }
        }
    }
    net.thresholds_assigned = true;
    Ok(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NetworkStats {
    pub n: usize,
    pub edge_count: usize,
    pub mean_degree: f64,
    pub clustering_coefficient: f64,
}

/// Size, mean degree and average local clustering coefficient.
///
/// Nodes of degree below two contribute zero to the clustering average.
pub fn stats(network: &Network) -> Result<NetworkStats, NetError> {
    if network.directed {
        return Err(NetError::Directed);
    }
    let n = network.len();
    let neighbor_sets: Vec<HashSet<NodeId>> = network.in_adj.iter().map(|adj| adj.iter().copied().collect()).collect();
    let mut clustering_sum = 0.0;
    for u in network.node_ids() {
        let adj = network.in_neighbors(u);
        let d = adj.len();
        if d < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in adj.iter().enumerate() {
            for &b in &adj[i + 1..] {
                if neighbor_sets[a.index()].contains(&b) {
                    links += 1;
                }
            }
        }
        clustering_sum += links as f64 / (d * (d - 1) / 2) as f64;
    }
    Ok(NetworkStats {
        n,
        edge_count: network.edges.len(),
        mean_degree: 2.0 * network.edges.len() as f64 / n as f64,
        clustering_coefficient: clustering_sum / n as f64,
    })
}

/// On-disk form of a [`Network`].
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    directed: bool,
    nodes: Vec<NodeSpec>,
    edges: Vec<(NodeId, NodeId)>,
    #[serde(default)]
    seeds: Vec<NodeId>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    inputs: IndexMap<String, NodeId>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    outputs: IndexMap<String, NodeId>,
}

/// Serialize to the JSON network document (pretty-printed, trailing newline).
pub fn to_json(network: &Network) -> String {
    let file = NetworkFile {
        directed: network.directed,
        nodes: network.nodes.clone(),
        edges: network.edges.clone(),
        seeds: network.seeds.iter().copied().collect(),
        inputs: network.inputs.clone(),
        outputs: network.outputs.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("network serializes");
    s.push('\n');
    s
}

/// Parse a JSON network document.
///
/// Syntax errors carry the line and column of the offending token; invariant
/// violations (duplicate edges, out-of-range thresholds, dangling ids) are
/// reported by kind.
pub fn from_json(text: &str) -> Result<Network, NetError> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| NetError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut seeds = BTreeSet::new();
    for s in file.seeds {
        seeds.insert(s);
    }
    Network::with_ports(file.directed, file.nodes, file.edges, seeds, file.inputs, file.outputs)
}

pub fn save_network(network: &Network, path: impl AsRef<Path>) -> Result<(), NetError> {
    let path = path.as_ref();
    fs::write(path, to_json(network)).map_err(|source| NetError::Io { path: path.display().to_string(), source })
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, NetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| NetError::Io { path: path.display().to_string(), source })?;
    from_json(&text)
}
