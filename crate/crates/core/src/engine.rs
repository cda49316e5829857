//! Cascade dynamics.
//!
//! A run starts from a set of labeled seed nodes and repeatedly examines
//! unlabeled nodes, labeling a node as soon as its rule fires on the current
//! fraction `ν` of labeled in-neighbors. Labels are never removed, so every
//! run reaches a fixpoint after at most `N` labeling events.
//!
//! `ν` is computed as the correctly rounded quotient `labeled / degree`.
//! Thresholds written as the rounded quotient of a small rational (`1/k`,
//! `(2k−1)/(2k)`, ...) therefore compare *equal* to `ν` exactly when the two
//! rationals are equal, which keeps the `≥` / `<` tie-breaks intact for
//! compiled gates.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use serde::{Serialize, Serializer};

use crate::net::{Network, NodeId, Rule};
use crate::rng::rng_from_seed;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EngineError {
    #[error("network thresholds have not been assigned")]
    ThresholdsUnassigned,
    #[error("seed {0} is not a node of the network")]
    UnknownSeed(NodeId),
    #[error("explicit order refers to unknown node {0}")]
    UnknownOrderNode(NodeId),
    #[error("explicit order never examines non-seed node {0}")]
    IncompleteOrder(NodeId),
    #[error("topological schedule needs a directed acyclic network")]
    NotAcyclic,
    #[error("global-cascade threshold {0} is outside (0, 1]")]
    InvalidFraction(f64),
    #[error(
        "threshold-logic unit needs degree >= 1 and {degree} weights/inputs (got {weights} weights, {inputs} inputs)"
    )]
    InvalidTlu { degree: usize, weights: usize, inputs: usize },
}

/// The set of labeled nodes, stored as a fixed-width bit vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    words: Vec<u64>,
    n: usize,
}

impl Configuration {
    pub fn empty(n: usize) -> Self {
        Configuration { words: vec![0; n.div_ceil(64)], n }
    }

    pub fn from_nodes(n: usize, nodes: impl IntoIterator<Item = NodeId>) -> Self {
        let mut c = Self::empty(n);
        for u in nodes {
            c.insert(u);
        }
        c
    }

    pub fn capacity(&self) -> usize {
        self.n
    }

    pub fn contains(&self, u: NodeId) -> bool {
        let i = u.index();
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Returns true if `u` was not already labeled.
    pub fn insert(&mut self, u: NodeId) -> bool {
        let i = u.index();
        assert!(i < self.n, "node {u} outside configuration of {} nodes", self.n);
        let was = self.contains(u);
        self.words[i / 64] |= 1 << (i % 64);
        !was
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_subset(&self, other: &Configuration) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Labeled nodes in increasing id order.
    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n).map(NodeId::from).filter(|&u| self.contains(u))
    }

    pub fn to_vec(&self) -> Vec<NodeId> {
        self.iter().collect()
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|u| u.0)).finish()
    }
}

impl Serialize for Configuration {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Which unlabeled nodes a pass examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Examination {
    /// Every unlabeled node, including nodes no label has reached yet.
    #[default]
    All,
    /// Only nodes with at least one labeled in-neighbor, plus isolated
    /// nodes. A node the cascade has not reached is left alone even if its
    /// rule would fire at `ν = 0`, as in spreading experiments that grow
    /// outwards from the seeds.
    Reached,
}

impl std::str::FromStr for Examination {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Examination::All),
            "reached" => Ok(Examination::Reached),
            other => Err(format!("unknown examination {other:?} (expected all or reached)")),
        }
    }
}

impl fmt::Display for Examination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Examination::All => "all",
            Examination::Reached => "reached",
        })
    }
}

/// The order in which unlabeled nodes are examined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleMode {
    /// Each pass examines the currently unlabeled nodes in a fresh uniformly
    /// random order; stops after a pass without labelings.
    RandomSweep { seed: u64 },
    /// Each pass walks this order (skipping labeled nodes); stops after a
    /// pass without labelings. Must mention every non-seed node.
    Explicit(Vec<NodeId>),
    /// One pass in topological order. Directed acyclic networks only.
    Topological,
}

impl fmt::Display for ScheduleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleMode::RandomSweep { seed } => write!(f, "sweep:{seed}"),
            ScheduleMode::Explicit(order) => {
                let ids: Vec<String> = order.iter().map(ToString::to_string).collect();
                write!(f, "order:{}", ids.join(","))
            }
            ScheduleMode::Topological => f.write_str("topo"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeResult {
    #[serde(rename = "final")]
    pub final_config: Configuration,
    pub size_fraction: f64,
    /// Nodes in the order the dynamics labeled them. Seeds are not included.
    pub labeling_order: Vec<NodeId>,
    /// Passes performed, including the closing pass that changed nothing.
    pub passes: usize,
}

/// Fraction of `u`'s in-neighbors that are labeled; 0 for isolated nodes.
pub fn neighbor_fraction(network: &Network, config: &Configuration, u: NodeId) -> f64 {
    let (labeled, degree) = labeled_in_degree(network, config, u);
    if degree == 0 {
        0.0
    } else {
        labeled as f64 / degree as f64
    }
}

fn labeled_in_degree(network: &Network, config: &Configuration, u: NodeId) -> (usize, usize) {
    let adj = network.in_neighbors(u);
    (adj.iter().filter(|&&v| config.contains(v)).count(), adj.len())
}

/// Whether `rule` labels a node with labeled-neighbor fraction `nu` and
/// threshold `phi`: `ν ≥ φ` for [`Rule::Monotone`], `ν < φ` for
/// [`Rule::Antagonistic`].
pub fn fires(rule: Rule, nu: f64, phi: f64) -> bool {
    match rule {
        Rule::Monotone => nu >= phi,
        Rule::Antagonistic => nu < phi,
    }
}

/// Threshold-logic-unit form of the antagonistic rule: fires when
/// `(w · x) / degree < φ`. With unit weights this is `fires(Antagonistic, ν, φ)`.
pub fn tlu_fires(weights: &[f64], inputs: &[bool], degree: usize, phi: f64) -> Result<bool, EngineError> {
    if degree == 0 || weights.len() != degree || inputs.len() != degree {
        return Err(EngineError::InvalidTlu { degree, weights: weights.len(), inputs: inputs.len() });
    }
    let dot: f64 = weights.iter().zip(inputs).filter(|(_, &x)| x).map(|(w, _)| w).sum();
    Ok(fires(Rule::Antagonistic, dot / degree as f64, phi))
}

/// Whether unlabeled, non-seed node `u` would be labeled if examined now.
pub fn node_fires(network: &Network, config: &Configuration, u: NodeId) -> bool {
    let spec = network.node(u);
    fires(spec.rule, neighbor_fraction(network, config, u), spec.phi)
}

/// Unlabeled non-seed nodes that would fire on `config`, in id order.
pub fn fireable(network: &Network, seeds: &BTreeSet<NodeId>, config: &Configuration) -> Vec<NodeId> {
    network
        .node_ids()
        .filter(|u| !config.contains(*u) && !seeds.contains(u) && node_fires(network, config, *u))
        .collect()
}

/// True when no unlabeled non-seed node fires.
pub fn is_stable(network: &Network, seeds: &BTreeSet<NodeId>, config: &Configuration) -> bool {
    network.node_ids().all(|u| config.contains(u) || seeds.contains(&u) || !node_fires(network, config, u))
}

/// Run a cascade from `seeds` to a fixpoint under `mode`, examining every
/// unlabeled node.
pub fn run_cascade(
    network: &Network,
    seeds: &BTreeSet<NodeId>,
    mode: &ScheduleMode,
) -> Result<CascadeResult, EngineError> {
    run_cascade_with(network, seeds, mode, Examination::All)
}

/// [`run_cascade`] with a choice of which unlabeled nodes are examined.
pub fn run_cascade_with(
    network: &Network,
    seeds: &BTreeSet<NodeId>,
    mode: &ScheduleMode,
    examination: Examination,
) -> Result<CascadeResult, EngineError> {
    if !network.thresholds_assigned() {
        return Err(EngineError::ThresholdsUnassigned);
    }
    let n = network.len();
    if let Some(&s) = seeds.iter().find(|s| s.index() >= n) {
        return Err(EngineError::UnknownSeed(s));
    }
    let mut state =
        Run { network, config: Configuration::from_nodes(n, seeds.iter().copied()), order: Vec::new(), examination };
    let passes = match mode {
        ScheduleMode::RandomSweep { seed } => {
            let mut rng = rng_from_seed(*seed);
            let mut passes = 0;
            loop {
                passes += 1;
                let mut pending: Vec<NodeId> = network.node_ids().filter(|&u| !state.config.contains(u)).collect();
                pending.shuffle(&mut rng);
                if state.pass(&pending) == 0 {
                    break passes;
                }
            }
        }
        ScheduleMode::Explicit(order) => {
            if let Some(&u) = order.iter().find(|u| u.index() >= n) {
                return Err(EngineError::UnknownOrderNode(u));
            }
            let mentioned: BTreeSet<NodeId> = order.iter().copied().collect();
            if let Some(u) = network.node_ids().find(|u| !seeds.contains(u) && !mentioned.contains(u)) {
                return Err(EngineError::IncompleteOrder(u));
            }
            let mut passes = 0;
            loop {
                passes += 1;
                if state.pass(order) == 0 {
                    break passes;
                }
            }
        }
        ScheduleMode::Topological => {
            let order = network.topological_order().ok_or(EngineError::NotAcyclic)?;
            state.pass(&order);
            1
        }
    };
    let size_fraction = state.config.len() as f64 / n as f64;
    Ok(CascadeResult { final_config: state.config, size_fraction, labeling_order: state.order, passes })
}

struct Run<'a> {
    network: &'a Network,
    config: Configuration,
    order: Vec<NodeId>,
    examination: Examination,
}

impl Run<'_> {
    fn examined(&self, u: NodeId) -> bool {
        match self.examination {
            Examination::All => true,
            Examination::Reached => {
                let adj = self.network.in_neighbors(u);
                adj.is_empty() || adj.iter().any(|&v| self.config.contains(v))
            }
        }
    }

    /// Examine `nodes` once each, labeling immediately. Returns the number
    /// of new labels.
    fn pass(&mut self, nodes: &[NodeId]) -> usize {
        let mut labeled = 0;
        for &u in nodes {
            if !self.config.contains(u) && self.examined(u) && node_fires(self.network, &self.config, u) {
                self.config.insert(u);
                self.order.push(u);
                labeled += 1;
            }
        }
        labeled
    }
}

/// Whether the cascade reached at least `fraction_threshold` of the network.
pub fn is_global(result: &CascadeResult, fraction_threshold: f64) -> Result<bool, EngineError> {
    if !(fraction_threshold > 0.0 && fraction_threshold <= 1.0) {
        return Err(EngineError::InvalidFraction(fraction_threshold));
    }
    Ok(result.size_fraction >= fraction_threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NodeSpec;

    fn triangle() -> Network {
        let nodes = vec![
            NodeSpec { id: NodeId(0), rule: Rule::Monotone, phi: 0.5 },
            NodeSpec { id: NodeId(1), rule: Rule::Antagonistic, phi: 0.75 },
            NodeSpec { id: NodeId(2), rule: Rule::Antagonistic, phi: 0.75 },
        ];
        let edges = vec![(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))];
        Network::new(false, nodes, edges, [NodeId(0)].into()).unwrap()
    }

    #[test]
    fn fraction_examples() {
        let net = triangle();
        let one = Configuration::from_nodes(3, [NodeId(0)]);
        let two = Configuration::from_nodes(3, [NodeId(0), NodeId(1)]);
        assert_eq!(neighbor_fraction(&net, &one, NodeId(2)), 0.5);
        assert_eq!(neighbor_fraction(&net, &two, NodeId(2)), 1.0);

        let isolated = Network::new(
            false,
            vec![NodeSpec { id: NodeId(0), rule: Rule::Monotone, phi: 0.0 }],
            vec![],
            BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(neighbor_fraction(&isolated, &Configuration::empty(1), NodeId(0)), 0.0);
    }

    #[test]
    fn rule_examples() {
        assert!(fires(Rule::Monotone, 0.5, 0.5));
        assert!(fires(Rule::Antagonistic, 0.0, 0.75));
        assert!(!fires(Rule::Antagonistic, 1.0, 0.75));
        assert!(!fires(Rule::Antagonistic, 0.5, 0.5));
        assert!(!fires(Rule::Monotone, 0.25, 0.5));
    }

    #[test]
    fn tlu_examples() {
        assert!(tlu_fires(&[1.0, 1.0], &[false, false], 2, 0.75).unwrap());
        assert!(!tlu_fires(&[1.0, 1.0], &[true, true], 2, 0.75).unwrap());
        assert!(!tlu_fires(&[1.0], &[true], 1, 1.0).unwrap());
        assert!(tlu_fires(&[], &[], 0, 0.5).is_err());
        assert!(tlu_fires(&[1.0], &[true, false], 2, 0.5).is_err());
    }

    #[test]
    fn triangle_order_dependence() {
        let net = triangle();
        let seeds = net.seeds().clone();
        let bc = run_cascade(&net, &seeds, &ScheduleMode::Explicit(vec![NodeId(1), NodeId(2)])).unwrap();
        let cb = run_cascade(&net, &seeds, &ScheduleMode::Explicit(vec![NodeId(2), NodeId(1)])).unwrap();
        assert_eq!(bc.final_config.to_vec(), vec![NodeId(0), NodeId(1)]);
        assert_eq!(cb.final_config.to_vec(), vec![NodeId(0), NodeId(2)]);
        assert_eq!(bc.labeling_order, vec![NodeId(1)]);
        assert_eq!(bc.passes, 2);
    }

    #[test]
    fn two_node_path_every_mode() {
        let nodes = vec![
            NodeSpec { id: NodeId(0), rule: Rule::Monotone, phi: 0.5 },
            NodeSpec { id: NodeId(1), rule: Rule::Monotone, phi: 0.5 },
        ];
        let und = Network::new(false, nodes.clone(), vec![(NodeId(0), NodeId(1))], BTreeSet::new()).unwrap();
        let dir = Network::new(true, nodes, vec![(NodeId(0), NodeId(1))], BTreeSet::new()).unwrap();
        let seeds: BTreeSet<NodeId> = [NodeId(0)].into();
        for (net, mode) in [
            (&und, ScheduleMode::RandomSweep { seed: 3 }),
            (&und, ScheduleMode::Explicit(vec![NodeId(1)])),
            (&dir, ScheduleMode::Topological),
            (&dir, ScheduleMode::RandomSweep { seed: 99 }),
        ] {
            let r = run_cascade(net, &seeds, &mode).unwrap();
            assert_eq!(r.final_config.to_vec(), vec![NodeId(0), NodeId(1)], "{mode}");
            assert_eq!(r.size_fraction, 1.0);
        }
    }

    #[test]
    fn run_errors() {
        let net = triangle();
        let seeds = net.seeds().clone();
        assert_eq!(run_cascade(&net, &seeds, &ScheduleMode::Topological).unwrap_err(), EngineError::NotAcyclic);
        assert_eq!(
            run_cascade(&net, &seeds, &ScheduleMode::Explicit(vec![NodeId(1)])).unwrap_err(),
            EngineError::IncompleteOrder(NodeId(2))
        );
        assert_eq!(
            run_cascade(&net, &[NodeId(7)].into(), &ScheduleMode::RandomSweep { seed: 0 }).unwrap_err(),
            EngineError::UnknownSeed(NodeId(7))
        );
        let raw = crate::net::generate_er(4, 0.5, 1).unwrap();
        assert_eq!(
            run_cascade(&raw, &BTreeSet::new(), &ScheduleMode::RandomSweep { seed: 0 }).unwrap_err(),
            EngineError::ThresholdsUnassigned
        );
    }

    #[test]
    fn isolated_nodes_follow_degree_zero_convention() {
        let nodes = vec![
            NodeSpec { id: NodeId(0), rule: Rule::Antagonistic, phi: 0.18 },
            NodeSpec { id: NodeId(1), rule: Rule::Monotone, phi: 0.0 },
            NodeSpec { id: NodeId(2), rule: Rule::Monotone, phi: 0.1 },
            NodeSpec { id: NodeId(3), rule: Rule::Antagonistic, phi: 0.0 },
        ];
        let net = Network::new(false, nodes, vec![], BTreeSet::new()).unwrap();
        let r = run_cascade(&net, &BTreeSet::new(), &ScheduleMode::RandomSweep { seed: 1 }).unwrap();
        assert_eq!(r.final_config.to_vec(), vec![NodeId(0), NodeId(1)]);
    }

    #[test]
    fn reached_examination_waits_for_a_labeled_neighbor() {
        // Path 0 - 1 - 2 - 3 plus isolated node 4, all antagonistic at 0.6.
        let nodes = (0..5).map(|i| NodeSpec { id: NodeId(i), rule: Rule::Antagonistic, phi: 0.6 }).collect();
        let edges = vec![(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2)), (NodeId(2), NodeId(3))];
        let net = Network::new(false, nodes, edges, BTreeSet::new()).unwrap();
        let seeds: BTreeSet<NodeId> = [NodeId(0)].into();
        let order = ScheduleMode::Explicit(vec![NodeId(3), NodeId(2), NodeId(1), NodeId(4)]);
        // Node 3 fires at ν = 0 before anything reaches it.
        let all = run_cascade(&net, &seeds, &order).unwrap();
        assert_eq!(all.final_config.to_vec(), vec![NodeId(0), NodeId(2), NodeId(3), NodeId(4)]);
        // Reached: 1 fires (ν = 1/2), then 2 sees ν = 1/2 and fires, then 3 sees ν = 1 and does not.
        let reached = run_cascade_with(&net, &seeds, &order, Examination::Reached).unwrap();
        assert_eq!(reached.final_config.to_vec(), vec![NodeId(0), NodeId(1), NodeId(2), NodeId(4)]);
        assert_eq!(reached.passes, 3);
    }

    #[test]
    fn global_predicate() {
        let mk = |size_fraction| CascadeResult {
            final_config: Configuration::empty(1),
            size_fraction,
            labeling_order: vec![],
            passes: 1,
        };
        assert!(is_global(&mk(0.5), 0.5).unwrap());
        assert!(!is_global(&mk(0.49), 0.5).unwrap());
        assert!(is_global(&mk(1.0), 1.0).unwrap());
        assert!(is_global(&mk(1.0), 0.01).unwrap());
        assert!(is_global(&mk(1.0), 0.0).is_err());
        assert!(is_global(&mk(1.0), 1.5).is_err());
    }

    #[test]
    fn configuration_bits() {
        let mut c = Configuration::empty(130);
        assert!(c.insert(NodeId(129)));
        assert!(!c.insert(NodeId(129)));
        c.insert(NodeId(0));
        c.insert(NodeId(64));
        assert_eq!(c.len(), 3);
        assert_eq!(c.to_vec(), vec![NodeId(0), NodeId(64), NodeId(129)]);
        let small = Configuration::from_nodes(130, [NodeId(64)]);
        assert!(small.is_subset(&c));
        assert!(!c.is_subset(&small));
        assert_eq!(serde_json::to_string(&small).unwrap(), "[64]");
    }
}
