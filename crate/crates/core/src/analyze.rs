//! Reachable fixpoints and schedule sensitivity.
//!
//! [`enumerate_fixpoints`] explores every order in which single nodes can be
//! labeled. Any pass-based run of the engine follows one path of this search,
//! so a network with one reachable fixpoint has a schedule-independent
//! outcome, and several fixpoints mean the outcome depends on the schedule.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::{eval_bits, CompiledCircuit};
use crate::engine::{fireable, run_cascade, Configuration, EngineError, ScheduleMode};
use crate::net::{assign_thresholds, generate_er, p_for_mean_degree, NetError, Network, NodeId, Rule, ThresholdMode};
use crate::rng::{derive_seed, rng_from_seed};

/// Default bound on explored configurations.
pub const DEFAULT_STATE_CAP: usize = 1 << 22;

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Circuit(#[from] crate::circuit::CircuitError),
    #[error("{0} must be at least 1")]
    NonPositive(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixpointSet {
    /// Stable configurations, sorted by their sorted id lists.
    pub fixpoints: Vec<Configuration>,
    #[serde(rename = "explored")]
    pub explored_states: usize,
    pub truncated: bool,
}

impl FixpointSet {
    pub fn as_id_sets(&self) -> Vec<Vec<NodeId>> {
        self.fixpoints.iter().map(Configuration::to_vec).collect()
    }
}

/// Order in which the search expands the successors of a configuration.
/// The resulting fixpoint set does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchOrder {
    Ascending,
    Descending,
}

pub fn enumerate_fixpoints(
    network: &Network,
    seeds: &BTreeSet<NodeId>,
    state_cap: usize,
) -> Result<FixpointSet, EngineError> {
    enumerate_fixpoints_with(network, seeds, state_cap, BranchOrder::Ascending)
}

/// Depth-first search over configurations reachable from `seeds` by
/// labeling one fireable node at a time. Stops with `truncated = true` once
/// `state_cap` configurations have been visited and more remain.
pub fn enumerate_fixpoints_with(
    network: &Network,
    seeds: &BTreeSet<NodeId>,
    state_cap: usize,
    order: BranchOrder,
) -> Result<FixpointSet, EngineError> {
    if !network.thresholds_assigned() {
        return Err(EngineError::ThresholdsUnassigned);
    }
    let n = network.len();
    if let Some(&s) = seeds.iter().find(|s| s.index() >= n) {
        return Err(EngineError::UnknownSeed(s));
    }
    let start = Configuration::from_nodes(n, seeds.iter().copied());
    let mut visited = HashSet::new();
    let mut fixpoints = BTreeSet::new();
    let mut truncated = false;
    visited.insert(start.clone());
    let mut stack = vec![start];
    'search: while let Some(config) = stack.pop() {
        let mut next = fireable(network, seeds, &config);
        if next.is_empty() {
            fixpoints.insert(config.to_vec());
            continue;
        }
        // The stack pops the last pushed successor first.
        if order == BranchOrder::Ascending {
            next.reverse();
        }
        for u in next {
            let mut child = config.clone();
            child.insert(u);
            if visited.contains(&child) {
                continue;
            }
            if visited.len() >= state_cap {
                truncated = true;
                break 'search;
            }
            visited.insert(child.clone());
            stack.push(child);
        }
    }
    Ok(FixpointSet {
        fixpoints: fixpoints.into_iter().map(|ids| Configuration::from_nodes(n, ids)).collect(),
        explored_states: visited.len(),
        truncated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub trials: usize,
    pub agree_fraction: f64,
    pub reference_output: Vec<u8>,
    pub distinct_outcomes: usize,
}

/// How often free-running random sweeps reproduce the topological-schedule
/// output of `circuit` on input bits `bits` (in input order).
pub fn schedule_sensitivity(
    circuit: &CompiledCircuit,
    bits: &[bool],
    trials: usize,
    rng_seed: u64,
) -> Result<SensitivityReport, AnalyzeError> {
    let reference = eval_bits(circuit, bits)?;
    let seeds = crate::circuit::seeds_for(circuit, bits);
    let outputs: Vec<NodeId> = circuit.outputs().values().copied().collect();
    sensitivity_against(circuit.network(), &seeds, &outputs, reference, trials, rng_seed)
}

/// Like [`schedule_sensitivity`] for an arbitrary network. The reference is
/// the topological schedule on a directed acyclic network and the explicit
/// ascending-id order otherwise.
pub fn network_schedule_sensitivity(
    network: &Network,
    seeds: &BTreeSet<NodeId>,
    outputs: &[NodeId],
    trials: usize,
    rng_seed: u64,
) -> Result<SensitivityReport, AnalyzeError> {
    let mode = if network.topological_order().is_some() {
        ScheduleMode::Topological
    } else {
        ScheduleMode::Explicit(network.node_ids().collect())
    };
    let reference = run_cascade(network, seeds, &mode)?;
    let reference = outputs.iter().map(|&o| reference.final_config.contains(o)).collect();
    sensitivity_against(network, seeds, outputs, reference, trials, rng_seed)
}

fn sensitivity_against(
    network: &Network,
    seeds: &BTreeSet<NodeId>,
    outputs: &[NodeId],
    reference: Vec<bool>,
    trials: usize,
    rng_seed: u64,
) -> Result<SensitivityReport, AnalyzeError> {
    if trials == 0 {
        return Err(AnalyzeError::NonPositive("trials"));
    }
    let observed = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mode = ScheduleMode::RandomSweep { seed: derive_seed(rng_seed, &[t as u64]) };
            let r = run_cascade(network, seeds, &mode)?;
            Ok(outputs.iter().map(|&o| r.final_config.contains(o)).collect::<Vec<bool>>())
        })
        .collect::<Result<Vec<_>, EngineError>>()?;
    let agree = observed.iter().filter(|o| **o == reference).count();
    let distinct: HashSet<&Vec<bool>> = observed.iter().collect();
    Ok(SensitivityReport {
        trials,
        agree_fraction: agree as f64 / trials as f64,
        reference_output: reference.iter().map(|&b| b as u8).collect(),
        distinct_outcomes: distinct.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum DeterminismVerdict {
    /// Every instance has exactly one reachable fixpoint.
    Deterministic,
    /// Some instance has two or more reachable fixpoints.
    NonDeterministic { instance: usize },
    /// Some search hit the state cap before settling the question.
    Inconclusive { instance: usize },
}

/// One random instance of [`verify_determinism`].
pub fn determinism_instance(n: usize, z: f64, rule: Rule, rng_seed: u64) -> Result<Network, NetError> {
    let graph = generate_er(n, p_for_mean_degree(n, z), derive_seed(rng_seed, &[0]))?;
    let net = assign_thresholds(graph, ThresholdMode::UniformRandom, rule, derive_seed(rng_seed, &[1]))?;
    let seed_node = NodeId::from(rng_from_seed(derive_seed(rng_seed, &[2])).gen_range(0..n));
    net.with_seeds([seed_node].into())
}

/// Enumerate fixpoints of `instances` random `G(n, z/(n−1))` networks with
/// uniform thresholds, all nodes on `rule`, and one random seed node each.
/// Instance `i` uses seed `derive_seed(rng_seed, [i])`, so the verdict does
/// not depend on how instances are spread over threads.
pub fn verify_determinism(
    n: usize,
    z: f64,
    instances: usize,
    rng_seed: u64,
    rule: Rule,
    state_cap: usize,
) -> Result<DeterminismVerdict, AnalyzeError> {
    if n == 0 {
        return Err(AnalyzeError::NonPositive("n"));
    }
    let outcomes = (0..instances)
        .into_par_iter()
        .map(|i| {
            let net = determinism_instance(n, z, rule, derive_seed(rng_seed, &[i as u64]))?;
            let set = enumerate_fixpoints(&net, net.seeds(), state_cap)?;
            Ok((set.fixpoints.len(), set.truncated))
        })
        .collect::<Result<Vec<_>, AnalyzeError>>()?;
    if let Some(i) = outcomes.iter().position(|&(count, _)| count >= 2) {
        return Ok(DeterminismVerdict::NonDeterministic { instance: i });
    }
    if let Some(i) = outcomes.iter().position(|&(_, truncated)| truncated) {
        return Ok(DeterminismVerdict::Inconclusive { instance: i });
    }
    Ok(DeterminismVerdict::Deterministic)
}

/// [`verify_determinism`] with the monotone rule.
pub fn verify_gcm_determinism(
    n: usize,
    z: f64,
    instances: usize,
    rng_seed: u64,
) -> Result<DeterminismVerdict, AnalyzeError> {
    verify_determinism(n, z, instances, rng_seed, Rule::Monotone, DEFAULT_STATE_CAP)
}
