//! Boolean circuits as cascade networks.
//!
//! A single node with `k` in-neighbors computes a gate whose kind depends
//! only on its rule and on where its threshold `φ` falls:
//!
//! | gate | rule         | valid `φ`          | canonical `φ`   |
//! |------|--------------|--------------------|-----------------|
//! | OR   | monotone     | `(0, 1/k]`         | `1/k`           |
//! | AND  | monotone     | `((k−1)/k, 1]`     | `(2k−1)/(2k)`   |
//! | NOR  | antagonistic | `(0, 1/k]`         | `1/k`           |
//! | NAND | antagonistic | `((k−1)/k, 1]`     | `(2k−1)/(2k)`   |
//! | NOT  | antagonistic | `(0, 1]`, `k = 1`  | `1/2`           |
//! | BUF  | monotone     | `(0, 1]`, `k = 1`  | `1/2`           |
//!
//! [`compile`] lowers an [`Expr`] onto these gates in one of three bases and
//! shares identical subcircuits, producing a directed acyclic network whose
//! node ids are already in topological order.

mod expr;
mod table;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;

pub use expr::{parse_expr, Expr, ParseError};
pub(crate) use table::seeds_for;
pub use table::{
    eval, eval_bits, is_monotone_decreasing, is_monotone_increasing, truth_table, TruthTable, MAX_TABLE_INPUTS,
};

use crate::net::{NetError, Network, NodeId, NodeSpec, Rule};

/// Largest supported fan-in.
pub const MAX_FAN_IN: usize = 64;

/// Threshold of circuit input nodes. Inputs have no in-neighbors, so
/// `ν = 0 < φ` and a monotone input never labels itself.
pub const INPUT_PHI: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum CircuitError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{kind} does not support fan-in {fan_in}")]
    UnsupportedFanIn { kind: GateKind, fan_in: usize },
    #[error("circuit network is not a directed acyclic graph")]
    NotAcyclic,
    #[error("circuit has no outputs")]
    NoOutputs,
    #[error("input {0:?} has incoming edges")]
    InputHasInEdges(String),
    #[error("no value given for input {0:?}")]
    MissingInput(String),
    #[error("{0:?} is not an input of the circuit")]
    UnknownInput(String),
    #[error("truth table over {0} inputs exceeds the limit of {MAX_TABLE_INPUTS}")]
    TooManyInputs(usize),
    #[error("monotonicity is defined for single-output tables; got {0} outputs")]
    NotSingleOutput(usize),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    Buf,
    Not,
    And,
    Or,
    Nand,
    Nor,
}

impl GateKind {
    pub const ALL: [GateKind; 6] =
        [GateKind::Buf, GateKind::Not, GateKind::And, GateKind::Or, GateKind::Nand, GateKind::Nor];

    /// Closed-form truth function.
    pub fn apply(self, inputs: &[bool]) -> bool {
        let all = inputs.iter().all(|&x| x);
        let any = inputs.iter().any(|&x| x);
        match self {
            GateKind::Buf => any,
            GateKind::Not => !any,
            GateKind::And => all,
            GateKind::Or => any,
            GateKind::Nand => !all,
            GateKind::Nor => !any,
        }
    }

    pub fn fan_in_range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            GateKind::Buf | GateKind::Not => 1..=1,
            _ => 2..=MAX_FAN_IN,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::Buf => "BUF",
            GateKind::Not => "NOT",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
        })
    }
}

/// A non-negative ratio of small integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: u32,
    pub den: u32,
}

impl Ratio {
    pub const fn new(num: u32, den: u32) -> Self {
        Ratio { num, den }
    }

    /// Correctly rounded `num / den`.
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// Rule and threshold realizing a gate, with the interval `(lower, upper]`
/// of thresholds that realize the same function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateAssignment {
    pub kind: GateKind,
    pub fan_in: usize,
    pub rule: Rule,
    pub phi: Ratio,
    pub lower: Ratio,
    pub upper: Ratio,
}

impl GateAssignment {
    pub fn phi(&self) -> f64 {
        self.phi.value()
    }
}

pub fn phi_for_gate(kind: GateKind, fan_in: usize) -> Result<GateAssignment, CircuitError> {
    if !kind.fan_in_range().contains(&fan_in) {
        return Err(CircuitError::UnsupportedFanIn { kind, fan_in });
    }
    let k = fan_in as u32;
    let (rule, phi, lower, upper) = match kind {
        GateKind::Buf => (Rule::Monotone, Ratio::new(1, 2), Ratio::new(0, 1), Ratio::new(1, 1)),
        GateKind::Not => (Rule::Antagonistic, Ratio::new(1, 2), Ratio::new(0, 1), Ratio::new(1, 1)),
        GateKind::Or => (Rule::Monotone, Ratio::new(1, k), Ratio::new(0, 1), Ratio::new(1, k)),
        GateKind::Nor => (Rule::Antagonistic, Ratio::new(1, k), Ratio::new(0, 1), Ratio::new(1, k)),
        GateKind::And => (Rule::Monotone, Ratio::new(2 * k - 1, 2 * k), Ratio::new(k - 1, k), Ratio::new(1, 1)),
        GateKind::Nand => (Rule::Antagonistic, Ratio::new(2 * k - 1, 2 * k), Ratio::new(k - 1, k), Ratio::new(1, 1)),
    };
    Ok(GateAssignment { kind, fan_in, rule, phi, lower, upper })
}

/// Target gate basis for [`compile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Every operator maps to its own gate; XOR uses four NANDs.
    Mixed,
    /// NAND gates plus one-input NOT nodes.
    NandOnly,
    /// NOR gates plus one-input NOT nodes.
    NorOnly,
}

impl std::str::FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mixed" => Ok(Basis::Mixed),
            "nand" => Ok(Basis::NandOnly),
            "nor" => Ok(Basis::NorOnly),
            other => Err(format!("unknown basis {other:?} (expected mixed, nand or nor)")),
        }
    }
}

/// A directed acyclic cascade network with named inputs and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    network: Network,
}

impl CompiledCircuit {
    /// Wrap a network that carries `inputs`/`outputs` maps, checking that it
    /// is acyclic and that inputs have no in-edges.
    pub fn from_network(network: Network) -> Result<Self, CircuitError> {
        if network.topological_order().is_none() {
            return Err(CircuitError::NotAcyclic);
        }
        if network.outputs().is_empty() {
            return Err(CircuitError::NoOutputs);
        }
        if let Some((name, _)) = network.inputs().iter().find(|(_, &id)| network.in_degree(id) > 0) {
            return Err(CircuitError::InputHasInEdges(name.clone()));
        }
        Ok(CompiledCircuit { network })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn into_network(self) -> Network {
        self.network
    }

    pub fn inputs(&self) -> &IndexMap<String, NodeId> {
        self.network.inputs()
    }

    pub fn outputs(&self) -> &IndexMap<String, NodeId> {
        self.network.outputs()
    }
}

/// Compile one expression with output name `out`.
pub fn compile(expr: &Expr, basis: Basis) -> Result<CompiledCircuit, CircuitError> {
    compile_outputs(&[("out".to_string(), expr.clone())], basis)
}

/// Compile several named expressions into one shared network.
///
/// Inputs are the union of the expressions' variables in name order and take
/// the first node ids; gates follow in creation (topological) order. Gates
/// that end up feeding no output are dropped.
pub fn compile_outputs(outputs: &[(String, Expr)], basis: Basis) -> Result<CompiledCircuit, CircuitError> {
    if outputs.is_empty() {
        return Err(CircuitError::NoOutputs);
    }
    let mut b = Builder::default();
    let vars: BTreeSet<String> = outputs.iter().flat_map(|(_, e)| e.variables()).collect();
    for v in vars {
        b.input(v);
    }
    let mut out_ids = IndexMap::new();
    for (name, e) in outputs {
        let id = b.lower(e, basis)?;
        out_ids.insert(name.clone(), id);
    }
    b.finish(out_ids)
}

/// The standard five-gate NAND half-adder with outputs `sum` and `carry`.
///
/// ```text
/// n1 = NAND(a, b)   n2 = NAND(a, n1)   n3 = NAND(b, n1)
/// sum = NAND(n2, n3)                   carry = NOT(n1)
/// ```
pub fn compile_half_adder() -> CompiledCircuit {
    let mut b = Builder::default();
    let a = b.input("a".into());
    let bb = b.input("b".into());
    let build = |b: &mut Builder| -> Result<IndexMap<String, NodeId>, CircuitError> {
        let n1 = b.gate(GateKind::Nand, vec![a, bb])?;
        let n2 = b.gate(GateKind::Nand, vec![a, n1])?;
        let n3 = b.gate(GateKind::Nand, vec![bb, n1])?;
        let sum = b.gate(GateKind::Nand, vec![n2, n3])?;
        let carry = b.not(n1)?;
        Ok(IndexMap::from([("sum".to_string(), sum), ("carry".to_string(), carry)]))
    };
    let outputs = build(&mut b).expect("fixed fan-ins are valid");
    b.finish(outputs).expect("half-adder is a valid circuit")
}

/// A circuit holding exactly one gate of `kind` over inputs `x1..xk`, with
/// its canonical threshold or the override `phi`.
pub fn gate_circuit(kind: GateKind, fan_in: usize, phi: Option<f64>) -> Result<CompiledCircuit, CircuitError> {
    let assignment = phi_for_gate(kind, fan_in)?;
    let mut nodes = Vec::with_capacity(fan_in + 1);
    let mut edges = Vec::with_capacity(fan_in);
    let mut inputs = IndexMap::new();
    let gate = NodeId::from(fan_in);
    for i in 0..fan_in {
        let id = NodeId::from(i);
        nodes.push(NodeSpec { id, rule: Rule::Monotone, phi: INPUT_PHI });
        edges.push((id, gate));
        inputs.insert(format!("x{}", i + 1), id);
    }
    nodes.push(NodeSpec { id: gate, rule: assignment.rule, phi: phi.unwrap_or(assignment.phi()) });
    let outputs = IndexMap::from([("out".to_string(), gate)]);
    let network = Network::with_ports(true, nodes, edges, BTreeSet::new(), inputs, outputs)?;
    CompiledCircuit::from_network(network)
}

#[derive(Default)]
struct Builder {
    nodes: Vec<NodeSpec>,
    edges: Vec<(NodeId, NodeId)>,
    inputs: IndexMap<String, NodeId>,
    memo: HashMap<(GateKind, Vec<NodeId>), NodeId>,
    /// NOT node -> its operand, for double-negation elimination.
    negation_of: HashMap<NodeId, NodeId>,
}

impl Builder {
    fn push(&mut self, rule: Rule, phi: f64) -> NodeId {
        let id = NodeId::from(self.nodes.len());
        self.nodes.push(NodeSpec { id, rule, phi });
        id
    }

    fn input(&mut self, name: String) -> NodeId {
        if let Some(&id) = self.inputs.get(&name) {
            return id;
        }
        let id = self.push(Rule::Monotone, INPUT_PHI);
        self.inputs.insert(name, id);
        id
    }

    fn not(&mut self, x: NodeId) -> Result<NodeId, CircuitError> {
        if let Some(&inner) = self.negation_of.get(&x) {
            return Ok(inner);
        }
        let id = self.gate(GateKind::Not, vec![x])?;
        self.negation_of.insert(id, x);
        Ok(id)
    }

    /// A gate over the distinct members of `operands`. Repeated operands are
    /// idempotent for AND/OR, and a NAND/NOR left with one operand is a NOT.
    fn gate(&mut self, kind: GateKind, mut operands: Vec<NodeId>) -> Result<NodeId, CircuitError> {
        operands.sort();
        operands.dedup();
        if operands.len() == 1 {
            match kind {
                GateKind::And | GateKind::Or => return Ok(operands[0]),
                GateKind::Nand | GateKind::Nor => return self.not(operands[0]),
                GateKind::Not | GateKind::Buf => {}
            }
        }
        let key = (kind, operands);
        if let Some(&id) = self.memo.get(&key) {
            return Ok(id);
        }
        let assignment = phi_for_gate(kind, key.1.len())?;
        let id = self.push(assignment.rule, assignment.phi());
        self.edges.extend(key.1.iter().map(|&src| (src, id)));
        self.memo.insert(key, id);
        Ok(id)
    }

    fn lower_all(&mut self, es: &[Expr], basis: Basis) -> Result<Vec<NodeId>, CircuitError> {
        es.iter().map(|e| self.lower(e, basis)).collect()
    }

    fn negate_all(&mut self, ids: Vec<NodeId>) -> Result<Vec<NodeId>, CircuitError> {
        ids.into_iter().map(|x| self.not(x)).collect()
    }

    fn lower(&mut self, e: &Expr, basis: Basis) -> Result<NodeId, CircuitError> {
        use GateKind::*;
        match e {
            Expr::Var(v) => Ok(self.input(v.clone())),
            Expr::Not(inner) => {
                let x = self.lower(inner, basis)?;
                self.not(x)
            }
            Expr::Xor(a, b) => {
                let (a, b) = (self.lower(a, basis)?, self.lower(b, basis)?);
                match basis {
                    Basis::Mixed | Basis::NandOnly => self.xor_nand(a, b),
                    Basis::NorOnly => self.xor_nor(a, b),
                }
            }
            Expr::And(es) | Expr::Or(es) | Expr::Nand(es) | Expr::Nor(es) => {
                let ids = self.lower_all(es, basis)?;
                let kind = match e {
                    Expr::And(_) => And,
                    Expr::Or(_) => Or,
                    Expr::Nand(_) => Nand,
                    _ => Nor,
                };
                match (basis, kind) {
                    (Basis::Mixed, _) | (Basis::NandOnly, Nand) | (Basis::NorOnly, Nor) => self.gate(kind, ids),
                    // AND = NOT NAND; OR = NAND of negations; NOR = NOT OR.
                    (Basis::NandOnly, And) => {
                        let g = self.gate(Nand, ids)?;
                        self.not(g)
                    }
                    (Basis::NandOnly, Or) => {
                        let neg = self.negate_all(ids)?;
                        self.gate(Nand, neg)
                    }
                    (Basis::NandOnly, _) => {
                        let neg = self.negate_all(ids)?;
                        let g = self.gate(Nand, neg)?;
                        self.not(g)
                    }
                    // OR = NOT NOR; AND = NOR of negations; NAND = NOT AND.
                    (Basis::NorOnly, Or) => {
                        let g = self.gate(Nor, ids)?;
                        self.not(g)
                    }
                    (Basis::NorOnly, And) => {
                        let neg = self.negate_all(ids)?;
                        self.gate(Nor, neg)
                    }
                    (Basis::NorOnly, _) => {
                        let neg = self.negate_all(ids)?;
                        let g = self.gate(Nor, neg)?;
                        self.not(g)
                    }
                }
            }
        }
    }

    fn xor_nand(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, CircuitError> {
        let n1 = self.gate(GateKind::Nand, vec![a, b])?;
        let n2 = self.gate(GateKind::Nand, vec![a, n1])?;
        let n3 = self.gate(GateKind::Nand, vec![b, n1])?;
        self.gate(GateKind::Nand, vec![n2, n3])
    }

    /// Four NORs give XNOR; one more NOT gives XOR.
    fn xor_nor(&mut self, a: NodeId, b: NodeId) -> Result<NodeId, CircuitError> {
        let n1 = self.gate(GateKind::Nor, vec![a, b])?;
        let n2 = self.gate(GateKind::Nor, vec![a, n1])?;
        let n3 = self.gate(GateKind::Nor, vec![b, n1])?;
        let xnor = self.gate(GateKind::Nor, vec![n2, n3])?;
        self.not(xnor)
    }

    /// Drop gates that feed no output, renumber, and build the network.
    fn finish(self, outputs: IndexMap<String, NodeId>) -> Result<CompiledCircuit, CircuitError> {
        let n = self.nodes.len();
        let mut preds = vec![Vec::new(); n];
        for &(u, v) in &self.edges {
            preds[v.index()].push(u);
        }
        let mut keep = vec![false; n];
        for &id in self.inputs.values() {
            keep[id.index()] = true;
        }
        let mut stack: Vec<NodeId> = outputs.values().copied().collect();
        let mut seen = vec![false; n];
        while let Some(u) = stack.pop() {
            if std::mem::replace(&mut seen[u.index()], true) {
                continue;
            }
            keep[u.index()] = true;
            stack.extend(&preds[u.index()]);
        }
        let mut remap = vec![None; n];
        let mut nodes = Vec::new();
        for (old, spec) in self.nodes.iter().enumerate() {
            if keep[old] {
                let id = NodeId::from(nodes.len());
                remap[old] = Some(id);
                nodes.push(NodeSpec { id, ..*spec });
            }
        }
        let map = |u: NodeId| remap[u.index()].expect("kept node");
        let edges = self
            .edges
            .iter()
            .filter(|(u, v)| keep[u.index()] && keep[v.index()])
            .map(|&(u, v)| (map(u), map(v)))
            .collect();
        let inputs = self.inputs.iter().map(|(k, &v)| (k.clone(), map(v))).collect();
        let outputs = outputs.iter().map(|(k, &v)| (k.clone(), map(v))).collect();
        let network = Network::with_ports(true, nodes, edges, BTreeSet::new(), inputs, outputs)?;
        CompiledCircuit::from_network(network)
    }
}
