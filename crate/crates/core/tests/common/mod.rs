#![allow(dead_code)]

use std::collections::BTreeSet;

use cascade_logic::circuit::Expr;
use cascade_logic::net::{Network, NodeId, NodeSpec, Rule};
use rand::Rng;

/// Random expression over `v0..v{vars-1}` with depth at most `depth`.
pub fn random_expr(rng: &mut impl Rng, depth: usize, vars: usize) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return Expr::Var(format!("v{}", rng.gen_range(0..vars)));
    }
    let operands = |rng: &mut _| -> Vec<Expr> {
        let k = rng_fan_in(rng);
        (0..k).map(|_| random_expr(rng, depth - 1, vars)).collect()
    };
    match rng.gen_range(0..6) {
        0 => Expr::not(random_expr(rng, depth - 1, vars)),
        1 => Expr::And(operands(rng)),
        2 => Expr::Or(operands(rng)),
        3 => Expr::Nand(operands(rng)),
        4 => Expr::Nor(operands(rng)),
        _ => Expr::xor(random_expr(rng, depth - 1, vars), random_expr(rng, depth - 1, vars)),
    }
}

fn rng_fan_in(rng: &mut impl Rng) -> usize {
    if rng.gen_bool(0.75) {
        2
    } else {
        3
    }
}

/// Random directed acyclic network: edges only go from lower to higher ids,
/// the first `inputs` nodes have no in-edges, and every other node has at
/// least one in-edge. All nodes use `rule` with thresholds in (0, 1].
pub fn random_dag(rng: &mut impl Rng, inputs: usize, gates: usize, rule: Rule) -> Network {
    let n = inputs + gates;
    let nodes = (0..n)
        .map(|i| NodeSpec { id: NodeId::from(i), rule, phi: if i < inputs { 0.5 } else { 1.0 - rng.gen::<f64>() } })
        .collect();
    let mut edges = Vec::new();
    for v in inputs..n {
        let mut preds = BTreeSet::new();
        preds.insert(rng.gen_range(0..v));
        for u in 0..v {
            if rng.gen_bool(0.3) {
                preds.insert(u);
            }
        }
        edges.extend(preds.into_iter().map(|u| (NodeId::from(u), NodeId::from(v))));
    }
    Network::new(true, nodes, edges, BTreeSet::new()).unwrap()
}

/// Undirected triangle A(0) B(1) C(2); B and C antagonistic with φ = 3/4,
/// seed A.
pub fn triangle() -> Network {
    let nodes = vec![
        NodeSpec { id: NodeId(0), rule: Rule::Monotone, phi: 0.5 },
        NodeSpec { id: NodeId(1), rule: Rule::Antagonistic, phi: 0.75 },
        NodeSpec { id: NodeId(2), rule: Rule::Antagonistic, phi: 0.75 },
    ];
    let edges = vec![(NodeId(0), NodeId(1)), (NodeId(0), NodeId(2)), (NodeId(1), NodeId(2))];
    Network::new(false, nodes, edges, [NodeId(0)].into()).unwrap()
}

pub fn ids(v: &[u32]) -> Vec<NodeId> {
    v.iter().map(|&i| NodeId(i)).collect()
}
