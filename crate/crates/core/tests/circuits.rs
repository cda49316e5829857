mod common;

use cascade_logic::circuit::*;
use cascade_logic::net::{load_network, save_network, NodeId, Rule};
use cascade_logic::rng::rng_from_seed;
use indexmap::IndexMap;

fn inputs_of(k: usize, mask: usize) -> Vec<bool> {
    (0..k).map(|i| mask >> (k - 1 - i) & 1 == 1).collect()
}

/// Whether a single gate with threshold `phi` computes `kind` on all inputs.
fn realizes(kind: GateKind, k: usize, phi: f64) -> bool {
    let c = gate_circuit(kind, k, Some(phi)).unwrap();
    (0..1 << k).all(|mask| {
        let bits = inputs_of(k, mask);
        eval_bits(&c, &bits).unwrap() == [kind.apply(&bits)]
    })
}

fn fan_ins(kind: GateKind) -> std::ops::RangeInclusive<usize> {
    match kind {
        GateKind::Buf | GateKind::Not => 1..=1,
        _ => 2..=8,
    }
}

#[test]
fn canonical_gates_compute_their_truth_functions() {
    for kind in GateKind::ALL {
        for k in fan_ins(kind) {
            let a = phi_for_gate(kind, k).unwrap();
            assert!(realizes(kind, k, a.phi()), "{kind}/{k}");
            let table = truth_table(&gate_circuit(kind, k, None).unwrap()).unwrap();
            for (row, out) in table.rows.iter().enumerate() {
                assert_eq!(out[0], kind.apply(&table.input_bits(row)), "{kind}/{k} row {row}");
            }
        }
    }
}

#[test]
fn gate_thresholds_hold_across_their_intervals() {
    for kind in GateKind::ALL {
        for k in fan_ins(kind) {
            let a = phi_for_gate(kind, k).unwrap();
            let (lo, hi) = (a.lower.value(), a.upper.value());
            for i in 1..=21 {
                let phi = lo + (hi - lo) * i as f64 / 22.0;
                assert!(realizes(kind, k, phi), "{kind}/{k} interior φ={phi}");
            }
            // The upper end is included, the lower end excluded.
            assert!(realizes(kind, k, hi), "{kind}/{k} at upper {hi}");
            if lo == 0.0 {
                assert!(!realizes(kind, k, 0.0), "{kind}/{k} at φ=0");
            } else {
                assert!(!realizes(kind, k, lo), "{kind}/{k} at lower {lo}");
                assert!(!realizes(kind, k, lo - 1e-9), "{kind}/{k} below lower");
            }
            assert!(realizes(kind, k, lo + 1e-9), "{kind}/{k} just above lower");
            if hi < 1.0 {
                assert!(!realizes(kind, k, hi + 1e-9), "{kind}/{k} above upper");
            }
        }
    }
}

#[test]
fn unsupported_fan_ins_are_rejected() {
    assert!(phi_for_gate(GateKind::Not, 2).is_err());
    assert!(phi_for_gate(GateKind::And, 1).is_err());
    assert!(phi_for_gate(GateKind::Nor, MAX_FAN_IN + 1).is_err());
    assert!(phi_for_gate(GateKind::Nand, MAX_FAN_IN).is_ok());
}

fn expr_table(expr: &Expr, names: &[String]) -> Vec<bool> {
    let m = names.len();
    (0..1usize << m)
        .map(|row| {
            let bits = inputs_of(m, row);
            let value = |v: &str| bits[names.iter().position(|n| n == v).unwrap()];
            expr.eval(&value)
        })
        .collect()
}

#[test]
fn random_expressions_compile_faithfully_in_every_basis() {
    let mut rng = rng_from_seed(0x5eed);
    for case in 0..500 {
        let expr = common::random_expr(&mut rng, 4, 5);
        let mut expected = None;
        for basis in [Basis::Mixed, Basis::NandOnly, Basis::NorOnly] {
            let c = compile(&expr, basis).unwrap();
            let table = truth_table(&c).unwrap();
            let oracle = expected.get_or_insert_with(|| expr_table(&expr, &table.input_names));
            assert_eq!(&table.output_column(0), oracle, "case {case} {basis:?}: {expr}");
            // Node ids are a topological order and all gates are live.
            let net = c.network();
            assert!(net.edges().iter().all(|(u, v)| u < v));
            assert!(net.node_ids().all(|u| {
                net.in_degree(u) == 0 || c.outputs().values().any(|&o| o == u) || net.edges().iter().any(|e| e.0 == u)
            }));
        }
    }
}

#[test]
fn restricted_bases_use_only_their_gates() {
    let mut rng = rng_from_seed(77);
    for _ in 0..100 {
        let expr = common::random_expr(&mut rng, 4, 4);
        for (basis, kind) in [(Basis::NandOnly, GateKind::Nand), (Basis::NorOnly, GateKind::Nor)] {
            let c = compile(&expr, basis).unwrap();
            let net = c.network();
            for u in net.node_ids().filter(|&u| net.in_degree(u) > 0) {
                let spec = net.node(u);
                let k = net.in_degree(u);
                let want = if k == 1 { phi_for_gate(GateKind::Not, 1) } else { phi_for_gate(kind, k) }.unwrap();
                assert_eq!(spec.rule, Rule::Antagonistic);
                assert_eq!(spec.phi, want.phi());
            }
        }
    }
}

#[test]
fn de_morgan_duals_agree() {
    let pairs = [
        ("!(a & b & c)", "!a | !b | !c"),
        ("!(a | b)", "!a & !b"),
        ("a @& b", "!a | !b"),
        ("a @| b @| c", "!a & !b & !c"),
        ("a ^ b", "(a | b) & !(a & b)"),
        ("a ^ b", "(a & !b) | (!a & b)"),
    ];
    for (lhs, rhs) in pairs {
        for basis in [Basis::Mixed, Basis::NandOnly, Basis::NorOnly] {
            let l = truth_table(&compile(&parse_expr(lhs).unwrap(), basis).unwrap()).unwrap();
            let r = truth_table(&compile(&parse_expr(rhs).unwrap(), basis).unwrap()).unwrap();
            assert_eq!(l.rows, r.rows, "{lhs} vs {rhs} in {basis:?}");
        }
    }
}

#[test]
fn xor_lowerings_have_the_expected_size() {
    let xor = parse_expr("a ^ b").unwrap();
    // Two inputs plus four NAND gates.
    assert_eq!(compile(&xor, Basis::Mixed).unwrap().network().len(), 6);
    assert_eq!(compile(&xor, Basis::NandOnly).unwrap().network().len(), 6);
    // Two inputs, four NOR gates and a final NOT.
    assert_eq!(compile(&xor, Basis::NorOnly).unwrap().network().len(), 7);
    for basis in [Basis::Mixed, Basis::NandOnly, Basis::NorOnly] {
        let t = truth_table(&compile(&xor, basis).unwrap()).unwrap();
        assert_eq!(t.output_column(0), [false, true, true, false]);
    }
}

#[test]
fn structural_sharing_and_double_negation() {
    let shared = compile(&parse_expr("(a & b) | (a & b) | !!c").unwrap(), Basis::Mixed).unwrap();
    // a, b, c, one AND, one OR over {AND, c}.
    assert_eq!(shared.network().len(), 5);
}

#[test]
fn half_adder_truth_table() {
    let ha = compile_half_adder();
    assert_eq!(ha.network().len(), 7);
    let t = truth_table(&ha).unwrap();
    assert_eq!(t.to_csv(), "a,b,sum,carry\n0,0,0,0\n0,1,1,0\n1,0,1,0\n1,1,0,1\n");
    let out = eval(&ha, [("a", true), ("b", true)]).unwrap();
    assert_eq!(out, IndexMap::from([("sum".to_string(), false), ("carry".to_string(), true)]));
    assert!(matches!(eval(&ha, [("a", true)]), Err(CircuitError::MissingInput(_))));
    assert!(matches!(eval(&ha, [("a", true), ("b", true), ("q", true)]), Err(CircuitError::UnknownInput(_))));
}

#[test]
fn monotone_networks_compute_monotone_functions() {
    let mut rng = rng_from_seed(99);
    for case in 0..500 {
        let inputs = 2 + case % 4;
        let net = common::random_dag(&mut rng, inputs, 1 + case % 9, Rule::Monotone);
        let last = NodeId::from(net.len() - 1);
        let ins = (0..inputs).map(|i| (format!("x{i}"), NodeId::from(i))).collect();
        let outs = IndexMap::from([("out".to_string(), last)]);
        let net = cascade_logic::net::Network::with_ports(
            true,
            net.nodes().to_vec(),
            net.edges().to_vec(),
            Default::default(),
            ins,
            outs,
        )
        .unwrap();
        let c = CompiledCircuit::from_network(net).unwrap();
        let t = truth_table(&c).unwrap();
        assert!(is_monotone_increasing(&t).unwrap(), "case {case}");
        let f = t.output_column(0);
        // No restriction to any two inputs is XOR.
        for i in 0..inputs {
            for j in i + 1..inputs {
                let (bi, bj) = (1 << (inputs - 1 - i), 1 << (inputs - 1 - j));
                for rest in (0..1usize << inputs).filter(|r| r & (bi | bj) == 0) {
                    let sub = [f[rest], f[rest | bj], f[rest | bi], f[rest | bi | bj]];
                    assert_ne!(sub, [false, true, true, false], "case {case} pair ({i},{j})");
                }
            }
        }
    }
}

#[test]
fn antagonistic_single_gates_are_decreasing() {
    for kind in [GateKind::Nand, GateKind::Nor] {
        let t = truth_table(&gate_circuit(kind, 3, None).unwrap()).unwrap();
        assert!(is_monotone_decreasing(&t).unwrap());
        assert!(!is_monotone_increasing(&t).unwrap());
    }
    let ha = truth_table(&compile_half_adder()).unwrap();
    assert!(matches!(is_monotone_increasing(&ha), Err(CircuitError::NotSingleOutput(2))));
}

#[test]
fn compiled_circuits_survive_the_network_file() {
    let dir = std::env::temp_dir().join(format!("cascade-logic-circ-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c.json");
    let c = compile_outputs(
        &[
            ("s".into(), parse_expr("a ^ b ^ cin").unwrap()),
            ("co".into(), parse_expr("(a & b) | (cin & (a ^ b))").unwrap()),
        ],
        Basis::NandOnly,
    )
    .unwrap();
    save_network(c.network(), &path).unwrap();
    let back = CompiledCircuit::from_network(load_network(&path).unwrap()).unwrap();
    assert_eq!(back, c);
    let t = truth_table(&back).unwrap();
    assert_eq!(t.input_names, ["a", "b", "cin"]);
    for row in 0..8usize {
        let ones = row.count_ones();
        assert_eq!(t.rows[row], [ones % 2 == 1, ones >= 2], "row {row}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn parser_errors_are_positioned() {
    assert!(matches!(parse_expr(""), Err(ParseError::Empty)));
    assert!(matches!(parse_expr("a & "), Err(ParseError::UnexpectedEnd { .. })));
    assert!(matches!(parse_expr("a # b"), Err(ParseError::Unexpected { pos: 2, .. })));
    assert!(parse_expr("(a").is_err());
}
