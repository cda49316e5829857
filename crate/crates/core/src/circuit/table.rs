//! Evaluation by cascade, truth tables and monotonicity.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use rayon::prelude::*;

use super::{CircuitError, CompiledCircuit};
use crate::engine::{run_cascade, ScheduleMode};
use crate::net::NodeId;

/// Largest input count accepted by [`truth_table`].
pub const MAX_TABLE_INPUTS: usize = 20;

/// Evaluate `circuit` on a named assignment.
///
/// Inputs set to 1 become seeds and the cascade runs on the topological
/// schedule; an output is 1 exactly when its node ends up labeled.
pub fn eval<'a>(
    circuit: &CompiledCircuit,
    assignment: impl IntoIterator<Item = (&'a str, bool)>,
) -> Result<IndexMap<String, bool>, CircuitError> {
    let mut given: IndexMap<&str, bool> = IndexMap::new();
    for (name, bit) in assignment {
        if !circuit.inputs().contains_key(name) {
            return Err(CircuitError::UnknownInput(name.to_string()));
        }
        given.insert(name, bit);
    }
    let bits = circuit
        .inputs()
        .keys()
        .map(|name| given.get(name.as_str()).copied().ok_or_else(|| CircuitError::MissingInput(name.clone())))
        .collect::<Result<Vec<bool>, _>>()?;
    let out = eval_bits(circuit, &bits)?;
    Ok(circuit.outputs().keys().cloned().zip(out).collect())
}

/// Seeds for an input vector given in input order.
pub(crate) fn seeds_for(circuit: &CompiledCircuit, bits: &[bool]) -> BTreeSet<NodeId> {
    circuit.inputs().values().zip(bits).filter(|(_, &b)| b).map(|(&id, _)| id).collect()
}

/// Evaluate on input bits given in the circuit's input order.
pub fn eval_bits(circuit: &CompiledCircuit, bits: &[bool]) -> Result<Vec<bool>, CircuitError> {
    let seeds = seeds_for(circuit, bits);
    let result = run_cascade(circuit.network(), &seeds, &ScheduleMode::Topological)?;
    Ok(circuit.outputs().values().map(|&id| result.final_config.contains(id)).collect())
}

/// Outputs of a circuit over every input assignment.
///
/// Row `i` holds the outputs for the assignment whose bits spell `i` in
/// binary with the first input as the most significant bit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl TruthTable {
    /// Input bits of row `row`, first input first.
    pub fn input_bits(&self, row: usize) -> Vec<bool> {
        let m = self.input_names.len();
        (0..m).map(|j| row >> (m - 1 - j) & 1 == 1).collect()
    }

    /// The single-output table of output column `j`.
    pub fn column(&self, j: usize) -> TruthTable {
        TruthTable {
            input_names: self.input_names.clone(),
            output_names: vec![self.output_names[j].clone()],
            rows: self.rows.iter().map(|r| vec![r[j]]).collect(),
        }
    }

    /// Values of output `j` in row order.
    pub fn output_column(&self, j: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// CSV with a header of input then output names, one line per row.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let header: Vec<&str> = self.input_names.iter().chain(&self.output_names).map(String::as_str).collect();
        s.push_str(&header.join(","));
        s.push('\n');
        let bit = |b: bool| if b { "1" } else { "0" };
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<&str> = self.input_bits(i).into_iter().chain(row.iter().copied()).map(bit).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// Tabulate `circuit` over all `2^m` input assignments (`m ≤ 20`). Rows are
/// evaluated in parallel and collected by index.
pub fn truth_table(circuit: &CompiledCircuit) -> Result<TruthTable, CircuitError> {
    let m = circuit.inputs().len();
    if m > MAX_TABLE_INPUTS {
        return Err(CircuitError::TooManyInputs(m));
    }
    let rows = (0..1usize << m)
        .into_par_iter()
        .map(|i| {
            let bits: Vec<bool> = (0..m).map(|j| i >> (m - 1 - j) & 1 == 1).collect();
            eval_bits(circuit, &bits)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TruthTable {
        input_names: circuit.inputs().keys().cloned().collect(),
        output_names: circuit.outputs().keys().cloned().collect(),
        rows,
    })
}

fn single_column(table: &TruthTable) -> Result<Vec<bool>, CircuitError> {
    if table.output_names.len() != 1 {
        return Err(CircuitError::NotSingleOutput(table.output_names.len()));
    }
    Ok(table.output_column(0))
}

/// Checks `f(x) ≤ f(y)` along every covering pair `x < y` (one extra bit),
/// which implies it for all comparable pairs.
fn monotone_by(table: &TruthTable, ok: impl Fn(bool, bool) -> bool) -> Result<bool, CircuitError> {
    let f = single_column(table)?;
    let m = table.input_names.len();
    Ok((0..f.len()).all(|x| (0..m).filter(|b| x & (1 << b) == 0).all(|b| ok(f[x], f[x | (1 << b)]))))
}

/// `x ≤ y` componentwise implies `f(x) ≤ f(y)`.
pub fn is_monotone_increasing(table: &TruthTable) -> Result<bool, CircuitError> {
    monotone_by(table, |lo, hi| lo <= hi)
}

/// `x ≤ y` componentwise implies `f(x) ≥ f(y)`.
pub fn is_monotone_decreasing(table: &TruthTable) -> Result<bool, CircuitError> {
    monotone_by(table, |lo, hi| lo >= hi)
}
