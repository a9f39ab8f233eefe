//! Circuit size accounting.

use std::collections::BTreeMap;

use super::Circuit;

#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct CircuitStats {
    pub gates: usize,
    /// Gates touching exactly two wires, controls included.
    pub two_qubit_gates: usize,
    /// ASAP-scheduled depth: a gate occupies one layer on every wire it
    /// touches.
    pub depth: usize,
    /// Gate counts keyed by label with a `C` prefix per control.
    pub by_label: BTreeMap<String, usize>,
}

pub fn stats(circuit: &Circuit) -> CircuitStats {
    let mut busy = vec![0usize; circuit.n_qubits];
    let mut out = CircuitStats {
        gates: circuit.gates.len(),
        ..Default::default()
    };
    for gate in &circuit.gates {
        let wires = gate.targets.len() + gate.controls.len();
        if wires == 2 {
            out.two_qubit_gates += 1;
        }
        let layer = 1 + gate.involved().map(|q| busy[q]).max().unwrap_or(0);
        for q in gate.involved() {
            busy[q] = layer;
        }
        *out.by_label.entry(gate.qualified_label()).or_insert(0) += 1;
    }
    out.depth = busy.into_iter().max().unwrap_or(0);
    out
}
