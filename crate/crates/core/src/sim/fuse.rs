//! Gate fusion.
//!
//! Three rewrite passes, each preserving the circuit unitary exactly up to
//! floating-point roundoff:
//!
//! (a) adjacent runs of uncontrolled single-qubit gates on one wire merge
//!     into a single unitary;
//! (b) gates whose matrix is the identity disappear, where uncontrolled
//!     gates may differ from the identity by a global phase but controlled
//!     gates must match it exactly (a controlled global phase is a relative
//!     phase);
//! (c) diagonal gates merge across gates that commute with them: anything on
//!     disjoint wires, a CX whose overlap is only its control, and other
//!     diagonal gates. A final identity sweep clears cancellations produced
//!     by the merge.

use std::sync::Arc;

use crate::linalg::{C64, ComplexMatrix};

use super::{Circuit, Gate, GateKind, UnitaryGate};

const EPS: f64 = 1e-12;

pub fn fuse(circuit: &Circuit) -> Circuit {
    let a = merge_single_qubit_runs(circuit);
    let b = drop_identities(&a);
    let c = merge_diagonals(&b);
    drop_identities(&c)
}

fn merge_single_qubit_runs(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.n_qubits);
    // Per-wire pending run: accumulated matrix, plus the original gate when
    // the run still holds a single gate so its label survives.
    let mut pending: Vec<Option<(ComplexMatrix, Option<Gate>)>> = vec![None; circuit.n_qubits];

    let flush = |pending: &mut Vec<Option<(ComplexMatrix, Option<Gate>)>>,
                 out: &mut Circuit,
                 q: usize| {
        if let Some((m, single)) = pending[q].take() {
            match single {
                Some(gate) => out.push(gate),
                None => out.push(Gate::new(
                    GateKind::Unitary(UnitaryGate {
                        matrix: Arc::new(m),
                        power: 1,
                    }),
                    vec![q],
                    vec![],
                )),
            }
        }
    };

    for gate in &circuit.gates {
        if gate.targets.len() == 1 && gate.controls.is_empty() {
            let q = gate.targets[0];
            let m = gate.kind.matrix();
            pending[q] = Some(match pending[q].take() {
                None => (m, Some(gate.clone())),
                Some((acc, _)) => (m.matmul(&acc), None),
            });
        } else {
            let mut qs: Vec<usize> = gate.involved().collect();
            qs.sort_unstable();
            for q in qs {
                flush(&mut pending, &mut out, q);
            }
            out.push(gate.clone());
        }
    }
    for q in 0..circuit.n_qubits {
        flush(&mut pending, &mut out, q);
    }
    out
}

fn is_identity_up_to_phase(m: &ComplexMatrix) -> bool {
    let m00 = m.get(0, 0);
    if (m00.norm() - 1.0).abs() > EPS {
        return false;
    }
    let phase = m00 / m00.norm();
    m.max_abs_diff(&ComplexMatrix::identity(m.dim()).scale(phase)) <= EPS
}

fn is_identity_exact(m: &ComplexMatrix) -> bool {
    m.max_abs_diff(&ComplexMatrix::identity(m.dim())) <= EPS
}

fn drop_identities(circuit: &Circuit) -> Circuit {
    let mut out = Circuit::new(circuit.n_qubits);
    for gate in &circuit.gates {
        let m = gate.kind.matrix();
        let removable = if gate.controls.is_empty() {
            is_identity_up_to_phase(&m)
        } else {
            is_identity_exact(&m)
        };
        if !removable {
            out.push(gate.clone());
        }
    }
    out
}

/// Diagonal of the gate matrix re-indexed so that wire order is ascending.
fn diagonal_sorted(gate: &Gate, sorted: &[usize]) -> Vec<C64> {
    let m = gate.kind.matrix();
    let k = gate.targets.len();
    (0..1usize << k)
        .map(|p| {
            let mut orig = 0usize;
            for (i, wire) in sorted.iter().enumerate() {
                let j = gate.targets.iter().position(|w| w == wire).unwrap();
                orig |= (p >> i & 1) << j;
            }
            m.get(orig, orig)
        })
        .collect()
}

fn footprint(gate: &Gate) -> (Vec<usize>, Vec<usize>) {
    let mut t = gate.targets.clone();
    let mut c = gate.controls.clone();
    t.sort_unstable();
    c.sort_unstable();
    (t, c)
}

fn commutes_with_diagonal(gate: &Gate, diag_wires: &[usize]) -> bool {
    if gate.kind.is_diagonal() {
        return true;
    }
    let overlap: Vec<usize> = gate
        .involved()
        .filter(|q| diag_wires.contains(q))
        .collect();
    if overlap.is_empty() {
        return true;
    }
    // CX commutes when the diagonal only touches its control.
    gate.is_cx() && overlap == [gate.controls[0]]
}

fn merge_diagonals(circuit: &Circuit) -> Circuit {
    let mut gates: Vec<Option<Gate>> = circuit.gates.iter().cloned().map(Some).collect();
    for i in 0..gates.len() {
        let Some(gate_i) = gates[i].clone() else {
            continue;
        };
        if !gate_i.kind.is_diagonal() {
            continue;
        }
        let (targets_i, controls_i) = footprint(&gate_i);
        let wires_i: Vec<usize> = gate_i.involved().collect();
        let mut acc: Option<Gate> = None;
        for slot in gates.iter_mut().skip(i + 1) {
            let Some(gate_j) = slot.clone() else {
                continue;
            };
            if gate_j.kind.is_diagonal() && footprint(&gate_j) == (targets_i.clone(), controls_i.clone()) {
                let current = acc.as_ref().unwrap_or(&gate_i);
                acc = Some(merge_pair(current, &gate_j, &targets_i, &controls_i));
                *slot = None;
                continue;
            }
            if !commutes_with_diagonal(&gate_j, &wires_i) {
                break;
            }
        }
        if let Some(merged) = acc {
            gates[i] = Some(merged);
        }
    }
    let mut out = Circuit::new(circuit.n_qubits);
    out.gates = gates.into_iter().flatten().collect();
    out
}

fn merge_pair(a: &Gate, b: &Gate, targets: &[usize], controls: &[usize]) -> Gate {
    // Same-kind rotations add their angles and keep the label.
    match (&a.kind, &b.kind) {
        (GateKind::Rz(x), GateKind::Rz(y)) => {
            return Gate::new(GateKind::Rz(x + y), a.targets.clone(), a.controls.clone())
        }
        (GateKind::Phase(x), GateKind::Phase(y)) => {
            return Gate::new(GateKind::Phase(x + y), a.targets.clone(), a.controls.clone())
        }
        _ => {}
    }
    let da = diagonal_sorted(a, targets);
    let db = diagonal_sorted(b, targets);
    let product: Vec<C64> = da.iter().zip(&db).map(|(x, y)| x * y).collect();
    Gate::new(
        GateKind::Unitary(UnitaryGate {
            matrix: Arc::new(ComplexMatrix::from_diagonal(&product)),
            power: 1,
        }),
        targets.to_vec(),
        controls.to_vec(),
    )
}
