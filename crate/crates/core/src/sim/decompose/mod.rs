//! Lowering of circuits to the {one-qubit rotation, CX} basis.
//!
//! Labeled one-qubit gates and CX pass through untouched. Everything else
//! is synthesized: SWAP and controlled-phase by fixed templates, dense
//! unitaries by ZYZ (one qubit), the Weyl/KAK normal form (two qubits) or
//! recursive block-ZXZ Shannon decomposition (larger), with controls folded
//! in as block-diagonal structure that the multiplexer shortcut picks up.
//! Powered gates expand into repeated copies of their base circuit, which
//! is synthesized once and reused.
//!
//! Per-gate global phases are dropped along the way; `decompose_with_phase`
//! reports the total so callers can reconstruct the exact unitary.

pub mod euler;
pub mod kak;
pub mod qsd;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::linalg::ComplexMatrix;

use super::{Circuit, Gate, GateKind};

/// Rewrites `circuit` over the {one-qubit, CX} gate set. The result is
/// equivalent up to a global phase.
pub fn decompose(circuit: &Circuit) -> Result<Circuit> {
    Ok(decompose_with_phase(circuit)?.0)
}

/// As [`decompose`], also returning `phase` with
/// `circuit = exp(i phase) * decomposed`.
pub fn decompose_with_phase(circuit: &Circuit) -> Result<(Circuit, f64)> {
    let mut out = Circuit::new(circuit.n_qubits);
    let mut phase = 0.0;
    // Powered copies of the same dense gate (UnitaryGate arcs are shared)
    // synthesize their base exactly once.
    let mut cache: HashMap<(usize, usize, usize), (Vec<Gate>, f64)> = HashMap::new();
    for gate in &circuit.gates {
        phase += lower_gate(gate, &mut out.gates, &mut cache)?;
    }
    Ok((out, phase))
}

fn lower_gate(
    gate: &Gate,
    out: &mut Vec<Gate>,
    cache: &mut HashMap<(usize, usize, usize), (Vec<Gate>, f64)>,
) -> Result<f64> {
    if let GateKind::Unitary(ug) = &gate.kind {
        if ug.power > 1 {
            let base = Gate::new(
                GateKind::Unitary(super::UnitaryGate {
                    matrix: Arc::clone(&ug.matrix),
                    power: 1,
                }),
                gate.targets.clone(),
                gate.controls.clone(),
            );
            let key = (
                Arc::as_ptr(&ug.matrix) as usize,
                gate.targets.len(),
                gate.controls.len(),
            );
            let (local, base_phase) = match cache.get(&key) {
                Some(hit) => hit.clone(),
                None => {
                    let entry = lower_local(&base)?;
                    cache.insert(key, entry.clone());
                    entry
                }
            };
            let wires: Vec<usize> = gate
                .targets
                .iter()
                .chain(gate.controls.iter())
                .copied()
                .collect();
            for _ in 0..ug.power {
                out.extend(local.iter().map(|g| map_wires(g, &wires)));
            }
            return Ok(base_phase * ug.power as f64);
        }
    }
    let (local, phase) = lower_local(gate)?;
    let wires: Vec<usize> = gate
        .targets
        .iter()
        .chain(gate.controls.iter())
        .copied()
        .collect();
    out.extend(local.iter().map(|g| map_wires(g, &wires)));
    Ok(phase)
}

fn map_wires(g: &Gate, wires: &[usize]) -> Gate {
    Gate::new(
        g.kind.clone(),
        g.targets.iter().map(|&q| wires[q]).collect(),
        g.controls.iter().map(|&q| wires[q]).collect(),
    )
}

/// Synthesizes one gate on local wires (targets first, controls above).
fn lower_local(gate: &Gate) -> Result<(Vec<Gate>, f64)> {
    let k = gate.targets.len();
    let m = gate.controls.len();
    let local_targets: Vec<usize> = (0..k).collect();
    let local_controls: Vec<usize> = (k..k + m).collect();
    let mut gates = Vec::new();

    if m == 0 {
        match &gate.kind {
            GateKind::Unitary(_) => {
                let phase = qsd::qsd(&gate.kind.matrix(), &local_targets, &mut gates)?;
                return Ok((gates, phase));
            }
            GateKind::Swap => {
                gates.push(Gate::new(GateKind::X, vec![1], vec![0]));
                gates.push(Gate::new(GateKind::X, vec![0], vec![1]));
                gates.push(Gate::new(GateKind::X, vec![1], vec![0]));
                return Ok((gates, 0.0));
            }
            _ => {
                gates.push(Gate::new(gate.kind.clone(), local_targets, vec![]));
                return Ok((gates, 0.0));
            }
        }
    }

    if m == 1 && matches!(gate.kind, GateKind::X) {
        gates.push(Gate::new(GateKind::X, vec![0], vec![1]));
        return Ok((gates, 0.0));
    }
    if m == 1 {
        if let GateKind::Phase(theta) = gate.kind {
            // Exact two-CX template for the controlled phase.
            let half = theta / 2.0;
            gates.push(Gate::new(GateKind::Phase(half), vec![1], vec![]));
            gates.push(Gate::new(GateKind::X, vec![0], vec![1]));
            gates.push(Gate::new(GateKind::Phase(-half), vec![0], vec![]));
            gates.push(Gate::new(GateKind::X, vec![0], vec![1]));
            gates.push(Gate::new(GateKind::Phase(half), vec![0], vec![]));
            return Ok((gates, 0.0));
        }
    }

    // General controlled block: diag(I, ..., I, V) with the controls as the
    // top wires, handled by the multiplexer shortcut inside the recursion.
    let base = gate.kind.matrix();
    let dim = 1usize << (k + m);
    let all_ones = (1usize << m) - 1;
    let u = ComplexMatrix::from_fn(dim, |row, col| {
        let (rc, cc) = (row >> k, col >> k);
        let (rt, ct) = (row & ((1 << k) - 1), col & ((1 << k) - 1));
        if rc != cc {
            C64_ZERO
        } else if rc == all_ones {
            base.get(rt, ct)
        } else if rt == ct {
            C64_ONE
        } else {
            C64_ZERO
        }
    });
    let wires: Vec<usize> = local_targets.iter().chain(&local_controls).copied().collect();
    let phase = qsd::qsd(&u, &wires, &mut gates)?;
    Ok((gates, phase))
}

const C64_ZERO: crate::linalg::C64 = crate::linalg::C64::new(0.0, 0.0);
const C64_ONE: crate::linalg::C64 = crate::linalg::C64::new(1.0, 0.0);
