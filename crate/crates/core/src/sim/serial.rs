//! Circuit JSON format.
//!
//! ```json
//! {
//!   "n_qubits": 2,
//!   "gates": [
//!     {"label": "H", "targets": [0], "controls": []},
//!     {"label": "RZ", "targets": [1], "controls": [0], "params": [0.5]},
//!     {"label": "UNITARY", "targets": [0, 1], "controls": [], "power": 2,
//!      "matrix": [[[1,0],[0,0],...], ...]}
//!   ]
//! }
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};

use super::{Circuit, Gate, GateKind, UnitaryGate};

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n_qubits: usize,
    gates: Vec<GateRepr>,
}

#[derive(Serialize, Deserialize)]
struct GateRepr {
    label: String,
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    power: Option<u64>,
}

impl From<&Gate> for GateRepr {
    fn from(gate: &Gate) -> Self {
        let (matrix, power) = match &gate.kind {
            GateKind::Unitary(u) => {
                let d = u.matrix.dim();
                let rows = (0..d)
                    .map(|r| {
                        (0..d)
                            .map(|c| {
                                let v = u.matrix.get(r, c);
                                [v.re, v.im]
                            })
                            .collect()
                    })
                    .collect();
                (Some(rows), (u.power != 1).then_some(u.power))
            }
            _ => (None, None),
        };
        GateRepr {
            label: gate.label().to_string(),
            targets: gate.targets.clone(),
            controls: gate.controls.clone(),
            params: gate.kind.params(),
            matrix,
            power,
        }
    }
}

impl GateRepr {
    fn into_gate(self) -> Result<Gate> {
        let one_param = |params: &[f64]| -> Result<f64> {
            if params.len() != 1 {
                return Err(Error::Parse(format!(
                    "{} gate wants exactly one parameter",
                    self.label
                )));
            }
            Ok(params[0])
        };
        let kind = match self.label.as_str() {
            "H" => GateKind::H,
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "S" => GateKind::S,
            "SDG" => GateKind::Sdg,
            "T" => GateKind::T,
            "TDG" => GateKind::Tdg,
            "RX" => GateKind::Rx(one_param(&self.params)?),
            "RY" => GateKind::Ry(one_param(&self.params)?),
            "RZ" => GateKind::Rz(one_param(&self.params)?),
            "PHASE" => GateKind::Phase(one_param(&self.params)?),
            "SWAP" => GateKind::Swap,
            "UNITARY" => {
                let rows = self
                    .matrix
                    .ok_or_else(|| Error::Parse("UNITARY gate needs a matrix".into()))?;
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Parse("UNITARY matrix must be square".into()));
                }
                let m = ComplexMatrix::from_rows(
                    &rows
                        .iter()
                        .map(|r| r.iter().map(|[re, im]| C64::new(*re, *im)).collect())
                        .collect::<Vec<_>>(),
                );
                GateKind::Unitary(UnitaryGate {
                    matrix: Arc::new(m),
                    power: self.power.unwrap_or(1),
                })
            }
            other => return Err(Error::Parse(format!("unknown gate label '{other}'"))),
        };
        Ok(Gate::new(kind, self.targets, self.controls))
    }
}

impl Circuit {
    pub fn to_json(&self) -> String {
        let repr = CircuitRepr {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().map(GateRepr::from).collect(),
        };
        serde_json::to_string_pretty(&repr).expect("circuit serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let repr: CircuitRepr =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("circuit JSON: {e}")))?;
        let gates = repr
            .gates
            .into_iter()
            .map(GateRepr::into_gate)
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit {
            n_qubits: repr.n_qubits,
            gates,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::run;
    use super::*;

    #[test]
    fn roundtrip_preserves_semantics() {
        let mut circ = Circuit::new(3);
        circ.h(0);
        circ.cx(0, 1);
        circ.rz(0.37, 2);
        circ.swap(1, 2);
        let m = ComplexMatrix::from_rows(&[
            vec![C64::new(0.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ]);
        circ.controlled_unitary(Arc::new(m), 3, vec![0], vec![2]);

        let text = circ.to_json();
        let back = Circuit::from_json(&text).unwrap();
        assert_eq!(back.n_qubits, 3);
        assert_eq!(back.gates.len(), circ.gates.len());

        let a = run(&circ).unwrap();
        let b = run(&back).unwrap();
        for (x, y) in a.amps.iter().zip(&b.amps) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn rejects_unknown_labels_and_bad_matrices() {
        let bad = r#"{"n_qubits": 1, "gates": [{"label": "FOO", "targets": [0]}]}"#;
        assert!(Circuit::from_json(bad).is_err());
        let no_matrix = r#"{"n_qubits": 1, "gates": [{"label": "UNITARY", "targets": [0]}]}"#;
        assert!(Circuit::from_json(no_matrix).is_err());
        let no_param = r#"{"n_qubits": 1, "gates": [{"label": "RZ", "targets": [0]}]}"#;
        assert!(Circuit::from_json(no_param).is_err());
    }
}
