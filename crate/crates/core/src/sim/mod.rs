//! Exact statevector simulation.
//!
//! Qubit 0 is the least significant bit of the basis index. A gate owns a
//! list of target qubits (the wires its matrix acts on, `targets[0]` being
//! the least significant local wire) and an optional list of control qubits
//! that all must read 1.

mod fuse;
mod serial;
pub mod stats;

pub mod decompose;

pub use fuse::fuse;
pub use stats::{stats, CircuitStats};

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{norm2, C64, ComplexMatrix};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Matrix payload for an arbitrary-unitary gate. `power` repetitions of
/// `matrix` are applied; the decomposition passes expand the power into
/// repeated copies of the base circuit.
#[derive(Clone, Debug)]
pub struct UnitaryGate {
    pub matrix: Arc<ComplexMatrix>,
    pub power: u64,
}

#[derive(Clone, Debug)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Phase(f64),
    Swap,
    Unitary(UnitaryGate),
}

impl GateKind {
    pub fn label(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::Rx(_) => "RX",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::Phase(_) => "PHASE",
            GateKind::Swap => "SWAP",
            GateKind::Unitary(_) => "UNITARY",
        }
    }

    /// Number of target wires the kind acts on.
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Swap => 2,
            GateKind::Unitary(u) => {
                let d = u.matrix.dim();
                d.trailing_zeros() as usize
            }
            _ => 1,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Phase(t) => {
                vec![*t]
            }
            _ => Vec::new(),
        }
    }

    /// The matrix applied to the target wires, with any `power` folded in.
    pub fn matrix(&self) -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        match self {
            GateKind::H => ComplexMatrix::from_rows(&[
                vec![ONE * FRAC_1_SQRT_2, ONE * FRAC_1_SQRT_2],
                vec![ONE * FRAC_1_SQRT_2, -ONE * FRAC_1_SQRT_2],
            ]),
            GateKind::X => ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
            GateKind::Y => ComplexMatrix::from_rows(&[vec![ZERO, -i], vec![i, ZERO]]),
            GateKind::Z => ComplexMatrix::from_diagonal(&[ONE, -ONE]),
            GateKind::S => ComplexMatrix::from_diagonal(&[ONE, i]),
            GateKind::Sdg => ComplexMatrix::from_diagonal(&[ONE, -i]),
            GateKind::T => {
                ComplexMatrix::from_diagonal(&[ONE, C64::new(0.0, PI / 4.0).exp()])
            }
            GateKind::Tdg => {
                ComplexMatrix::from_diagonal(&[ONE, C64::new(0.0, -PI / 4.0).exp()])
            }
            GateKind::Rx(t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                ComplexMatrix::from_rows(&[vec![ONE * c, -i * s], vec![-i * s, ONE * c]])
            }
            GateKind::Ry(t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                ComplexMatrix::from_rows(&[vec![ONE * c, -ONE * s], vec![ONE * s, ONE * c]])
            }
            GateKind::Rz(t) => ComplexMatrix::from_diagonal(&[
                C64::new(0.0, -t / 2.0).exp(),
                C64::new(0.0, t / 2.0).exp(),
            ]),
            GateKind::Phase(t) => {
                ComplexMatrix::from_diagonal(&[ONE, C64::new(0.0, *t).exp()])
            }
            GateKind::Swap => {
                let mut m = ComplexMatrix::zeros(4);
                m.set(0, 0, ONE);
                m.set(1, 2, ONE);
                m.set(2, 1, ONE);
                m.set(3, 3, ONE);
                m
            }
            GateKind::Unitary(u) => {
                if u.power == 1 {
                    (*u.matrix).clone()
                } else {
                    u.matrix.pow(u.power)
                }
            }
        }
    }

    pub fn inverse(&self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Rx(t) => GateKind::Rx(-t),
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::Phase(t) => GateKind::Phase(-t),
            GateKind::Unitary(u) => GateKind::Unitary(UnitaryGate {
                matrix: Arc::new(u.matrix.adjoint()),
                power: u.power,
            }),
            other => other.clone(),
        }
    }

    /// True when the full-space matrix is diagonal regardless of controls.
    pub fn is_diagonal(&self) -> bool {
        match self {
            GateKind::Z
            | GateKind::S
            | GateKind::Sdg
            | GateKind::T
            | GateKind::Tdg
            | GateKind::Rz(_)
            | GateKind::Phase(_) => true,
            GateKind::Unitary(u) => {
                let m = &u.matrix;
                (0..m.dim()).all(|r| {
                    (0..m.dim()).all(|c| r == c || m.get(r, c).norm() <= 1e-14)
                })
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<usize>) -> Self {
        Self {
            kind,
            targets,
            controls,
        }
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }

    /// Label with one `C` per control, e.g. `CX` or `CCZ`.
    pub fn qualified_label(&self) -> String {
        let mut s = "C".repeat(self.controls.len());
        s.push_str(self.kind.label());
        s
    }

    /// All wires the gate touches.
    pub fn involved(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().chain(self.controls.iter()).copied()
    }

    pub fn inverse(&self) -> Gate {
        Gate {
            kind: self.kind.inverse(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    pub fn is_cx(&self) -> bool {
        matches!(self.kind, GateKind::X) && self.controls.len() == 1
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::Invalid(format!(
                "{} gate wants {} targets, got {}",
                self.label(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for q in self.involved() {
            if q >= n_qubits {
                return Err(Error::Invalid(format!(
                    "{} gate touches qubit {q} on a {n_qubits}-qubit circuit",
                    self.label()
                )));
            }
            if !seen.insert(q) {
                return Err(Error::Invalid(format!(
                    "{} gate touches qubit {q} twice",
                    self.label()
                )));
            }
        }
        if let GateKind::Unitary(u) = &self.kind {
            let d = u.matrix.dim();
            if d == 0 || !d.is_power_of_two() {
                return Err(Error::Dimension(format!(
                    "unitary gate matrix dimension {d} is not a power of two"
                )));
            }
            if u.power == 0 {
                return Err(Error::Invalid("unitary gate power must be positive".into()));
            }
            let defect = u.matrix.unitarity_defect();
            if defect > 1e-10 {
                return Err(Error::NotUnitary(defect));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn h(&mut self, q: usize) {
        self.push(Gate::new(GateKind::H, vec![q], vec![]));
    }

    pub fn x(&mut self, q: usize) {
        self.push(Gate::new(GateKind::X, vec![q], vec![]));
    }

    pub fn y(&mut self, q: usize) {
        self.push(Gate::new(GateKind::Y, vec![q], vec![]));
    }

    pub fn z(&mut self, q: usize) {
        self.push(Gate::new(GateKind::Z, vec![q], vec![]));
    }

    pub fn s(&mut self, q: usize) {
        self.push(Gate::new(GateKind::S, vec![q], vec![]));
    }

    pub fn t(&mut self, q: usize) {
        self.push(Gate::new(GateKind::T, vec![q], vec![]));
    }

    pub fn rx(&mut self, theta: f64, q: usize) {
        self.push(Gate::new(GateKind::Rx(theta), vec![q], vec![]));
    }

    pub fn ry(&mut self, theta: f64, q: usize) {
        self.push(Gate::new(GateKind::Ry(theta), vec![q], vec![]));
    }

    pub fn rz(&mut self, theta: f64, q: usize) {
        self.push(Gate::new(GateKind::Rz(theta), vec![q], vec![]));
    }

    pub fn phase(&mut self, theta: f64, q: usize) {
        self.push(Gate::new(GateKind::Phase(theta), vec![q], vec![]));
    }

    pub fn cx(&mut self, control: usize, target: usize) {
        self.push(Gate::new(GateKind::X, vec![target], vec![control]));
    }

    pub fn cphase(&mut self, theta: f64, control: usize, target: usize) {
        self.push(Gate::new(GateKind::Phase(theta), vec![target], vec![control]));
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.push(Gate::new(GateKind::Swap, vec![a, b], vec![]));
    }

    pub fn unitary(&mut self, matrix: ComplexMatrix, targets: Vec<usize>) {
        self.push(Gate::new(
            GateKind::Unitary(UnitaryGate {
                matrix: Arc::new(matrix),
                power: 1,
            }),
            targets,
            vec![],
        ));
    }

    pub fn controlled_unitary(
        &mut self,
        matrix: Arc<ComplexMatrix>,
        power: u64,
        targets: Vec<usize>,
        controls: Vec<usize>,
    ) {
        self.push(Gate::new(
            GateKind::Unitary(UnitaryGate { matrix, power }),
            targets,
            controls,
        ));
    }

    /// Appends every gate of `other`, mapping its qubit `i` to `map[i]`.
    pub fn extend_mapped(&mut self, other: &Circuit, map: &[usize]) {
        assert_eq!(map.len(), other.n_qubits);
        for g in &other.gates {
            self.push(Gate::new(
                g.kind.clone(),
                g.targets.iter().map(|&q| map[q]).collect(),
                g.controls.iter().map(|&q| map[q]).collect(),
            ));
        }
    }

    pub fn extend(&mut self, other: &Circuit) {
        let map: Vec<usize> = (0..other.n_qubits).collect();
        self.extend_mapped(other, &map);
    }

    /// The adjoint circuit: gates reversed and inverted.
    pub fn inverted(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct QuantumState {
    pub n_qubits: usize,
    pub amps: Vec<C64>,
}

impl QuantumState {
    /// The all-zeros computational basis state.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::Dimension(format!(
                "state length {} is not a power of two",
                amps.len()
            )));
        }
        let n = norm2(&amps);
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!("state norm {n} is not 1")));
        }
        Ok(Self {
            n_qubits: amps.len().trailing_zeros() as usize,
            amps,
        })
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.amps)
    }

    /// Probability of reading `outcome` on `qubit`.
    pub fn probability(&self, qubit: usize, outcome: u8) -> f64 {
        let mask = 1usize << qubit;
        self.amps
            .iter()
            .enumerate()
            .filter(|(idx, _)| ((idx & mask != 0) as u8) == outcome)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Runs `circuit` on `|0...0>`.
pub fn run(circuit: &Circuit) -> Result<QuantumState> {
    run_from(circuit, QuantumState::zero(circuit.n_qubits))
}

/// Runs `circuit` on an arbitrary initial state.
pub fn run_from(circuit: &Circuit, mut state: QuantumState) -> Result<QuantumState> {
    if state.n_qubits != circuit.n_qubits {
        return Err(Error::Dimension(format!(
            "state has {} qubits, circuit wants {}",
            state.n_qubits, circuit.n_qubits
        )));
    }
    for gate in &circuit.gates {
        gate.validate(circuit.n_qubits)?;
        apply_gate(&mut state, gate);
    }
    Ok(state)
}

/// Full unitary of `circuit`, built column by column. Exponential in the
/// qubit count; meant for checking small circuits against references.
pub fn circuit_unitary(circuit: &Circuit) -> Result<ComplexMatrix> {
    let dim = 1usize << circuit.n_qubits;
    let mut u = ComplexMatrix::zeros(dim);
    for col in 0..dim {
        let mut amps = vec![ZERO; dim];
        amps[col] = C64::new(1.0, 0.0);
        let state = run_from(circuit, QuantumState::from_amplitudes(amps)?)?;
        for row in 0..dim {
            u.set(row, col, state.amps[row]);
        }
    }
    Ok(u)
}

fn apply_gate(state: &mut QuantumState, gate: &Gate) {
    let m = gate.kind.matrix();
    let k = gate.targets.len();
    let ctrl_mask: usize = gate.controls.iter().map(|&q| 1usize << q).sum();

    if k == 1 && gate.controls.is_empty() {
        apply_single(state, &m, gate.targets[0]);
        return;
    }

    // Local basis offsets: pattern p sets bit i of p on wire targets[i].
    let offsets: Vec<usize> = (0..1usize << k)
        .map(|p| {
            gate.targets
                .iter()
                .enumerate()
                .filter(|(i, _)| p >> i & 1 == 1)
                .map(|(_, &q)| 1usize << q)
                .sum()
        })
        .collect();
    let target_mask: usize = offsets[offsets.len() - 1];

    let dim = state.amps.len();
    let mut scratch = vec![ZERO; 1 << k];
    for base in 0..dim {
        if base & target_mask != 0 || base & ctrl_mask != ctrl_mask {
            continue;
        }
        for (p, off) in offsets.iter().enumerate() {
            scratch[p] = state.amps[base | off];
        }
        for (p, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (q, s) in scratch.iter().enumerate() {
                acc += m.get(p, q) * s;
            }
            state.amps[base | off] = acc;
        }
    }
}

fn apply_single(state: &mut QuantumState, m: &ComplexMatrix, target: usize) {
    let (m00, m01, m10, m11) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    let low_mask = (1usize << target) - 1;
    let bit = 1usize << target;
    let half = state.amps.len() / 2;
    for i in 0..half {
        let idx0 = ((i & !low_mask) << 1) | (i & low_mask);
        let idx1 = idx0 | bit;
        let a0 = state.amps[idx0];
        let a1 = state.amps[idx1];
        state.amps[idx0] = m00 * a0 + m01 * a1;
        state.amps[idx1] = m10 * a0 + m11 * a1;
    }
}

/// Collapses `qubit` to `outcome` and renormalizes. The qubit count is kept;
/// amplitudes inconsistent with the outcome become zero. Returns the
/// post-measurement state and the probability of the outcome.
pub fn postselect(state: &QuantumState, qubit: usize, outcome: u8) -> Result<(QuantumState, f64)> {
    if qubit >= state.n_qubits {
        return Err(Error::Invalid(format!(
            "postselect on qubit {qubit} of a {}-qubit state",
            state.n_qubits
        )));
    }
    let prob = state.probability(qubit, outcome);
    if prob < 1e-12 {
        return Err(Error::ZeroSuccessProbability { prob });
    }
    let mask = 1usize << qubit;
    let scale = 1.0 / prob.sqrt();
    let amps: Vec<C64> = state
        .amps
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            if ((idx & mask != 0) as u8) == outcome {
                a * scale
            } else {
                ZERO
            }
        })
        .collect();
    Ok((
        QuantumState {
            n_qubits: state.n_qubits,
            amps,
        },
        prob,
    ))
}
