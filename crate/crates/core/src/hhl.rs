//! The HHL quantum linear solver, built and executed exactly.
//!
//! Pipeline on a register of `n_d` data qubits, `n_c` clock qubits and one
//! flag ancilla (wires in that order, data at the bottom):
//!
//! 1. prepare the right-hand side on the data register;
//! 2. phase estimation of `U = exp(iAt)` onto the clock;
//! 3. rotate the ancilla by `2 asin(C / lambda(k))` per clock value `k`,
//!    encoding the eigenvalue inverses in the ancilla amplitude;
//! 4. undo phase estimation and postselect the ancilla on |1>.
//!
//! The surviving data register is proportional to `A^{-1} b`, and the
//! postselection probability recovers the solution norm through
//! `|A^{-1} b| = sqrt(Pr) / C`.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    classical_solve, condition_number, eig_hermitian, norm2, normalize, relative_error,
    state_distance, unitary_exp, C64, ComplexMatrix, LinearSystem,
};
use crate::sim::decompose::qsd::{emit_multiplexed_rotation, RotationAxis};
use crate::sim::{postselect, run, Circuit};

/// Manual overrides; anything left `None` is chosen from the system.
#[derive(Clone, Debug, Default)]
pub struct HHLConfig {
    /// Clock register width.
    pub n_c: Option<usize>,
    /// Evolution time of the Hamiltonian simulation.
    pub t: Option<f64>,
    /// Inversion constant C. Must not exceed the smallest representable
    /// eigenvalue magnitude `2 pi / (2^{n_c} t)`.
    pub c_const: Option<f64>,
}

/// Clock width covering both the register size and the condition number,
/// with one extra sign qubit when the spectrum reaches below zero.
pub fn select_clock_qubits(n_d: usize, kappa: f64, negatives: bool) -> usize {
    let resolution = (kappa + 1.0).log2().ceil() as usize;
    (n_d + 1).max(resolution) + usize::from(negatives)
}

/// Largest evolution time that keeps `lambda_max` inside the representable
/// phase range: the top of the unsigned window, or the top of the positive
/// half when a sign qubit is in play.
pub fn select_evolution_time(lambda_max: f64, n_c: usize, negatives: bool) -> f64 {
    if negatives {
        PI * (1.0 - 2f64.powi(-(n_c as i32 - 1))) / lambda_max
    } else {
        2.0 * PI * (1.0 - 2f64.powi(-(n_c as i32))) / lambda_max
    }
}

/// Eigenvalue encoded by clock value `k`; two's complement when negative
/// eigenvalues are representable.
pub fn eigenvalue_estimate(k: usize, n_c: usize, t: f64, negatives: bool) -> f64 {
    let total = (1usize << n_c) as f64;
    let mut signed = k as f64;
    if negatives && k >= 1usize << (n_c - 1) {
        signed -= total;
    }
    2.0 * PI * signed / (total * t)
}

/// Solver circuit plus the parameters it was built with.
#[derive(Clone, Debug)]
pub struct HHLCircuit {
    pub circuit: Circuit,
    pub n_d: usize,
    pub n_c: usize,
    pub t: f64,
    pub c_const: f64,
    pub negatives: bool,
    pub kappa: f64,
    pub lambda_max: f64,
}

impl HHLCircuit {
    pub fn data_wires(&self) -> Range<usize> {
        0..self.n_d
    }

    pub fn clock_wires(&self) -> Range<usize> {
        self.n_d..self.n_d + self.n_c
    }

    pub fn ancilla(&self) -> usize {
        self.n_d + self.n_c
    }
}

/// Solution report. Errors are measured against a dense classical solve of
/// the same prepared system.
#[derive(Clone, Debug, Serialize)]
pub struct HHLSolution {
    pub n_d: usize,
    pub n_c: usize,
    pub t: f64,
    pub c_const: f64,
    /// Probability of the ancilla postselection succeeding.
    pub success_probability: f64,
    /// `sqrt(Pr) / C`, the estimate of the padded solution norm.
    pub norm_estimate: f64,
    /// Probability weight left outside clock = 0 after uncomputation.
    pub clock_residual: f64,
    /// Phase-aligned distance between the normalized quantum and classical
    /// solution states on the padded register.
    pub state_error: f64,
    /// Relative error of `recovered_vector` against the classical solution
    /// in the caller's coordinates.
    pub vector_error: f64,
    #[serde(serialize_with = "serialize_complex_vec")]
    pub recovered_vector: Vec<C64>,
}

fn serialize_complex_vec<S>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error>
where
    S: serde::Serializer,
{
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for z in v {
        seq.serialize_element(&[z.re, z.im])?;
    }
    seq.end()
}

/// Circuit preparing exactly the state `amps` (unit norm, power-of-two
/// length) from |0...0>, global phase included.
///
/// Built by inverting a disentangler: each level zeroes the lowest live
/// qubit with a multiplexed RZ (phase alignment) and RY (amplitude
/// rotation), leaving only a global phase that a three-gate diagonal gadget
/// reproduces on the all-zeros state.
pub fn state_prep(amps: &[C64]) -> Result<Circuit> {
    if amps.len() < 2 || !amps.len().is_power_of_two() {
        return Err(Error::Dimension(format!(
            "state length {} is not a power of two of at least 2",
            amps.len()
        )));
    }
    if (norm2(amps) - 1.0).abs() > 1e-10 {
        return Err(Error::Invalid("state to prepare is not normalized".into()));
    }
    let n = amps.len().trailing_zeros() as usize;

    let mut disentangle = Circuit::new(n);
    let mut cur = amps.to_vec();
    for q in 0..n {
        let pairs = cur.len() / 2;
        let mut ry = vec![0.0; pairs];
        let mut rz = vec![0.0; pairs];
        let mut next = vec![C64::new(0.0, 0.0); pairs];
        for j in 0..pairs {
            let (a, b) = (cur[2 * j], cur[2 * j + 1]);
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            ry[j] = -2.0 * b.norm().atan2(a.norm());
            rz[j] = -(b.arg() - a.arg());
            next[j] = C64::from_polar(r, (a.arg() + b.arg()) / 2.0);
        }
        let controls: Vec<usize> = (q + 1..n).collect();
        if rz.iter().any(|x| x.abs() > 1e-14) {
            emit_multiplexed_rotation(RotationAxis::Z, &rz, &controls, q, &mut disentangle.gates);
        }
        if ry.iter().any(|x| x.abs() > 1e-14) {
            emit_multiplexed_rotation(RotationAxis::Y, &ry, &controls, q, &mut disentangle.gates);
        }
        cur = next;
    }

    let mut prep = Circuit::new(n);
    let residual_phase = cur[0].arg();
    if residual_phase.abs() > 1e-14 {
        // X P(phase) X = diag(e^{i phase}, 1): exact on the incoming zeros.
        prep.x(0);
        prep.phase(residual_phase, 0);
        prep.x(0);
    }
    prep.extend(&disentangle.inverted());
    Ok(prep)
}

/// Little-endian quantum Fourier transform:
/// `|k> -> 2^{-n/2} sum_j exp(2 pi i j k / 2^n) |j>`.
fn qft_circuit(n: usize) -> Circuit {
    let mut circ = Circuit::new(n);
    for q in (0..n).rev() {
        circ.h(q);
        for m in (0..q).rev() {
            circ.cphase(PI / 2f64.powi((q - m) as i32), m, q);
        }
    }
    for i in 0..n / 2 {
        circ.swap(i, n - 1 - i);
    }
    circ
}

/// Forward phase estimation: Hadamard fan-out, one dense controlled power
/// gate per clock qubit (the power is stored, not multiplied out), inverse
/// Fourier transform on the clock.
fn qpe_forward(u: Arc<ComplexMatrix>, n_d: usize, n_c: usize) -> Circuit {
    let mut circ = Circuit::new(n_d + n_c + 1);
    let data: Vec<usize> = (0..n_d).collect();
    for j in 0..n_c {
        circ.h(n_d + j);
    }
    for j in 0..n_c {
        circ.controlled_unitary(Arc::clone(&u), 1u64 << j, data.clone(), vec![n_d + j]);
    }
    let clock: Vec<usize> = (n_d..n_d + n_c).collect();
    circ.extend_mapped(&qft_circuit(n_c).inverted(), &clock);
    circ
}

fn inversion_angles(n_c: usize, t: f64, c_const: f64, negatives: bool) -> Result<Vec<f64>> {
    let total = 1usize << n_c;
    let mut angles = vec![0.0; total];
    for (k, slot) in angles.iter_mut().enumerate().skip(1) {
        let lam = eigenvalue_estimate(k, n_c, t, negatives);
        let ratio = c_const / lam;
        if ratio.abs() > 1.0 + 1e-9 {
            return Err(Error::Invalid(format!(
                "inversion constant {c_const} exceeds the smallest representable \
                 eigenvalue magnitude {}",
                lam.abs()
            )));
        }
        *slot = 2.0 * ratio.clamp(-1.0, 1.0).asin();
    }
    Ok(angles)
}

/// Assembles the full solver circuit for `system`.
pub fn build(system: &LinearSystem, config: &HHLConfig) -> Result<HHLCircuit> {
    let n_d = system.n_qubits();
    let eig = eig_hermitian(&system.a)?;
    let negatives = eig.values[0] < 0.0;
    let lambda_max = eig
        .values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let kappa = condition_number(&system.original_matrix());

    let n_c = config
        .n_c
        .unwrap_or_else(|| select_clock_qubits(n_d, kappa, negatives));
    if n_c < 1 || (negatives && n_c < 2) {
        return Err(Error::Invalid(format!("clock register of {n_c} qubits is too small")));
    }
    let t = config
        .t
        .unwrap_or_else(|| select_evolution_time(lambda_max, n_c, negatives));
    let c_const = config
        .c_const
        .unwrap_or_else(|| 2.0 * PI / ((1usize << n_c) as f64 * t));

    let mut circuit = Circuit::new(n_d + n_c + 1);
    circuit.extend(&state_prep(&system.b)?);
    let u = Arc::new(unitary_exp(&system.a, t)?);
    let qpe = qpe_forward(u, n_d, n_c);
    circuit.extend(&qpe);
    let clock: Vec<usize> = (n_d..n_d + n_c).collect();
    let angles = inversion_angles(n_c, t, c_const, negatives)?;
    emit_multiplexed_rotation(
        RotationAxis::Y,
        &angles,
        &clock,
        n_d + n_c,
        &mut circuit.gates,
    );
    circuit.extend(&qpe.inverted());

    Ok(HHLCircuit {
        circuit,
        n_d,
        n_c,
        t,
        c_const,
        negatives,
        kappa,
        lambda_max,
    })
}

/// Runs a built circuit and extracts the solution.
pub fn execute(system: &LinearSystem, built: &HHLCircuit) -> Result<HHLSolution> {
    let state = run(&built.circuit)?;
    let (state, prob) = postselect(&state, built.ancilla(), 1)?;

    let clock_mask = ((1usize << built.n_c) - 1) << built.n_d;
    let clock_residual: f64 = state
        .amps
        .iter()
        .enumerate()
        .filter(|(idx, _)| idx & clock_mask != 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();

    let anc_bit = 1usize << built.ancilla();
    let raw: Vec<C64> = (0..1usize << built.n_d)
        .map(|j| state.amps[j | anc_bit])
        .collect();
    let (state_solution, _) = normalize(&raw);
    let norm_estimate = prob.sqrt() / built.c_const;

    let x_full = classical_solve(system)?;
    let (x_state, _) = normalize(&x_full);
    let state_error = state_distance(&state_solution, &x_state);

    let scale = C64::new(system.b_norm * norm_estimate, 0.0);
    let recovered_vector: Vec<C64> = system
        .restrict(&state_solution)
        .iter()
        .map(|v| v * scale)
        .collect();
    let truth: Vec<C64> = system
        .restrict(&x_full)
        .iter()
        .map(|v| v * C64::new(system.b_norm, 0.0))
        .collect();
    let vector_error = relative_error(&recovered_vector, &truth);

    Ok(HHLSolution {
        n_d: built.n_d,
        n_c: built.n_c,
        t: built.t,
        c_const: built.c_const,
        success_probability: prob,
        norm_estimate,
        clock_residual,
        state_error,
        vector_error,
        recovered_vector,
    })
}

/// Builds and runs the solver in one call.
pub fn solve(system: &LinearSystem, config: &HHLConfig) -> Result<HHLSolution> {
    let built = build(system, config)?;
    execute(system, &built)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::sim::circuit_unitary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn clock_selection_rule() {
        assert_eq!(select_clock_qubits(4, 5.96, true), 6);
        assert_eq!(select_clock_qubits(1, 1.0, false), 2);
        assert_eq!(select_clock_qubits(4, 100.0, true), 8);
    }

    #[test]
    fn evolution_time_formulas() {
        let t = select_evolution_time(2.0, 2, false);
        assert!((t - 2.0 * PI * 0.75 / 2.0).abs() < 1e-15);
        let t = select_evolution_time(4.0, 3, true);
        assert!((t - PI * 0.75 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_grid() {
        // Unsigned: k counts up from zero.
        let lam = eigenvalue_estimate(3, 3, 1.0, false);
        assert!((lam - 2.0 * PI * 3.0 / 8.0).abs() < 1e-15);
        // Signed: the top half wraps to negative values.
        let lam = eigenvalue_estimate(4, 3, 1.0, true);
        assert!((lam + PI).abs() < 1e-15);
        let lam = eigenvalue_estimate(7, 3, 1.0, true);
        assert!((lam + 2.0 * PI / 8.0).abs() < 1e-15);
    }

    #[test]
    fn state_prep_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for n in 1..=4usize {
            for _ in 0..6 {
                let raw: Vec<C64> = (0..1usize << n)
                    .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let (amps, _) = normalize(&raw);
                let circ = state_prep(&amps).unwrap();
                let out = run(&circ).unwrap();
                let diff: f64 = out
                    .amps
                    .iter()
                    .zip(&amps)
                    .map(|(x, y)| (x - y).norm())
                    .fold(0.0, f64::max);
                assert!(diff < 1e-12, "prep off by {diff:.3e} at n={n}");
            }
        }
    }

    #[test]
    fn state_prep_on_sparse_vectors() {
        // Zero amplitudes exercise the degenerate pair branches.
        let cases: Vec<Vec<C64>> = vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
            vec![c(0.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.5)],
        ];
        for raw in cases {
            let (amps, norm) = normalize(&raw);
            assert!(norm > 0.0);
            let circ = state_prep(&amps).unwrap();
            let out = run(&circ).unwrap();
            for (x, y) in out.amps.iter().zip(&amps) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn qft_matches_dft_matrix() {
        for n in 1..=3usize {
            let dim = 1usize << n;
            let omega = 2.0 * PI / dim as f64;
            let dft = ComplexMatrix::from_fn(dim, |j, k| {
                C64::from_polar(1.0 / (dim as f64).sqrt(), omega * (j * k) as f64)
            });
            let u = circuit_unitary(&qft_circuit(n)).unwrap();
            assert!(u.max_abs_diff(&dft) < 1e-12, "qft wrong at n={n}");
        }
    }

    fn diag_system(diag: &[f64], b: &[C64]) -> LinearSystem {
        let d: Vec<C64> = diag.iter().map(|&x| c(x, 0.0)).collect();
        LinearSystem::new(ComplexMatrix::from_diagonal(&d), b.to_vec()).unwrap()
    }

    #[test]
    fn exact_phase_fixture_diagonal() {
        // Eigenvalues 1 and 2 with t = pi/2 and two clock qubits encode
        // exactly into clock values 1 and 2.
        let system = diag_system(&[1.0, 2.0], &[c(0.6, 0.0), c(0.8, 0.0)]);
        let config = HHLConfig {
            n_c: Some(2),
            t: Some(PI / 2.0),
            c_const: None,
        };
        let sol = solve(&system, &config).unwrap();
        assert!((sol.c_const - 1.0).abs() < 1e-12);
        // Pr = C^2 (|b_1 / l_1|^2 + |b_2 / l_2|^2) = 0.36 + 0.16.
        assert!((sol.success_probability - 0.52).abs() < 1e-10);
        assert!((sol.norm_estimate - 0.52f64.sqrt()).abs() < 1e-10);
        assert!(sol.state_error < 1e-10);
        assert!(sol.clock_residual < 1e-20);
        assert!(sol.vector_error < 1e-10);
        assert!((sol.recovered_vector[0] - c(0.6, 0.0)).norm() < 1e-10);
        assert!((sol.recovered_vector[1] - c(0.4, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn exact_phase_fixture_negative_spectrum() {
        let system = diag_system(&[1.0, -1.0], &[c(0.6, 0.0), c(0.8, 0.0)]);
        let config = HHLConfig {
            n_c: Some(3),
            t: Some(PI / 2.0),
            c_const: None,
        };
        let sol = solve(&system, &config).unwrap();
        assert!((sol.c_const - 0.5).abs() < 1e-12);
        // Pr = 0.25 * (0.36 + 0.64).
        assert!((sol.success_probability - 0.25).abs() < 1e-10);
        assert!(sol.state_error < 1e-10);
        assert!((sol.recovered_vector[0] - c(0.6, 0.0)).norm() < 1e-10);
        assert!((sol.recovered_vector[1] - c(-0.8, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn exact_phase_fixture_rotated_basis() {
        // Same spectrum, non-diagonal matrix: A = Q diag(1, 2) Q^T.
        let h = 1.0 / 2f64.sqrt();
        let q = ComplexMatrix::from_rows(&[
            vec![c(h, 0.0), c(h, 0.0)],
            vec![c(h, 0.0), c(-h, 0.0)],
        ]);
        let d = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let a = q.matmul(&d).matmul(&q.adjoint());
        let system = LinearSystem::new(a.clone(), vec![c(0.3, 0.1), c(-0.7, 0.4)]).unwrap();
        let config = HHLConfig {
            n_c: Some(2),
            t: Some(PI / 2.0),
            c_const: None,
        };
        let sol = solve(&system, &config).unwrap();
        assert!(sol.state_error < 1e-10);
        assert!(sol.vector_error < 1e-10);
        assert!(sol.clock_residual < 1e-18);
    }

    #[test]
    fn hermitized_system_round_trip() {
        // Non-Hermitian input forces the dilation; approximate phases.
        let a = ComplexMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.4, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ]);
        let system = LinearSystem::new(a, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(system.hermitized);
        let sol = solve(&system, &HHLConfig::default()).unwrap();
        assert!(sol.success_probability > 0.0);
        assert!(
            sol.vector_error < 0.15,
            "vector error {} too large",
            sol.vector_error
        );
    }

    #[test]
    fn rejects_oversized_inversion_constant() {
        let system = diag_system(&[1.0, 2.0], &[c(0.6, 0.0), c(0.8, 0.0)]);
        let config = HHLConfig {
            n_c: Some(2),
            t: Some(PI / 2.0),
            c_const: Some(1.5),
        };
        assert!(matches!(solve(&system, &config), Err(Error::Invalid(_))));
    }

    #[test]
    fn registers_are_laid_out_in_order() {
        let system = diag_system(&[1.0, 2.0], &[c(0.6, 0.0), c(0.8, 0.0)]);
        let built = build(&system, &HHLConfig::default()).unwrap();
        assert_eq!(built.data_wires(), 0..1);
        assert_eq!(built.clock_wires(), 1..1 + built.n_c);
        assert_eq!(built.ancilla(), 1 + built.n_c);
        assert_eq!(built.circuit.n_qubits, built.n_d + built.n_c + 1);
        assert!(!built.negatives);
    }
}
