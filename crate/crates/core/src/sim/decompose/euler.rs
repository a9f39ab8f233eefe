//! One-qubit synthesis: `U = exp(i phase) RZ(phi) RY(theta) RZ(lam)`.

use crate::linalg::{C64, ComplexMatrix};

use super::super::{Gate, GateKind};

/// Angles `(theta, phi, lam, phase)` of the ZYZ form.
pub fn zyz_angles(u: &ComplexMatrix) -> (f64, f64, f64, f64) {
    debug_assert_eq!(u.dim(), 2);
    let det = u.get(0, 0) * u.get(1, 1) - u.get(0, 1) * u.get(1, 0);
    let scale = C64::new(0.0, -det.arg() / 2.0).exp();
    let v00 = u.get(0, 0) * scale;
    let v10 = u.get(1, 0) * scale;
    let v11 = u.get(1, 1) * scale;

    let theta = 2.0 * v10.norm().atan2(v00.norm());
    // Near theta = 0 or pi only one of the angle sums is determined; pin
    // the other to it so the free RZ angle collapses to zero.
    let (plus, minus) = if v00.norm() > 1e-13 && v10.norm() > 1e-13 {
        (2.0 * v11.arg(), 2.0 * v10.arg())
    } else if v10.norm() <= 1e-13 {
        let p = 2.0 * v11.arg();
        (p, p)
    } else {
        let m = 2.0 * v10.arg();
        (m, m)
    };
    let phi = (plus + minus) / 2.0;
    let lam = (plus - minus) / 2.0;

    // Read the global phase off the reconstruction rather than the
    // determinant: the latter only pins it down modulo pi.
    let m = zyz_matrix(theta, phi, lam);
    let mut best = (0usize, 0usize, 0.0f64);
    for r in 0..2 {
        for c in 0..2 {
            if m.get(r, c).norm() > best.2 {
                best = (r, c, m.get(r, c).norm());
            }
        }
    }
    let phase = (u.get(best.0, best.1) / m.get(best.0, best.1)).arg();
    (theta, phi, lam, phase)
}

pub fn zyz_matrix(theta: f64, phi: f64, lam: f64) -> ComplexMatrix {
    let rz_phi = GateKind::Rz(phi).matrix();
    let ry = GateKind::Ry(theta).matrix();
    let rz_lam = GateKind::Rz(lam).matrix();
    rz_phi.matmul(&ry.matmul(&rz_lam))
}

const ANGLE_EPS: f64 = 1e-13;

/// Emits `u` on `qubit` as up to three rotation gates (RZ, RY, RZ order in
/// the circuit) and returns the dropped global phase.
pub fn emit_single_qubit(u: &ComplexMatrix, qubit: usize, out: &mut Vec<Gate>) -> f64 {
    let (theta, phi, lam, phase) = zyz_angles(u);
    if lam.abs() > ANGLE_EPS {
        out.push(Gate::new(GateKind::Rz(lam), vec![qubit], vec![]));
    }
    if theta.abs() > ANGLE_EPS {
        out.push(Gate::new(GateKind::Ry(theta), vec![qubit], vec![]));
    }
    if phi.abs() > ANGLE_EPS {
        out.push(Gate::new(GateKind::Rz(phi), vec![qubit], vec![]));
    }
    phase
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn check(u: &ComplexMatrix) {
        let (theta, phi, lam, phase) = zyz_angles(u);
        let recon = zyz_matrix(theta, phi, lam).scale(C64::new(0.0, phase).exp());
        assert!(
            recon.max_abs_diff(u) < 1e-12,
            "reconstruction failed:\n{u:?}\nvs\n{recon:?}"
        );
    }

    #[test]
    fn named_gates_reconstruct() {
        for kind in [
            GateKind::H,
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::S,
            GateKind::T,
            GateKind::Rx(0.37),
            GateKind::Ry(-1.2),
            GateKind::Rz(2.6),
            GateKind::Phase(0.9),
        ] {
            check(&kind.matrix());
        }
        check(&ComplexMatrix::identity(2));
        check(&ComplexMatrix::identity(2).scale(C64::new(0.0, 0.42).exp()));
    }

    #[test]
    fn random_unitaries_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            check(&haar_random_unitary(2, &mut rng));
        }
    }

    #[test]
    fn emission_skips_null_rotations() {
        let mut gates = Vec::new();
        let phase = emit_single_qubit(&GateKind::Rz(0.8).matrix(), 3, &mut gates);
        assert_eq!(gates.len(), 1);
        assert_eq!(gates[0].label(), "RZ");
        assert_eq!(gates[0].targets, vec![3]);
        assert!(phase.abs() < 1e-13);
    }
}
