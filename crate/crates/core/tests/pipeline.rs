//! Deterministic cross-module checks: application systems pushed through the
//! solver and estimator, verified against classical references.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlss_core::apps::{heat_matrix, HeatSpec};
use qlss_core::hhl::{self, HHLConfig};
use qlss_core::linalg::{haar_random_unitary, norm2, C64, ComplexMatrix, LinearSystem};
use qlss_core::resource::{sweep_nc, ErrorBudget, QECSpec, QubitParams, TFactorySpec};

/// Clustered spectrum near 1 (condition number ~1.001): with the clock grid
/// aligned so the cluster rounds to the same integer estimate, the solver
/// output still tracks the classical solution closely.
#[test]
fn heat_error_stays_small_across_clock_widths() {
    let system = heat_matrix(&HeatSpec::new(3, 0.00016)).unwrap();
    let mut errors = Vec::new();
    for n_c in [4usize, 5, 6] {
        let t = 2.0 * PI / (1u64 << n_c) as f64;
        let sol = hhl::solve(
            &system,
            &HHLConfig {
                n_c: Some(n_c),
                t: Some(t),
                c_const: None,
            },
        )
        .unwrap();
        println!("heat l=3 n_c={n_c}: state_error {:.3e}", sol.state_error);
        errors.push(sol.state_error);
    }
    for e in &errors {
        assert!(*e <= 1e-3, "state error {e:.3e} above 1e-3");
    }
}

/// Larger clock registers never get cheaper: every resource output the
/// estimator reports grows (or holds) with n_c.
#[test]
fn resource_outputs_grow_with_clock_width() {
    let system = heat_matrix(&HeatSpec::new(3, 0.00016)).unwrap();
    let qubits = QubitParams::ns_1e4();
    let qec = QECSpec::default();
    let factory = TFactorySpec::default_for(&qubits, &qec);
    let budget = ErrorBudget::new(0.01).unwrap();
    let sweep = sweep_nc(&system, &[3, 4, 5, 6], &qubits, &qec, &factory, &budget).unwrap();

    for pair in sweep.rows.windows(2) {
        let (a, b) = (&pair[0].report, &pair[1].report);
        assert!(b.t_states >= a.t_states);
        assert!(b.logical_cycles >= a.logical_cycles);
        assert!(b.runtime_s >= a.runtime_s);
    }
}

/// Non-Hermitian system with singular values on the clock grid: the
/// dilation doubles the spectrum to +/- the singular values, and the
/// recovered vector must satisfy the original equations.
#[test]
fn dilated_solve_leaves_small_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let dim = 3usize;
    // Padding appends an identity row, so the padded singular values are
    // {1, 2, 3, 1}; the dilation spectrum {+/-1, +/-2, +/-3} sits on the
    // signed grid for t = 2 pi / 2^{n_c}.
    let u = haar_random_unitary(dim, &mut rng);
    let v = haar_random_unitary(dim, &mut rng);
    let sigma = ComplexMatrix::from_diagonal(&[
        C64::new(1.0, 0.0),
        C64::new(2.0, 0.0),
        C64::new(3.0, 0.0),
    ]);
    let a = u.matmul(&sigma).matmul(&v.adjoint());
    let b = vec![
        C64::new(0.6, 0.1),
        C64::new(-0.3, 0.4),
        C64::new(0.2, -0.5),
    ];

    let system = LinearSystem::new(a.clone(), b.clone()).unwrap();
    assert!(system.hermitized);
    let n_c = 3usize;
    let t = 2.0 * PI / (1u64 << n_c) as f64;
    let sol = hhl::solve(
        &system,
        &HHLConfig {
            n_c: Some(n_c),
            t: Some(t),
            c_const: None,
        },
    )
    .unwrap();

    let ax = a.mul_vec(&sol.recovered_vector);
    let residual: Vec<C64> = ax.iter().zip(&b).map(|(x, y)| x - y).collect();
    let rel = norm2(&residual) / norm2(&b);
    println!("dilated residual: {rel:.3e}");
    assert!(rel <= 1e-4, "relative residual {rel:.3e} above 1e-4");
    assert!(sol.state_error <= 1e-6);
}
