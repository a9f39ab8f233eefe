//! Two-qubit synthesis through the Weyl chamber normal form.
//!
//! Any U in U(4) factors as `exp(i phase) (K1l x K1r) exp(i(a XX + b YY +
//! c ZZ)) (K2l x K2r)` with single-qubit K factors. Driving the interaction
//! part with CX conjugations yields a circuit with at most three CX gates;
//! the template constants below realize that bound. The construction
//! follows the canonical decomposition literature (Shende, Bullock, Markov
//! style) and is numerically hardened: the complex-symmetric eigenproblem is
//! solved through a random real mixture of its real and imaginary parts,
//! retried until the reconstruction check passes.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};

use super::super::{Gate, GateKind};
use super::euler::emit_single_qubit;

const PI2: f64 = PI / 2.0;
const PI4: f64 = PI / 4.0;
const PI32: f64 = 3.0 * PI / 2.0;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn eix(x: f64) -> C64 {
    c(0.0, x).exp()
}

fn mat2(rows: [[C64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()])
}

fn ipx() -> ComplexMatrix {
    mat2([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

fn ipy() -> ComplexMatrix {
    mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]])
}

fn ipz() -> ComplexMatrix {
    mat2([[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]])
}

/// Magic basis, non-normalized (`B B^dagger = 2 I`).
fn magic_basis() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)],
    ])
}

fn magic_out_of(u: &ComplexMatrix) -> ComplexMatrix {
    let b = magic_basis();
    b.adjoint().scale(c(0.5, 0.0)).matmul(u).matmul(&b)
}

fn magic_into(u: &ComplexMatrix) -> ComplexMatrix {
    let b = magic_basis();
    b.matmul(u).matmul(&b.adjoint().scale(c(0.5, 0.0)))
}

fn det2(m: &ComplexMatrix) -> C64 {
    m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)
}

/// `exp(i(a XX + b YY + c ZZ))`.
pub fn ud_matrix(a: f64, b: f64, cc: f64) -> ComplexMatrix {
    let z = c(0.0, 0.0);
    let ec = eix(cc);
    let emc = eix(-cc);
    let i = c(0.0, 1.0);
    ComplexMatrix::from_rows(&[
        vec![ec * (a - b).cos(), z, z, i * ec * (a - b).sin()],
        vec![z, emc * (a + b).cos(), i * emc * (a + b).sin(), z],
        vec![z, i * emc * (a + b).sin(), emc * (a + b).cos(), z],
        vec![i * ec * (a - b).sin(), z, z, ec * (a - b).cos()],
    ])
}

/// Splits a Kronecker product `k = exp(i phase) (l x r)` into its factors.
/// `l` acts on qubit 1 (the high bit), `r` on qubit 0.
fn decompose_product_gate(k: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix, f64)> {
    let mut r = ComplexMatrix::from_fn(2, |i, j| k.get(i, j));
    if det2(&r).norm() < 0.1 {
        r = ComplexMatrix::from_fn(2, |i, j| k.get(i + 2, j));
    }
    let det_r = det2(&r);
    if det_r.norm() < 0.1 {
        return Err(Error::Undecomposable(
            "matrix is not a Kronecker product of one-qubit factors".into(),
        ));
    }
    let r = r.scale(det_r.powf(-0.5));

    let temp = k.matmul(&ComplexMatrix::identity(2).kron(&r.adjoint()));
    let mut l = ComplexMatrix::from_fn(2, |i, j| temp.get(2 * i, 2 * j));
    let det_l = det2(&l);
    if det_l.norm() < 0.9 {
        return Err(Error::Undecomposable(
            "matrix is not a Kronecker product of one-qubit factors".into(),
        ));
    }
    l = l.scale(det_l.powf(-0.5));
    let phase = det_l.arg() / 2.0;
    Ok((l, r, phase))
}

#[derive(Clone, Debug)]
pub struct WeylDecomposition {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub global_phase: f64,
    pub k1l: ComplexMatrix,
    pub k1r: ComplexMatrix,
    pub k2l: ComplexMatrix,
    pub k2r: ComplexMatrix,
}

pub fn weyl_decompose(unitary: &ComplexMatrix) -> Result<WeylDecomposition> {
    if unitary.dim() != 4 {
        return Err(Error::Dimension("Weyl decomposition wants a 4x4 matrix".into()));
    }
    let det_u = unitary.to_na().determinant();
    let u = unitary.scale(det_u.powf(-0.25));
    let mut global_phase = det_u.arg() / 4.0;
    let up = magic_out_of(&u);
    let m2 = up.transpose().matmul(&up);

    // m2 is complex symmetric and unitary, so its real and imaginary parts
    // commute and a generic real mixture of them shares its eigenvectors.
    // The first mixture is fixed so runs are reproducible; the RNG only
    // matters in the (rare) degenerate retry.
    let mut rng = ChaCha8Rng::seed_from_u64(2023);
    let mut best: Option<(Vec<C64>, ComplexMatrix)> = None;
    for trial in 0..100 {
        let (rand_a, rand_b) = if trial == 0 {
            (1.2602066112249388, 0.22317849046722027)
        } else {
            (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        };
        let mixed = nalgebra::DMatrix::<f64>::from_fn(4, 4, |r, cc| {
            let v = m2.get(r, cc);
            rand_a * v.re + rand_b * v.im
        });
        let sym = nalgebra::SymmetricEigen::new(mixed);
        let p = ComplexMatrix::from_fn(4, |r, cc| c(sym.eigenvectors[(r, cc)], 0.0));
        let d: Vec<C64> = {
            let pm = p.transpose().matmul(&m2).matmul(&p);
            (0..4).map(|i| pm.get(i, i)).collect()
        };
        let recon = p
            .matmul(&ComplexMatrix::from_diagonal(&d))
            .matmul(&p.transpose());
        if recon.max_abs_diff(&m2) <= 1e-13 {
            best = Some((d, p));
            break;
        }
    }
    let (d_eig, mut p) =
        best.ok_or_else(|| Error::Undecomposable("could not diagonalize m2".into()))?;

    let mut d: Vec<f64> = d_eig.iter().map(|x| -x.arg() / 2.0).collect();
    d[3] = -d[0] - d[1] - d[2];
    let two_pi = 2.0 * PI;
    let mut cs: Vec<f64> = (0..3)
        .map(|i| ((d[i] + d[3]) / 2.0).rem_euclid(two_pi))
        .collect();

    let cstemp: Vec<f64> = cs
        .iter()
        .map(|x| {
            let m = x.rem_euclid(PI2);
            m.min(PI2 - m)
        })
        .collect();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&i, &j| cstemp[i].partial_cmp(&cstemp[j]).unwrap());
    order = vec![order[1], order[2], order[0]];
    let cs_old = cs.clone();
    let d_old = d.clone();
    for i in 0..3 {
        cs[i] = cs_old[order[i]];
        d[i] = d_old[order[i]];
    }
    let p_old = p.clone();
    for (i, &from) in order.iter().enumerate() {
        for r in 0..4 {
            p.set(r, i, p_old.get(r, from));
        }
    }
    if p.to_na().determinant().re < 0.0 {
        for r in 0..4 {
            p.set(r, 3, -p.get(r, 3));
        }
    }

    let temp = ComplexMatrix::from_diagonal(&[eix(d[0]), eix(d[1]), eix(d[2]), eix(d[3])]);
    let k1 = magic_into(&up.matmul(&p).matmul(&temp));
    let k2 = magic_into(&p.transpose());

    let (mut k1l, mut k1r, phase_l) = decompose_product_gate(&k1)?;
    let (k2l, mut k2r, phase_r) = decompose_product_gate(&k2)?;
    global_phase += phase_l + phase_r;

    // Reduce into the Weyl chamber.
    if cs[0] > PI2 {
        cs[0] -= PI32;
        k1l = k1l.matmul(&ipy());
        k1r = k1r.matmul(&ipy());
        global_phase += PI2;
    }
    if cs[1] > PI2 {
        cs[1] -= PI32;
        k1l = k1l.matmul(&ipx());
        k1r = k1r.matmul(&ipx());
        global_phase += PI2;
    }
    let mut conjs = 0;
    if cs[0] > PI4 {
        cs[0] = PI2 - cs[0];
        k1l = k1l.matmul(&ipy());
        k2r = ipy().matmul(&k2r);
        conjs += 1;
        global_phase -= PI2;
    }
    if cs[1] > PI4 {
        cs[1] = PI2 - cs[1];
        k1l = k1l.matmul(&ipx());
        k2r = ipx().matmul(&k2r);
        conjs += 1;
        global_phase += PI2;
        if conjs == 1 {
            global_phase -= PI;
        }
    }
    if cs[2] > PI2 {
        cs[2] -= PI32;
        k1l = k1l.matmul(&ipz());
        k1r = k1r.matmul(&ipz());
        global_phase += PI2;
        if conjs == 1 {
            global_phase -= PI;
        }
    }
    if conjs == 1 {
        cs[2] = PI2 - cs[2];
        k1l = k1l.matmul(&ipz());
        k2r = ipz().matmul(&k2r);
        global_phase += PI2;
    }
    if cs[2] > PI4 {
        cs[2] -= PI2;
        k1l = k1l.matmul(&ipz());
        k1r = k1r.matmul(&ipz());
        global_phase -= PI2;
    }

    Ok(WeylDecomposition {
        a: cs[1],
        b: cs[0],
        c: cs[2],
        global_phase,
        k1l,
        k1r,
        k2l,
        k2r,
    })
}

impl WeylDecomposition {
    /// `exp(i phase) (k1l x k1r) Ud(a, b, c) (k2l x k2r)`, for checking.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let left = self.k1l.kron(&self.k1r);
        let right = self.k2l.kron(&self.k2r);
        left.matmul(&ud_matrix(self.a, self.b, self.c))
            .matmul(&right)
            .scale(eix(self.global_phase))
    }
}

fn trace_to_fid(tr: C64) -> f64 {
    (4.0 + tr.norm_sqr()) / 20.0
}

/// CX with control on qubit 0 and target on qubit 1 (qubit 0 is the low
/// bit).
fn cx_matrix() -> ComplexMatrix {
    let o = c(1.0, 0.0);
    let z = c(0.0, 0.0);
    ComplexMatrix::from_rows(&[
        vec![o, z, z, z],
        vec![z, z, z, o],
        vec![z, z, o, z],
        vec![z, o, z, z],
    ])
}

/// Exact synthesis of arbitrary two-qubit unitaries over {1q rotations, CX},
/// using the smallest CX count the target's Weyl coordinates admit.
pub struct TwoQubitDecomposer {
    basis: WeylDecomposition,
    u0l: ComplexMatrix,
    u0r: ComplexMatrix,
    u1l: ComplexMatrix,
    u1ra: ComplexMatrix,
    u1rb: ComplexMatrix,
    u2la: ComplexMatrix,
    u2lb: ComplexMatrix,
    u2ra: ComplexMatrix,
    u2rb: ComplexMatrix,
    u3l: ComplexMatrix,
    u3r: ComplexMatrix,
    q0l: ComplexMatrix,
    q0r: ComplexMatrix,
    q1la: ComplexMatrix,
    q1lb: ComplexMatrix,
    q1ra: ComplexMatrix,
    q1rb: ComplexMatrix,
    q2l: ComplexMatrix,
    q2r: ComplexMatrix,
}

impl TwoQubitDecomposer {
    pub fn new() -> Result<Self> {
        let basis = weyl_decompose(&cx_matrix())?;
        if (basis.a - PI4).abs() > 1e-9 || basis.c.abs() > 1e-9 {
            return Err(Error::Undecomposable(
                "basis gate is not supercontrolled".into(),
            ));
        }
        let b = basis.b;

        // Template one-qubit factors. U1, U2, U3 are circuits equivalent to
        // one, two and three uses of the basis gate; these constants are the
        // fixed Weyl factors of those templates.
        let half_m = c(0.5, -0.5);
        let half_p = c(0.5, 0.5);
        let im = c(0.0, 1.0);
        let mim = c(0.0, -1.0);
        let k11l = mat2([
            [half_m * (mim * eix(-b)), half_m * eix(-b)],
            [half_m * (mim * eix(b)), half_m * -eix(b)],
        ]);
        let k11r = mat2([
            [im * eix(-b) * FRAC_1_SQRT_2, -eix(-b) * FRAC_1_SQRT_2],
            [eix(b) * FRAC_1_SQRT_2, mim * eix(b) * FRAC_1_SQRT_2],
        ]);
        let k12l = mat2([
            [c(0.5, 0.5), c(0.5, 0.5)],
            [c(-0.5, 0.5), c(0.5, -0.5)],
        ]);
        let k12r = mat2([
            [c(0.0, FRAC_1_SQRT_2), c(FRAC_1_SQRT_2, 0.0)],
            [c(-FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)],
        ]);
        let k32l_k21l = mat2([
            [
                c(1.0, (2.0 * b).cos()).scale(FRAC_1_SQRT_2),
                (im * (2.0 * b).sin()).scale(FRAC_1_SQRT_2),
            ],
            [
                (im * (2.0 * b).sin()).scale(FRAC_1_SQRT_2),
                c(1.0, -(2.0 * b).cos()).scale(FRAC_1_SQRT_2),
            ],
        ]);
        let k21r = mat2([
            [half_p * (mim * eix(-2.0 * b)), half_p * eix(-2.0 * b)],
            [half_p * (im * eix(2.0 * b)), half_p * eix(2.0 * b)],
        ]);
        let k22l = mat2([
            [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)],
            [c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)],
        ]);
        let k22r = mat2([[c(0.0, 0.0), c(1.0, 0.0)], [c(-1.0, 0.0), c(0.0, 0.0)]]);
        let k31l = mat2([
            [eix(-b) * FRAC_1_SQRT_2, eix(-b) * FRAC_1_SQRT_2],
            [-eix(b) * FRAC_1_SQRT_2, eix(b) * FRAC_1_SQRT_2],
        ]);
        let k31r = mat2([
            [im * eix(b), c(0.0, 0.0)],
            [c(0.0, 0.0), mim * eix(-b)],
        ]);
        let k32r = mat2([
            [half_p * eix(b), half_p * -eix(-b)],
            [half_p * (mim * eix(b)), half_p * (mim * eix(-b))],
        ]);

        let k1ld = basis.k1l.adjoint();
        let k1rd = basis.k1r.adjoint();
        let k2ld = basis.k2l.adjoint();
        let k2rd = basis.k2r.adjoint();

        Ok(Self {
            u0l: k31l.matmul(&k1ld),
            u0r: k31r.matmul(&k1rd),
            u1l: k2ld.matmul(&k32l_k21l).matmul(&k1ld),
            u1ra: k2rd.matmul(&k32r),
            u1rb: k21r.matmul(&k1rd),
            u2la: k2ld.matmul(&k22l),
            u2lb: k11l.matmul(&k1ld),
            u2ra: k2rd.matmul(&k22r),
            u2rb: k11r.matmul(&k1rd),
            u3l: k2ld.matmul(&k12l),
            u3r: k2rd.matmul(&k12r),
            q0l: k12l.adjoint().matmul(&k1ld),
            q0r: k12r.adjoint().matmul(&ipz()).matmul(&k1rd),
            q1la: k2ld.matmul(&k11l.adjoint()),
            q1lb: k11l.matmul(&k1ld),
            q1ra: k2rd.matmul(&ipz()).matmul(&k11r.adjoint()),
            q1rb: k11r.matmul(&k1rd),
            q2l: k2ld.matmul(&k12l),
            q2r: k2rd.matmul(&k12r),
            basis,
        })
    }

    fn traces(&self, t: &WeylDecomposition) -> [C64; 4] {
        [
            c(
                4.0 * (t.a.cos() * t.b.cos() * t.c.cos()),
                4.0 * (t.a.sin() * t.b.sin() * t.c.sin()),
            ),
            c(
                4.0 * ((PI4 - t.a).cos() * (self.basis.b - t.b).cos() * t.c.cos()),
                4.0 * ((PI4 - t.a).sin() * (self.basis.b - t.b).sin() * t.c.sin()),
            ),
            c(4.0 * t.c.cos(), 0.0),
            c(4.0, 0.0),
        ]
    }

    /// Gates act on local wires 0 and 1; the returned phase is what the gate
    /// list is missing relative to `unitary`.
    pub fn decompose(&self, unitary: &ComplexMatrix) -> Result<(Vec<Gate>, f64)> {
        let target = weyl_decompose(unitary)?;
        let traces = self.traces(&target);
        let mut best = 3usize;
        for (idx, tr) in traces.iter().enumerate() {
            if trace_to_fid(*tr) >= 1.0 - 1e-13 {
                best = idx;
                break;
            }
        }

        let rz = |angle: f64| GateKind::Rz(angle).matrix();
        let layers: Vec<ComplexMatrix> = match best {
            0 => vec![
                target.k1r.matmul(&target.k2r),
                target.k1l.matmul(&target.k2l),
            ],
            1 => vec![
                self.basis.k2r.adjoint().matmul(&target.k2r),
                self.basis.k2l.adjoint().matmul(&target.k2l),
                target.k1r.matmul(&self.basis.k1r.adjoint()),
                target.k1l.matmul(&self.basis.k1l.adjoint()),
            ],
            2 => vec![
                self.q2r.matmul(&target.k2r),
                self.q2l.matmul(&target.k2l),
                self.q1ra.matmul(&rz(2.0 * target.b)).matmul(&self.q1rb),
                self.q1la.matmul(&rz(-2.0 * target.a)).matmul(&self.q1lb),
                target.k1r.matmul(&self.q0r),
                target.k1l.matmul(&self.q0l),
            ],
            _ => vec![
                self.u3r.matmul(&target.k2r),
                self.u3l.matmul(&target.k2l),
                self.u2ra.matmul(&rz(2.0 * target.b)).matmul(&self.u2rb),
                self.u2la.matmul(&rz(-2.0 * target.a)).matmul(&self.u2lb),
                self.u1ra.matmul(&rz(-2.0 * target.c)).matmul(&self.u1rb),
                self.u1l.clone(),
                target.k1r.matmul(&self.u0r),
                target.k1l.matmul(&self.u0l),
            ],
        };

        let mut gates = Vec::new();
        let mut global_phase = target.global_phase - best as f64 * self.basis.global_phase;
        if best == 2 {
            global_phase += PI;
        }
        for i in 0..best {
            global_phase += emit_single_qubit(&layers[2 * i], 0, &mut gates);
            global_phase += emit_single_qubit(&layers[2 * i + 1], 1, &mut gates);
            gates.push(Gate::new(GateKind::X, vec![1], vec![0]));
        }
        global_phase += emit_single_qubit(&layers[2 * best], 0, &mut gates);
        global_phase += emit_single_qubit(&layers[2 * best + 1], 1, &mut gates);
        Ok((gates, global_phase))
    }
}
