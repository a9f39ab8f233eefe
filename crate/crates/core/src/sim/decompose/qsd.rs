//! Recursive synthesis of arbitrary n-qubit unitaries over {1q rotations,
//! CX}, in the Shannon style: peel one qubit per level with a block ZXZ
//! factorization, realize the multiplexed-Z layers with Gray-code CX
//! ladders, and hand two-qubit leaves to the Weyl-chamber synthesizer.
//!
//! Global phases of sub-blocks are dropped and accumulated into the
//! returned scalar: a phase missing from one half of a multiplexer is
//! missing from both halves (the factor commutes out of the block
//! structure), so it stays a global phase of the full circuit at every
//! recursion level.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{C64, ComplexMatrix};

use super::super::{Gate, GateKind};
use super::euler::emit_single_qubit;
use super::kak::TwoQubitDecomposer;

const EPS: f64 = 1e-12;
/// Off-block entries below this count as structural zeros when probing for
/// multiplexer form. Tight on purpose: treating noise as structure would
/// silently cap the reconstruction accuracy at the threshold.
const BLOCK_ZERO_TOL: f64 = 1e-13;

fn two_qubit() -> &'static TwoQubitDecomposer {
    static DEC: OnceLock<TwoQubitDecomposer> = OnceLock::new();
    DEC.get_or_init(|| {
        TwoQubitDecomposer::new().expect("CX basis decomposition is deterministic")
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum VwType {
    /// Emit W, the Rz multiplexer and V.
    All,
    /// Emit W and the Rz multiplexer; return V for the caller to absorb.
    OnlyW,
    /// Emit the Rz multiplexer and V; return W for the caller to absorb.
    OnlyV,
}

/// Synthesizes `u` onto `wires` (`wires[k]` carries local bit `k`), pushing
/// gates in application order. Returns `phase` with
/// `u = exp(i phase) * emitted`.
pub fn qsd(u: &ComplexMatrix, wires: &[usize], out: &mut Vec<Gate>) -> Result<f64> {
    let dim = u.dim();
    if dim != 1usize << wires.len() {
        return Err(Error::Dimension(format!(
            "matrix of dimension {} does not fit {} wires",
            dim,
            wires.len()
        )));
    }
    match wires.len() {
        0 => Ok(u.get(0, 0).arg()),
        1 => Ok(emit_single_qubit(u, wires[0], out)),
        2 => {
            let (gates, phase) = two_qubit().decompose(u)?;
            for g in gates {
                out.push(map_gate(&g, &[wires[0], wires[1]]));
            }
            Ok(phase)
        }
        _ => {
            // Already a multiplexer over some wire? Then one demultiplex
            // level suffices; this is what keeps controlled blocks cheap.
            for select_bit in 0..wires.len() {
                if let Some((um0, um1)) = split_block_diagonal(u, select_bit) {
                    let mut sub_wires: Vec<usize> = wires.to_vec();
                    let select = sub_wires.remove(select_bit);
                    let (_, phase) =
                        demultiplex(&um0, &um1, &sub_wires, select, VwType::All, out)?;
                    return Ok(phase);
                }
            }
            block_zxz(u, wires, out)
        }
    }
}

fn map_gate(g: &Gate, wires: &[usize]) -> Gate {
    Gate::new(
        g.kind.clone(),
        g.targets.iter().map(|&q| wires[q]).collect(),
        g.controls.iter().map(|&q| wires[q]).collect(),
    )
}

/// If `u` is block diagonal with respect to local bit `select_bit`, returns
/// the two diagonal blocks (indexed over the remaining bits, order kept).
fn split_block_diagonal(
    u: &ComplexMatrix,
    select_bit: usize,
) -> Option<(ComplexMatrix, ComplexMatrix)> {
    let half = u.dim() / 2;
    let low = (1usize << select_bit) - 1;
    let expand = |i: usize| ((i >> select_bit) << (select_bit + 1)) | (i & low);
    let bit = 1usize << select_bit;
    for i in 0..half {
        for j in 0..half {
            let r0 = expand(i);
            let c0 = expand(j);
            if u.get(r0, c0 | bit).norm() > BLOCK_ZERO_TOL
                || u.get(r0 | bit, c0).norm() > BLOCK_ZERO_TOL
            {
                return None;
            }
        }
    }
    let um0 = ComplexMatrix::from_fn(half, |i, j| u.get(expand(i), expand(j)));
    let um1 = ComplexMatrix::from_fn(half, |i, j| u.get(expand(i) | bit, expand(j) | bit));
    Some((um0, um1))
}

/// `u = diag(A1, A2) (H x I) diag(I, B) (H x I) diag(I, C)` with all blocks
/// unitary; the split is on the top wire. The three multiplexers are
/// demultiplexed with the outer one-qubit layers of the side multiplexers
/// absorbed into the middle one's blocks.
fn block_zxz(u: &ComplexMatrix, wires: &[usize], out: &mut Vec<Gate>) -> Result<f64> {
    let (a1, a2, b, c) = zxz_blocks(u);
    let select = *wires.last().unwrap();
    let sub_wires = &wires[..wires.len() - 1];
    let half = u.dim() / 2;

    let mut left_gates = Vec::new();
    let (vmat_c, left_phase) = demultiplex(
        &ComplexMatrix::identity(half),
        &c,
        sub_wires,
        select,
        VwType::OnlyW,
        &mut left_gates,
    )?;
    let vmat_c = vmat_c.expect("OnlyW returns the absorbed V block");

    let mut right_gates = Vec::new();
    let (wmat_a, right_phase) =
        demultiplex(&a1, &a2, sub_wires, select, VwType::OnlyV, &mut right_gates)?;
    let wmat_a = wmat_a.expect("OnlyV returns the absorbed W block");

    let b1 = wmat_a.matmul(&vmat_c);
    let b2 = wmat_a.matmul(&b).matmul(&vmat_c);
    let mut middle_gates = Vec::new();
    let (_, middle_phase) =
        demultiplex(&b1, &b2, sub_wires, select, VwType::All, &mut middle_gates)?;

    out.extend(left_gates);
    out.push(Gate::new(GateKind::H, vec![select], vec![]));
    out.extend(middle_gates);
    out.push(Gate::new(GateKind::H, vec![select], vec![]));
    out.extend(right_gates);
    Ok(left_phase + middle_phase + right_phase)
}

/// Block ZXZ factors from polar decompositions of the top blocks.
fn zxz_blocks(u: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let half = u.dim() / 2;
    let x = ComplexMatrix::from_fn(half, |i, j| u.get(i, j));
    let y = ComplexMatrix::from_fn(half, |i, j| u.get(i, j + half));
    let u21 = ComplexMatrix::from_fn(half, |i, j| u.get(i + half, j));
    let u22 = ComplexMatrix::from_fn(half, |i, j| u.get(i + half, j + half));

    let (sx, ux) = polar(&x);
    let (sy, uy) = polar(&y);

    let i_unit = C64::new(0.0, 1.0);
    let uyd_ux_i = uy.adjoint().matmul(&ux).scale(i_unit);
    let c = uyd_ux_i.adjoint();
    let a1 = sx
        .matmul(&ux)
        .add(&sy.matmul(&ux).scale(i_unit));
    let a2 = u21.add(&u22.matmul(&uyd_ux_i));
    let mut b = a1.adjoint().matmul(&x).scale(C64::new(2.0, 0.0));
    for k in 0..half {
        b.set(k, k, b.get(k, k) - C64::new(1.0, 0.0));
    }
    (a1, a2, b, c)
}

/// Hermitian-times-unitary polar factors via SVD: `m = s u`.
fn polar(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let svd = m.to_na().svd(true, true);
    let v = ComplexMatrix::from_na(&svd.u.expect("svd requested u"));
    let wt = ComplexMatrix::from_na(&svd.v_t.expect("svd requested v_t"));
    let sigma: Vec<C64> = svd
        .singular_values
        .iter()
        .map(|&s| C64::new(s, 0.0))
        .collect();
    let s = v
        .matmul(&ComplexMatrix::from_diagonal(&sigma))
        .matmul(&v.adjoint());
    let u = v.matmul(&wt);
    (s, u)
}

fn closest_unitary(m: &ComplexMatrix) -> ComplexMatrix {
    let svd = m.to_na().svd(true, true);
    let u = ComplexMatrix::from_na(&svd.u.expect("svd requested u"));
    let vt = ComplexMatrix::from_na(&svd.v_t.expect("svd requested v_t"));
    u.matmul(&vt)
}

/// `diag(um0, um1) = (I x V) diag(D, D~) (I x W)` with the middle realized
/// exactly by a multiplexed Rz on `select`. Emission depends on `ty`; the
/// block a caller absorbs is returned instead of emitted.
fn demultiplex(
    um0: &ComplexMatrix,
    um1: &ComplexMatrix,
    sub_wires: &[usize],
    select: usize,
    ty: VwType,
    out: &mut Vec<Gate>,
) -> Result<(Option<ComplexMatrix>, f64)> {
    let um0 = closest_unitary(um0);
    let um1 = closest_unitary(um1);
    let (eigvals, vmat) = diagonalize_unitary(&um0.matmul(&um1.adjoint()))?;
    let d: Vec<C64> = eigvals.iter().map(|&l| l.sqrt()).collect();
    let wmat = ComplexMatrix::from_diagonal(&d)
        .matmul(&vmat.adjoint())
        .matmul(&um1);

    let mut phase = 0.0;
    let mut returned = None;
    if ty == VwType::OnlyV {
        returned = Some(wmat);
    } else {
        phase += qsd(&wmat, sub_wires, out)?;
    }

    let angles: Vec<f64> = d.iter().map(|dj| 2.0 * dj.conj().arg()).collect();
    emit_multiplexed_rz(&angles, sub_wires, select, out);

    if ty == VwType::OnlyW {
        returned = Some(vmat);
    } else {
        phase += qsd(&vmat, sub_wires, out)?;
    }
    Ok((returned, phase))
}

/// Simultaneous unitary diagonalization: `m = V diag(l) V^dagger` with V
/// unitary. A random real mixture of the commuting Hermitian parts of `m`
/// is diagonalized instead; its eigenbasis works for `m` unless the mixture
/// causes an accidental eigenvalue collision, which the residual check
/// detects and a reseeded retry resolves.
fn diagonalize_unitary(m: &ComplexMatrix) -> Result<(Vec<C64>, ComplexMatrix)> {
    use rand::{Rng, SeedableRng};
    let dim = m.dim();
    let herm = ComplexMatrix::from_fn(dim, |i, j| (m.get(i, j) + m.get(j, i).conj()).scale(0.5));
    let skew = ComplexMatrix::from_fn(dim, |i, j| {
        (m.get(i, j) - m.get(j, i).conj()) * C64::new(0.0, -0.5)
    });
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(911);
    for trial in 0..100 {
        let (ca, cb) = if trial == 0 {
            (1.0920340432058035, -0.35467137363613454)
        } else {
            (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))
        };
        let mixed = herm.scale(C64::new(ca, 0.0)).add(&skew.scale(C64::new(cb, 0.0)));
        let eig = nalgebra::SymmetricEigen::new(mixed.to_na());
        let vmat = ComplexMatrix::from_na(&eig.eigenvectors);
        let dm = vmat.adjoint().matmul(m).matmul(&vmat);
        let mut off = 0.0f64;
        for i in 0..dim {
            for j in 0..dim {
                if i != j {
                    off = off.max(dm.get(i, j).norm());
                }
            }
        }
        if off <= 1e-11 {
            let vals: Vec<C64> = (0..dim).map(|i| dm.get(i, i)).collect();
            return Ok((vals, vmat));
        }
    }
    Err(Error::Undecomposable(
        "failed to diagonalize multiplexer block product".into(),
    ))
}

/// Rotation axes that conjugate to their own inverse under X, which is what
/// the Gray-code ladder needs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum RotationAxis {
    Y,
    Z,
}

fn emit_multiplexed_rz(angles: &[f64], sub_wires: &[usize], select: usize, out: &mut Vec<Gate>) {
    emit_multiplexed_rotation(RotationAxis::Z, angles, sub_wires, select, out);
}

/// Multiplexed rotation: applies R(angles[j]) to `select` for control state
/// |j> over `sub_wires`. Gray-code ladder: a Walsh-Hadamard-style butterfly
/// turns the per-state angles into per-step angles, each followed by one CX
/// whose control flips the matching Gray-code bit.
pub(crate) fn emit_multiplexed_rotation(
    axis: RotationAxis,
    angles: &[f64],
    sub_wires: &[usize],
    select: usize,
    out: &mut Vec<Gate>,
) {
    debug_assert_eq!(angles.len(), 1 << sub_wires.len());
    let rot = |angle: f64| {
        let kind = match axis {
            RotationAxis::Y => GateKind::Ry(angle),
            RotationAxis::Z => GateKind::Rz(angle),
        };
        Gate::new(kind, vec![select], vec![])
    };
    let mut angles = angles.to_vec();
    butterfly(&mut angles, false);
    if sub_wires.is_empty() {
        if angles[0].abs() > EPS {
            out.push(rot(angles[0]));
        }
        return;
    }
    let last = angles.len() - 1;
    for (i, &angle) in angles.iter().enumerate() {
        if angle.abs() > EPS {
            out.push(rot(angle));
        }
        let ctrl = if i < last {
            sub_wires[(i + 1).trailing_zeros() as usize]
        } else {
            sub_wires[sub_wires.len() - 1]
        };
        out.push(Gate::new(GateKind::X, vec![select], vec![ctrl]));
    }
}

fn butterfly(angles: &mut [f64], reversed: bool) {
    let half = angles.len() / 2;
    if half == 0 {
        return;
    }
    for i in 0..half {
        let (a, b) = (angles[i], angles[i + half]);
        if reversed {
            angles[i] = (a - b) / 2.0;
            angles[i + half] = (a + b) / 2.0;
        } else {
            angles[i] = (a + b) / 2.0;
            angles[i + half] = (a - b) / 2.0;
        }
    }
    if half <= 1 {
        return;
    }
    butterfly(&mut angles[..half], false);
    butterfly(&mut angles[half..], true);
}
