//! Preparation and analysis of linear systems ahead of quantum solution.
//!
//! The solver circuit wants a Hermitian matrix whose dimension is a power of
//! two and a unit-norm right-hand side. [`LinearSystem::new`] applies the
//! standard embeddings to get there and keeps enough bookkeeping to map the
//! solution back to the caller's coordinates.

mod matrix;

pub use matrix::{
    inner, norm2, normalize, relative_error, state_distance, C64, ComplexMatrix,
};

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Pads `a` to the next power-of-two dimension with an identity block and
/// extends `b` with zeros. The padded coordinates stay fully decoupled and
/// carry a zero solution component.
pub fn pad_to_pow2(a: &ComplexMatrix, b: &[C64]) -> (ComplexMatrix, Vec<C64>) {
    let n = a.dim();
    let padded = n.next_power_of_two();
    if padded == n {
        return (a.clone(), b.to_vec());
    }
    let mut ap = ComplexMatrix::identity(padded);
    for r in 0..n {
        for c in 0..n {
            ap.set(r, c, a.get(r, c));
        }
    }
    let mut bp = b.to_vec();
    bp.resize(padded, C64::new(0.0, 0.0));
    (ap, bp)
}

/// Hermitian dilation `[[0, A], [A^dagger, 0]]` with right-hand side
/// `[b; 0]`. The solution of the dilated system lives in its lower half.
///
/// The input is padded to a power of two first, so a 5x5 matrix becomes 8x8
/// and then dilates to 16x16.
pub fn hermitize(a: &ComplexMatrix, b: &[C64]) -> (ComplexMatrix, Vec<C64>) {
    let (ap, bp) = pad_to_pow2(a, b);
    let half = ap.dim();
    let mut h = ComplexMatrix::zeros(2 * half);
    for r in 0..half {
        for c in 0..half {
            h.set(r, half + c, ap.get(r, c));
            h.set(half + r, c, ap.get(c, r).conj());
        }
    }
    let mut rhs = bp;
    rhs.resize(2 * half, C64::new(0.0, 0.0));
    (h, rhs)
}

/// A linear system in the form the solver circuit consumes: Hermitian,
/// power-of-two dimension, unit-norm right-hand side.
#[derive(Clone, Debug)]
pub struct LinearSystem {
    /// Hermitian matrix of power-of-two dimension.
    pub a: ComplexMatrix,
    /// Unit-norm right-hand side, same length as `a.dim()`.
    pub b: Vec<C64>,
    /// Norm of the right-hand side before normalization.
    pub b_norm: f64,
    /// Dimension of the matrix the caller handed in.
    pub original_dim: usize,
    /// Whether the Hermitian dilation was applied.
    pub hermitized: bool,
}

impl LinearSystem {
    /// Builds a solver-ready system from an arbitrary square matrix.
    ///
    /// Hermitian inputs are only padded; non-Hermitian inputs are padded and
    /// then dilated. The right-hand side is normalized last, with its
    /// original norm kept in `b_norm`.
    pub fn new(a: ComplexMatrix, b: Vec<C64>) -> Result<Self> {
        if a.dim() == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if b.len() != a.dim() {
            return Err(Error::Dimension(format!(
                "matrix is {0}x{0} but rhs has length {1}",
                a.dim(),
                b.len()
            )));
        }
        let original_dim = a.dim();
        let hermitized = !a.is_hermitian(HERMITIAN_TOL);
        let (ap, bp) = if hermitized {
            hermitize(&a, &b)
        } else {
            pad_to_pow2(&a, &b)
        };
        let (b_unit, b_norm) = normalize(&bp);
        if b_norm == 0.0 {
            return Err(Error::Invalid("right-hand side is the zero vector".into()));
        }
        Ok(Self {
            a: ap,
            b: b_unit,
            b_norm,
            original_dim,
            hermitized,
        })
    }

    pub fn padded_dim(&self) -> usize {
        self.a.dim()
    }

    /// Number of qubits needed to index the padded system.
    pub fn n_qubits(&self) -> usize {
        self.padded_dim().trailing_zeros() as usize
    }

    /// Offset of the original solution coordinates inside a padded solution
    /// vector. For dilated systems the solution sits in the lower half.
    pub fn solution_offset(&self) -> usize {
        if self.hermitized {
            self.padded_dim() / 2
        } else {
            0
        }
    }

    /// Extracts the caller's coordinates from a padded solution vector.
    pub fn restrict(&self, full: &[C64]) -> Vec<C64> {
        assert_eq!(full.len(), self.padded_dim());
        let off = self.solution_offset();
        full[off..off + self.original_dim].to_vec()
    }

    /// Recovers the matrix the caller handed in, undoing padding and
    /// dilation. Conditioning decisions are made on this core block, not on
    /// the padded operator whose identity fill skews the singular values.
    pub fn original_matrix(&self) -> ComplexMatrix {
        let col_off = self.solution_offset();
        ComplexMatrix::from_fn(self.original_dim, |i, j| self.a.get(i, col_off + j))
    }
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Matching eigenvectors as matrix columns.
    pub vectors: ComplexMatrix,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigenPairs> {
    let defect = a.hermiticity_defect();
    if defect > 1e-10 {
        return Err(Error::NotHermitian(defect));
    }
    let eig = a.to_na().symmetric_eigen();
    let mut order: Vec<usize> = (0..a.dim()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(a.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(EigenPairs { values, vectors })
}

/// `exp(i t A)` for Hermitian `A`, via the spectral decomposition.
pub fn unitary_exp(a: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    let n = a.dim();
    let v = &eig.vectors;
    let mut out = ComplexMatrix::zeros(n);
    for (k, lambda) in eig.values.iter().enumerate() {
        let phase = C64::new(0.0, t * lambda).exp();
        for r in 0..n {
            let vr = v.get(r, k) * phase;
            for c in 0..n {
                let cur = out.get(r, c);
                out.set(r, c, cur + vr * v.get(c, k).conj());
            }
        }
    }
    Ok(out)
}

/// Direct LU solve of the padded system `a x = b` (unit-norm `b`).
pub fn classical_solve(system: &LinearSystem) -> Result<Vec<C64>> {
    solve_dense(&system.a, &system.b)
}

/// Direct LU solve of `a x = b`.
pub fn solve_dense(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    if b.len() != a.dim() {
        return Err(Error::Dimension(format!(
            "matrix is {0}x{0} but rhs has length {1}",
            a.dim(),
            b.len()
        )));
    }
    let lu = a.to_na().lu();
    let rhs = nalgebra::DVector::from_iterator(b.len(), b.iter().copied());
    let x = lu
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))?;
    let sol: Vec<C64> = x.iter().copied().collect();
    // LU can "succeed" on nearly singular systems; reject if the residual is
    // out of proportion.
    let residual: f64 = a
        .mul_vec(&sol)
        .iter()
        .zip(b)
        .map(|(ax, bi)| (ax - bi).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual > 1e-8 * norm2(b).max(1.0) {
        return Err(Error::Singular(format!(
            "solution residual {residual:.3e} too large"
        )));
    }
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SystemMetrics {
    pub dim: usize,
    pub nonzeros: usize,
    /// Fraction of entries equal to zero.
    pub sparsity: f64,
    /// `|lambda|_max / |lambda|_min`.
    pub condition_number: f64,
    pub eig_min_abs: f64,
    pub eig_max_abs: f64,
}

/// Structural and spectral summary of the padded system matrix.
pub fn metrics(system: &LinearSystem) -> Result<SystemMetrics> {
    let a = &system.a;
    let n = a.dim();
    let nonzeros = a.data().iter().filter(|x| x.norm() > 1e-12).count();
    let eig = eig_hermitian(a)?;
    let eig_min_abs = eig.values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let eig_max_abs = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if eig_min_abs <= 1e-14 {
        return Err(Error::Singular(format!(
            "smallest eigenvalue magnitude {eig_min_abs:.3e}"
        )));
    }
    Ok(SystemMetrics {
        dim: n,
        nonzeros,
        sparsity: 1.0 - nonzeros as f64 / (n * n) as f64,
        condition_number: eig_max_abs / eig_min_abs,
        eig_min_abs,
        eig_max_abs,
    })
}

/// Haar-distributed random unitary, mostly a testing aid: Gaussian matrix,
/// QR, then column phases normalized against the R diagonal.
pub fn haar_random_unitary(dim: usize, rng: &mut impl rand::Rng) -> ComplexMatrix {
    let mut gauss = || {
        // Box-Muller transform.
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let g = nalgebra::DMatrix::<C64>::from_fn(dim, dim, |_, _| C64::new(gauss(), gauss()));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..dim {
        let d = r[(c, c)];
        let lambda = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for rix in 0..dim {
            q[(rix, c)] *= lambda;
        }
    }
    ComplexMatrix::from_na(&q)
}

/// Condition number `sigma_max / sigma_min` of an arbitrary square matrix.
pub fn condition_number(a: &ComplexMatrix) -> f64 {
    let svd = a.to_na().svd(false, false);
    let max = svd.singular_values.iter().fold(0.0f64, |a, b| a.max(*b));
    let min = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |a, b| a.min(*b));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}
