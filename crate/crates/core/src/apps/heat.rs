//! Implicit 2-D heat diffusion step as a linear system.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, LinearSystem};

/// One implicit Euler step of diffusion on an `l` by `l` grid.
#[derive(Clone, Debug)]
pub struct HeatSpec {
    /// Lateral grid points; the system has dimension `l^2`.
    pub l: usize,
    /// Dimensionless diffusion coefficient (D dt / dx^2 role).
    pub r: f64,
    /// Forcing term, length `l^2`.
    pub forcing: Vec<f64>,
}

impl HeatSpec {
    /// Spec with the default forcing: a uniform positive vector of unit
    /// norm, so every grid point carries weight `1/l`.
    pub fn new(l: usize, r: f64) -> Self {
        let dim = l * l;
        Self {
            l,
            r,
            forcing: vec![1.0 / l as f64; dim],
        }
    }
}

/// Stencil matrix over the flattened grid: `1 + 4r` on the diagonal, `-r`
/// whenever the flat indices differ by 1 or by `l`. The row-major index
/// difference rule is applied verbatim, including across lattice row wraps.
pub fn heat_matrix(spec: &HeatSpec) -> Result<LinearSystem> {
    if spec.l < 2 {
        return Err(Error::Invalid(format!(
            "grid must have at least 2 lateral points, got {}",
            spec.l
        )));
    }
    if !(spec.r.is_finite() && spec.r > 0.0) {
        return Err(Error::Invalid(format!(
            "diffusion coefficient must be positive, got {}",
            spec.r
        )));
    }
    let dim = spec.l * spec.l;
    if spec.forcing.len() != dim {
        return Err(Error::Dimension(format!(
            "forcing has length {}, expected l^2 = {}",
            spec.forcing.len(),
            dim
        )));
    }
    let l = spec.l;
    let r = spec.r;
    let a = ComplexMatrix::from_fn(dim, |p, q| {
        if p == q {
            C64::new(1.0 + 4.0 * r, 0.0)
        } else if p.abs_diff(q) == 1 || p.abs_diff(q) == l {
            C64::new(-r, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let b: Vec<C64> = spec.forcing.iter().map(|&f| C64::new(f, 0.0)).collect();
    LinearSystem::new(a, b)
}
