use nalgebra::{DMatrix, DVector};

use super::discrete::{Atom, DiscreteMeasure};
use super::polytope::{lp_masses, lp_measure};
use crate::bodies::HPolytope;
use crate::error::{GeomError, Result};
use crate::sphere::SphereGrid;

/// Invertible linear map with its cached absolute determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMap {
    matrix: DMatrix<f64>,
    det_abs: f64,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(GeomError::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let det_abs = matrix.determinant().abs();
        if !(det_abs > 1e-14) {
            return Err(GeomError::InvalidInput(format!("|det| = {det_abs:e} is too small")));
        }
        Ok(LinearMap { matrix, det_abs })
    }

    pub fn identity(n: usize) -> Self {
        LinearMap {
            matrix: DMatrix::identity(n, n),
            det_abs: 1.0,
        }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn det_abs(&self) -> f64 {
        self.det_abs
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    pub fn transpose(&self) -> LinearMap {
        LinearMap {
            matrix: self.matrix.transpose(),
            det_abs: self.det_abs,
        }
    }

    pub fn inverse(&self) -> LinearMap {
        let inv = self.matrix.clone().try_inverse().expect("checked determinant");
        LinearMap {
            matrix: inv,
            det_abs: 1.0 / self.det_abs,
        }
    }

    /// `T^{-t}`.
    pub fn inverse_transpose(&self) -> LinearMap {
        self.inverse().transpose()
    }
}

/// Moves the atom at `u` to `T u / |T u|`, keeping its mass.
pub fn pushforward(t: &LinearMap, mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    if t.dim() != mu.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: t.dim(),
            got: mu.dim(),
        });
    }
    let atoms = mu
        .atoms()
        .iter()
        .map(|a| {
            let w = t.apply(&a.u);
            let n = w.norm();
            Atom { u: w / n, mass: a.mass }
        })
        .collect();
    Ok(DiscreteMeasure::from_trusted(mu.dim(), atoms))
}

/// Curvature function of the ellipsoid `T B^n`, extended to be
/// `-(n+1)`-homogeneous: `det(T)^2 |T^t x|^{-(n+1)}`.
pub fn curvature_function_ellipsoid(t: &LinearMap, x: &DVector<f64>) -> f64 {
    let n = t.dim() as i32;
    let y = t.matrix().tr_mul(x);
    t.det_abs().powi(2) * y.norm().powi(-(n + 1))
}

/// A star body through its radial function, which is `-1`-homogeneous.
pub trait StarBody {
    fn dim(&self) -> usize;
    fn radial(&self, x: &DVector<f64>) -> f64;
}

/// Centered ball of the given radius.
#[derive(Debug, Clone, Copy)]
pub struct Ball {
    pub dim: usize,
    pub radius: f64,
}

impl StarBody for Ball {
    fn dim(&self) -> usize {
        self.dim
    }

    fn radial(&self, x: &DVector<f64>) -> f64 {
        self.radius / x.norm()
    }
}

/// The ellipsoid `A B^n`.
#[derive(Debug, Clone)]
pub struct Ellipsoid {
    inv: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(a: &LinearMap) -> Self {
        Ellipsoid {
            inv: a.inverse().matrix().clone(),
        }
    }
}

impl StarBody for Ellipsoid {
    fn dim(&self) -> usize {
        self.inv.nrows()
    }

    fn radial(&self, x: &DVector<f64>) -> f64 {
        1.0 / (&self.inv * x).norm()
    }
}

/// Radial function given by a closure.
pub struct RadialFn<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&DVector<f64>) -> f64> StarBody for RadialFn<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn radial(&self, x: &DVector<f64>) -> f64 {
        (self.f)(x)
    }
}

fn check_dims(t: &LinearMap, grid: &SphereGrid) -> Result<()> {
    if t.dim() != grid.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: grid.dim(),
            got: t.dim(),
        });
    }
    Ok(())
}

/// `(int psi(Tx) dx, |det T|^{-1} int psi dx)` for `psi = rho_S^n`.
pub fn check_equivariance(t: &LinearMap, star: &dyn StarBody, grid: &SphereGrid) -> Result<(f64, f64)> {
    check_dims(t, grid)?;
    let n = grid.dim() as i32;
    let lhs = grid.integrate_fn(|x| star.radial(&t.apply(x)).powi(n));
    let rhs = grid.integrate_fn(|x| star.radial(x).powi(n)) / t.det_abs();
    Ok((lhs, rhs))
}

/// Discrete change of variables for `S_p`: the left side integrates `phi`
/// against `S_{p,P}`; the right side re-enumerates `TP` and pulls back.
pub fn change_of_variables_lp(
    t: &LinearMap,
    p: &HPolytope,
    exponent: f64,
    phi: impl Fn(&DVector<f64>) -> f64,
) -> Result<(f64, f64)> {
    if !p.origin_interior() {
        return Err(GeomError::OriginNotInterior);
    }
    let lhs = lp_measure(p, exponent)?.integrate(&phi);
    let tp = p.transformed(t.matrix())?;
    let areas = tp.enumerate_vertices()?.areas();
    let masses = lp_masses(&areas, tp.offsets(), exponent)?;
    let mut terms = Vec::with_capacity(masses.len());
    for (x, m) in tp.normals().iter().zip(masses) {
        if m == 0.0 {
            continue;
        }
        let y = t.matrix().tr_mul(x);
        let s = y.norm();
        terms.push(phi(&(y / s)) * m * s.powf(exponent));
    }
    let rhs = crate::numeric::pairwise_sum(&terms) / t.det_abs();
    Ok((lhs, rhs))
}

/// `(int phi(T^t x / |T^t x|) |T^t x|^p dx, |det T|^{-1} int phi(x) |T^{-t} x|^{-n-p} dx)`.
pub fn change_of_variables_quadrature(
    t: &LinearMap,
    exponent: f64,
    phi: impl Fn(&DVector<f64>) -> f64,
    grid: &SphereGrid,
) -> Result<(f64, f64)> {
    check_dims(t, grid)?;
    let n = grid.dim() as f64;
    let inv_t = t.inverse_transpose();
    let lhs = grid.integrate_fn(|x| {
        let y = t.matrix().tr_mul(x);
        let s = y.norm();
        phi(&(y / s)) * s.powf(exponent)
    });
    let rhs = grid.integrate_fn(|x| phi(x) * inv_t.apply(x).norm().powf(-n - exponent)) / t.det_abs();
    Ok((lhs, rhs))
}
