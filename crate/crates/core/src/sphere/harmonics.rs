use nalgebra::{DMatrix, DVector};

use super::SphereGrid;
use crate::numeric::gamma_half;

/// Orthonormal spherical-harmonic family up to a maximal degree, evaluated
/// at the nodes of a grid.
///
/// The family is obtained by Gram-Schmidt on monomials under the exact
/// surface inner product, processing degrees in increasing order; every
/// retained function of degree `k` is orthogonal to all polynomials of
/// lower degree and therefore lies in the degree-`k` eigenspace of the
/// Laplace-Beltrami operator.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    dim: usize,
    max_degree: usize,
    degrees: Vec<usize>,
    monomials: Vec<Vec<u32>>,
    coefficients: Vec<DVector<f64>>,
    evaluations: DMatrix<f64>,
}

impl HarmonicBasis {
    pub fn new(grid: &SphereGrid, max_degree: usize) -> Self {
        let dim = grid.dim();
        let monomials: Vec<Vec<u32>> = (0..=max_degree)
            .flat_map(|k| exponents(dim, k as u32))
            .collect();
        let nm = monomials.len();
        let gram = DMatrix::from_fn(nm, nm, |i, j| {
            let alpha: Vec<u32> = monomials[i]
                .iter()
                .zip(&monomials[j])
                .map(|(a, b)| a + b)
                .collect();
            monomial_integral(&alpha)
        });
        let inner = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&(&gram * b));

        let mut degrees = Vec::new();
        let mut coefficients: Vec<DVector<f64>> = Vec::new();
        for (idx, alpha) in monomials.iter().enumerate() {
            let deg: u32 = alpha.iter().sum();
            let mut v = DVector::zeros(nm);
            v[idx] = 1.0;
            let norm0 = inner(&v, &v).sqrt();
            for _ in 0..2 {
                for q in &coefficients {
                    let c = inner(q, &v);
                    v -= q * c;
                }
            }
            let norm = inner(&v, &v).sqrt();
            // The quadratic-form norm only resolves about half the digits.
            if norm > 1e-5 * norm0 {
                coefficients.push(v / norm);
                degrees.push(deg as usize);
            }
        }

        let evaluations = DMatrix::from_fn(grid.len(), coefficients.len(), |r, c| {
            let x = &grid.nodes()[r];
            evaluate(&monomials, &coefficients[c], x)
        });
        HarmonicBasis {
            dim,
            max_degree,
            degrees,
            monomials,
            coefficients,
            evaluations,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Degree of each basis function.
    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    /// Node-by-function matrix of values.
    pub fn evaluations(&self) -> &DMatrix<f64> {
        &self.evaluations
    }

    /// Evaluate basis function `index` at an arbitrary unit vector.
    pub fn eval_at(&self, index: usize, x: &DVector<f64>) -> f64 {
        evaluate(&self.monomials, &self.coefficients[index], x)
    }

    /// Discrete Gram matrix `sum_i w_i Y_a(x_i) Y_b(x_i)`.
    pub fn discrete_gram(&self, grid: &SphereGrid) -> DMatrix<f64> {
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(grid.weights()));
        self.evaluations.transpose() * w * &self.evaluations
    }
}

fn evaluate(monomials: &[Vec<u32>], coef: &DVector<f64>, x: &DVector<f64>) -> f64 {
    monomials
        .iter()
        .zip(coef.iter())
        .filter(|(_, c)| **c != 0.0)
        .map(|(alpha, c)| {
            c * alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| x[i].powi(a as i32))
                .product::<f64>()
        })
        .sum()
}

/// All exponent vectors of total degree `k` in `dim` variables.
fn exponents(dim: usize, k: u32) -> Vec<Vec<u32>> {
    if dim == 1 {
        return vec![vec![k]];
    }
    let mut out = Vec::new();
    for first in (0..=k).rev() {
        for mut rest in exponents(dim - 1, k - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exact `int_{S^(n-1)} x^alpha dH^(n-1)`.
pub(crate) fn monomial_integral(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
    let total: u32 = alpha.iter().sum::<u32>() + alpha.len() as u32;
    2.0 * num / gamma_half(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;
    use std::f64::consts::PI;

    #[test]
    fn monomial_integrals() {
        assert!((monomial_integral(&[0, 0, 0]) - 4.0 * PI).abs() < 1e-13);
        assert!((monomial_integral(&[2, 0, 0]) - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((monomial_integral(&[2, 0]) - PI).abs() < 1e-13);
        assert_eq!(monomial_integral(&[1, 2, 0]), 0.0);
    }

    #[test]
    fn dimension_counts() {
        // dim H_k on S^2 is 2k+1; on S^1 it is 2 (k >= 1).
        let g3 = build_grid(3, 1).unwrap();
        let b = HarmonicBasis::new(&g3, 3);
        for k in 0..=3 {
            let c = b.degrees().iter().filter(|&&d| d == k).count();
            assert_eq!(c, 2 * k + 1);
        }
        let g2 = build_grid(2, 0).unwrap();
        let b = HarmonicBasis::new(&g2, 4);
        assert_eq!(b.len(), 9);
    }

    #[test]
    fn gram_identity_level_three() {
        for (dim, kmax) in [(2usize, 5usize), (3, 2)] {
            let g = build_grid(dim, 3).unwrap();
            let b = HarmonicBasis::new(&g, kmax);
            let gram = b.discrete_gram(&g);
            let err = (gram - DMatrix::identity(b.len(), b.len())).amax();
            assert!(err < 1e-6, "dim {dim}: {err}");
        }
    }
}
