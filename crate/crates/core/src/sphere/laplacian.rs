use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SphereGrid;
use crate::error::{GeomError, Result};

/// Discrete Laplace-Beltrami operator on a sphere grid, optionally shifted
/// by a multiple of the identity: `Delta + shift * Id`.
///
/// On the circle the operator is the spectral (Fourier) second derivative.
/// On the icosahedral mesh it is the cotangent stencil divided by the
/// Voronoi node weights; it is symmetric with respect to the weighted inner
/// product.
#[derive(Debug, Clone)]
pub struct SphereOperator {
    kind: Kind,
    shift: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Spectral(DMatrix<f64>),
    Cotan {
        rows: Vec<Vec<(usize, f64)>>,
        mass: Vec<f64>,
    },
}

/// Eigenvalues of a sphere operator, sorted in decreasing order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// True when every eigenvalue of the discrete operator is listed.
    pub complete: bool,
}

impl Spectrum {
    pub fn min_abs(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    pub fn count_within(&self, tol: f64) -> usize {
        self.values.iter().filter(|v| v.abs() <= tol).count()
    }
}

impl SphereOperator {
    /// Laplace-Beltrami operator on the grid (`dim` 2 or 3).
    pub fn laplacian(grid: &SphereGrid) -> Result<Self> {
        let kind = match grid.dim() {
            2 => Kind::Spectral(spectral_second_derivative(grid.len())),
            3 => cotan_stencil(grid),
            dim => {
                return Err(GeomError::UnsupportedDimension {
                    dim,
                    op: "laplacian_matrix",
                })
            }
        };
        Ok(SphereOperator { kind, shift: 0.0 })
    }

    /// `self + s * Id`.
    pub fn shifted(mut self, s: f64) -> Self {
        self.shift += s;
        self
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            Kind::Spectral(m) => m.nrows(),
            Kind::Cotan { mass, .. } => mass.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.len() {
            return Err(GeomError::LengthMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        let mut y = match &self.kind {
            Kind::Spectral(m) => {
                let v = m * DVector::from_column_slice(x);
                v.iter().copied().collect::<Vec<f64>>()
            }
            Kind::Cotan { rows, mass } => rows
                .iter()
                .zip(mass)
                .map(|(row, m)| row.iter().map(|&(j, w)| w * x[j]).sum::<f64>() / m)
                .collect(),
        };
        if self.shift != 0.0 {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += self.shift * xi;
            }
        }
        Ok(y)
    }

    /// Dense matrix of the operator acting on node values (small grids only).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = match &self.kind {
            Kind::Spectral(m) => m.clone(),
            Kind::Cotan { rows, mass } => {
                let mut d = DMatrix::zeros(n, n);
                for (i, row) in rows.iter().enumerate() {
                    for &(j, w) in row {
                        d[(i, j)] = w / mass[i];
                    }
                }
                d
            }
        };
        for i in 0..n {
            m[(i, i)] += self.shift;
        }
        m
    }

    /// Eigenvalues. On the circle every eigenvalue is returned; on the mesh
    /// the `count` eigenvalues belonging to the smoothest Laplacian modes.
    pub fn spectrum(&self, count: usize) -> Spectrum {
        match &self.kind {
            Kind::Spectral(m) => {
                let n = m.nrows();
                let shifted = m + DMatrix::identity(n, n) * self.shift;
                let mut values: Vec<f64> = SymmetricEigen::new(shifted).eigenvalues.iter().copied().collect();
                values.sort_by(|a, b| b.total_cmp(a));
                Spectrum {
                    values,
                    complete: true,
                }
            }
            Kind::Cotan { rows, mass } => {
                let lows = lowest_modes(rows, mass, count.min(mass.len()));
                let mut values: Vec<f64> = lows.iter().map(|l| -l + self.shift).collect();
                values.sort_by(|a, b| b.total_cmp(a));
                Spectrum {
                    values,
                    complete: count >= mass.len(),
                }
            }
        }
    }
}

/// `laplacian_matrix` as a free function.
pub fn laplacian_matrix(grid: &SphereGrid) -> Result<SphereOperator> {
    SphereOperator::laplacian(grid)
}

/// Circulant Fourier second-derivative matrix on `n` (even) equispaced nodes.
fn spectral_second_derivative(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let mut column: Vec<f64> = (0..n)
        .map(|m| {
            if m == 0 {
                return 0.0;
            }
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let s = (m as f64 * h / 2.0).sin();
            -sign / (2.0 * s * s)
        })
        .collect();
    // constants lie in the kernel exactly
    column[0] = -crate::numeric::pairwise_sum(&column[1..]);
    DMatrix::from_fn(n, n, |i, j| column[(i + n - j) % n])
}

fn cotan_stencil(grid: &SphereGrid) -> Kind {
    let n = grid.len();
    let pos: Vec<Vector3<f64>> = grid
        .nodes()
        .iter()
        .map(|v| Vector3::new(v[0], v[1], v[2]))
        .collect();
    let mut acc: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n];
    for t in grid.triangles() {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let ea = pos[a] - pos[c];
            let eb = pos[b] - pos[c];
            let cot = ea.dot(&eb) / ea.cross(&eb).norm();
            *acc[a].entry(b).or_insert(0.0) += 0.5 * cot;
            *acc[b].entry(a).or_insert(0.0) += 0.5 * cot;
        }
    }
    let rows = acc
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let diag: f64 = m.values().sum();
            let mut row: Vec<(usize, f64)> = m.into_iter().collect();
            row.push((i, -diag));
            row
        })
        .collect();
    Kind::Cotan {
        rows,
        mass: grid.weights().to_vec(),
    }
}

/// Lowest eigenvalues of `-M^{-1} W` (nonnegative), by shift-invert
/// subspace iteration on the symmetric form `-M^{-1/2} W M^{-1/2}`.
fn lowest_modes(rows: &[Vec<(usize, f64)>], mass: &[f64], count: usize) -> Vec<f64> {
    let n = mass.len();
    let inv_sqrt: Vec<f64> = mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    // y = -S x
    let neg_s = |x: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            -rows[i]
                .iter()
                .map(|&(j, w)| w * inv_sqrt[j] * x[j])
                .sum::<f64>()
                * inv_sqrt[i]
        })
    };
    let sigma = 1.0;
    let apply_a = |x: &DVector<f64>| neg_s(x) + x * sigma;

    let block = (count + 8).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED_CAFE);
    let mut x = DMatrix::from_fn(n, block, |_, _| rng.gen::<f64>() - 0.5);
    let mut ritz_prev = vec![f64::INFINITY; block];
    let mut ritz = ritz_prev.clone();
    for _ in 0..300 {
        let mut y = DMatrix::zeros(n, block);
        for c in 0..block {
            let rhs = x.column(c).into_owned();
            let sol = conjugate_gradient(&apply_a, &rhs, 1e-13, 4 * n);
            y.set_column(c, &sol);
        }
        let q = y.qr().q();
        let aq = DMatrix::from_columns(
            &(0..block)
                .map(|c| neg_s(&q.column(c).into_owned()))
                .collect::<Vec<_>>(),
        );
        let h = q.transpose() * aq;
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        ritz = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = DMatrix::from_columns(
            &order
                .iter()
                .map(|&k| eig.eigenvectors.column(k).into_owned())
                .collect::<Vec<_>>(),
        );
        x = q * vecs;
        let change = ritz
            .iter()
            .zip(&ritz_prev)
            .take(count)
            .map(|(a, b)| (a - b).abs() / (1.0 + a.abs()))
            .fold(0.0, f64::max);
        ritz_prev = ritz.clone();
        if change < 1e-12 {
            break;
        }
    }
    ritz.truncate(count);
    ritz
}

fn conjugate_gradient(
    apply: &impl Fn(&DVector<f64>) -> DVector<f64>,
    b: &DVector<f64>,
    rel_tol: f64,
    max_iter: usize,
) -> DVector<f64> {
    let mut x = DVector::zeros(b.len());
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let target = rel_tol * rel_tol * rr.max(f64::MIN_POSITIVE);
    for _ in 0..max_iter {
        if rr <= target {
            break;
        }
        let ap = apply(&p);
        let alpha = rr / p.dot(&ap);
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_new = r.dot(&r);
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
    }
    x
}
