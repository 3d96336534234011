//! Closed-form evaluation of a body whose L_p surface-area measure lives on
//! the great subsphere `S^{n-1} ∩ L` with a positive continuous density.
//!
//! Frames are fixed: `L = span{e_1..e_{m+1}}`, `u = e_{m+1}`,
//! `L_0 = span{e_1..e_m}` and `L^⊥ = span{e_{m+2}..e_n}`. The body is
//! `C ∩ (M + L^⊥)` where `∂M` near `o` is the graph `z - |z|^q u` over `L_0`
//! and `C = C_0 + L_0` with `C_0` the right circular cone of half-angle π/4
//! around `-u` inside `L_0^⊥`.

use std::f64::consts::FRAC_PI_4;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::numeric::{gauss_legendre_on, pairwise_sum, sphere_area, unit_ball_volume};
use crate::sphere::build_grid;

pub const DEFAULT_PATCH_RADIUS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl ConstructionParams {
    pub fn new(n: usize, m: usize, p: f64, r: f64) -> Result<Self> {
        if n < 2 || m + 2 > n {
            return Err(GeomError::InvalidParams(format!("need 0 <= m <= n - 2, got n = {n}, m = {m}")));
        }
        if !(p < 1.0) {
            return Err(GeomError::InvalidParams(format!("need p < 1, got {p}")));
        }
        let gap = n as f64 - 2.0 * m as f64 - p;
        if !(gap < 0.0) {
            return Err(GeomError::InvalidParams(format!("need n - 2m - p < 0, got {gap}")));
        }
        let q = 2.0 * m as f64 / (2.0 * m as f64 + p - n as f64);
        if !(q > 2.0) {
            return Err(GeomError::InvalidParams(format!("need q > 2, got {q}")));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(GeomError::InvalidParams(format!("need 0 < r < 1, got {r}")));
        }
        Ok(ConstructionParams { n, m, p, q, r })
    }

    pub fn with_default_radius(n: usize, m: usize, p: f64) -> Result<Self> {
        Self::new(n, m, p, DEFAULT_PATCH_RADIUS)
    }

    /// Largest angle between `u` and an outer normal of the graph patch.
    pub fn patch_angle(&self) -> f64 {
        (self.q * self.r.powf(self.q - 1.0)).atan()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeModel {
    pub n: usize,
    pub m: usize,
    pub axis: DVector<f64>,
    pub half_angle: f64,
}

impl ConeModel {
    pub fn new(params: &ConstructionParams) -> Self {
        let mut axis = DVector::zeros(params.n);
        axis[params.m] = 1.0;
        ConeModel {
            n: params.n,
            m: params.m,
            axis,
            half_angle: FRAC_PI_4,
        }
    }

    /// Membership in `C`: `|x_{L^⊥}| <= <x, -u>`.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        let depth = -x[self.m];
        let perp = x.rows(self.m + 1, self.n - self.m - 1).norm();
        perp <= depth + tol
    }
}

/// Volume of the unit ball in `R^k`.
pub fn eta(k: usize) -> f64 {
    unit_ball_volume(k)
}

fn check_patch(z: &DVector<f64>, params: &ConstructionParams) -> Result<f64> {
    if z.len() != params.m {
        return Err(GeomError::DimensionMismatch {
            expected: params.m,
            got: z.len(),
        });
    }
    let s = z.norm();
    if s >= params.r {
        return Err(GeomError::OutOfPatch {
            norm: s,
            radius: params.r,
        });
    }
    Ok(s)
}

/// `z - |z|^q u` as a point of `R^n`.
pub fn boundary_graph(z: &DVector<f64>, params: &ConstructionParams) -> Result<DVector<f64>> {
    let s = check_patch(z, params)?;
    let mut x = DVector::zeros(params.n);
    x.rows_mut(0, params.m).copy_from(z);
    x[params.m] = -s.powf(params.q);
    Ok(x)
}

/// `Dg(z) = q |z|^{q-2} z`.
pub fn graph_gradient(z: &DVector<f64>, params: &ConstructionParams) -> Result<DVector<f64>> {
    let s = check_patch(z, params)?;
    if s == 0.0 {
        return Ok(DVector::zeros(params.m));
    }
    Ok(z * (params.q * s.powf(params.q - 2.0)))
}

/// Outer unit normal of `M` at `z - g(z) u`, in `L` coordinates.
pub fn graph_normal(z: &DVector<f64>, params: &ConstructionParams) -> Result<DVector<f64>> {
    let dg = graph_gradient(z, params)?;
    let g = (1.0 + dg.norm_squared()).sqrt();
    let mut v = DVector::zeros(params.m + 1);
    v.rows_mut(0, params.m).copy_from(&(dg / g));
    v[params.m] = 1.0 / g;
    Ok(v)
}

/// `det D^2 g(z) = q^m (q-1) |z|^{m(q-2)}`.
pub fn hessian_determinant(s: f64, params: &ConstructionParams) -> f64 {
    let (q, m) = (params.q, params.m as f64);
    q.powf(m) * (q - 1.0) * s.powf(m * (q - 2.0))
}

/// `log φ(v(z))` as a function of `s = |z|`.
fn log_phi(s: f64, params: &ConstructionParams) -> f64 {
    let (q, p, m, n) = (params.q, params.p, params.m as f64, params.n as f64);
    let ls = s.ln();
    let slope = q * s.powf(q - 1.0);
    let log_g = slope.powi(2).ln_1p();
    let log_support = -0.5 * log_g + (q - 1.0).ln() + q * ls;
    let log_section = eta(params.n - params.m - 1).ln() + q * (n - m - 1.0) * ls;
    let log_inv_curv = 0.5 * (m + 2.0) * log_g - hessian_determinant(s, params).ln();
    (1.0 - p) * log_support + log_section + log_inv_curv
}

/// Density of `S_{p,K}` on `S^{n-1} ∩ L` at the normal `v(z)`.
pub fn density_phi(z: &DVector<f64>, params: &ConstructionParams) -> Result<f64> {
    let s = check_patch(z, params)?;
    if s == 0.0 {
        return Err(GeomError::SingularAtZero);
    }
    Ok(log_phi(s, params).exp())
}

/// Density at a unit normal `v` (in `L` coordinates) of the patch's normal image.
pub fn density_at_normal(v: &DVector<f64>, params: &ConstructionParams) -> Result<f64> {
    if v.len() != params.m + 1 {
        return Err(GeomError::DimensionMismatch {
            expected: params.m + 1,
            got: v.len(),
        });
    }
    let s = radius_for_angle(normal_angle(v, params.m), params);
    if s >= params.r {
        return Err(GeomError::OutOfPatch {
            norm: s,
            radius: params.r,
        });
    }
    if s == 0.0 {
        return Err(GeomError::SingularAtZero);
    }
    Ok(log_phi(s, params).exp())
}

/// `lim_{z -> o} φ(v(z)) = η_{n-m-1} / (q^m (q-1)^p)`.
pub fn density_limit(params: &ConstructionParams) -> f64 {
    eta(params.n - params.m - 1) / (params.q.powf(params.m as f64) * (params.q - 1.0).powf(params.p))
}

/// Rows `(|z|, φ(v(z)), limit, ratio)` along a ray of `L_0`.
pub fn limit_table(params: &ConstructionParams, norms: &[f64]) -> Result<Vec<[f64; 4]>> {
    let limit = density_limit(params);
    norms
        .iter()
        .map(|&s| {
            let mut z = DVector::zeros(params.m);
            z[0] = s;
            let phi = density_phi(&z, params)?;
            Ok([s, phi, limit, phi / limit])
        })
        .collect()
}

/// `H^{n-m-1}((x + L^⊥) ∩ C) = η_{n-m-1} <x, -u>^{n-m-1}`.
pub fn cone_section_volume(x: &DVector<f64>, cone: &ConeModel) -> Result<f64> {
    if x.len() != cone.n {
        return Err(GeomError::DimensionMismatch {
            expected: cone.n,
            got: x.len(),
        });
    }
    if !cone.contains(x, 1e-12) {
        return Err(GeomError::PointOutsideCone);
    }
    let k = cone.n - cone.m - 1;
    Ok(eta(k) * (-x[cone.m]).max(0.0).powi(k as i32))
}

/// Spherical cap of `S^{n-1} ∩ L`, in `L` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Cap {
    pub center: DVector<f64>,
    pub radius: f64,
}

impl Cap {
    pub fn new(center: DVector<f64>, radius: f64) -> Result<Self> {
        let norm = center.norm();
        if !(norm > 0.0) || !(radius > 0.0 && radius < std::f64::consts::PI) {
            return Err(GeomError::InvalidInput("cap needs a nonzero center and radius in (0, pi)".into()));
        }
        Ok(Cap {
            center: center / norm,
            radius,
        })
    }

    /// `H^m` of a cap of the given angular radius on `S^m`.
    pub fn area(m: usize, radius: f64) -> f64 {
        if m == 1 {
            return 2.0 * radius;
        }
        let rule = gauss_legendre_on(64, 0.0, radius);
        let terms: Vec<f64> = rule.iter().map(|&(t, w)| w * t.sin().powi(m as i32 - 1)).collect();
        sphere_area(m) * pairwise_sum(&terms)
    }
}

fn normal_angle(v: &DVector<f64>, m: usize) -> f64 {
    let horiz = v.rows(0, m).norm();
    horiz.atan2(v[m])
}

/// `|z|` whose normal makes angle `theta` with `u`: `tan θ = q s^{q-1}`.
fn radius_for_angle(theta: f64, params: &ConstructionParams) -> f64 {
    (theta.tan() / params.q).powf(1.0 / (params.q - 1.0))
}

/// Integrand of the structure formula in the variable `t = s^{q-1}`:
/// support^{1-p} * section * graph Jacobian * polar factor * ds/dt.
pub(crate) fn structure_integrand(t: f64, exponent: f64, params: &ConstructionParams) -> f64 {
    let (q, m) = (params.q, params.m as f64);
    let k = params.n - params.m - 1;
    let s = t.powf(1.0 / (q - 1.0));
    let jac = (1.0 + (q * t).powi(2)).sqrt();
    let support = (q - 1.0) * s.powf(q) / jac;
    let section = eta(k) * s.powf(q * k as f64);
    let ds_dt = s / ((q - 1.0) * t);
    support.powf(1.0 - exponent) * section * jac * s.powf(m - 1.0) * ds_dt
}

/// Quadrature resolution for [`lower_dim_measure_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureQuadrature {
    /// Level of the direction grid on `S^{m-1}` (unused for `m = 1`).
    pub direction_level: usize,
    /// Gauss-Legendre nodes per radial interval.
    pub radial_nodes: usize,
}

impl Default for MeasureQuadrature {
    fn default() -> Self {
        MeasureQuadrature {
            direction_level: 5,
            radial_nodes: 24,
        }
    }
}

/// `S_{p,K}(ω)` for a union of disjoint caps `ω`, integrating the
/// structure formula over the graph parameterization.
pub fn lower_dim_measure(omega: &[Cap], cone: &ConeModel, params: &ConstructionParams) -> Result<f64> {
    lower_dim_measure_with(omega, cone, params, MeasureQuadrature::default())
}

pub fn lower_dim_measure_with(
    omega: &[Cap],
    cone: &ConeModel,
    params: &ConstructionParams,
    quad: MeasureQuadrature,
) -> Result<f64> {
    let m = params.m;
    if cone.n != params.n || cone.m != m {
        return Err(GeomError::DimensionMismatch {
            expected: params.n,
            got: cone.n,
        });
    }
    let limit_angle = params.patch_angle();
    for cap in omega {
        if cap.center.len() != m + 1 {
            return Err(GeomError::DimensionMismatch {
                expected: m + 1,
                got: cap.center.len(),
            });
        }
        let far = normal_angle(&cap.center, m) + cap.radius;
        if far >= limit_angle {
            return Err(GeomError::OutOfPatch {
                norm: radius_for_angle(far.min(std::f64::consts::FRAC_PI_2 - 1e-12), params),
                radius: params.r,
            });
        }
    }
    let (dirs, dir_weights): (Vec<DVector<f64>>, Vec<f64>) = if m == 1 {
        (vec![DVector::from_vec(vec![1.0]), DVector::from_vec(vec![-1.0])], vec![1.0, 1.0])
    } else {
        let g = build_grid(m, quad.direction_level)?;
        (g.nodes().to_vec(), g.weights().to_vec())
    };
    let mut per_dir = Vec::with_capacity(dirs.len());
    for (zhat, w) in dirs.iter().zip(&dir_weights) {
        let mut acc = Vec::new();
        for cap in omega {
            let Some((lo, hi)) = angle_interval(cap, zhat, m) else {
                continue;
            };
            let (tlo, thi) = (lo.tan() / params.q, hi.tan() / params.q);
            for (t, wt) in gauss_legendre_on(quad.radial_nodes, tlo, thi) {
                acc.push(wt * structure_integrand(t, params.p, params));
            }
        }
        per_dir.push(w * pairwise_sum(&acc));
    }
    Ok(pairwise_sum(&per_dir))
}

/// Angles `θ ∈ [0, π/2)` along the meridian through `zhat` whose normals
/// `(sin θ zhat, cos θ)` lie in the cap.
fn angle_interval(cap: &Cap, zhat: &DVector<f64>, m: usize) -> Option<(f64, f64)> {
    let horiz = cap.center.rows(0, m);
    let a = horiz.dot(zhat);
    let b = cap.center[m];
    let amp = (a * a + b * b).sqrt();
    let c = cap.radius.cos();
    if c > amp {
        return None;
    }
    let mid = a.atan2(b);
    let half = (c / amp).acos();
    let lo = (mid - half).max(0.0);
    let hi = (mid + half).min(std::f64::consts::FRAC_PI_2);
    if hi > lo {
        Some((lo, hi))
    } else {
        None
    }
}
