use nalgebra::{DMatrix, DVector};

use crate::bodies::HPolytope;
use crate::error::{GeomError, Result};
use crate::measures::DiscreteMeasure;
use crate::numeric::pairwise_sum;

/// Exponent regimes of the variational problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `p = 1`: minimize `sum mu_i h_i`.
    SurfaceArea,
    /// `p = 0`: minimize `sum mu_i log h_i`.
    ConeVolume,
    /// `0 < p < 1`: minimize `(1/p) sum mu_i h_i^p`.
    Intermediate(f64),
    /// `-n < p < 0`: maximize `J_p V^{-p/n}`.
    Negative(f64),
}

impl Regime {
    pub fn from_p(p: f64) -> Self {
        if p == 1.0 {
            Regime::SurfaceArea
        } else if p == 0.0 {
            Regime::ConeVolume
        } else if p > 0.0 {
            Regime::Intermediate(p)
        } else {
            Regime::Negative(p)
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            Regime::SurfaceArea => 1.0,
            Regime::ConeVolume => 0.0,
            Regime::Intermediate(p) | Regime::Negative(p) => p,
        }
    }
}

pub(crate) fn psi(p: f64, t: f64) -> f64 {
    if p == 0.0 {
        t.ln()
    } else if p == 1.0 {
        t
    } else {
        t.powf(p) / p
    }
}

pub(crate) fn psi1(p: f64, t: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        t.powf(p - 1.0)
    }
}

pub(crate) fn psi2(p: f64, t: f64) -> f64 {
    if p == 1.0 {
        0.0
    } else {
        (p - 1.0) * t.powf(p - 2.0)
    }
}

fn weighted_psi(p: f64, masses: &[f64], t: &[f64]) -> f64 {
    let terms: Vec<f64> = masses.iter().zip(t).map(|(&m, &t)| m * psi(p, t)).collect();
    pairwise_sum(&terms)
}

/// `sum mu_i psi_p(h_i)` and its gradient, with `psi_p = log` at 0 and
/// `t^p / p` otherwise.
pub fn regime_objective(p: f64, masses: &[f64], h: &[f64]) -> Result<(f64, Vec<f64>)> {
    if masses.len() != h.len() {
        return Err(GeomError::LengthMismatch {
            expected: masses.len(),
            got: h.len(),
        });
    }
    if p != 1.0 {
        if let Some(i) = h.iter().position(|&t| !(t > 0.0)) {
            return Err(GeomError::NegativeSupport { index: i });
        }
    }
    let grad = masses.iter().zip(h).map(|(&m, &t)| m * psi1(p, t)).collect();
    Ok((weighted_psi(p, masses, h), grad))
}

/// Translation `xi` maximizing `sum mu_i psi_p(h_i - <xi, u_i>)` (strictly
/// concave for `p < 1`). Zero for `p = 1`.
pub fn recenter(p: f64, normals: &[DVector<f64>], masses: &[f64], h: &[f64]) -> Result<DVector<f64>> {
    let n = normals.first().map(|u| u.len()).unwrap_or(0);
    let mut xi = DVector::zeros(n);
    if p == 1.0 {
        return Ok(xi);
    }
    if h.iter().any(|&t| !(t > 0.0)) {
        return Err(GeomError::OriginNotInterior);
    }
    let shifted = |xi: &DVector<f64>| -> Vec<f64> {
        normals.iter().zip(h).map(|(u, &t)| t - u.dot(xi)).collect()
    };
    let mut t = h.to_vec();
    let mut f = weighted_psi(p, masses, &t);
    for _ in 0..200 {
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        let mut scale = 0.0;
        for ((u, &m), &ti) in normals.iter().zip(masses).zip(&t) {
            let d1 = m * psi1(p, ti);
            grad -= u * d1;
            hess += (u * u.transpose()) * (m * psi2(p, ti));
            scale += d1;
        }
        if grad.norm() <= 1e-14 * scale {
            break;
        }
        let Some(step) = hess.lu().solve(&(-&grad)) else {
            return Err(GeomError::DegenerateBody);
        };
        // below this decrement the objective cannot resolve the step
        let decrement = -grad.dot(&step);
        let settled = decrement <= 1e-20 * scale * scale.max(1.0);
        let mut s = 1.0;
        let mut moved = false;
        for _ in 0..60 {
            let cand = &xi + &step * s;
            let tc = shifted(&cand);
            if tc.iter().all(|&x| x > 0.0) {
                let fc = weighted_psi(p, masses, &tc);
                if fc >= f || (settled && s == 1.0) {
                    xi = cand;
                    t = tc;
                    f = fc;
                    moved = true;
                    break;
                }
            }
            s *= 0.5;
        }
        if !moved || step.norm() * s <= 1e-16 * (1.0 + xi.norm()) {
            break;
        }
    }
    if !f.is_finite() {
        return Err(GeomError::BoundaryBlowup);
    }
    Ok(xi)
}

/// `max_xi sum mu_i psi_p(h_i - <xi,u_i>)` with its envelope gradient in `h`
/// and the maximizing translation.
pub fn recentered_objective(
    p: f64,
    normals: &[DVector<f64>],
    masses: &[f64],
    h: &[f64],
) -> Result<(f64, Vec<f64>, DVector<f64>)> {
    let xi = recenter(p, normals, masses, h)?;
    let t: Vec<f64> = normals.iter().zip(h).map(|(u, &x)| x - u.dot(&xi)).collect();
    let (v, g) = regime_objective(p, masses, &t)?;
    Ok((v, g, xi))
}

/// Volume of the polytope with the given offsets and its gradient (facet areas).
pub fn volume_and_gradient(normals: &[DVector<f64>], h: &[f64]) -> Result<(f64, Vec<f64>)> {
    let p = HPolytope::from_parts(normals.to_vec(), h.to_vec())?;
    let vc = p.enumerate_vertices()?;
    let areas = vc.areas();
    let n = p.dim() as f64;
    if p.origin_interior() {
        return Ok((vc.cone_volume_sum(h) / n, areas));
    }
    let c = p.chebyshev_center()?.0;
    let shifted: Vec<f64> = normals.iter().zip(h).map(|(u, &x)| x - u.dot(&c)).collect();
    Ok((vc.cone_volume_sum(&shifted) / n, areas))
}

/// `J_{p,mu}(P) V(P)^{-p/n}` for `p < 0` and its gradient in the offsets of
/// `P`, whose normals must be the directions of `mu`.
pub fn normalized_j_objective(
    p: f64,
    mu: &DiscreteMeasure,
    normals: &[DVector<f64>],
    h: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if !(p < 0.0) {
        return Err(GeomError::InvalidParams(format!("p = {p} must be negative")));
    }
    let masses = mu.masses();
    if normals.len() != masses.len() {
        return Err(GeomError::LengthMismatch {
            expected: masses.len(),
            got: normals.len(),
        });
    }
    let n = mu.dim() as f64;
    let (phi, g, _) = recentered_objective(p, normals, &masses, h)?;
    // psi = t^p / p, so J = (p / n) * phi and dJ = (p / n) * dphi
    let j = p / n * phi;
    let (v, a) = volume_and_gradient(normals, h)?;
    let e = -p / n;
    let vp = v.powf(e);
    let grad = g
        .iter()
        .zip(&a)
        .map(|(&gi, &ai)| vp * (p / n * gi) + j * e * v.powf(e - 1.0) * ai)
        .collect();
    Ok((j * vp, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(Regime::from_p(1.0), Regime::SurfaceArea);
        assert_eq!(Regime::from_p(0.0), Regime::ConeVolume);
        assert_eq!(Regime::from_p(0.3), Regime::Intermediate(0.3));
        assert_eq!(Regime::from_p(-1.0).p(), -1.0);
    }

    #[test]
    fn recenter_finds_symmetric_center() {
        let c = HPolytope::cube(3, 1.0).translated(&DVector::from_vec(vec![0.3, -0.2, 0.1]));
        let masses = vec![1.0; 6];
        for p in [0.0, 0.5, -1.0] {
            let xi = recenter(p, c.normals(), &masses, c.offsets()).unwrap();
            assert!((xi - DVector::from_vec(vec![0.3, -0.2, 0.1])).norm() < 1e-12);
        }
    }

    #[test]
    fn cube_j_equals_volume_power() {
        let c = HPolytope::cube(3, 1.0);
        let mu = crate::measures::lp_measure(&c, -1.0).unwrap();
        let (v, _) = normalized_j_objective(-1.0, &mu, c.normals(), c.offsets()).unwrap();
        assert!((v - 16.0).abs() < 1e-12);
    }
}
