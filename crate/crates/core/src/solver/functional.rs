use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bodies::HPolytope;
use crate::error::{GeomError, Result};
use crate::measures::{lp_measure, DiscreteMeasure};
use crate::numeric::pairwise_sum;

const GRAD_TOL: f64 = 1e-10;

/// Value of `J_{p,mu}(M) = inf_{x in M} (1/n) sum mu_i h_{M-x}(u_i)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JFunctionalEval {
    pub p: f64,
    #[serde(with = "crate::measures::vector_json")]
    pub inner_minimizer: DVector<f64>,
    pub value: f64,
}

fn supports(mu: &DiscreteMeasure, m: &HPolytope) -> Result<Vec<f64>> {
    if mu.dim() != m.dim() {
        return Err(GeomError::DimensionMismatch {
            expected: m.dim(),
            got: mu.dim(),
        });
    }
    if m.dim() <= 3 {
        let vc = m.enumerate_vertices()?;
        Ok(mu.atoms().iter().map(|a| vc.support(&a.u)).collect())
    } else {
        mu.atoms().iter().map(|a| m.support_eval(&a.u)).collect()
    }
}

struct Inner<'a> {
    p: f64,
    n: f64,
    dirs: Vec<&'a DVector<f64>>,
    masses: Vec<f64>,
    h: Vec<f64>,
}

impl Inner<'_> {
    fn gaps(&self, x: &DVector<f64>) -> Vec<f64> {
        self.dirs.iter().zip(&self.h).map(|(u, &h)| h - u.dot(x)).collect()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let t = self.gaps(x);
        if t.iter().any(|&v| !(v > 0.0)) {
            return f64::INFINITY;
        }
        let terms: Vec<f64> = self.masses.iter().zip(&t).map(|(&m, &v)| m * v.powf(self.p)).collect();
        pairwise_sum(&terms) / self.n
    }

    fn grad_hess(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let d = x.len();
        let mut g = DVector::zeros(d);
        let mut hm = DMatrix::zeros(d, d);
        let p = self.p;
        for ((u, &m), t) in self.dirs.iter().zip(&self.masses).zip(self.gaps(x)) {
            g -= *u * (m * p * t.powf(p - 1.0) / self.n);
            hm += (*u * u.transpose()) * (m * p * (p - 1.0) * t.powf(p - 2.0) / self.n);
        }
        (g, hm)
    }
}

/// Damped Newton on a strictly convex function given by value and derivatives.
fn newton_min(
    mut x: DVector<f64>,
    value: impl Fn(&DVector<f64>) -> f64,
    grad_hess: impl Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    tol: f64,
) -> DVector<f64> {
    let mut f = value(&x);
    for _ in 0..500 {
        let (g, h) = grad_hess(&x);
        if g.norm() <= tol {
            break;
        }
        let step = match h.cholesky() {
            Some(c) => c.solve(&(-&g)),
            None => -&g,
        };
        let mut s = 1.0;
        let mut moved = false;
        for _ in 0..80 {
            let cand = &x + &step * s;
            let fc = value(&cand);
            if fc < f {
                x = cand;
                f = fc;
                moved = true;
                break;
            }
            s *= 0.5;
        }
        if !moved {
            break;
        }
    }
    x
}

/// `(1/n) sum mu_i (h_M(u_i) - <x,u_i>)^p` at a fixed translation.
pub fn direct_j(p: f64, mu: &DiscreteMeasure, m: &HPolytope, x: &DVector<f64>) -> Result<f64> {
    let h = supports(mu, m)?;
    let inner = Inner {
        p,
        n: m.dim() as f64,
        dirs: mu.atoms().iter().map(|a| &a.u).collect(),
        masses: mu.masses(),
        h,
    };
    let v = inner.value(x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeomError::BoundaryBlowup)
    }
}

/// Evaluates `J_{p,mu}(M)` for `p < 0`, starting the inner Newton solve at
/// the Chebyshev center of `M`.
pub fn eval_j(p: f64, mu: &DiscreteMeasure, m: &HPolytope) -> Result<JFunctionalEval> {
    if !(p < 0.0) {
        return Err(GeomError::InvalidParams(format!("p = {p} must be negative")));
    }
    let h = supports(mu, m)?;
    let inner = Inner {
        p,
        n: m.dim() as f64,
        dirs: mu.atoms().iter().map(|a| &a.u).collect(),
        masses: mu.masses(),
        h,
    };
    let (c, _) = m.chebyshev_center()?;
    if !inner.value(&c).is_finite() {
        return Err(GeomError::BoundaryBlowup);
    }
    let mut x = newton_min(c.clone(), |x| inner.value(x), |x| inner.grad_hess(x), GRAD_TOL);
    if !m.contains(&x, 1e-10) {
        x = barrier_min(&inner, m, c);
    }
    let value = inner.value(&x);
    if !value.is_finite() {
        return Err(GeomError::BoundaryBlowup);
    }
    Ok(JFunctionalEval {
        p,
        inner_minimizer: x,
        value,
    })
}

/// Minimizes over `M` itself when the free minimizer leaves it.
fn barrier_min(inner: &Inner, m: &HPolytope, start: DVector<f64>) -> DVector<f64> {
    let f0 = inner.value(&start).abs().max(1e-300);
    let mut tau = 1e-2 * f0 / m.len() as f64;
    let mut x = start;
    let slack = |x: &DVector<f64>| -> Vec<f64> {
        m.normals().iter().zip(m.offsets()).map(|(v, &h)| h - v.dot(x)).collect()
    };
    while tau > 1e-15 * f0 {
        let value = |x: &DVector<f64>| {
            let s = slack(x);
            if s.iter().any(|&v| !(v > 0.0)) {
                return f64::INFINITY;
            }
            inner.value(x) - tau * s.iter().map(|v| v.ln()).sum::<f64>()
        };
        let gh = |x: &DVector<f64>| {
            let (mut g, mut h) = inner.grad_hess(x);
            for (v, s) in m.normals().iter().zip(slack(x)) {
                g += v * (tau / s);
                h += (v * v.transpose()) * (tau / (s * s));
            }
            (g, h)
        };
        x = newton_min(x, value, gh, GRAD_TOL * 1e-2);
        tau *= 0.1;
    }
    x
}

/// Unit normal of the first pair of opposite active facets.
pub fn parallel_facet_normal(p: &HPolytope) -> Result<Option<DVector<f64>>> {
    let areas = p.enumerate_vertices()?.areas();
    let us = p.normals();
    for i in 0..us.len() {
        for j in i + 1..us.len() {
            if areas[i] > 0.0 && areas[j] > 0.0 && us[i].dot(&us[j]) < -1.0 + 1e-12 {
                return Ok(Some(us[i].clone()));
            }
        }
    }
    Ok(None)
}

/// `(I + (t - 1) u u^t) P`: stretches by `t` along the unit vector `u`.
pub fn stretch_along(p: &HPolytope, u: &DVector<f64>, t: f64) -> Result<HPolytope> {
    let n = p.dim();
    let map = DMatrix::identity(n, n) + (u * u.transpose()) * (t - 1.0);
    p.transformed(&map)
}

/// `(t, J_p(S_{p,P}, L_t) V(L_t)^{-p/n})` with `L_t` the stretch of `P` by
/// `t` along the normal of a parallel facet pair.
pub fn nonuniqueness_probe(p: &HPolytope, exponent: f64, stretches: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = p.dim() as f64;
    if !(exponent < 0.0 && exponent > -n) {
        return Err(GeomError::InvalidParams(format!("p = {exponent} outside (-{n}, 0)")));
    }
    if !p.origin_interior() {
        return Err(GeomError::OriginNotInterior);
    }
    let u = parallel_facet_normal(p)?
        .ok_or_else(|| GeomError::InvalidInput("no pair of parallel facets".into()))?;
    let mu = lp_measure(p, exponent)?;
    let mut out = Vec::with_capacity(stretches.len());
    for &t in stretches {
        if !(t > 0.0) {
            return Err(GeomError::InvalidParams(format!("stretch factor {t} must be positive")));
        }
        let l = stretch_along(p, &u, t)?;
        let j = eval_j(exponent, &mu, &l)?;
        out.push((t, j.value * l.volume()?.powf(-exponent / n)));
    }
    Ok(out)
}

/// `(J_p(K, L'), J_q(K, L')^{p/q} V(K)^{(q-p)/q})` with `L'` the translate
/// of `L` realizing the infimum in `J_p(K, L)`.
pub fn holder_interpolation_check(k: &HPolytope, l: &HPolytope, p: f64, q: f64) -> Result<(f64, f64)> {
    let n = k.dim() as f64;
    if !(-n < q && q < p && p < 0.0) {
        return Err(GeomError::InvalidParams(format!("need -n < q < p < 0, got p = {p}, q = {q}")));
    }
    if !k.origin_interior() || !l.origin_interior() {
        return Err(GeomError::OriginNotInterior);
    }
    let mu_p = lp_measure(k, p)?;
    let x = eval_j(p, &mu_p, l)?.inner_minimizer;
    let l2 = l.translated(&(-x));
    let lhs = eval_j(p, &mu_p, &l2)?.value;
    let jq = direct_j(q, &lp_measure(k, q)?, &l2, &DVector::zeros(k.dim()))?;
    let rhs = jq.powf(p / q) * k.volume()?.powf((q - p) / q);
    Ok((lhs, rhs))
}
