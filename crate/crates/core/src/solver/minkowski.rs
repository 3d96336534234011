use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use super::objective::{psi1, psi2, recenter, regime_objective};
use super::problem::{DegeneracyFlag, MinkowskiProblem, SolveConfig, SolveReport, TraceRow};
use crate::bodies::{HPolytope, VertexComplex};
use crate::error::{GeomError, Result};
use crate::measures::lp_masses;

/// Max relative atom error after rescaling so total masses agree, and the
/// scale factor that achieves it.
pub fn measure_residual(p: f64, n: usize, masses: &[f64], target: &[f64]) -> (f64, f64) {
    let total: f64 = masses.iter().sum();
    let want: f64 = target.iter().sum();
    if !(total > 0.0) {
        return (f64::INFINITY, 1.0);
    }
    let k = want / total;
    let scale = k.powf(1.0 / (n as f64 - p));
    let r = masses
        .iter()
        .zip(target)
        .map(|(&s, &m)| (k * s - m).abs() / m)
        .fold(0.0f64, f64::max);
    (r, scale)
}

struct Ctx<'a> {
    p: f64,
    n: usize,
    normals: &'a [DVector<f64>],
    masses: Vec<f64>,
    u: DMatrix<f64>,
}

/// Iterate normalized to unit volume and recentered.
struct Point {
    h: Vec<f64>,
    areas: Vec<f64>,
    vc: VertexComplex,
    /// Factor applied to the enumerated complex to reach `h`.
    vc_scale: f64,
    phi: f64,
    lp: Vec<f64>,
    residual: f64,
    scale: f64,
}

impl Ctx<'_> {
    fn point(&self, h: Vec<f64>) -> Result<Point> {
        if h.iter().any(|&t| !(t > 0.0)) {
            return Err(GeomError::OriginNotInterior);
        }
        let body = HPolytope::from_parts(self.normals.to_vec(), h.clone())?;
        let vc = body.enumerate_vertices()?;
        let nf = self.n as f64;
        let vol = vc.cone_volume_sum(&h) / nf;
        if !(vol > 0.0) {
            return Err(GeomError::DegenerateBody);
        }
        let c = vol.powf(-1.0 / nf);
        let hs: Vec<f64> = h.iter().map(|x| x * c).collect();
        let xi = recenter(self.p, self.normals, &self.masses, &hs)?;
        let h: Vec<f64> = self.normals.iter().zip(&hs).map(|(u, &x)| x - u.dot(&xi)).collect();
        if h.iter().any(|&t| !(t > 0.0)) {
            return Err(GeomError::BoundaryBlowup);
        }
        let a_scale = c.powi(self.n as i32 - 1);
        let areas: Vec<f64> = vc.areas().iter().map(|a| a * a_scale).collect();
        let (phi, _) = regime_objective(self.p, &self.masses, &h)?;
        let lp = lp_masses(&areas, &h, self.p)?;
        let (residual, scale) = measure_residual(self.p, self.n, &lp, &self.masses);
        Ok(Point {
            h,
            areas,
            vc,
            vc_scale: c,
            phi,
            lp,
            residual,
            scale,
        })
    }

    fn gradient(&self, pt: &Point) -> Vec<f64> {
        self.masses.iter().zip(&pt.h).map(|(&m, &t)| m * psi1(self.p, t)).collect()
    }

    /// Preconditioned projected gradient; tangent to the unit-volume surface.
    fn gradient_direction(&self, pt: &Point, g: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = pt
            .h
            .iter()
            .zip(&self.masses)
            .map(|(&t, &m)| t.powf(2.0 - self.p) / m)
            .collect();
        let mut adg = 0.0;
        let mut ada = 0.0;
        for i in 0..d.len() {
            adg += pt.areas[i] * d[i] * g[i];
            ada += pt.areas[i] * d[i] * pt.areas[i];
        }
        let lam = adg / ada;
        (0..d.len()).map(|i| -d[i] * (g[i] - lam * pt.areas[i])).collect()
    }

    /// Newton step for the Lagrangian on the unit-volume surface, with
    /// translations gauged out.
    fn newton_direction(&self, pt: &Point, g: &[f64]) -> Option<Vec<f64>> {
        if pt.areas.contains(&0.0) {
            return None;
        }
        let m = pt.h.len();
        let n = self.n;
        let jac = pt.vc.area_jacobian(self.normals) * pt.vc_scale.powi(n as i32 - 2);
        let gh: f64 = g.iter().zip(&pt.h).map(|(a, b)| a * b).sum();
        let ah: f64 = pt.areas.iter().zip(&pt.h).map(|(a, b)| a * b).sum();
        let lam = gh / ah;
        let mut hess = -jac * lam;
        if self.p != 1.0 {
            let dpsi: Vec<f64> = self
                .masses
                .iter()
                .zip(&pt.h)
                .map(|(&mu, &t)| mu * psi2(self.p, t))
                .collect();
            let du = DMatrix::from_fn(m, n, |i, k| dpsi[i] * self.u[(i, k)]);
            let udu = self.u.transpose() * &du;
            let inv = udu.try_inverse()?;
            for i in 0..m {
                hess[(i, i)] += dpsi[i];
            }
            hess -= &du * inv * du.transpose();
        }
        let size = m + 1 + n;
        let mut kkt = DMatrix::zeros(size, size);
        kkt.view_mut((0, 0), (m, m)).copy_from(&hess);
        for i in 0..m {
            kkt[(i, m)] = pt.areas[i];
            kkt[(m, i)] = pt.areas[i];
            for k in 0..n {
                kkt[(i, m + 1 + k)] = self.u[(i, k)];
                kkt[(m + 1 + k, i)] = self.u[(i, k)];
            }
        }
        let mut rhs = DVector::zeros(size);
        for i in 0..m {
            rhs[i] = -g[i];
        }
        let sol = kkt.lu().solve(&rhs)?;
        let d: Vec<f64> = (0..m).map(|i| sol[i]).collect();
        if d.iter().all(|x| x.is_finite()) {
            Some(d)
        } else {
            None
        }
    }
}

/// Solves `S_{p,P} = mu` over offsets with fixed normals by minimizing the
/// regime objective on unit-volume polytopes, recentering before each step.
pub fn solve_minkowski(problem: &MinkowskiProblem, init: &HPolytope, config: &SolveConfig) -> Result<SolveReport> {
    let mu = problem.target();
    let n = mu.dim();
    let p = problem.p();
    if init.dim() != n {
        return Err(GeomError::DimensionMismatch {
            expected: n,
            got: init.dim(),
        });
    }
    if !init.origin_interior() {
        return Err(GeomError::OriginNotInterior);
    }
    let normals = mu.directions();
    let m = normals.len();
    let h0: Vec<f64> = if problem.normals_fixed() {
        let same = init.len() == m
            && init
                .normals()
                .iter()
                .zip(&normals)
                .all(|(a, b)| (a - b).norm() <= 1e-10);
        if !same {
            return Err(GeomError::InvalidInput(
                "initial body must have the target directions as normals".into(),
            ));
        }
        init.offsets().to_vec()
    } else {
        let vc = init.enumerate_vertices()?;
        normals.iter().map(|u| vc.support(u)).collect()
    };
    let ctx = Ctx {
        p,
        n,
        normals: &normals,
        masses: mu.masses(),
        u: DMatrix::from_fn(m, n, |i, k| normals[i][k]),
    };
    let mut cur = ctx.point(h0)?;
    let mut flags = BTreeSet::new();
    let mut trace = Vec::new();
    let mut residual_history = Vec::new();
    let mut objective_history = Vec::new();
    let mut best = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    let mut record = |it: usize, pt: &Point, trace: &mut Vec<TraceRow>| {
        let vol = pt.areas.iter().zip(&pt.h).map(|(a, h)| a * h).sum::<f64>() / n as f64;
        trace.push(TraceRow {
            iteration: it,
            objective: pt.phi,
            residual: pt.residual,
            min_offset: pt.h.iter().copied().fold(f64::INFINITY, f64::min),
            volume: vol,
        });
        best = best.min(pt.residual);
        residual_history.push(best);
        objective_history.push(pt.phi);
    };

    loop {
        record(iterations, &cur, &mut trace);
        if cur.residual <= config.tol {
            converged = true;
            break;
        }
        if iterations >= config.max_iter {
            break;
        }
        let hmax = cur.h.iter().copied().fold(0.0f64, f64::max);
        let hmin = cur.h.iter().copied().fold(f64::INFINITY, f64::min);
        if hmin < config.h_min * hmax {
            flags.insert(DegeneracyFlag::OriginToBoundary);
            let clamped: Vec<f64> = cur.h.iter().map(|&t| t.max(config.h_min * hmax)).collect();
            if let Ok(pt) = ctx.point(clamped) {
                iterations += 1;
                record(iterations, &pt, &mut trace);
                cur = pt;
            }
            break;
        }
        let outer = cur
            .vc
            .vertices
            .iter()
            .map(|v| v.norm())
            .fold(0.0f64, f64::max)
            * cur.vc_scale;
        if outer > config.diameter_limit * hmin {
            let body = HPolytope::from_parts(normals.clone(), cur.h.clone())?;
            let r = body.chebyshev_center().map(|c| c.1).unwrap_or(0.0);
            if outer > config.diameter_limit * r {
                flags.insert(DegeneracyFlag::DivergingDiameter);
                break;
            }
        }
        iterations += 1;
        let g = ctx.gradient(&cur);
        let mut candidates = Vec::with_capacity(2);
        if config.newton {
            if let Some(d) = ctx.newton_direction(&cur, &g) {
                let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                if slope < 0.0 {
                    candidates.push((d, slope, true));
                }
            }
        }
        let d = ctx.gradient_direction(&cur, &g);
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        candidates.push((d, slope, false));
        let mut next = None;
        for (d, slope, newton) in candidates {
            let mut s = 1.0;
            for _ in 0..40 {
                let trial: Vec<f64> = cur.h.iter().zip(&d).map(|(h, d)| h + s * d).collect();
                if let Ok(pt) = ctx.point(trial) {
                    let armijo = pt.phi <= cur.phi + 1e-4 * s * slope;
                    let flat = pt.phi <= cur.phi + 1e-12 * cur.phi.abs().max(1.0);
                    if armijo || (newton && flat && pt.residual < cur.residual) {
                        next = Some(pt);
                        break;
                    }
                }
                s *= 0.5;
            }
            if next.is_some() {
                break;
            }
        }
        match next {
            Some(pt) => cur = pt,
            None => break,
        }
    }

    if !converged && cur.areas.contains(&0.0) {
        flags.insert(DegeneracyFlag::FacetVanished);
    }
    let terminal: Vec<f64> = cur.h.iter().map(|h| h * cur.scale).collect();
    let terminal_body = HPolytope::from_parts(normals.clone(), terminal)?;
    let _ = &cur.lp;
    Ok(SolveReport {
        p,
        iterations,
        converged,
        residual_history,
        objective_history,
        final_residual: cur.residual,
        terminal_body,
        degeneracy_flags: flags,
        trace,
    })
}
