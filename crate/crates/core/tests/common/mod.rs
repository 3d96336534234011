//! Oracles shared by the integration suites.
#![allow(dead_code)]

use lpgeom::HPolytope;
use nalgebra::{DVector, Matrix3, Vector3};

/// Volume by fan-triangulating each facet around its centroid and coning
/// from the Chebyshev center; independent of the facet areas.
pub fn triangulated_volume(p: &HPolytope) -> f64 {
    let vc = p.enumerate_vertices().unwrap();
    let (c, _) = p.chebyshev_center().unwrap();
    let mut total = 0.0;
    for (facet, u) in vc.facets.iter().zip(p.normals()) {
        if facet.vertices.len() < p.dim() {
            continue;
        }
        let pts: Vec<DVector<f64>> = facet.vertices.iter().map(|&i| &vc.vertices[i] - &c).collect();
        if p.dim() == 2 {
            let (a, b) = (&pts[0], &pts[1]);
            total += 0.5 * (a[0] * b[1] - a[1] * b[0]).abs();
            continue;
        }
        let centre = pts.iter().fold(DVector::zeros(3), |acc, v| acc + v) / pts.len() as f64;
        let e1 = (&pts[0] - &centre).normalize();
        let e2 = DVector::from_column_slice(u.cross(&e1).as_slice());
        let angle = |v: &DVector<f64>| (v - &centre).dot(&e2).atan2((v - &centre).dot(&e1));
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
        let col = |v: &DVector<f64>| Vector3::new(v[0], v[1], v[2]);
        for k in 0..sorted.len() {
            let (a, b) = (&sorted[k], &sorted[(k + 1) % sorted.len()]);
            total += Matrix3::from_columns(&[col(&centre), col(a), col(b)]).determinant().abs() / 6.0;
        }
    }
    total
}

/// Central differences with the given step.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, h: &[f64], step: f64) -> Vec<f64> {
    (0..h.len())
        .map(|i| {
            let mut a = h.to_vec();
            let mut b = h.to_vec();
            a[i] += step;
            b[i] -= step;
            (f(&a) - f(&b)) / (2.0 * step)
        })
        .collect()
}

/// `max_i |a_i - b_i| / max_i |a_i|`.
pub fn relative_gap(analytic: &[f64], numeric: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    analytic
        .iter()
        .zip(numeric)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}
