use super::discrete::{Atom, DiscreteMeasure};
use crate::bodies::HPolytope;
use crate::error::{GeomError, Result};
use crate::numeric::sphere_area;

/// Offsets with magnitude at most this are treated as zero.
pub const ZERO_OFFSET: f64 = 1e-12;

/// Per-normal masses `h_i^{1-p} |F_i|`; zero for inactive facets.
pub fn lp_masses(areas: &[f64], offsets: &[f64], p: f64) -> Result<Vec<f64>> {
    if areas.len() != offsets.len() {
        return Err(GeomError::LengthMismatch {
            expected: areas.len(),
            got: offsets.len(),
        });
    }
    let mut out = Vec::with_capacity(areas.len());
    for (i, (&a, &h)) in areas.iter().zip(offsets).enumerate() {
        if a == 0.0 {
            out.push(0.0);
        } else if p == 1.0 {
            out.push(a);
        } else if h.abs() <= ZERO_OFFSET {
            if p > 1.0 {
                return Err(GeomError::IntegrabilityViolation { index: i, p });
            }
            out.push(0.0);
        } else if h < 0.0 {
            return Err(GeomError::OriginOutside);
        } else {
            out.push(h.powf(1.0 - p) * a);
        }
    }
    Ok(out)
}

fn active_measure(p: &HPolytope, masses: &[f64], areas: &[f64]) -> DiscreteMeasure {
    let atoms = p
        .normals()
        .iter()
        .zip(masses)
        .zip(areas)
        .filter(|(_, &a)| a > 0.0)
        .map(|((u, &m), _)| Atom { u: u.clone(), mass: m })
        .collect();
    DiscreteMeasure::from_trusted(p.dim(), atoms)
}

/// Facet areas at facet normals; inactive normals are omitted.
pub fn surface_area_measure(p: &HPolytope) -> Result<DiscreteMeasure> {
    let areas = p.enumerate_vertices()?.areas();
    Ok(active_measure(p, &areas, &areas))
}

/// `dS_p = h^{1-p} dS`.
pub fn lp_measure(p: &HPolytope, exponent: f64) -> Result<DiscreteMeasure> {
    let areas = p.enumerate_vertices()?.areas();
    let masses = lp_masses(&areas, p.offsets(), exponent)?;
    Ok(active_measure(p, &masses, &areas))
}

/// `(1/n) S_0`; total mass is the volume.
pub fn cone_volume_measure(p: &HPolytope) -> Result<DiscreteMeasure> {
    let areas = p.enumerate_vertices()?.areas();
    if areas
        .iter()
        .zip(p.offsets())
        .any(|(&a, &h)| a > 0.0 && h < -ZERO_OFFSET)
    {
        return Err(GeomError::OriginOutside);
    }
    let masses = lp_masses(&areas, p.offsets(), 0.0)?;
    Ok(active_measure(p, &masses, &areas).scaled(1.0 / p.dim() as f64))
}

/// Lower volume bound for bodies with `|S_{p,L}| >= |S^{n-1}| / theta` and
/// `h_L <= theta`, valid for `0 <= p < 1` and `theta > 1`.
pub fn volume_lower_bound(n: usize, p: f64, theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(GeomError::InvalidParams(format!("p = {p} outside [0, 1)")));
    }
    if !(theta > 1.0) || n < 2 {
        return Err(GeomError::InvalidParams(format!("need theta > 1 and n >= 2, got {theta}, {n}")));
    }
    let w = sphere_area(n);
    let e = 1.0 / (1.0 - p);
    let nf = n as f64;
    let nv = (w / theta).powf(e) * theta.powf(-p * (nf - 1.0) * e) * w.powf(-p * e);
    Ok(nv / nf)
}
