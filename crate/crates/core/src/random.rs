//! Seeded generators of random test bodies.

use nalgebra::DVector;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bodies::HPolytope;
use crate::numeric::derive_seed;

/// Deterministic generator for a labelled sub-experiment.
pub fn rng_for(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, label))
}

/// Uniform direction on `S^{dim-1}`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Polytope with `facets` uniformly random normals and offsets in
/// `[lo, hi]` (`lo > 0`, so `o` is interior).
pub fn random_polytope<R: Rng + ?Sized>(rng: &mut R, dim: usize, facets: usize, lo: f64, hi: f64) -> HPolytope {
    loop {
        let normals: Vec<_> = (0..facets).map(|_| unit_vector(rng, dim)).collect();
        let offsets: Vec<_> = (0..facets).map(|_| rng.gen_range(lo..=hi)).collect();
        if let Ok(p) = HPolytope::new(normals, offsets) {
            if p.enumerate_vertices().is_ok() {
                return p;
            }
        }
    }
}

/// Origin-symmetric polytope with `pairs` pairs of opposite facets.
pub fn random_symmetric_polytope<R: Rng + ?Sized>(rng: &mut R, dim: usize, pairs: usize, lo: f64, hi: f64) -> HPolytope {
    loop {
        let mut normals = Vec::with_capacity(2 * pairs);
        let mut offsets = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let u = unit_vector(rng, dim);
            let h = rng.gen_range(lo..=hi);
            normals.push(-&u);
            normals.push(u);
            offsets.push(h);
            offsets.push(h);
        }
        if let Ok(p) = HPolytope::new(normals, offsets) {
            if p.enumerate_vertices().is_ok() {
                return p;
            }
        }
    }
}

/// Random polygon translated so that its centroid is the origin.
pub fn random_centered_polygon<R: Rng + ?Sized>(rng: &mut R, edges: usize) -> HPolytope {
    let p = random_polytope(rng, 2, edges, 0.3, 1.5);
    let c = polygon_centroid(&p);
    p.translated(&(-c))
}

/// Area centroid of a polygon.
pub fn polygon_centroid(p: &HPolytope) -> DVector<f64> {
    let vc = p.enumerate_vertices().expect("valid polygon");
    let mut pts = vc.vertices.clone();
    let n = pts.len() as f64;
    let cx = pts.iter().map(|v| v[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|v| v[1]).sum::<f64>() / n;
    pts.sort_by(|a, b| (a[1] - cy).atan2(a[0] - cx).total_cmp(&(b[1] - cy).atan2(b[0] - cx)));
    let (mut a, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for k in 0..pts.len() {
        let (x0, y0) = (pts[k][0], pts[k][1]);
        let (x1, y1) = (pts[(k + 1) % pts.len()][0], pts[(k + 1) % pts.len()][1]);
        let c = x0 * y1 - x1 * y0;
        a += c;
        sx += (x0 + x1) * c;
        sy += (y0 + y1) * c;
    }
    DVector::from_vec(vec![sx / (3.0 * a), sy / (3.0 * a)])
}
