//! Quadrature grids on the unit sphere S^(n-1), harmonic families and the
//! Laplace-Beltrami operator.

mod harmonics;
mod laplacian;

pub use harmonics::HarmonicBasis;
pub use laplacian::{laplacian_matrix, SphereOperator, Spectrum};

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::numeric::{gauss_legendre, pairwise_sum};

/// Largest ambient dimension for which grids are built.
pub const MAX_GRID_DIM: usize = 6;

/// Quadrature nodes and positive weights on S^(n-1).
///
/// For `dim == 3` the grid also carries the triangle mesh of the subdivided
/// icosahedron it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridJson", into = "GridJson")]
pub struct SphereGrid {
    dim: usize,
    level: usize,
    nodes: Vec<DVector<f64>>,
    weights: Vec<f64>,
    triangles: Vec<[usize; 3]>,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    dim: usize,
    level: usize,
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl From<SphereGrid> for GridJson {
    fn from(g: SphereGrid) -> Self {
        GridJson {
            dim: g.dim,
            level: g.level,
            nodes: g.nodes.iter().map(|v| v.iter().copied().collect()).collect(),
            weights: g.weights,
        }
    }
}

impl TryFrom<GridJson> for SphereGrid {
    type Error = GeomError;

    fn try_from(j: GridJson) -> Result<Self> {
        let rebuilt = SphereGrid::build(j.dim, j.level)?;
        if rebuilt.nodes.len() != j.nodes.len() || rebuilt.weights.len() != j.weights.len() {
            return Err(GeomError::InvalidInput(
                "grid node count does not match its dim/level".into(),
            ));
        }
        for (a, b) in rebuilt.nodes.iter().zip(&j.nodes) {
            if b.len() != j.dim || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12) {
                return Err(GeomError::InvalidInput(
                    "grid nodes do not match the canonical grid".into(),
                ));
            }
        }
        for (a, b) in rebuilt.weights.iter().zip(&j.weights) {
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(GeomError::InvalidInput(
                    "grid weights do not match the canonical grid".into(),
                ));
            }
        }
        Ok(rebuilt)
    }
}

impl SphereGrid {
    /// Build the canonical grid for the given dimension and refinement level.
    ///
    /// * `dim == 2`: `2^(level+4)` equally spaced angles.
    /// * `dim == 3`: icosahedron subdivided `level` times, spherical Voronoi weights.
    /// * `4 <= dim <= 6`: tensor product of Gauss rules in hyperspherical angles.
    pub fn build(dim: usize, level: usize) -> Result<Self> {
        match dim {
            2 => Ok(circle_grid(level)),
            3 => Ok(icosahedral_grid(level)),
            4..=MAX_GRID_DIM => Ok(tensor_grid(dim, level)),
            _ => Err(GeomError::UnsupportedDimension {
                dim,
                op: "build_grid",
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[DVector<f64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Triangles of the icosahedral mesh (empty unless `dim == 3`).
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// `sum_i w_i f_i`, pairwise-summed.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(GeomError::LengthMismatch {
                expected: self.nodes.len(),
                got: values.len(),
            });
        }
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(values)
            .map(|(w, f)| w * f)
            .collect();
        Ok(pairwise_sum(&terms))
    }

    /// Integrate a function of the node direction.
    pub fn integrate_fn(&self, f: impl Fn(&DVector<f64>) -> f64) -> f64 {
        let vals: Vec<f64> = self.nodes.iter().map(&f).collect();
        self.integrate(&vals).expect("lengths agree by construction")
    }

    /// Evaluate a function at every node.
    pub fn sample(&self, f: impl Fn(&DVector<f64>) -> f64) -> Vec<f64> {
        self.nodes.iter().map(f).collect()
    }

    /// Typical spacing between neighbouring nodes (radians).
    pub fn mesh_size(&self) -> f64 {
        match self.dim {
            2 => 2.0 * PI / self.nodes.len() as f64,
            3 => {
                let mut longest: f64 = 0.0;
                for t in &self.triangles {
                    for k in 0..3 {
                        let a = &self.nodes[t[k]];
                        let b = &self.nodes[t[(k + 1) % 3]];
                        longest = longest.max(a.dot(b).clamp(-1.0, 1.0).acos());
                    }
                }
                longest
            }
            _ => {
                let total: f64 = self.weights.iter().sum();
                (total / self.nodes.len() as f64).powf(1.0 / (self.dim - 1) as f64)
            }
        }
    }

    /// Neighbour lists: cyclic neighbours for `dim == 2`, mesh neighbours in
    /// angular order for `dim == 3`. Empty for higher dimensions.
    pub fn neighbor_rings(&self) -> Vec<Vec<usize>> {
        match self.dim {
            2 => {
                let n = self.nodes.len();
                (0..n).map(|i| vec![(i + n - 1) % n, (i + 1) % n]).collect()
            }
            3 => ordered_rings(self.nodes.len(), &self.triangles),
            _ => Vec::new(),
        }
    }
}

/// Convenience wrapper matching the operation name used throughout the crate.
pub fn build_grid(dim: usize, level: usize) -> Result<SphereGrid> {
    SphereGrid::build(dim, level)
}

fn circle_grid(level: usize) -> SphereGrid {
    let count = 1usize << (level + 4);
    let w = 2.0 * PI / count as f64;
    let nodes = (0..count)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / count as f64;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect();
    SphereGrid {
        dim: 2,
        level,
        nodes,
        weights: vec![w; count],
        triangles: Vec::new(),
    }
}

fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts = Vec::with_capacity(12);
    for &s1 in &[-1.0, 1.0] {
        for &s2 in &[-1.0, 1.0] {
            verts.push(Vector3::new(0.0, s1, s2 * phi));
            verts.push(Vector3::new(s1, s2 * phi, 0.0));
            verts.push(Vector3::new(s2 * phi, 0.0, s1));
        }
    }
    let verts: Vec<Vector3<f64>> = verts.into_iter().map(|v| v.normalize()).collect();
    let mut edge = f64::INFINITY;
    for i in 0..12 {
        for j in i + 1..12 {
            edge = edge.min((verts[i] - verts[j]).norm());
        }
    }
    let adjacent = |i: usize, j: usize| ((verts[i] - verts[j]).norm() - edge).abs() < 1e-9;
    let mut faces = Vec::with_capacity(20);
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                    let n = (verts[j] - verts[i]).cross(&(verts[k] - verts[i]));
                    if n.dot(&(verts[i] + verts[j] + verts[k])) > 0.0 {
                        faces.push([i, j, k]);
                    } else {
                        faces.push([i, k, j]);
                    }
                }
            }
        }
    }
    (verts, faces)
}

fn subdivide(verts: &mut Vec<Vector3<f64>>, faces: &[[usize; 3]]) -> Vec<[usize; 3]> {
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
        let key = (a.min(b), a.max(b));
        *mid.entry(key).or_insert_with(|| {
            let m = (verts[a] + verts[b]).normalize();
            verts.push(m);
            verts.len() - 1
        })
    };
    let mut out = Vec::with_capacity(faces.len() * 4);
    for &[a, b, c] in faces {
        let ab = midpoint(a, b, verts);
        let bc = midpoint(b, c, verts);
        let ca = midpoint(c, a, verts);
        out.push([a, ab, ca]);
        out.push([b, bc, ab]);
        out.push([c, ca, bc]);
        out.push([ab, bc, ca]);
    }
    out
}

/// Signed area of the spherical triangle (a, b, c).
pub(crate) fn spherical_triangle_area(a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    let triple = a.dot(&b.cross(c));
    let denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * triple.atan2(denom)
}

fn icosahedral_grid(level: usize) -> SphereGrid {
    let (mut verts, mut faces) = icosahedron();
    for _ in 0..level {
        faces = subdivide(&mut verts, &faces);
    }
    let mut weights = vec![0.0; verts.len()];
    for &[a, b, c] in &faces {
        let (pa, pb, pc) = (verts[a], verts[b], verts[c]);
        let o = (pb - pa).cross(&(pc - pa)).normalize();
        let mab = (pa + pb).normalize();
        let mbc = (pb + pc).normalize();
        let mca = (pc + pa).normalize();
        weights[a] += spherical_triangle_area(&pa, &mab, &o) + spherical_triangle_area(&pa, &o, &mca);
        weights[b] += spherical_triangle_area(&pb, &mbc, &o) + spherical_triangle_area(&pb, &o, &mab);
        weights[c] += spherical_triangle_area(&pc, &mca, &o) + spherical_triangle_area(&pc, &o, &mbc);
    }
    SphereGrid {
        dim: 3,
        level,
        nodes: verts
            .iter()
            .map(|v| DVector::from_column_slice(v.as_slice()))
            .collect(),
        weights,
        triangles: faces,
    }
}

/// One-dimensional rule for `int_0^pi f(phi) sin^j(phi) dphi` in `t = cos(phi)`.
fn polar_rule(j: usize, count: usize) -> Vec<(f64, f64)> {
    if j % 2 == 1 {
        let (x, w) = gauss_legendre(count);
        let k = ((j - 1) / 2) as i32;
        x.iter()
            .zip(&w)
            .map(|(&t, &wt)| (t, wt * (1.0 - t * t).powi(k)))
            .collect()
    } else {
        // Gauss-Chebyshev of the second kind carries sqrt(1 - t^2).
        let k = ((j - 2) / 2) as i32;
        (1..=count)
            .map(|i| {
                let a = i as f64 * PI / (count as f64 + 1.0);
                let t = a.cos();
                let wt = PI / (count as f64 + 1.0) * a.sin().powi(2);
                (t, wt * (1.0 - t * t).powi(k))
            })
            .collect()
    }
}

fn tensor_grid(dim: usize, level: usize) -> SphereGrid {
    let polar_count = 2 * level + 4;
    let az_count = 2 * polar_count;
    // Polar angles phi_1..phi_{n-2} carry sin^{n-1-k}.
    let rules: Vec<Vec<(f64, f64)>> = (1..=dim - 2)
        .map(|k| polar_rule(dim - 1 - k, polar_count))
        .collect();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dim - 2];
    loop {
        for a in 0..az_count {
            let theta = 2.0 * PI * (a as f64 + 0.5) / az_count as f64;
            let mut x = DVector::zeros(dim);
            let mut sin_prod = 1.0;
            let mut w = 2.0 * PI / az_count as f64;
            for (k, rule) in rules.iter().enumerate() {
                let (t, wt) = rule[idx[k]];
                let s = (1.0 - t * t).max(0.0).sqrt();
                x[k] = sin_prod * t;
                sin_prod *= s;
                w *= wt;
            }
            x[dim - 2] = sin_prod * theta.cos();
            x[dim - 1] = sin_prod * theta.sin();
            let norm = x.norm();
            nodes.push(x / norm);
            weights.push(w);
        }
        // advance multi-index
        let mut k = 0;
        loop {
            if k == idx.len() {
                return SphereGrid {
                    dim,
                    level,
                    nodes,
                    weights,
                    triangles: Vec::new(),
                };
            }
            idx[k] += 1;
            if idx[k] < polar_count {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Neighbours of each vertex listed in cyclic order around it.
fn ordered_rings(n: usize, triangles: &[[usize; 3]]) -> Vec<Vec<usize>> {
    // For each vertex, map "previous" neighbour -> "next" neighbour (CCW).
    let mut next: Vec<HashMap<usize, usize>> = vec![HashMap::new(); n];
    for &[a, b, c] in triangles {
        next[a].insert(b, c);
        next[b].insert(c, a);
        next[c].insert(a, b);
    }
    next.iter()
        .map(|m| {
            let Some((&start, _)) = m.iter().min_by_key(|(k, _)| **k) else {
                return Vec::new();
            };
            let mut ring = vec![start];
            let mut cur = start;
            while let Some(&nx) = m.get(&cur) {
                if nx == start || ring.len() > m.len() {
                    break;
                }
                ring.push(nx);
                cur = nx;
            }
            ring
        })
        .collect()
}
