use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::enumerate::{enumerate, VertexComplex};
use super::support_field::{OriginLocation, SupportField};
use crate::error::{GeomError, Result};
use crate::lp;
use crate::sphere::SphereGrid;

const UNIT_TOL: f64 = 1e-12;
const DISTINCT_TOL: f64 = 1e-10;

/// Convex polytope `{x : <x, u_i> <= h_i}` with unit outer normals `u_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeJson", into = "PolytopeJson")]
pub struct HPolytope {
    dim: usize,
    normals: Vec<DVector<f64>>,
    offsets: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PolytopeJson {
    dim: usize,
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl From<HPolytope> for PolytopeJson {
    fn from(p: HPolytope) -> Self {
        PolytopeJson {
            dim: p.dim,
            normals: p.normals.iter().map(|v| v.iter().copied().collect()).collect(),
            offsets: p.offsets,
        }
    }
}

impl TryFrom<PolytopeJson> for HPolytope {
    type Error = GeomError;

    fn try_from(j: PolytopeJson) -> Result<Self> {
        let normals = j
            .normals
            .into_iter()
            .map(|v| {
                if v.len() != j.dim {
                    Err(GeomError::DimensionMismatch {
                        expected: j.dim,
                        got: v.len(),
                    })
                } else {
                    Ok(DVector::from_vec(v))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        HPolytope::new(normals, j.offsets)
    }
}

impl HPolytope {
    /// Validated constructor: unit, distinct, positively spanning normals and
    /// a body with nonempty interior.
    pub fn new(normals: Vec<DVector<f64>>, offsets: Vec<f64>) -> Result<Self> {
        let p = Self::from_parts(normals, offsets)?;
        for (i, u) in p.normals.iter().enumerate() {
            if (u.norm() - 1.0).abs() > UNIT_TOL {
                return Err(GeomError::InvalidInput(format!("normal {i} is not a unit vector")));
            }
        }
        for i in 0..p.normals.len() {
            for j in i + 1..p.normals.len() {
                if angle_between(&p.normals[i], &p.normals[j]) <= DISTINCT_TOL {
                    return Err(GeomError::InvalidInput(format!("normals {i} and {j} coincide")));
                }
            }
        }
        if !positively_spanning(&p.normals) {
            return Err(GeomError::UnboundedBody);
        }
        p.chebyshev_center()?;
        Ok(p)
    }

    /// Normalizes the normals, rescaling offsets accordingly, then validates.
    pub fn from_unnormalized(normals: Vec<DVector<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(GeomError::LengthMismatch {
                expected: normals.len(),
                got: offsets.len(),
            });
        }
        let mut us = Vec::with_capacity(normals.len());
        let mut hs = Vec::with_capacity(normals.len());
        for (u, h) in normals.into_iter().zip(offsets) {
            let n = u.norm();
            if n == 0.0 {
                return Err(GeomError::InvalidInput("zero normal".into()));
            }
            us.push(u / n);
            hs.push(h / n);
        }
        Self::new(us, hs)
    }

    /// Shape checks only; used on hot paths where the caller keeps the
    /// normals fixed and valid.
    pub(crate) fn from_parts(normals: Vec<DVector<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(GeomError::LengthMismatch {
                expected: normals.len(),
                got: offsets.len(),
            });
        }
        let dim = normals.first().map(|u| u.len()).unwrap_or(0);
        if dim < 2 {
            return Err(GeomError::UnsupportedDimension {
                dim,
                op: "HPolytope",
            });
        }
        if let Some(u) = normals.iter().find(|u| u.len() != dim) {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                got: u.len(),
            });
        }
        if offsets.iter().any(|h| !h.is_finite()) {
            return Err(GeomError::InvalidInput("non-finite offset".into()));
        }
        Ok(HPolytope {
            dim,
            normals,
            offsets,
        })
    }

    /// Same normals, new offsets (no validation beyond lengths).
    pub fn with_offsets(&self, offsets: Vec<f64>) -> Result<Self> {
        Self::from_parts(self.normals.clone(), offsets)
    }

    /// The cube `[-half, half]^dim`.
    pub fn cube(dim: usize, half: f64) -> Self {
        let mut normals = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            for s in [1.0, -1.0] {
                let mut u = DVector::zeros(dim);
                u[k] = s;
                normals.push(u);
            }
        }
        HPolytope {
            dim,
            normals,
            offsets: vec![half; 2 * dim],
        }
    }

    /// Regular polygon circumscribed about the unit circle scaled by `radius`,
    /// with `count` edges.
    pub fn regular_polygon(count: usize, radius: f64) -> Self {
        let normals = (0..count)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
                DVector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect();
        HPolytope {
            dim: 2,
            normals,
            offsets: vec![radius; count],
        }
    }

    /// Polytope circumscribed about the unit ball with the nodes of a grid as normals.
    pub fn circumscribed(grid: &SphereGrid) -> Self {
        HPolytope {
            dim: grid.dim(),
            normals: grid.nodes().to_vec(),
            offsets: vec![1.0; grid.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[DVector<f64>] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `P + t`.
    pub fn translated(&self, t: &DVector<f64>) -> Self {
        let offsets = self
            .normals
            .iter()
            .zip(&self.offsets)
            .map(|(u, h)| h + u.dot(t))
            .collect();
        HPolytope {
            dim: self.dim,
            normals: self.normals.clone(),
            offsets,
        }
    }

    /// `s P` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        HPolytope {
            dim: self.dim,
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|h| h * s).collect(),
        }
    }

    /// Image under an invertible matrix: normals `T^{-t} u / |T^{-t} u|`.
    pub fn transformed(&self, t: &DMatrix<f64>) -> Result<Self> {
        let inv_t = t
            .clone()
            .try_inverse()
            .ok_or_else(|| GeomError::InvalidInput("singular matrix".into()))?
            .transpose();
        let mut normals = Vec::with_capacity(self.len());
        let mut offsets = Vec::with_capacity(self.len());
        for (u, h) in self.normals.iter().zip(&self.offsets) {
            let w = &inv_t * u;
            let n = w.norm();
            normals.push(w / n);
            offsets.push(h / n);
        }
        Self::from_parts(normals, offsets)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(u, h)| u.dot(x) <= h + tol)
    }

    /// True when every offset is strictly positive, i.e. `o` is interior.
    pub fn origin_interior(&self) -> bool {
        self.offsets.iter().all(|&h| h > 0.0)
    }

    /// Vertices and facets (dimensions 2 and 3).
    pub fn enumerate_vertices(&self) -> Result<VertexComplex> {
        enumerate(self)
    }

    /// `h_P(x) = max_{y in P} <x, y>`.
    pub fn support_eval(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        if self.dim <= 3 {
            Ok(self.enumerate_vertices()?.support(x))
        } else {
            let (a, b) = self.constraint_system();
            match lp::maximize(x, &a, &b) {
                Ok(s) => Ok(s.value),
                Err(GeomError::Unbounded) => Err(GeomError::UnboundedBody),
                Err(GeomError::Infeasible) => Err(GeomError::DegenerateBody),
                Err(e) => Err(e),
            }
        }
    }

    /// Volume. Uses `(1/n) sum h_i |F_i|` when `o` is interior, otherwise
    /// the same cone formula about the Chebyshev center.
    pub fn volume(&self) -> Result<f64> {
        let vc = self.enumerate_vertices()?;
        if self.origin_interior() {
            Ok(vc.cone_volume_sum(&self.offsets) / self.dim as f64)
        } else {
            let (c, _) = self.chebyshev_center()?;
            let shifted: Vec<f64> = self
                .normals
                .iter()
                .zip(&self.offsets)
                .map(|(u, h)| h - u.dot(&c))
                .collect();
            Ok(vc.cone_volume_sum(&shifted) / self.dim as f64)
        }
    }

    /// Polar body `{y : <x, y> <= 1 for all x in P}`; requires `o` interior.
    pub fn polar(&self) -> Result<HPolytope> {
        if !self.origin_interior() {
            return Err(GeomError::OriginNotInterior);
        }
        let vc = self.enumerate_vertices()?;
        let mut normals = Vec::with_capacity(vc.vertices.len());
        let mut offsets = Vec::with_capacity(vc.vertices.len());
        for v in &vc.vertices {
            let n = v.norm();
            normals.push(v / n);
            offsets.push(1.0 / n);
        }
        HPolytope::new(normals, offsets)
    }

    /// Center and radius of the largest inscribed ball. Among optimal
    /// centers the lexicographically smallest one is returned.
    pub fn chebyshev_center(&self) -> Result<(DVector<f64>, f64)> {
        let d = self.dim;
        let m = self.len();
        let scale = 1.0 + self.offsets.iter().fold(0.0f64, |a, h| a.max(h.abs()));
        // variables (c, r)
        let mut a = DMatrix::zeros(m + 1, d + 1);
        let mut b = DVector::zeros(m + 1);
        for (i, (u, h)) in self.normals.iter().zip(&self.offsets).enumerate() {
            for k in 0..d {
                a[(i, k)] = u[k];
            }
            a[(i, d)] = 1.0;
            b[i] = *h;
        }
        // r >= 0 keeps the first stage bounded below
        a[(m, d)] = -1.0;
        let mut obj = DVector::zeros(d + 1);
        obj[d] = 1.0;
        let first = match lp::maximize(&obj, &a, &b) {
            Ok(s) => s,
            Err(GeomError::Unbounded) => return Err(GeomError::UnboundedBody),
            Err(GeomError::Infeasible) => return Err(GeomError::DegenerateBody),
            Err(e) => return Err(e),
        };
        let r_star = first.value;
        if r_star <= 1e-12 * scale {
            return Err(GeomError::DegenerateBody);
        }
        // Lexicographic tie-breaking over the center coordinates.
        let tie = 1e-11 * scale;
        let mut rows: Vec<(Vec<f64>, f64)> = (0..m)
            .map(|i| (a.row(i).iter().copied().collect(), b[i]))
            .collect();
        let mut fix_r = vec![0.0; d + 1];
        fix_r[d] = -1.0;
        rows.push((fix_r, -(r_star - tie)));
        let mut center = first.x.rows(0, d).into_owned();
        for k in 0..d {
            let am = DMatrix::from_fn(rows.len(), d + 1, |i, j| rows[i].0[j]);
            let bm = DVector::from_fn(rows.len(), |i, _| rows[i].1);
            let mut obj = DVector::zeros(d + 1);
            obj[k] = 1.0;
            match lp::minimize(&obj, &am, &bm) {
                Ok(s) => {
                    center = s.x.rows(0, d).into_owned();
                    let mut fix = vec![0.0; d + 1];
                    fix[k] = 1.0;
                    rows.push((fix, s.x[k] + tie));
                }
                Err(_) => break,
            }
        }
        Ok((center, r_star))
    }

    /// Samples `h_P` at the grid nodes.
    pub fn support_field(&self, grid: &SphereGrid) -> Result<SupportField> {
        if grid.dim() != self.dim {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim,
                got: grid.dim(),
            });
        }
        let values = if self.dim <= 3 {
            let vc = self.enumerate_vertices()?;
            grid.nodes().iter().map(|u| vc.support(u)).collect()
        } else {
            grid.nodes()
                .iter()
                .map(|u| self.support_eval(u))
                .collect::<Result<Vec<f64>>>()?
        };
        let min_h = self.offsets.iter().fold(f64::INFINITY, |a, &h| a.min(h));
        let location = if min_h > 0.0 {
            OriginLocation::Interior
        } else if min_h.abs() <= 1e-12 {
            OriginLocation::Boundary
        } else {
            OriginLocation::Unknown
        };
        SupportField::new(grid.clone(), values, location)
    }

    /// Largest vertex norm (outer radius about `o`).
    pub fn outer_radius(&self) -> Result<f64> {
        let vc = self.enumerate_vertices()?;
        Ok(vc.vertices.iter().fold(0.0f64, |a, v| a.max(v.norm())))
    }

    fn constraint_system(&self) -> (DMatrix<f64>, DVector<f64>) {
        let a = DMatrix::from_fn(self.len(), self.dim, |i, j| self.normals[i][j]);
        let b = DVector::from_column_slice(&self.offsets);
        (a, b)
    }
}

fn angle_between(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    // robust for tiny angles
    let diff = (a - b).norm();
    let sum = (a + b).norm();
    2.0 * diff.atan2(sum)
}

/// True when the directions positively span R^n: they span linearly and
/// admit a strictly positive linear dependency.
pub fn positively_spanning(dirs: &[DVector<f64>]) -> bool {
    let Some(n) = dirs.first().map(|u| u.len()) else {
        return false;
    };
    let m = dirs.len();
    if m <= n {
        return false;
    }
    let mat = DMatrix::from_fn(n, m, |i, j| dirs[j][i]);
    let sv = mat.clone().svd(false, false).singular_values;
    let smax = sv.max();
    if sv.iter().filter(|&&s| s > 1e-10 * smax.max(1e-300)).count() < n {
        return false;
    }
    // maximize s subject to sum l_i u_i = 0, sum l_i = 1, l_i >= s, s <= 1.
    let nv = m + 1;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for k in 0..n {
        let row: Vec<f64> = (0..nv).map(|j| if j < m { dirs[j][k] } else { 0.0 }).collect();
        rows.push(row.iter().map(|x| -x).collect());
        rhs.push(0.0);
        rows.push(row);
        rhs.push(0.0);
    }
    let ones: Vec<f64> = (0..nv).map(|j| if j < m { 1.0 } else { 0.0 }).collect();
    rows.push(ones.clone());
    rhs.push(1.0);
    rows.push(ones.iter().map(|x| -x).collect());
    rhs.push(-1.0);
    for i in 0..m {
        let mut row = vec![0.0; nv];
        row[i] = -1.0;
        row[m] = 1.0;
        rows.push(row);
        rhs.push(0.0);
    }
    let mut row = vec![0.0; nv];
    row[m] = 1.0;
    rows.push(row);
    rhs.push(1.0);
    let a = DMatrix::from_fn(rows.len(), nv, |i, j| rows[i][j]);
    let b = DVector::from_vec(rhs);
    let mut obj = DVector::zeros(nv);
    obj[m] = 1.0;
    match lp::maximize(&obj, &a, &b) {
        Ok(s) => s.value > 1e-9 / m as f64,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn cube_support_values() {
        let c = HPolytope::cube(3, 1.0);
        assert!((c.support_eval(&v(&[1.0, 0.0, 0.0])).unwrap() - 1.0).abs() < 1e-14);
        assert!((c.support_eval(&v(&[1.0, 1.0, 1.0])).unwrap() - 3.0).abs() < 1e-14);
        assert_eq!(c.support_eval(&v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn higher_dim_support_via_lp() {
        let c = HPolytope::cube(4, 1.0);
        let s = c.support_eval(&v(&[1.0, -1.0, 1.0, 0.5])).unwrap();
        assert!((s - 3.5).abs() < 1e-12);
    }

    #[test]
    fn volumes() {
        assert!((HPolytope::cube(3, 1.0).volume().unwrap() - 8.0).abs() < 1e-12);
        assert!((HPolytope::cube(2, 1.0).volume().unwrap() - 4.0).abs() < 1e-12);
        // origin outside the body
        let shifted = HPolytope::cube(3, 1.0).translated(&v(&[3.0, 0.0, 0.0]));
        assert!((shifted.volume().unwrap() - 8.0).abs() < 1e-10);
    }

    #[test]
    fn chebyshev_cube_and_translate() {
        let (c, r) = HPolytope::cube(3, 1.0).chebyshev_center().unwrap();
        assert!(c.norm() < 1e-10 && (r - 1.0).abs() < 1e-12);
        let t = HPolytope::cube(3, 1.0).translated(&v(&[0.5, 0.0, 0.0]));
        let (c, r) = t.chebyshev_center().unwrap();
        assert!((c - v(&[0.5, 0.0, 0.0])).norm() < 1e-9 && (r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chebyshev_ties_are_lexicographic() {
        // rectangle [-2,2] x [-1,1]: optimal centers (t, 0), t in [-1, 1]
        let p = HPolytope::new(
            vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])],
            vec![2.0, 2.0, 1.0, 1.0],
        )
        .unwrap();
        let (c, r) = p.chebyshev_center().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!((c[0] + 1.0).abs() < 1e-9 && c[1].abs() < 1e-9, "{c}");
    }

    #[test]
    fn square_polar_is_cross_polytope() {
        let sq = HPolytope::cube(2, 1.0);
        let p = sq.polar().unwrap();
        let vc = p.enumerate_vertices().unwrap();
        assert_eq!(vc.vertices.len(), 4);
        for w in &vc.vertices {
            let mut s: Vec<f64> = w.iter().map(|x| x.abs()).collect();
            s.sort_by(f64::total_cmp);
            assert!(s[0].abs() < 1e-12 && (s[1] - 1.0).abs() < 1e-12);
        }
        let prod = sq.volume().unwrap() * p.volume().unwrap();
        assert!((prod - 8.0).abs() < 1e-12);
        assert!(prod >= std::f64::consts::PI.powi(2) / 16.0);
    }

    #[test]
    fn polar_requires_interior_origin() {
        let p = HPolytope::cube(2, 1.0).translated(&v(&[1.0, 0.0]));
        assert_eq!(p.polar().unwrap_err(), GeomError::OriginNotInterior);
    }

    #[test]
    fn validation() {
        // hemisphere: unbounded
        let r = HPolytope::new(vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.6, 0.8])], vec![1.0; 3]);
        assert_eq!(r.unwrap_err(), GeomError::UnboundedBody);
        // not unit
        let r = HPolytope::new(
            vec![v(&[2.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])],
            vec![1.0; 4],
        );
        assert!(matches!(r, Err(GeomError::InvalidInput(_))));
        // empty interior: slab of width zero
        let r = HPolytope::new(
            vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])],
            vec![0.0, 0.0, 1.0, 1.0],
        );
        assert_eq!(r.unwrap_err(), GeomError::DegenerateBody);
        // duplicate normal
        let r = HPolytope::new(
            vec![v(&[1.0, 0.0]), v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0]), v(&[0.0, -1.0])],
            vec![1.0; 5],
        );
        assert!(matches!(r, Err(GeomError::InvalidInput(_))));
    }

    #[test]
    fn normals_positively_span_on_grid() {
        let c = HPolytope::cube(3, 1.0);
        let g = build_grid(3, 2).unwrap();
        for w in g.nodes() {
            let m = c.normals().iter().map(|u| u.dot(w)).fold(f64::MIN, f64::max);
            assert!(m > 0.0);
        }
    }

    #[test]
    fn json_roundtrip() {
        let c = HPolytope::cube(3, 1.0);
        let s = serde_json::to_string(&c).unwrap();
        assert!(s.starts_with("{\"dim\":3,\"normals\":[["));
        let back: HPolytope = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"dim":2,"normals":[[1,0],[0,1]],"offsets":[1,1]}"#;
        assert!(serde_json::from_str::<HPolytope>(bad).is_err());
    }
}
