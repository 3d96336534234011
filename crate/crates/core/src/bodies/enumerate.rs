use std::collections::HashMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::polytope::HPolytope;
use crate::error::{GeomError, Result};

/// Facets below this area count as inactive.
pub const INACTIVE_AREA: f64 = 1e-12;
const DEDUP_TOL: f64 = 1e-9;
const NEAR_PLANES: usize = 24;
const BOX_LABEL: usize = usize::MAX;

/// One facet per normal of the source polytope; inactive ones have zero area
/// and no vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub area: f64,
    /// Vertex indices; counterclockwise seen from outside in dimension 3.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexComplex {
    pub dim: usize,
    pub vertices: Vec<DVector<f64>>,
    pub facets: Vec<Facet>,
}

impl VertexComplex {
    pub fn areas(&self) -> Vec<f64> {
        self.facets.iter().map(|f| f.area).collect()
    }

    /// Indices of normals whose facet vanished.
    pub fn inactive(&self) -> Vec<usize> {
        self.facets
            .iter()
            .enumerate()
            .filter(|(_, f)| f.area < INACTIVE_AREA)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn support(&self, x: &DVector<f64>) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.dot(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sum_i h_i |F_i|`.
    pub fn cone_volume_sum(&self, h: &[f64]) -> f64 {
        let terms: Vec<f64> = self.facets.iter().zip(h).map(|(f, h)| f.area * h).collect();
        crate::numeric::pairwise_sum(&terms)
    }

    /// `|sum_i |F_i| u_i|`.
    pub fn closure_residual(&self, normals: &[DVector<f64>]) -> f64 {
        let mut s = DVector::zeros(self.dim);
        for (f, u) in self.facets.iter().zip(normals) {
            s += u * f.area;
        }
        s.norm()
    }

    /// Derivatives `d|F_i| / dh_j` for fixed normals, from ridge lengths
    /// and dihedral angles of the current combinatorial type.
    pub fn area_jacobian(&self, normals: &[DVector<f64>]) -> DMatrix<f64> {
        let m = self.facets.len();
        let mut jac = DMatrix::zeros(m, m);
        let mut ridges: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, f) in self.facets.iter().enumerate() {
            if f.area == 0.0 {
                continue;
            }
            if self.dim == 2 {
                for &v in &f.vertices {
                    ridges.entry(vec![v]).or_default().push(i);
                }
            } else {
                let k = f.vertices.len();
                for t in 0..k {
                    let (a, b) = (f.vertices[t], f.vertices[(t + 1) % k]);
                    ridges.entry(vec![a.min(b), a.max(b)]).or_default().push(i);
                }
            }
        }
        for (key, fs) in &ridges {
            if fs.len() != 2 {
                continue;
            }
            let (i, j) = (fs[0], fs[1]);
            let len = if self.dim == 2 {
                1.0
            } else {
                (&self.vertices[key[0]] - &self.vertices[key[1]]).norm()
            };
            let c = normals[i].dot(&normals[j]);
            let s = (1.0 - c * c).max(0.0).sqrt();
            if s < 1e-14 {
                continue;
            }
            jac[(i, j)] += len / s;
            jac[(j, i)] += len / s;
            jac[(i, i)] -= len * c / s;
            jac[(j, j)] -= len * c / s;
        }
        jac
    }

    /// Object File Format text. Polygons only exist in dimension 3; in the
    /// plane the single face lists the vertices in boundary order with z = 0.
    pub fn to_off(&self) -> String {
        let mut out = String::from("OFF\n");
        let faces: Vec<Vec<usize>> = if self.dim == 3 {
            self.facets
                .iter()
                .filter(|f| f.vertices.len() >= 3)
                .map(|f| f.vertices.clone())
                .collect()
        } else {
            vec![planar_boundary_order(self)]
        };
        let _ = writeln!(out, "{} {} 0", self.vertices.len(), faces.len());
        for v in &self.vertices {
            let z = if self.dim == 3 { v[2] } else { 0.0 };
            let _ = writeln!(out, "{} {} {}", v[0], v[1], z);
        }
        for f in faces {
            let _ = write!(out, "{}", f.len());
            for i in f {
                let _ = write!(out, " {i}");
            }
            out.push('\n');
        }
        out
    }
}

fn planar_boundary_order(vc: &VertexComplex) -> Vec<usize> {
    let n = vc.vertices.len() as f64;
    let cx = vc.vertices.iter().map(|v| v[0]).sum::<f64>() / n;
    let cy = vc.vertices.iter().map(|v| v[1]).sum::<f64>() / n;
    let mut idx: Vec<usize> = (0..vc.vertices.len()).collect();
    idx.sort_by(|&a, &b| {
        let ta = (vc.vertices[a][1] - cy).atan2(vc.vertices[a][0] - cx);
        let tb = (vc.vertices[b][1] - cy).atan2(vc.vertices[b][0] - cx);
        ta.total_cmp(&tb)
    });
    idx
}

pub(crate) fn enumerate(p: &HPolytope) -> Result<VertexComplex> {
    let vc = match p.dim() {
        2 => enumerate_2d(p)?,
        3 => enumerate_3d(p)?,
        d => {
            return Err(GeomError::UnsupportedDimension {
                dim: d,
                op: "enumerate_vertices",
            })
        }
    };
    if vc.vertices.len() <= p.dim() {
        return Err(GeomError::DegenerateBody);
    }
    // thickness check about the vertex centroid
    let d = p.dim();
    let mut c = DVector::zeros(d);
    for v in &vc.vertices {
        c += v;
    }
    c /= vc.vertices.len() as f64;
    let h: Vec<f64> = p
        .normals()
        .iter()
        .zip(p.offsets())
        .map(|(u, h)| h - u.dot(&c))
        .collect();
    let vol = vc.cone_volume_sum(&h) / d as f64;
    let diam = vc
        .vertices
        .iter()
        .map(|v| (v - &c).norm())
        .fold(0.0f64, f64::max);
    if !(vol > 1e-12 * diam.powi(d as i32)) {
        return Err(GeomError::DegenerateBody);
    }
    Ok(vc)
}

fn box_radius(p: &HPolytope) -> f64 {
    1e6 * (1.0 + p.offsets().iter().fold(0.0f64, |a, h| a.max(h.abs())))
}

struct Dedup {
    cells: HashMap<Vec<i64>, Vec<usize>>,
    points: Vec<DVector<f64>>,
}

impl Dedup {
    fn new() -> Self {
        Dedup {
            cells: HashMap::new(),
            points: Vec::new(),
        }
    }

    fn key(x: &DVector<f64>) -> Vec<i64> {
        x.iter().map(|c| (c / DEDUP_TOL).floor() as i64).collect()
    }

    fn insert(&mut self, x: DVector<f64>) -> usize {
        let base = Self::key(&x);
        let d = base.len();
        let mut offs = vec![-1i64; d];
        loop {
            let k: Vec<i64> = base.iter().zip(&offs).map(|(a, b)| a + b).collect();
            if let Some(list) = self.cells.get(&k) {
                for &i in list {
                    if (&self.points[i] - &x).amax() <= DEDUP_TOL {
                        return i;
                    }
                }
            }
            let mut j = 0;
            while j < d {
                offs[j] += 1;
                if offs[j] <= 1 {
                    break;
                }
                offs[j] = -1;
                j += 1;
            }
            if j == d {
                break;
            }
        }
        let i = self.points.len();
        self.cells.entry(base).or_default().push(i);
        self.points.push(x);
        i
    }
}

fn enumerate_2d(p: &HPolytope) -> Result<VertexComplex> {
    let us = p.normals();
    let hs = p.offsets();
    let m = us.len();
    let r = box_radius(p);
    let eps = 1e-13 * r;
    let mut dedup = Dedup::new();
    let mut facets = Vec::with_capacity(m);
    for i in 0..m {
        let (ux, uy) = (us[i][0], us[i][1]);
        let t = (-uy, ux);
        let (mut lo, mut hi) = (-r, r);
        let (mut lo_j, mut hi_j) = (BOX_LABEL, BOX_LABEL);
        let mut empty = false;
        for j in 0..m {
            if j == i {
                continue;
            }
            let a = t.0 * us[j][0] + t.1 * us[j][1];
            let b = hs[j] - hs[i] * (ux * us[j][0] + uy * us[j][1]);
            if a.abs() <= 1e-14 {
                if b < -eps.min(1e-12 * (1.0 + hs[j].abs())) {
                    empty = true;
                    break;
                }
                continue;
            }
            let s = b / a;
            if a > 0.0 {
                if s < hi {
                    hi = s;
                    hi_j = j;
                }
            } else if s > lo {
                lo = s;
                lo_j = j;
            }
        }
        if empty || hi - lo < INACTIVE_AREA {
            facets.push(Facet {
                area: 0.0,
                vertices: Vec::new(),
            });
            continue;
        }
        if lo_j == BOX_LABEL || hi_j == BOX_LABEL {
            return Err(GeomError::UnboundedBody);
        }
        let base = DVector::from_vec(vec![hs[i] * ux, hs[i] * uy]);
        let tv = DVector::from_vec(vec![t.0, t.1]);
        let a = dedup.insert(intersect2(us, hs, i, lo_j).unwrap_or_else(|| &base + &tv * lo));
        let b = dedup.insert(intersect2(us, hs, i, hi_j).unwrap_or_else(|| &base + &tv * hi));
        let len = (&dedup.points[b] - &dedup.points[a]).norm();
        if len < INACTIVE_AREA {
            facets.push(Facet {
                area: 0.0,
                vertices: Vec::new(),
            });
            continue;
        }
        facets.push(Facet {
            area: len,
            vertices: vec![a, b],
        });
    }
    Ok(VertexComplex {
        dim: 2,
        vertices: dedup.points,
        facets,
    })
}

fn intersect2(us: &[DVector<f64>], hs: &[f64], i: usize, j: usize) -> Option<DVector<f64>> {
    let det = us[i][0] * us[j][1] - us[i][1] * us[j][0];
    if det.abs() < 1e-10 {
        return None;
    }
    let x = (hs[i] * us[j][1] - hs[j] * us[i][1]) / det;
    let y = (us[i][0] * hs[j] - us[j][0] * hs[i]) / det;
    Some(DVector::from_vec(vec![x, y]))
}

#[derive(Clone, Copy)]
struct PVert {
    y: [f64; 2],
    /// label of the edge leaving this vertex
    edge: usize,
}

fn clip(poly: &[PVert], a: [f64; 2], b: f64, label: usize, eps: f64) -> Vec<PVert> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..n {
        let cur = poly[k];
        let nxt = poly[(k + 1) % n];
        let fc = a[0] * cur.y[0] + a[1] * cur.y[1] - b;
        let fn_ = a[0] * nxt.y[0] + a[1] * nxt.y[1] - b;
        let cin = fc <= eps;
        let nin = fn_ <= eps;
        if cin {
            if nin {
                out.push(cur);
            } else {
                // leaving: the edge from the crossing runs along the clip line
                let s = fc / (fc - fn_);
                out.push(cur);
                if fc < -eps {
                    out.push(PVert {
                        y: lerp(cur.y, nxt.y, s),
                        edge: label,
                    });
                } else {
                    out.last_mut().unwrap().edge = label;
                }
            }
        } else if nin {
            let s = fc / (fc - fn_);
            out.push(PVert {
                y: lerp(cur.y, nxt.y, s),
                edge: cur.edge,
            });
        }
    }
    out
}

fn lerp(a: [f64; 2], b: [f64; 2], s: f64) -> [f64; 2] {
    [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]
}

fn plane_basis(u: &DVector<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let u = Vector3::new(u[0], u[1], u[2]);
    let k = if u.x.abs() <= u.y.abs() && u.x.abs() <= u.z.abs() {
        Vector3::x()
    } else if u.y.abs() <= u.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let e1 = (k - u * u.dot(&k)).normalize();
    let e2 = u.cross(&e1);
    (e1, e2)
}

fn enumerate_3d(p: &HPolytope) -> Result<VertexComplex> {
    let us: Vec<Vector3<f64>> = p
        .normals()
        .iter()
        .map(|u| Vector3::new(u[0], u[1], u[2]))
        .collect();
    let hs = p.offsets();
    let m = us.len();
    let r = box_radius(p);
    let eps = 1e-13 * (1.0 + hs.iter().fold(0.0f64, |a, h| a.max(h.abs())));
    let mut dedup = Dedup::new();
    let mut facets = Vec::with_capacity(m);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(m);
    for i in 0..m {
        let (e1, e2) = plane_basis(&p.normals()[i]);
        let mut poly = vec![
            PVert { y: [-r, -r], edge: BOX_LABEL },
            PVert { y: [r, -r], edge: BOX_LABEL },
            PVert { y: [r, r], edge: BOX_LABEL },
            PVert { y: [-r, r], edge: BOX_LABEL },
        ];
        order.clear();
        order.extend((0..m).filter(|&j| j != i).map(|j| (-us[i].dot(&us[j]), j)));
        let near = NEAR_PLANES.min(order.len());
        if near < order.len() {
            order.select_nth_unstable_by(near, |a, b| a.0.total_cmp(&b.0));
        }
        order[..near].sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut empty = false;
        let mut circle: Option<([f64; 2], f64)> = None;
        for (idx, &(_, j)) in order.iter().enumerate() {
            let a = [e1.dot(&us[j]), e2.dot(&us[j])];
            let b = hs[j] - hs[i] * us[i].dot(&us[j]);
            let an = (a[0] * a[0] + a[1] * a[1]).sqrt();
            if an <= 1e-14 {
                if b < -eps {
                    empty = true;
                    break;
                }
                continue;
            }
            if idx >= near {
                if circle.is_none() {
                    circle = Some(bounding_circle(&poly));
                }
                let (c, rad) = circle.unwrap();
                if a[0] * c[0] + a[1] * c[1] + an * rad <= b - eps {
                    continue;
                }
            }
            poly = clip(&poly, a, b, j, eps);
            circle = None;
            if poly.len() < 3 {
                empty = true;
                break;
            }
        }
        let area = if empty { 0.0 } else { shoelace(&poly) };
        if empty || area < INACTIVE_AREA {
            facets.push(Facet {
                area: 0.0,
                vertices: Vec::new(),
            });
            continue;
        }
        if poly.iter().any(|v| v.edge == BOX_LABEL) {
            return Err(GeomError::UnboundedBody);
        }
        let n = poly.len();
        let mut ids: Vec<usize> = Vec::with_capacity(n);
        for k in 0..n {
            let prev = poly[(k + n - 1) % n].edge;
            let cur = poly[k].edge;
            let fallback = us[i] * hs[i] + e1 * poly[k].y[0] + e2 * poly[k].y[1];
            let x = solve3(&us, hs, i, prev, cur).unwrap_or(fallback);
            let id = dedup.insert(DVector::from_column_slice(x.as_slice()));
            if ids.last() != Some(&id) {
                ids.push(id);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        let area = exact_area(&dedup.points, &ids, &us[i]);
        if area < INACTIVE_AREA {
            facets.push(Facet {
                area: 0.0,
                vertices: Vec::new(),
            });
            continue;
        }
        facets.push(Facet { area, vertices: ids });
    }
    Ok(VertexComplex {
        dim: 3,
        vertices: dedup.points,
        facets,
    })
}

fn solve3(us: &[Vector3<f64>], hs: &[f64], i: usize, j: usize, k: usize) -> Option<Vector3<f64>> {
    if j == k || j == i || k == i {
        return None;
    }
    let m = Matrix3::from_rows(&[us[i].transpose(), us[j].transpose(), us[k].transpose()]);
    if m.determinant().abs() < 1e-10 {
        return None;
    }
    m.lu().solve(&Vector3::new(hs[i], hs[j], hs[k]))
}

fn exact_area(points: &[DVector<f64>], ids: &[usize], u: &Vector3<f64>) -> f64 {
    if ids.len() < 3 {
        return 0.0;
    }
    let p = |k: usize| Vector3::new(points[ids[k]][0], points[ids[k]][1], points[ids[k]][2]);
    let o = p(0);
    let mut s = 0.0;
    for k in 1..ids.len() - 1 {
        s += (p(k) - o).cross(&(p(k + 1) - o)).dot(u);
    }
    0.5 * s
}

fn bounding_circle(poly: &[PVert]) -> ([f64; 2], f64) {
    let n = poly.len() as f64;
    let cx = poly.iter().map(|v| v.y[0]).sum::<f64>() / n;
    let cy = poly.iter().map(|v| v.y[1]).sum::<f64>() / n;
    let r = poly
        .iter()
        .map(|v| ((v.y[0] - cx).powi(2) + (v.y[1] - cy).powi(2)).sqrt())
        .fold(0.0f64, f64::max);
    ([cx, cy], r)
}

fn shoelace(poly: &[PVert]) -> f64 {
    let n = poly.len();
    let (ox, oy) = (poly[0].y[0], poly[0].y[1]);
    let mut s = 0.0;
    for k in 1..n.saturating_sub(1) {
        let (ax, ay) = (poly[k].y[0] - ox, poly[k].y[1] - oy);
        let (bx, by) = (poly[k + 1].y[0] - ox, poly[k + 1].y[1] - oy);
        s += ax * by - ay * bx;
    }
    0.5 * s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn square_and_cube() {
        let sq = HPolytope::cube(2, 1.0).enumerate_vertices().unwrap();
        assert_eq!(sq.vertices.len(), 4);
        assert!(sq.facets.iter().all(|f| (f.area - 2.0).abs() < 1e-12));
        let c = HPolytope::cube(3, 1.0).enumerate_vertices().unwrap();
        assert_eq!(c.vertices.len(), 8);
        assert!(c.facets.iter().all(|f| (f.area - 4.0).abs() < 1e-12 && f.vertices.len() == 4));
    }

    #[test]
    fn regular_tetrahedron_matches_hull() {
        // vertices of a centered regular tetrahedron
        let verts = [
            v(&[1.0, 1.0, 1.0]),
            v(&[1.0, -1.0, -1.0]),
            v(&[-1.0, 1.0, -1.0]),
            v(&[-1.0, -1.0, 1.0]),
        ];
        // facet opposite vertex k has outer normal -verts[k]/|verts[k]|
        let normals: Vec<_> = verts.iter().map(|w| -w / w.norm()).collect();
        let offsets: Vec<_> = (0..4)
            .map(|k| {
                let j = (k + 1) % 4;
                normals[k].dot(&verts[j])
            })
            .collect();
        let p = HPolytope::new(normals.clone(), offsets).unwrap();
        let vc = p.enumerate_vertices().unwrap();
        assert_eq!(vc.vertices.len(), 4);
        for w in &verts {
            assert!(vc.vertices.iter().any(|x| (x - w).norm() < 1e-9));
        }
        assert!(vc.closure_residual(&normals) < 1e-9);
        // each face is equilateral with side 2 sqrt 2
        let face = 3f64.sqrt() / 4.0 * 8.0;
        assert!(vc.facets.iter().all(|f| (f.area - face).abs() < 1e-9));
    }

    #[test]
    fn redundant_constraint_is_inactive() {
        let mut us = HPolytope::cube(3, 1.0).normals().to_vec();
        let mut hs = vec![1.0; 6];
        us.push(v(&[1.0, 1.0, 0.0]) / 2f64.sqrt());
        hs.push(5.0);
        let p = HPolytope::new(us.clone(), hs).unwrap();
        let vc = p.enumerate_vertices().unwrap();
        assert_eq!(vc.inactive(), vec![6]);
        assert!(vc.closure_residual(&us) < 1e-12);
    }

    #[test]
    fn vertex_through_many_planes_is_merged() {
        // square pyramid apex lies on four planes
        let s = 1.0 / 2f64.sqrt();
        let us = vec![
            v(&[s, 0.0, s]),
            v(&[-s, 0.0, s]),
            v(&[0.0, s, s]),
            v(&[0.0, -s, s]),
            v(&[0.0, 0.0, -1.0]),
        ];
        let hs = vec![s, s, s, s, 0.0];
        let p = HPolytope::new(us.clone(), hs).unwrap();
        let vc = p.enumerate_vertices().unwrap();
        assert_eq!(vc.vertices.len(), 5);
        assert!((p.volume().unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(vc.closure_residual(&us) < 1e-9);
    }

    #[test]
    fn unbounded_detected() {
        let p = HPolytope::from_parts(
            vec![v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0]), v(&[0.0, -1.0, 0.0])],
            vec![1.0; 4],
        )
        .unwrap();
        assert_eq!(p.enumerate_vertices().unwrap_err(), GeomError::UnboundedBody);
        let q = HPolytope::from_parts(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0])], vec![1.0; 3])
            .unwrap();
        assert_eq!(q.enumerate_vertices().unwrap_err(), GeomError::UnboundedBody);
    }

    #[test]
    fn empty_and_flat_are_degenerate() {
        let flat = HPolytope::cube(3, 1.0).with_offsets(vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(flat.enumerate_vertices().unwrap_err(), GeomError::DegenerateBody);
        let empty = HPolytope::cube(2, 1.0).with_offsets(vec![-1.0, -1.0, 1.0, 1.0]).unwrap();
        assert_eq!(empty.enumerate_vertices().unwrap_err(), GeomError::DegenerateBody);
    }

    #[test]
    fn area_jacobian_matches_differences() {
        let mut rng = crate::random::rng_for(3, "jac");
        for dim in [2, 3] {
            let p = crate::random::random_polytope(&mut rng, dim, 9, 0.6, 1.4);
            let vc = p.enumerate_vertices().unwrap();
            let jac = vc.area_jacobian(p.normals());
            let d = 1e-6;
            for j in 0..p.len() {
                let mut hp = p.offsets().to_vec();
                let mut hm = hp.clone();
                hp[j] += d;
                hm[j] -= d;
                let ap = p.with_offsets(hp).unwrap().enumerate_vertices().unwrap().areas();
                let am = p.with_offsets(hm).unwrap().enumerate_vertices().unwrap().areas();
                for i in 0..p.len() {
                    let fd = (ap[i] - am[i]) / (2.0 * d);
                    assert!((fd - jac[(i, j)]).abs() < 1e-6, "{dim} {i} {j} {fd} {}", jac[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn off_export() {
        let off = HPolytope::cube(3, 1.0).enumerate_vertices().unwrap().to_off();
        let mut lines = off.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("8 6 0"));
        assert_eq!(off.lines().count(), 2 + 8 + 6);
        let sq = HPolytope::cube(2, 1.0).enumerate_vertices().unwrap().to_off();
        assert!(sq.contains("4 4 1 0 0 0") || sq.lines().last().unwrap().starts_with("4 "));
    }

    #[test]
    fn facet_vertices_on_their_planes() {
        let p = HPolytope::circumscribed(&crate::sphere::build_grid(3, 1).unwrap());
        let vc = p.enumerate_vertices().unwrap();
        for (i, f) in vc.facets.iter().enumerate() {
            for &k in &f.vertices {
                let r = p.normals()[i].dot(&vc.vertices[k]) - p.offsets()[i];
                assert!(r.abs() < 1e-9);
            }
        }
        assert!(vc.closure_residual(p.normals()) < 1e-9);
    }
}
