use lpgeom::measures::{
    change_of_variables_lp, change_of_variables_quadrature, check_equivariance, cone_volume_measure,
    curvature_function_ellipsoid, lp_measure, pushforward, surface_area_measure, volume_lower_bound, Ball,
    Ellipsoid, LinearMap,
};
use lpgeom::random::{random_polytope, rng_for, unit_vector};
use lpgeom::sphere::build_grid;
use lpgeom::{DensityField, DiscreteMeasure, HPolytope};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

fn random_map(rng: &mut impl Rng, n: usize) -> LinearMap {
    loop {
        let m = DMatrix::<f64>::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + rng.gen_range(-0.6..0.6));
        if m.determinant().abs() > 0.2 {
            return LinearMap::new(m).unwrap();
        }
    }
}

fn random_rotation(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..n).map(|_| unit_vector(rng, n)).collect();
    DMatrix::from_columns(&cols).qr().q()
}

#[test]
fn cone_volume_mass_is_n_times_volume() {
    let mut rng = rng_for(21, "cone-volume");
    for k in 0..100 {
        let dim = 2 + k % 2;
        let p = random_polytope(&mut rng, dim, 5 + k % 20, 0.4, 2.0);
        let s0 = lp_measure(&p, 0.0).unwrap().total_mass();
        let v = p.volume().unwrap();
        assert!((s0 - dim as f64 * v).abs() < 1e-10 * s0.max(1.0), "body {k}");
        let cv = cone_volume_measure(&p).unwrap().total_mass();
        assert!((cv - v).abs() < 1e-10 * v.max(1.0));
        let bary = surface_area_measure(&p).unwrap().barycenter().norm();
        assert!(bary <= 1e-9, "body {k}: barycenter {bary}");
    }
}

#[test]
fn lp_masses_follow_definition() {
    let mut rng = rng_for(22, "lp-definition");
    let p = random_polytope(&mut rng, 3, 14, 0.4, 2.0);
    let s = surface_area_measure(&p).unwrap();
    for exponent in [-1.5, 0.0, 0.3, 0.7, 1.0, 2.0] {
        let lp = lp_measure(&p, exponent).unwrap();
        assert_eq!(lp.len(), s.len());
        for (a, b) in lp.atoms().iter().zip(s.atoms()) {
            let h = p.support_eval(&a.u).unwrap();
            assert!((a.mass - b.mass * h.powf(1.0 - exponent)).abs() < 1e-12 * a.mass.max(1.0));
        }
    }
}

#[test]
fn zero_offset_facets_carry_no_mass_below_one() {
    let p = HPolytope::cube(3, 1.0).translated(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
    let l = lp_measure(&p, 0.5).unwrap();
    assert!((l.total_mass() - (4.0 * 2f64.sqrt() + 16.0)).abs() < 1e-9);
    assert!(lp_measure(&p, 1.5).is_err());
    assert!(cone_volume_measure(&p).is_ok());
}

#[test]
fn cone_volume_transforms_by_inverse_transpose() {
    let mut rng = rng_for(23, "cone-volume-law");
    for _ in 0..20 {
        let p = random_polytope(&mut rng, 3, 12, 0.5, 2.0);
        let phi = random_map(&mut rng, 3);
        let lhs = cone_volume_measure(&p.transformed(phi.matrix()).unwrap()).unwrap();
        let rhs = pushforward(&phi.inverse_transpose(), &cone_volume_measure(&p).unwrap())
            .unwrap()
            .scaled(phi.det_abs());
        assert_eq!(lhs.len(), rhs.len());
        for a in lhs.atoms() {
            let b = rhs
                .atoms()
                .iter()
                .find(|b| (&b.u - &a.u).norm() < 1e-9)
                .expect("matching direction");
            assert!((a.mass - b.mass).abs() < 1e-10 * a.mass.max(1.0));
        }
    }
}

#[test]
fn discrete_change_of_variables_matches_closed_form() {
    let mut rng = rng_for(24, "cov-discrete");
    for k in 0..30 {
        let dim = 2 + k % 2;
        let p = random_polytope(&mut rng, dim, 6 + k % 10, 0.5, 2.0);
        let t = random_map(&mut rng, dim);
        let exponent = [0.0, 0.5, -0.7][k % 3];
        let centre = unit_vector(&mut rng, dim);
        let cap = |x: &DVector<f64>| if x.dot(&centre) >= 0.3 { 1.0 } else { 0.0 };
        let smooth = |x: &DVector<f64>| 1.0 + x[0] * x[0] + 0.5 * x[1];
        for phi in [&cap as &dyn Fn(&DVector<f64>) -> f64, &smooth] {
            let (lhs, rhs) = change_of_variables_lp(&t, &p, exponent, phi).unwrap();
            assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0), "body {k}: {lhs} vs {rhs}");
        }
        // Closed form for TP without re-enumeration: an atom (u, m) of
        // S_{p,P} moves to T^{-t}u/|T^{-t}u| with mass |det T| m |T^{-t}u|^p.
        let region = |x: &DVector<f64>| if x.dot(&centre) >= 0.1 { 1.0 } else { 0.0 };
        let inv_t = t.inverse_transpose();
        let predicted: f64 = lp_measure(&p, exponent)
            .unwrap()
            .atoms()
            .iter()
            .map(|a| {
                let w = inv_t.apply(&a.u);
                let s = w.norm();
                region(&(w / s)) * t.det_abs() * a.mass * s.powf(exponent)
            })
            .sum();
        let actual = lp_measure(&p.transformed(t.matrix()).unwrap(), exponent).unwrap().integrate(region);
        assert!((predicted - actual).abs() < 1e-9 * actual.max(1.0), "body {k}: {predicted} vs {actual}");
    }
}

#[test]
fn diagonal_map_on_cube() {
    let t = LinearMap::diagonal(&[1.3, 0.4, 2.2]).unwrap();
    let cube = HPolytope::cube(3, 1.0);
    let (lhs, rhs) = change_of_variables_lp(&t, &cube, 0.5, |_| 1.0).unwrap();
    assert!((lhs - rhs).abs() < 1e-9);
    let (lhs, rhs) = change_of_variables_lp(&LinearMap::identity(3), &cube, 0.5, |x| x[0].abs()).unwrap();
    assert_eq!(lhs, rhs);
}

#[test]
fn quadrature_change_of_variables_on_circle() {
    let grid = build_grid(2, 5).unwrap();
    let mut rng = rng_for(25, "cov-quadrature");
    for k in 0..10 {
        let t = random_map(&mut rng, 2);
        let exponent = [0.0, 0.5, -0.5, 1.0, -1.2][k % 5];
        let phi = |x: &DVector<f64>| (1.0 + 0.3 * x[0] - 0.2 * x[1] * x[0]).exp();
        let (lhs, rhs) = change_of_variables_quadrature(&t, exponent, phi, &grid).unwrap();
        assert!((lhs - rhs).abs() < 1e-6 * lhs.abs().max(1.0), "map {k}: {lhs} vs {rhs}");
    }
}

#[test]
fn equivariance_of_radial_powers() {
    let grid = build_grid(2, 5).unwrap();
    let mut rng = rng_for(26, "equivariance");
    for _ in 0..10 {
        let t = random_map(&mut rng, 2);
        let a = random_map(&mut rng, 2);
        let (lhs, rhs) = check_equivariance(&t, &Ellipsoid::new(&a), &grid).unwrap();
        // int rho_E^n = n vol(E) = n |det A| pi; the left side is the same for T^{-1} E.
        let oracle = 2.0 * a.det_abs() * PI / t.det_abs();
        assert!((lhs - oracle).abs() < 1e-6 * oracle);
        assert!((rhs - oracle).abs() < 1e-6 * oracle);
    }
    let grid3 = build_grid(3, 5).unwrap();
    let t = LinearMap::diagonal(&[1.2, 0.9, 0.8]).unwrap();
    let (lhs, rhs) = check_equivariance(&t, &Ball { dim: 3, radius: 1.5 }, &grid3).unwrap();
    assert!((lhs - rhs).abs() < 1e-3 * rhs);
}

#[test]
fn ellipse_curvature_function_integrates_to_perimeter_and_volume() {
    let grid = build_grid(2, 6).unwrap();
    let (a, b) = (2.0, 0.7);
    let t = LinearMap::diagonal(&[a, b]).unwrap();
    let perimeter = grid.integrate_fn(|x| curvature_function_ellipsoid(&t, x));
    // Perimeter by direct arc-length quadrature of (a cos s, b sin s).
    let steps = 100_000;
    let oracle: f64 = (0..steps)
        .map(|i| {
            let s = (i as f64 + 0.5) * 2.0 * PI / steps as f64;
            (a * a * s.sin().powi(2) + b * b * s.cos().powi(2)).sqrt()
        })
        .sum::<f64>()
        * 2.0
        * PI
        / steps as f64;
    assert!((perimeter - oracle).abs() < 1e-8 * oracle);
    let nv = grid.integrate_fn(|x| t.matrix().tr_mul(x).norm() * curvature_function_ellipsoid(&t, x));
    assert!((nv - 2.0 * PI * a * b).abs() < 1e-8);
}

#[test]
fn volume_lower_bound_holds_for_generated_bodies() {
    let mut rng = rng_for(27, "volume-lower");
    for k in 0..60 {
        let dim = 2 + k % 2;
        let p = random_polytope(&mut rng, dim, 6 + k % 15, 0.3, 1.5);
        let exponent = [0.0, 0.25, 0.5, 0.9][k % 4];
        let omega = if dim == 2 { 2.0 * PI } else { 4.0 * PI };
        let mass = lp_measure(&p, exponent).unwrap().total_mass();
        let hmax = p.normals().iter().map(|u| p.support_eval(u).unwrap()).fold(0.0, f64::max);
        let vc = p.enumerate_vertices().unwrap();
        let outer = vc.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let theta = (omega / mass).max(outer).max(hmax).max(1.0 + 1e-9);
        let bound = volume_lower_bound(dim, exponent, theta).unwrap();
        // Hoelder chain: |S_p| <= (n V)^{1-p} (int h dS)^p... written out in the test.
        let e = 1.0 / (1.0 - exponent);
        let nf = dim as f64;
        let chain = (omega / theta).powf(e) * theta.powf(-exponent * (nf - 1.0) * e) * omega.powf(-exponent * e) / nf;
        assert!((bound - chain).abs() < 1e-14 * chain);
        let v = p.volume().unwrap();
        assert!(v >= bound * (1.0 - 1e-12), "body {k}: {v} < {bound}");
    }
    assert!(volume_lower_bound(2, 1.0, 2.0).is_err());
    assert!(volume_lower_bound(2, 0.5, 1.0).is_err());
}

#[test]
fn cap_averaged_density_preserves_mass() {
    let grid = build_grid(3, 4).unwrap();
    let mu = surface_area_measure(&HPolytope::cube(3, 1.0)).unwrap();
    let d = DensityField::from_atoms(&mu, &grid, 0.3).unwrap();
    assert!((d.total_mass() - mu.total_mass()).abs() < 1e-9);
}

#[test]
fn measure_json_round_trip() {
    let mu = lp_measure(&HPolytope::cube(2, 1.0), 0.5).unwrap();
    let text = serde_json::to_string(&mu).unwrap();
    assert!(text.contains("\"atoms\""));
    let back: DiscreteMeasure = serde_json::from_str(&text).unwrap();
    assert_eq!(back, mu);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_measure_is_rotation_covariant(seed in any::<u64>(), exponent in -1.5f64..1.0) {
        let mut rng = rng_for(seed, "rotation-covariance");
        let dim = 2 + (seed % 2) as usize;
        let p = random_polytope(&mut rng, dim, 10, 0.5, 2.0);
        let r = random_rotation(&mut rng, dim);
        let a = lp_measure(&p, exponent).unwrap();
        let b = lp_measure(&p.transformed(&r).unwrap(), exponent).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            prop_assert!((&r * &x.u - &y.u).norm() < 1e-12);
            prop_assert!((x.mass - y.mass).abs() < 1e-12 * x.mass.max(1.0));
        }
    }

    #[test]
    fn pushforward_composes(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "pushforward");
        let mu = surface_area_measure(&random_polytope(&mut rng, 3, 9, 0.5, 2.0)).unwrap();
        let a = random_map(&mut rng, 3);
        let b = random_map(&mut rng, 3);
        let ab = LinearMap::new(a.matrix() * b.matrix()).unwrap();
        let lhs = pushforward(&ab, &mu).unwrap();
        let rhs = pushforward(&a, &pushforward(&b, &mu).unwrap()).unwrap();
        for (x, y) in lhs.atoms().iter().zip(rhs.atoms()) {
            prop_assert!((&x.u - &y.u).norm() < 1e-12);
            prop_assert_eq!(x.mass, y.mass);
        }
        prop_assert_eq!(lhs.total_mass(), mu.total_mass());
    }
}
