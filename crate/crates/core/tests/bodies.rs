mod common;

use common::triangulated_volume;
use lpgeom::random::{random_centered_polygon, random_polytope, rng_for, unit_vector};
use lpgeom::sphere::build_grid;
use lpgeom::{GeomError, HPolytope, OriginLocation};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

fn random_rotation(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let cols: Vec<DVector<f64>> = (0..n).map(|_| unit_vector(rng, n)).collect();
    let q = DMatrix::from_columns(&cols).qr().q();
    if q.determinant() < 0.0 {
        let mut q = q;
        q.column_mut(0).neg_mut();
        return q;
    }
    q
}

#[test]
fn closure_holds_for_random_bodies() {
    let mut rng = rng_for(1, "closure");
    for k in 0..100 {
        let dim = 2 + k % 2;
        let p = random_polytope(&mut rng, dim, 6 + k % 20, 0.5, 2.0);
        let vc = p.enumerate_vertices().unwrap();
        let res = vc.closure_residual(p.normals());
        assert!(res < 1e-9, "body {k}: closure residual {res}");
    }
}

#[test]
fn volume_matches_triangulation_oracle() {
    let mut rng = rng_for(2, "volume");
    for k in 0..60 {
        let dim = 2 + k % 2;
        let p = random_polytope(&mut rng, dim, 5 + k % 25, 0.5, 2.0);
        let v = p.volume().unwrap();
        let oracle = triangulated_volume(&p);
        assert!((v - oracle).abs() < 1e-10 * oracle.max(1.0), "body {k}: {v} vs {oracle}");
    }
}

#[test]
fn volume_matches_monte_carlo() {
    let mut rng = rng_for(3, "monte-carlo");
    let p = random_polytope(&mut rng, 3, 12, 0.6, 1.4);
    let r = p.outer_radius().unwrap();
    let samples = 200_000;
    let hits = (0..samples)
        .filter(|_| {
            let x = DVector::from_fn(3, |_, _| rng.gen_range(-r..r));
            p.contains(&x, 0.0)
        })
        .count();
    let frac = hits as f64 / samples as f64;
    let estimate = frac * (2.0 * r).powi(3);
    let sigma = (frac * (1.0 - frac) / samples as f64).sqrt() * (2.0 * r).powi(3);
    let v = p.volume().unwrap();
    assert!((v - estimate).abs() < 5.0 * sigma, "{v} vs {estimate} ± {sigma}");
}

#[test]
fn bipolar_reproduces_support_values() {
    let mut rng = rng_for(4, "bipolar");
    for k in 0..20 {
        let dim = 2 + k % 2;
        let grid = build_grid(dim, 3).unwrap();
        let p = random_polytope(&mut rng, dim, 8 + k, 0.5, 2.0);
        let pp = p.polar().unwrap().polar().unwrap();
        for x in grid.nodes() {
            let a = p.support_eval(x).unwrap();
            let b = pp.support_eval(x).unwrap();
            assert!((a - b).abs() < 1e-8, "body {k}: {a} vs {b}");
        }
    }
}

#[test]
fn mahler_bound_for_centered_polygons() {
    let tau = PI * PI / 16.0;
    let mut rng = rng_for(5, "mahler");
    let mut worst = f64::INFINITY;
    for k in 0..200 {
        let p = random_centered_polygon(&mut rng, 3 + k % 12);
        let prod = p.volume().unwrap() * p.polar().unwrap().volume().unwrap();
        worst = worst.min(prod);
    }
    assert!(worst >= tau, "worst product {worst} < {tau}");
}

#[test]
fn support_field_of_ball_approximation() {
    let grid = build_grid(3, 4).unwrap();
    let ball = HPolytope::circumscribed(&build_grid(3, 5).unwrap());
    let field = ball.support_field(&grid).unwrap();
    assert_eq!(field.origin_location(), OriginLocation::Interior);
    assert!(field.values().iter().all(|&h| (h - 1.0).abs() < 2e-3));
    assert!(field.is_convex());
}

#[test]
fn support_is_lipschitz_with_outer_radius() {
    let mut rng = rng_for(6, "lipschitz");
    let p = random_polytope(&mut rng, 3, 15, 0.5, 2.0);
    let r = p.outer_radius().unwrap();
    for _ in 0..200 {
        let a = unit_vector(&mut rng, 3);
        let b = unit_vector(&mut rng, 3);
        let gap = (p.support_eval(&a).unwrap() - p.support_eval(&b).unwrap()).abs();
        assert!(gap <= r * (&a - &b).norm() + 1e-12);
    }
}

#[test]
fn unbounded_and_degenerate_inputs_are_rejected() {
    let half = vec![DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![0.0, 1.0])];
    assert_eq!(HPolytope::new(half, vec![1.0, 1.0]).unwrap_err(), GeomError::UnboundedBody);
    let slab = HPolytope::new(
        vec![
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::from_vec(vec![-1.0, 0.0]),
            DVector::from_vec(vec![0.0, 1.0]),
            DVector::from_vec(vec![0.0, -1.0]),
        ],
        vec![1.0, -1.0, 1.0, 1.0],
    );
    assert!(slab.is_err() || slab.unwrap().enumerate_vertices().is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn translation_covariance(seed in any::<u64>(), tx in -0.5f64..0.5, ty in -0.5f64..0.5, tz in -0.5f64..0.5) {
        let mut rng = rng_for(seed, "translation");
        let p = random_polytope(&mut rng, 3, 10, 0.5, 2.0);
        let t = DVector::from_vec(vec![tx, ty, tz]);
        let q = p.translated(&t);
        for _ in 0..10 {
            let x = unit_vector(&mut rng, 3);
            let lhs = q.support_eval(&x).unwrap();
            let rhs = p.support_eval(&x).unwrap() + t.dot(&x);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_preserves_volume(seed in any::<u64>()) {
        let mut rng = rng_for(seed, "rotation-volume");
        let p = random_polytope(&mut rng, 3, 12, 0.5, 2.0);
        let r = random_rotation(&mut rng, 3);
        let q = p.transformed(&r).unwrap();
        let (a, b) = (p.volume().unwrap(), q.volume().unwrap());
        prop_assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn scaling_is_homogeneous(seed in any::<u64>(), s in 0.2f64..5.0) {
        let mut rng = rng_for(seed, "scaling");
        let dim = 2 + (seed % 2) as usize;
        let p = random_polytope(&mut rng, dim, 9, 0.5, 2.0);
        let v = p.volume().unwrap();
        let vs = p.scaled(s).volume().unwrap();
        prop_assert!((vs - s.powi(dim as i32) * v).abs() < 1e-10 * vs);
    }
}
