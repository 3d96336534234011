mod common;

use common::relative_gap;
use lpgeom::measures::{lp_measure, surface_area_measure};
use lpgeom::random::{random_polytope, rng_for, unit_vector};
use lpgeom::solver::{
    direct_j, eval_j, holder_interpolation_check, linearized_operator, normalized_j_objective, recentered_objective,
    regime_objective, solve_minkowski, volume_and_gradient, DegeneracyFlag, MinkowskiProblem, SolveConfig,
    SolveReport,
};
use lpgeom::sphere::build_grid;
use lpgeom::{DiscreteMeasure, GeomError, HPolytope};
use nalgebra::DVector;
use rand::Rng;

const STEP: f64 = 1e-6;

fn fd_gradient(f: impl Fn(&[f64]) -> f64, h: &[f64]) -> Vec<f64> {
    common::fd_gradient(f, h, STEP)
}

#[test]
fn regime_gradients_match_finite_differences() {
    let mut rng = rng_for(31, "regime-gradients");
    for p in [1.0, 0.0, 0.5, -1.0, -2.5] {
        for _ in 0..20 {
            let m = rng.gen_range(5..30);
            let masses: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..2.0)).collect();
            let h: Vec<f64> = (0..m).map(|_| rng.gen_range(0.3..2.0)).collect();
            let (_, g) = regime_objective(p, &masses, &h).unwrap();
            let fd = fd_gradient(|x| regime_objective(p, &masses, x).unwrap().0, &h);
            assert!(relative_gap(&g, &fd) < 1e-6, "p = {p}");
        }
    }
}

#[test]
fn recentered_and_volume_gradients_match_finite_differences() {
    let mut rng = rng_for(32, "recentered-gradients");
    for k in 0..20 {
        let dim = 2 + k % 2;
        let body = random_polytope(&mut rng, dim, 8 + k % 8, 0.6, 1.6);
        let normals = body.normals().to_vec();
        let h = body.offsets().to_vec();
        let masses: Vec<f64> = (0..h.len()).map(|_| rng.gen_range(0.2..2.0)).collect();
        let (_, a) = volume_and_gradient(&normals, &h).unwrap();
        let fd = fd_gradient(|x| volume_and_gradient(&normals, x).unwrap().0, &h);
        assert!(relative_gap(&a, &fd) < 1e-6, "volume, body {k}");
        for p in [0.0, 0.3, 0.7, -1.0] {
            let (_, g, _) = recentered_objective(p, &normals, &masses, &h).unwrap();
            let fd = fd_gradient(|x| recentered_objective(p, &normals, &masses, x).unwrap().0, &h);
            assert!(relative_gap(&g, &fd) < 1e-6, "recentered p = {p}, body {k}");
        }
        for p in [-0.5, -1.0, -2.0] {
            let mu = DiscreteMeasure::from_parts(normals.clone(), masses.clone()).unwrap();
            let (_, g) = normalized_j_objective(p, &mu, &normals, &h).unwrap();
            let fd = fd_gradient(|x| normalized_j_objective(p, &mu, &normals, x).unwrap().0, &h);
            assert!(relative_gap(&g, &fd) < 1e-6, "normalized J p = {p}, body {k}");
        }
    }
}

#[test]
fn volume_stays_normalized_along_the_run() {
    let mut rng = rng_for(33, "volume-projection");
    for (k, p) in [0.0, 0.3, 0.7, 1.0, -0.5].into_iter().enumerate() {
        let dim = 2 + k % 2;
        let q = random_polytope(&mut rng, dim, 10, 0.5, 1.5);
        let mu = lp_measure(&q, p).unwrap();
        let problem = MinkowskiProblem::new(p, mu, true).unwrap();
        let config = SolveConfig {
            tol: 1e-9,
            ..SolveConfig::default()
        };
        let report = solve_minkowski(&problem, &problem.ball_like_start().unwrap(), &config).unwrap();
        assert!(report.converged, "p = {p}: residual {}", report.final_residual);
        for row in &report.trace {
            assert!((row.volume - 1.0).abs() < 1e-10, "p = {p}, iteration {}: V = {}", row.iteration, row.volume);
        }
        assert!(report.residual_history.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn round_trip_recovers_source_body() {
    let mut rng = rng_for(34, "round-trip-body");
    for p in [0.3, 0.7] {
        let q = random_polytope(&mut rng, 3, 14, 0.6, 1.4);
        let mu = lp_measure(&q, p).unwrap();
        let problem = MinkowskiProblem::new(p, mu, true).unwrap();
        let config = SolveConfig {
            tol: 1e-10,
            ..SolveConfig::default()
        };
        let report = solve_minkowski(&problem, &problem.ball_like_start().unwrap(), &config).unwrap();
        assert_eq!(report.exit_code(), 0);
        // For p != 0 the solution is unique, including its position.
        let source: Vec<f64> = problem
            .target()
            .atoms()
            .iter()
            .map(|a| q.support_eval(&a.u).unwrap())
            .collect();
        for (a, b) in report.terminal_body.offsets().iter().zip(&source) {
            assert!((a - b).abs() < 1e-6, "p = {p}: {a} vs {b}");
        }
    }
}

#[test]
fn free_normals_start_from_any_body() {
    let cube = HPolytope::cube(3, 1.0);
    let mu = surface_area_measure(&cube).unwrap();
    let problem = MinkowskiProblem::new(0.5, lp_measure(&cube, 0.5).unwrap(), false).unwrap();
    let init = random_polytope(&mut rng_for(35, "free-start"), 3, 20, 0.8, 1.2);
    let report = solve_minkowski(&problem, &init, &SolveConfig::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.terminal_body.len(), mu.len());
}

#[test]
fn hemisphere_and_tiny_atoms_are_rejected() {
    let dirs = vec![
        DVector::from_vec(vec![1.0, 0.0]),
        DVector::from_vec(vec![0.0, 1.0]),
        DVector::from_vec(vec![0.6, 0.8]),
    ];
    let mu = DiscreteMeasure::from_parts(dirs, vec![1.0; 3]).unwrap();
    assert_eq!(MinkowskiProblem::new(0.0, mu, true).unwrap_err(), GeomError::HemisphereViolation);
    let mut masses = vec![4.0; 6];
    masses[2] = 1e-13;
    let mu = DiscreteMeasure::from_parts(surface_area_measure(&HPolytope::cube(3, 1.0)).unwrap().directions(), masses)
        .unwrap();
    assert!(matches!(MinkowskiProblem::new(0.0, mu, true), Err(GeomError::InvalidInput(_))));
}

#[test]
fn concentrated_cone_volume_measure_flags_degeneracy() {
    // Cone-volume data of a triangle with o at a vertex: one atom carries
    // all the mass, the other two almost none, so the solution touches o.
    let tri = HPolytope::new(
        vec![
            DVector::from_vec(vec![-1.0, 0.0]),
            DVector::from_vec(vec![0.0, -1.0]),
            DVector::from_vec(vec![1.0, 1.0]).normalize(),
        ],
        vec![0.0, 0.0, 1.0 / 2f64.sqrt()],
    )
    .unwrap();
    let mu = lp_measure(&tri, 0.0).unwrap();
    assert_eq!(mu.len(), 3);
    let masses: Vec<f64> = mu.masses().iter().map(|m| m.max(1e-10)).collect();
    let mu = DiscreteMeasure::from_parts(mu.directions(), masses).unwrap();
    let problem = MinkowskiProblem::new(0.0, mu, true).unwrap();
    let config = SolveConfig {
        tol: 1e-12,
        max_iter: 200,
        ..SolveConfig::default()
    };
    let report = solve_minkowski(&problem, &problem.ball_like_start().unwrap(), &config).unwrap();
    assert!(report.degeneracy_flags.contains(&DegeneracyFlag::OriginToBoundary));
    assert_eq!(report.exit_code(), 2);
}

#[test]
fn report_json_uses_camel_case() {
    let cube = HPolytope::cube(2, 1.0);
    let problem = MinkowskiProblem::new(0.0, lp_measure(&cube, 0.0).unwrap(), true).unwrap();
    let report = solve_minkowski(&problem, &problem.ball_like_start().unwrap(), &SolveConfig::default()).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    for key in ["residualHistory", "finalResidual", "terminalBody", "degeneracyFlags"] {
        assert!(text.contains(key), "{key}");
    }
    let back: SolveReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.iterations, report.iterations);
}

#[test]
fn inner_functional_is_strictly_convex() {
    let mut rng = rng_for(36, "convexity");
    for p in [-0.5, -1.0, -2.0] {
        let l = random_polytope(&mut rng, 3, 12, 0.6, 1.5);
        let m = random_polytope(&mut rng, 3, 10, 0.6, 1.5);
        let mu = lp_measure(&l, p).unwrap();
        let (c, r) = m.chebyshev_center().unwrap();
        for _ in 0..10 {
            let a = &c + unit_vector(&mut rng, 3) * (0.9 * r * rng.gen::<f64>());
            let b = &c + unit_vector(&mut rng, 3) * (0.9 * r * rng.gen::<f64>());
            let mid = (&a + &b) / 2.0;
            let fa = direct_j(p, &mu, &m, &a).unwrap();
            let fb = direct_j(p, &mu, &m, &b).unwrap();
            let fm = direct_j(p, &mu, &m, &mid).unwrap();
            assert!(fm < (fa + fb) / 2.0, "p = {p}: {fm} vs {fa}, {fb}");
        }
        let j = eval_j(p, &mu, &m).unwrap();
        assert!(m.contains(&j.inner_minimizer, 1e-9));
    }
}

#[test]
fn holder_interpolation_holds() {
    let mut rng = rng_for(37, "holder");
    let cube = HPolytope::cube(3, 1.0);
    let (lhs, rhs) = holder_interpolation_check(&cube, &cube, -0.5, -1.0).unwrap();
    assert!((lhs - 8.0).abs() < 1e-9 && (rhs - 8.0).abs() < 1e-9);
    for _ in 0..10 {
        let k = random_polytope(&mut rng, 3, 10, 0.6, 1.5);
        let l = random_polytope(&mut rng, 3, 10, 0.6, 1.5);
        let (lhs, rhs) = holder_interpolation_check(&k, &l, -0.5, -1.0).unwrap();
        assert!(lhs <= rhs + 1e-10, "{lhs} > {rhs}");
        let (l2, r2) = holder_interpolation_check(&k, &l.scaled(2.0), -0.5, -1.0).unwrap();
        let factor = 2f64.powf(-0.5);
        assert!((l2 - factor * lhs).abs() < 1e-8 * lhs);
        assert!((r2 - factor * rhs).abs() < 1e-8 * rhs);
    }
}

#[test]
fn linearized_spectrum_has_expected_kernel() {
    for n in [2, 3] {
        let grid = build_grid(n, 4).unwrap();
        for p in [0.0, 0.3, 0.7] {
            let spec = linearized_operator(n, p, &grid).unwrap().spectrum(20);
            assert_eq!(spec.count_within(1e-6), 0, "n = {n}, p = {p}");
        }
        let spec = linearized_operator(n, 1.0, &grid).unwrap().spectrum(20);
        assert_eq!(spec.count_within(5e-2), n, "n = {n}, p = 1");
    }
}
