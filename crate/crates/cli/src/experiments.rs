//! Deterministic experiments. Each one writes CSV artifacts and a
//! `verdict.json` listing every asserted property with its measured margin.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lpgeom::constructions::ConstructionParams;
use lpgeom::measures::{
    change_of_variables_lp, change_of_variables_quadrature, lp_measure, surface_area_measure, LinearMap,
};
use lpgeom::random::{random_centered_polygon, random_polytope, rng_for, unit_vector};
use lpgeom::solver::{nonuniqueness_probe, solve_minkowski, DegeneracyFlag, MinkowskiProblem, SolveConfig};
use lpgeom::sphere::build_grid;
use lpgeom::{DiscreteMeasure, HPolytope};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::commands::{cmd_construct, cmd_spectrum};
use crate::error::{CliError, CliResult};
use crate::io::{ensure_dir, num, write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Roundtrip,
    Stability,
    Nonuniqueness,
    ConstructionLimit,
    Spectrum,
    Identities,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::Roundtrip,
        ExperimentName::Stability,
        ExperimentName::Nonuniqueness,
        ExperimentName::ConstructionLimit,
        ExperimentName::Spectrum,
        ExperimentName::Identities,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Roundtrip => "roundtrip",
            ExperimentName::Stability => "stability",
            ExperimentName::Nonuniqueness => "nonuniqueness",
            ExperimentName::ConstructionLimit => "construction-limit",
            ExperimentName::Spectrum => "spectrum",
            ExperimentName::Identities => "identities",
        }
    }

    pub fn randomized(self) -> bool {
        matches!(
            self,
            ExperimentName::Roundtrip | ExperimentName::Stability | ExperimentName::Identities
        )
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| CliError::UnknownExperiment(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub parameters: BTreeMap<String, String>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(name: ExperimentName, parameters: BTreeMap<String, String>, output_dir: PathBuf) -> CliResult<Self> {
        let cfg = ExperimentConfig {
            name,
            parameters,
            output_dir,
        };
        if name.randomized() {
            cfg.seed()?;
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.get::<u64>("seed")?
            .ok_or_else(|| CliError::Config(format!("experiment {} needs a seed", self.name)))
    }

    fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        match self.parameters.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Config(format!("cannot parse {key} = '{v}'"))),
        }
    }

    fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Comma-separated list, or the default when absent.
    fn list(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.parameters.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => v
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::Config(format!("cannot parse {key} entry '{s}'")))
                })
                .collect(),
        }
    }

    fn solve_config(&self) -> CliResult<SolveConfig> {
        let base = SolveConfig::default();
        Ok(SolveConfig {
            tol: self.get_or("tol", base.tol)?,
            max_iter: self.get_or("max-iter", base.max_iter)?,
            ..base
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyVerdict {
    pub property: String,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub experiment: ExperimentName,
    pub parameters: BTreeMap<String, String>,
    pub passed: bool,
    pub properties: Vec<PropertyVerdict>,
    pub artifacts: Vec<String>,
}

struct Recorder {
    properties: Vec<PropertyVerdict>,
    artifacts: Vec<String>,
}

impl Recorder {
    fn new() -> Self {
        Recorder {
            properties: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// `measured <= threshold`.
    fn at_most(&mut self, property: impl Into<String>, measured: f64, threshold: f64) {
        self.push(property, measured, threshold, measured <= threshold);
    }

    /// `measured >= threshold`.
    fn at_least(&mut self, property: impl Into<String>, measured: f64, threshold: f64) {
        self.push(property, measured, threshold, measured >= threshold);
    }

    fn push(&mut self, property: impl Into<String>, measured: f64, threshold: f64, passed: bool) {
        self.properties.push(PropertyVerdict {
            property: property.into(),
            measured,
            threshold,
            passed,
        });
    }

    fn csv<R: AsRef<[String]>>(&mut self, dir: &Path, name: &str, header: &[&str], rows: &[R]) -> CliResult<()> {
        write_csv(&dir.join(name), header, rows)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }
}

/// Runs the experiment, writes its artifacts and `verdict.json`.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<Verdict> {
    let dir = ensure_dir(&config.output_dir)?;
    let mut rec = Recorder::new();
    match config.name {
        ExperimentName::Roundtrip => roundtrip(config, &dir, &mut rec)?,
        ExperimentName::Stability => stability(config, &dir, &mut rec)?,
        ExperimentName::Nonuniqueness => nonuniqueness(config, &dir, &mut rec)?,
        ExperimentName::ConstructionLimit => construction_limit(config, &dir, &mut rec)?,
        ExperimentName::Spectrum => spectrum(config, &dir, &mut rec)?,
        ExperimentName::Identities => identities(config, &dir, &mut rec)?,
    }
    let verdict = Verdict {
        experiment: config.name,
        parameters: config.parameters.clone(),
        passed: rec.properties.iter().all(|p| p.passed),
        properties: rec.properties,
        artifacts: rec.artifacts,
    };
    write_json(&dir.join("verdict.json"), &verdict)?;
    Ok(verdict)
}

/// Max relative atom error of `S_p` of `body` against `target`.
fn atom_residual(body: &HPolytope, target: &DiscreteMeasure, p: f64) -> CliResult<f64> {
    let got = lp_measure(body, p)?;
    Ok(target
        .atoms()
        .iter()
        .map(|a| {
            let mass = got
                .atoms()
                .iter()
                .find(|b| (&b.u - &a.u).norm() < 1e-9)
                .map_or(0.0, |b| b.mass);
            (mass - a.mass).abs() / a.mass
        })
        .fold(0.0, f64::max))
}

fn roundtrip(cfg: &ExperimentConfig, dir: &Path, rec: &mut Recorder) -> CliResult<()> {
    let seed = cfg.seed()?;
    let ps = match cfg.get::<f64>("p")? {
        Some(p) => vec![p],
        None => vec![0.0, 0.3, 0.7],
    };
    let dims = match cfg.get::<usize>("n")? {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let count: usize = cfg.get_or("count", 50)?;
    let solve = cfg.solve_config()?;
    let mut rows = Vec::new();
    for &p in &ps {
        for &n in &dims {
            let mut rng = rng_for(seed, &format!("roundtrip-{p}-{n}"));
            let (mut ok, mut silent) = (0usize, 0usize);
            for k in 0..count {
                let q = random_polytope(&mut rng, n, 5 + k % 16, 0.5, 2.0);
                let mu = lp_measure(&q, p)?;
                let problem = MinkowskiProblem::new(p, mu.clone(), true)?;
                let rep = solve_minkowski(&problem, &problem.ball_like_start()?, &solve)?;
                let residual = atom_residual(&rep.terminal_body, &mu, p)?;
                let flagged = rep.degeneracy_flags.contains(&DegeneracyFlag::OriginToBoundary);
                if rep.converged && residual <= solve.tol {
                    ok += 1;
                } else if !flagged {
                    silent += 1;
                }
                let flags: Vec<String> = rep
                    .degeneracy_flags
                    .iter()
                    .map(|f| serde_json::to_value(f).map(|v| v.as_str().unwrap_or("").to_string()).unwrap_or_default())
                    .collect();
                rows.push(vec![
                    num(p),
                    n.to_string(),
                    k.to_string(),
                    q.len().to_string(),
                    rep.iterations.to_string(),
                    rep.converged.to_string(),
                    num(residual),
                    flags.join("|"),
                ]);
            }
            rec.at_least(
                format!("p={p} n={n}: round-trip residual <= {} in all but 2 of {count} cases", solve.tol),
                ok as f64,
                count.saturating_sub(2) as f64,
            );
            rec.at_most(
                format!("p={p} n={n}: every failed run carries the origin-to-boundary flag"),
                silent as f64,
                0.0,
            );
        }
    }
    rec.csv(
        dir,
        "roundtrip.csv",
        &["p", "n", "index", "facets", "iterations", "converged", "residual", "flags"],
        &rows,
    )
}

/// `(1 + eps cos 2θ) dθ` on `atoms` equally spaced directions.
pub fn stability_measure(atoms: usize, eps: f64) -> CliResult<DiscreteMeasure> {
    let w = 2.0 * PI / atoms as f64;
    let dirs = (0..atoms)
        .map(|i| {
            let t = w * i as f64;
            DVector::from_vec(vec![t.cos(), t.sin()])
        })
        .collect();
    let masses = (0..atoms).map(|i| (1.0 + eps * (2.0 * w * i as f64).cos()) * w).collect();
    Ok(DiscreteMeasure::from_parts(dirs, masses)?)
}

fn stability(cfg: &ExperimentConfig, dir: &Path, rec: &mut Recorder) -> CliResult<()> {
    let seed = cfg.seed()?;
    let eps: f64 = cfg.get_or("eps", 0.05)?;
    let atoms: usize = cfg.get_or("atoms", 128)?;
    let ps = match cfg.get::<f64>("p")? {
        Some(p) => vec![p],
        None => vec![0.0, 0.5],
    };
    let solve = SolveConfig {
        tol: cfg.get_or("tol", 1e-10)?,
        max_iter: cfg.get_or("max-iter", 500)?,
        ..SolveConfig::default()
    };
    let mu = stability_measure(atoms, eps)?;
    let mut rng = rng_for(seed, "stability");
    let mut rows = Vec::new();
    for p in ps {
        let problem = MinkowskiProblem::new(p, mu.clone(), true)?;
        let circle = problem.ball_like_start()?;
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-0.03..0.03)).collect();
        let shift = DVector::from_vec(vec![rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)]);
        let offsets = circle
            .normals()
            .iter()
            .map(|u| {
                let t = u[1].atan2(u[0]);
                1.0 + c[0] * (2.0 * t).cos() + c[1] * (2.0 * t).sin() + c[2] * (3.0 * t).cos()
                    + c[3] * (3.0 * t).sin()
                    + shift.dot(u)
            })
            .collect();
        let perturbed = circle.with_offsets(offsets)?;
        let a = solve_minkowski(&problem, &circle, &solve)?;
        let b = solve_minkowski(&problem, &perturbed, &solve)?;
        let (ha, hb) = (a.terminal_body.offsets(), b.terminal_body.offsets());
        for (i, u) in circle.normals().iter().enumerate() {
            rows.push(vec![num(p), num(u[1].atan2(u[0])), num(ha[i]), num(hb[i])]);
        }
        let gap = ha.iter().zip(hb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let dev = ha.iter().map(|h| (h - 1.0).abs()).fold(0.0, f64::max);
        rec.at_most(
            format!("p={p}: both initializations converge"),
            f64::from(u8::from(!(a.converged && b.converged))),
            0.0,
        );
        rec.at_most(format!("p={p}: fields from two initializations agree in max norm"), gap, 1e-4);
        rec.at_most(format!("p={p}: |h - 1|_inf <= 5 eps"), dev, 5.0 * eps);
    }
    rec.csv(dir, "stability.csv", &["p", "theta", "h_circle", "h_perturbed"], &rows)
}

fn nonuniqueness(cfg: &ExperimentConfig, dir: &Path, rec: &mut Recorder) -> CliResult<()> {
    let p: f64 = cfg.get_or("p", -1.0)?;
    let stretches = cfg.list("stretches", &[1.0, 2.0, 4.0, 8.0, 16.0])?;
    let cube = HPolytope::cube(3, 1.0);
    let values = nonuniqueness_probe(&cube, p, &stretches)?;
    let rows: Vec<Vec<String>> = values.iter().map(|(t, v)| vec![num(*t), num(*v)]).collect();
    rec.csv(dir, "nonuniqueness.csv", &["stretch", "functional"], &rows)?;
    let min_step = values
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::INFINITY, f64::min);
    rec.push(
        "functional strictly increasing across stretch factors",
        min_step,
        0.0,
        min_step > 0.0,
    );
    if let (Some(first), Some(last)) = (values.first(), values.last()) {
        rec.at_least("last value over first value", last.1 / first.1, 2.0);
    }
    Ok(())
}

fn construction_limit(cfg: &ExperimentConfig, dir: &Path, rec: &mut Recorder) -> CliResult<()> {
    let params = ConstructionParams::new(
        cfg.get_or("n", 4)?,
        cfg.get_or("m", 2)?,
        cfg.get_or("p", 0.5)?,
        cfg.get_or("r", lpgeom::constructions::DEFAULT_PATCH_RADIUS)?,
    )?;
    let table = cmd_construct(&params, &dir.join("construction.csv"))?;
    rec.artifacts.push("construction.csv".into());
    for (norm, tol) in [(1e-3, 1e-2), (1e-4, 1e-3)] {
        if let Some(row) = table.iter().find(|r| r[0] == norm) {
            rec.at_most(format!("|phi / limit - 1| at |z| = {norm}"), (row[3] - 1.0).abs(), tol);
        }
    }
    Ok(())
}

fn spectrum(cfg: &ExperimentConfig, dir: &Path, rec: &mut Recorder) -> CliResult<()> {
    let n: usize = cfg.get_or("n", 3)?;
    let p: f64 = cfg.get_or("p", 0.0)?;
    let level: usize = cfg.get_or("level", 4)?;
    let count: usize = cfg.get_or("count", 16)?;
    let s = cmd_spectrum(n, p, level, count, &dir.join("spectrum.csv"))?;
    rec.artifacts.push("spectrum.csv".into());
    rec.at_most(
        "min |eigenvalue| against the analytic value",
        (s.min_abs - s.expected_min_abs).abs(),
        5e-2,
    );
    let zeros = s.values.iter().filter(|v| v.abs() <= 5e-2).count();
    let want = if p == 1.0 { n } else { 0 };
    rec.push(
        format!("near-zero eigenvalues (expected {want})"),
        zeros as f64,
        want as f64,
        zeros == want,
    );
    Ok(())
}

fn identities(cfg: &ExperimentConfig, dir: &Path, rec: &mut Recorder) -> CliResult<()> {
    let seed = cfg.seed()?;
    let count: usize = cfg.get_or("count", 100)?;
    let mut rng = rng_for(seed, "identities");
    let (mut mass_gap, mut bary) = (0.0f64, 0.0f64);
    let mut rows = Vec::new();
    for k in 0..count {
        let n = 2 + k % 2;
        let body = random_polytope(&mut rng, n, 5 + k % 20, 0.4, 2.0);
        let v = body.volume()?;
        let s0 = lp_measure(&body, 0.0)?.total_mass();
        let b = surface_area_measure(&body)?.barycenter().norm();
        mass_gap = mass_gap.max((s0 - n as f64 * v).abs() / v.max(1.0));
        bary = bary.max(b);
        rows.push(vec![k.to_string(), n.to_string(), body.len().to_string(), num(v), num(s0), num(b)]);
    }
    rec.csv(
        dir,
        "identities.csv",
        &["index", "n", "facets", "volume", "s0_mass", "barycenter_norm"],
        &rows,
    )?;
    rec.at_most("|S_0| = n V (relative)", mass_gap, 1e-10);
    rec.at_most("surface-measure barycenter norm", bary, 1e-9);

    let tau = PI * PI / 16.0;
    let mut mrng = rng_for(seed, "mahler");
    let mut worst = f64::INFINITY;
    let mut mrows = Vec::new();
    for k in 0..200 {
        let poly = random_centered_polygon(&mut mrng, 3 + k % 12);
        let prod = poly.volume()? * poly.polar()?.volume()?;
        worst = worst.min(prod);
        mrows.push(vec![k.to_string(), poly.len().to_string(), num(prod)]);
    }
    rec.csv(dir, "mahler.csv", &["index", "edges", "volume_product"], &mrows)?;
    rec.at_least("min V(P) V(P*) over centered polygons", worst, tau);

    let mut crng = rng_for(seed, "change-of-variables");
    let grid = build_grid(2, 5)?;
    let (mut discrete, mut quad) = (0.0f64, 0.0f64);
    for k in 0..20 {
        let n = 2 + k % 2;
        let t = loop {
            let m = DMatrix::<f64>::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) + crng.gen_range(-0.6..0.6));
            if m.determinant().abs() > 0.2 {
                break LinearMap::new(m)?;
            }
        };
        let body = random_polytope(&mut crng, n, 6 + k % 10, 0.5, 2.0);
        let p = [0.0, 0.5, -0.7, 1.0][k % 4];
        let centre = unit_vector(&mut crng, n);
        let (lhs, rhs) = change_of_variables_lp(&t, &body, p, |x| f64::from(u8::from(x.dot(&centre) >= 0.2)))?;
        discrete = discrete.max((lhs - rhs).abs() / lhs.abs().max(1.0));
        if n == 2 {
            let (lhs, rhs) = change_of_variables_quadrature(&t, p, |x| (0.4 * x[0] - 0.2 * x[1]).exp(), &grid)?;
            quad = quad.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        }
    }
    rec.at_most("discrete change of variables (cap indicators)", discrete, 1e-9);
    rec.at_most("quadrature change of variables on the circle", quad, 1e-6);
    Ok(())
}
