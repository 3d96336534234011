//! One function per subcommand; `main` only parses flags and maps exit codes.

use std::path::Path;

use lpgeom::constructions::{limit_table, ConstructionParams};
use lpgeom::measures::lp_measure;
use lpgeom::solver::{linearized_operator, solve_minkowski, MinkowskiProblem, SolveConfig, SolveReport};
use lpgeom::sphere::build_grid;
use lpgeom::{DiscreteMeasure, HPolytope};
use serde::Serialize;

use crate::error::CliResult;
use crate::io::{num, read_json, write_csv, write_json};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MeasureSummary {
    pub atoms: usize,
    pub total_mass: f64,
    pub barycenter_norm: f64,
    pub min_atom: f64,
    pub max_atom: f64,
}

impl MeasureSummary {
    pub fn of(mu: &DiscreteMeasure) -> Self {
        let masses = mu.masses();
        MeasureSummary {
            atoms: mu.len(),
            total_mass: mu.total_mass(),
            barycenter_norm: mu.barycenter().norm(),
            min_atom: masses.iter().copied().fold(f64::INFINITY, f64::min),
            max_atom: masses.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// `S_{p,P}` of the body in `body_file`.
pub fn cmd_measure(body_file: &Path, p: f64) -> CliResult<(DiscreteMeasure, MeasureSummary)> {
    let body: HPolytope = read_json(body_file)?;
    let mu = lp_measure(&body, p)?;
    let summary = MeasureSummary::of(&mu);
    Ok((mu, summary))
}

/// Solves `S_{p,K} = mu` and writes `report.json`, `body.json` and
/// `trace.csv` into `out_dir`. With an init body the normals are taken from
/// the measure and the starting offsets from the init body's support.
pub fn cmd_solve(
    measure_file: &Path,
    p: f64,
    init_file: Option<&Path>,
    config: &SolveConfig,
    out_dir: &Path,
) -> CliResult<SolveReport> {
    let mu: DiscreteMeasure = read_json(measure_file)?;
    let report = match init_file {
        Some(path) => {
            let init: HPolytope = read_json(path)?;
            let problem = MinkowskiProblem::new(p, mu, false)?;
            solve_minkowski(&problem, &init, config)?
        }
        None => {
            let problem = MinkowskiProblem::new(p, mu, true)?;
            solve_minkowski(&problem, &problem.ball_like_start()?, config)?
        }
    };
    write_json(&out_dir.join("report.json"), &report)?;
    write_json(&out_dir.join("body.json"), &report.terminal_body)?;
    let rows: Vec<Vec<String>> = report
        .trace
        .iter()
        .map(|r| {
            vec![
                r.iteration.to_string(),
                num(r.objective),
                num(r.residual),
                num(r.min_offset),
            ]
        })
        .collect();
    write_csv(
        &out_dir.join("trace.csv"),
        &["iteration", "objective", "residual", "min_offset"],
        &rows,
    )?;
    Ok(report)
}

/// Norms `10^-1 .. 10^-6` inside the patch.
pub fn default_norms(params: &ConstructionParams) -> Vec<f64> {
    (1..=6).map(|k| 10f64.powi(-k)).filter(|&s| s < params.r).collect()
}

/// Table of `(|z|, phi(v(z)), limit, ratio)` written as CSV.
pub fn cmd_construct(params: &ConstructionParams, out_file: &Path) -> CliResult<Vec<[f64; 4]>> {
    let table = limit_table(params, &default_norms(params))?;
    let rows: Vec<Vec<String>> = table.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect();
    write_csv(out_file, &["norm", "phi", "limit", "ratio"], &rows)?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SpectrumSummary {
    pub n: usize,
    pub p: f64,
    pub level: usize,
    pub values: Vec<f64>,
    pub expected: Vec<f64>,
    pub min_abs: f64,
    pub expected_min_abs: f64,
}

/// Analytic eigenvalues `(n - p) - (k^2 + (n - 2) k)` with multiplicity,
/// in decreasing order, truncated to `count`.
pub fn analytic_spectrum(n: usize, p: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count {
        let mult = match (n, k) {
            (_, 0) => 1,
            (2, _) => 2,
            _ => 2 * k + 1,
        };
        let value = (n as f64 - p) - (k * k + (n - 2) * k) as f64;
        out.extend(std::iter::repeat_n(value, mult));
        k += 1;
    }
    out.truncate(count);
    out
}

/// Lowest modes of the linearized operator, written as CSV next to the
/// analytic values.
pub fn cmd_spectrum(n: usize, p: f64, level: usize, count: usize, out_file: &Path) -> CliResult<SpectrumSummary> {
    let grid = build_grid(n, level)?;
    let spec = linearized_operator(n, p, &grid)?.spectrum(count);
    let count = count.min(spec.values.len());
    let values: Vec<f64> = spec.values[..count].to_vec();
    let expected = analytic_spectrum(n, p, count);
    let rows: Vec<Vec<String>> = values
        .iter()
        .zip(&expected)
        .enumerate()
        .map(|(i, (v, e))| vec![i.to_string(), num(*v), num(*e)])
        .collect();
    write_csv(out_file, &["index", "eigenvalue", "analytic"], &rows)?;
    let min_abs = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let expected_min_abs = expected.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    Ok(SpectrumSummary {
        n,
        p,
        level,
        values,
        expected,
        min_abs,
        expected_min_abs,
    })
}
