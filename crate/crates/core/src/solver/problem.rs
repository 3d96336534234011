use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bodies::HPolytope;
use crate::error::{GeomError, Result};
use crate::measures::DiscreteMeasure;

/// Relative mass below which an atom is rejected.
pub const MASS_FLOOR: f64 = 1e-12;

/// `S_{p,P} = mu` with the target's directions as the normal set.
#[derive(Debug, Clone, PartialEq)]
pub struct MinkowskiProblem {
    p: f64,
    target: DiscreteMeasure,
    normals_fixed: bool,
}

impl MinkowskiProblem {
    pub fn new(p: f64, target: DiscreteMeasure, normals_fixed: bool) -> Result<Self> {
        let n = target.dim();
        if !(2..=3).contains(&n) {
            return Err(GeomError::UnsupportedDimension {
                dim: n,
                op: "solve_minkowski",
            });
        }
        if !p.is_finite() || p > 1.0 || p <= -(n as f64) {
            return Err(GeomError::InvalidParams(format!("p = {p} outside (-{n}, 1]")));
        }
        let total = target.total_mass();
        if let Some(i) = target.atoms().iter().position(|a| a.mass <= MASS_FLOOR * total) {
            return Err(GeomError::InvalidInput(format!(
                "atom {i} has mass {:e}, below the floor {:e} of the total",
                target.atoms()[i].mass,
                MASS_FLOOR
            )));
        }
        if !target.spans_positively() {
            return Err(GeomError::HemisphereViolation);
        }
        if p == 1.0 {
            let norm = target.barycenter().norm();
            if norm > 1e-9 * total {
                return Err(GeomError::ClosureViolation { norm });
            }
        }
        Ok(MinkowskiProblem {
            p,
            target,
            normals_fixed,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn target(&self) -> &DiscreteMeasure {
        &self.target
    }

    pub fn normals_fixed(&self) -> bool {
        self.normals_fixed
    }

    /// Polytope with the target's normals and unit offsets.
    pub fn ball_like_start(&self) -> Result<HPolytope> {
        HPolytope::new(self.target.directions(), vec![1.0; self.target.len()])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveConfig {
    /// Target for the max relative atom-mass error.
    pub tol: f64,
    pub max_iter: usize,
    /// Offsets below `h_min * max h` count as the origin reaching the boundary.
    pub h_min: f64,
    /// Outer radius over Chebyshev radius above this flags divergence.
    pub diameter_limit: f64,
    /// Use second-order steps when the combinatorics allow it.
    pub newton: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol: 1e-4,
            max_iter: 500,
            h_min: 1e-8,
            diameter_limit: 1e6,
            newton: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegeneracyFlag {
    OriginToBoundary,
    FacetVanished,
    DivergingDiameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceRow {
    pub iteration: usize,
    pub objective: f64,
    pub residual: f64,
    pub min_offset: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SolveReport {
    pub p: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best residual reached up to each iteration.
    pub residual_history: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub final_residual: f64,
    pub terminal_body: HPolytope,
    pub degeneracy_flags: BTreeSet<DegeneracyFlag>,
    pub trace: Vec<TraceRow>,
}

impl SolveReport {
    /// 0 converged, 2 degenerate, 3 not converged.
    pub fn exit_code(&self) -> i32 {
        if self.converged {
            0
        } else if !self.degeneracy_flags.is_empty() {
            2
        } else {
            3
        }
    }
}
