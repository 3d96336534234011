use serde::{Deserialize, Serialize};

use super::discrete::DiscreteMeasure;
use crate::error::{GeomError, Result};
use crate::sphere::SphereGrid;

/// Nonnegative density against the spherical Lebesgue measure, sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DensityJson", into = "DensityJson")]
pub struct DensityField {
    grid: SphereGrid,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    #[serde(flatten)]
    grid: SphereGrid,
    values: Vec<f64>,
}

impl From<DensityField> for DensityJson {
    fn from(d: DensityField) -> Self {
        DensityJson {
            grid: d.grid,
            values: d.values,
        }
    }
}

impl TryFrom<DensityJson> for DensityField {
    type Error = GeomError;

    fn try_from(j: DensityJson) -> Result<Self> {
        DensityField::new(j.grid, j.values)
    }
}

impl DensityField {
    pub fn new(grid: SphereGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeomError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(GeomError::InvalidInput(format!("density value {i} is negative or not finite")));
        }
        Ok(DensityField { grid, values })
    }

    pub fn from_fn(grid: &SphereGrid, f: impl Fn(&nalgebra::DVector<f64>) -> f64) -> Result<Self> {
        Self::new(grid.clone(), grid.sample(f))
    }

    pub fn constant(grid: &SphereGrid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()])
    }

    /// Spreads each atom uniformly over the grid nodes within angular
    /// radius `cap` of its direction (nearest node if the cap holds none).
    /// Total mass is preserved.
    pub fn from_atoms(mu: &DiscreteMeasure, grid: &SphereGrid, cap: f64) -> Result<Self> {
        if mu.dim() != grid.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: grid.dim(),
                got: mu.dim(),
            });
        }
        let cos_cap = cap.cos();
        let w = grid.weights();
        let mut values = vec![0.0; grid.len()];
        for a in mu.atoms() {
            let dots: Vec<f64> = grid.nodes().iter().map(|x| x.dot(&a.u)).collect();
            let inside: Vec<usize> = (0..dots.len()).filter(|&j| dots[j] >= cos_cap).collect();
            if inside.is_empty() {
                let j = (0..dots.len())
                    .max_by(|&i, &k| dots[i].total_cmp(&dots[k]))
                    .unwrap_or(0);
                values[j] += a.mass / w[j];
            } else {
                let area: f64 = inside.iter().map(|&j| w[j]).sum();
                for j in inside {
                    values[j] += a.mass / area;
                }
            }
        }
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total_mass(&self) -> f64 {
        self.grid.integrate(&self.values).unwrap_or(f64::NAN)
    }
}
