use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::sphere::SphereGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginLocation {
    Interior,
    Boundary,
    Unknown,
}

/// Support function sampled on the nodes of a sphere grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportField {
    grid: SphereGrid,
    values: Vec<f64>,
    origin: OriginLocation,
}

impl SupportField {
    pub fn new(grid: SphereGrid, values: Vec<f64>, origin: OriginLocation) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeomError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if origin != OriginLocation::Unknown {
            if let Some(i) = values.iter().position(|&h| h < 0.0) {
                return Err(GeomError::NegativeSupport { index: i });
            }
        }
        Ok(SupportField { grid, values, origin })
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin_location(&self) -> OriginLocation {
        self.origin
    }

    /// Largest violation of sublinearity of the 1-homogeneous extension
    /// among grid neighbours, less the discretization slack. Nonpositive
    /// means the sampled field passes the convexity check.
    pub fn convexity_defect(&self) -> f64 {
        let nodes = self.grid.nodes();
        let h = &self.values;
        let mesh = self.grid.mesh_size();
        let slack = 1e-6 * mesh * mesh;
        let mut worst = f64::NEG_INFINITY;
        match self.grid.dim() {
            2 => {
                let m = nodes.len();
                for i in 0..m {
                    let a = (i + m - 1) % m;
                    let b = (i + 1) % m;
                    // u_i = (u_a + u_b) / (2 cos d) for uniform spacing
                    let s = (&nodes[a] + &nodes[b]).norm();
                    worst = worst.max(h[i] - (h[a] + h[b]) / s - slack);
                }
            }
            3 => {
                let rings = self.grid.neighbor_rings();
                for (i, ring) in rings.iter().enumerate() {
                    let u = &nodes[i];
                    let k = ring.len();
                    for t in 0..k {
                        let a = ring[t];
                        let b = ring[(t + 1) % k];
                        for &c in ring.iter() {
                            if c == a || c == b {
                                continue;
                            }
                            // u = la*ua + lb*ub + lc*uc with nonnegative weights
                            let mat = nalgebra::Matrix3::from_columns(&[
                                nalgebra::Vector3::new(nodes[a][0], nodes[a][1], nodes[a][2]),
                                nalgebra::Vector3::new(nodes[b][0], nodes[b][1], nodes[b][2]),
                                nalgebra::Vector3::new(nodes[c][0], nodes[c][1], nodes[c][2]),
                            ]);
                            let Some(l) = mat.lu().solve(&nalgebra::Vector3::new(u[0], u[1], u[2])) else {
                                continue;
                            };
                            if l.iter().all(|&x| x >= -1e-14) {
                                let bound = l[0] * h[a] + l[1] * h[b] + l[2] * h[c];
                                worst = worst.max(h[i] - bound - slack);
                                break;
                            }
                        }
                    }
                }
            }
            _ => {}
        }
        worst
    }

    pub fn is_convex(&self) -> bool {
        self.convexity_defect() <= 0.0
    }
}
