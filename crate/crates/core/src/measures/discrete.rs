use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::bodies::positively_spanning;
use crate::error::{GeomError, Result};
use crate::numeric::pairwise_sum;

const UNIT_TOL: f64 = 1e-9;
const SEPARATION: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "vector_json")]
    pub u: DVector<f64>,
    pub mass: f64,
}

/// Finite sum of weighted point masses on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasureJson", into = "MeasureJson")]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct MeasureJson {
    dim: usize,
    atoms: Vec<Atom>,
}

impl From<DiscreteMeasure> for MeasureJson {
    fn from(m: DiscreteMeasure) -> Self {
        MeasureJson {
            dim: m.dim,
            atoms: m.atoms,
        }
    }
}

impl TryFrom<MeasureJson> for DiscreteMeasure {
    type Error = GeomError;

    fn try_from(j: MeasureJson) -> Result<Self> {
        DiscreteMeasure::new(j.dim, j.atoms)
    }
}

impl DiscreteMeasure {
    /// Directions are renormalized after checking they are unit within 1e-9.
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        let mut atoms = atoms;
        for (i, a) in atoms.iter_mut().enumerate() {
            if a.u.len() != dim {
                return Err(GeomError::DimensionMismatch {
                    expected: dim,
                    got: a.u.len(),
                });
            }
            let n = a.u.norm();
            if (n - 1.0).abs() > UNIT_TOL {
                return Err(GeomError::InvalidInput(format!("atom {i} direction is not a unit vector")));
            }
            a.u /= n;
            if !(a.mass >= 0.0) || !a.mass.is_finite() {
                return Err(GeomError::InvalidInput(format!("atom {i} has invalid mass {}", a.mass)));
            }
        }
        for i in 0..atoms.len() {
            for j in i + 1..atoms.len() {
                let d = (&atoms[i].u - &atoms[j].u).norm();
                let s = (&atoms[i].u + &atoms[j].u).norm();
                if 2.0 * d.atan2(s) <= SEPARATION {
                    return Err(GeomError::InvalidInput(format!("atoms {i} and {j} share a direction")));
                }
            }
        }
        Ok(DiscreteMeasure { dim, atoms })
    }

    pub fn from_parts(directions: Vec<DVector<f64>>, masses: Vec<f64>) -> Result<Self> {
        if directions.len() != masses.len() {
            return Err(GeomError::LengthMismatch {
                expected: directions.len(),
                got: masses.len(),
            });
        }
        let dim = directions.first().map(|u| u.len()).unwrap_or(0);
        let atoms = directions
            .into_iter()
            .zip(masses)
            .map(|(u, mass)| Atom { u, mass })
            .collect();
        Self::new(dim, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn directions(&self) -> Vec<DVector<f64>> {
        self.atoms.iter().map(|a| a.u.clone()).collect()
    }

    pub fn masses(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.mass).collect()
    }

    pub fn total_mass(&self) -> f64 {
        pairwise_sum(&self.masses())
    }

    /// `sum_i m_i u_i`.
    pub fn barycenter(&self) -> DVector<f64> {
        let mut s = DVector::zeros(self.dim);
        for a in &self.atoms {
            s += &a.u * a.mass;
        }
        s
    }

    /// `sum_i m_i phi(u_i)`.
    pub fn integrate(&self, phi: impl Fn(&DVector<f64>) -> f64) -> f64 {
        let terms: Vec<f64> = self.atoms.iter().map(|a| a.mass * phi(&a.u)).collect();
        pairwise_sum(&terms)
    }

    /// Scales every mass by `s >= 0`.
    pub fn scaled(&self, s: f64) -> Self {
        DiscreteMeasure {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    u: a.u.clone(),
                    mass: a.mass * s,
                })
                .collect(),
        }
    }

    /// True when the support of the positive part is not contained in a
    /// closed hemisphere.
    pub fn spans_positively(&self) -> bool {
        let dirs: Vec<DVector<f64>> = self
            .atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| a.u.clone())
            .collect();
        positively_spanning(&dirs)
    }

    pub(crate) fn from_trusted(dim: usize, atoms: Vec<Atom>) -> Self {
        DiscreteMeasure { dim, atoms }
    }
}

pub(crate) mod vector_json {
    use nalgebra::DVector;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DVector<f64>, D::Error> {
        Ok(DVector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}
