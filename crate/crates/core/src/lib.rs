//! Numerical workbench for L_p surface-area measures of convex bodies and
//! the discrete L_p Minkowski problem.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bodies;
pub mod constructions;
pub mod error;
pub mod lp;
pub mod measures;
pub mod numeric;
pub mod random;
pub mod solver;
pub mod sphere;

pub use bodies::{HPolytope, OriginLocation, SupportField, VertexComplex};
pub use error::{GeomError, Result};
pub use measures::{DensityField, DiscreteMeasure, LinearMap};
pub use sphere::{build_grid, HarmonicBasis, SphereGrid, SphereOperator, Spectrum};
