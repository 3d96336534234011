//! Convex bodies: halfspace polytopes, their vertex/facet structure, and
//! sampled support functions.

mod enumerate;
mod polytope;
mod support_field;

pub use enumerate::{Facet, VertexComplex};
pub use polytope::{positively_spanning, HPolytope};
pub use support_field::{OriginLocation, SupportField};
