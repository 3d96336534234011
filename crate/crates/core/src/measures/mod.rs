//! Surface-area, L_p surface-area and cone-volume measures, their behaviour
//! under linear maps, and the identities connecting them.

mod density;
mod discrete;
mod linear;
mod polytope;

pub use density::DensityField;
pub use discrete::{Atom, DiscreteMeasure};
pub(crate) use discrete::vector_json;
pub use linear::{
    change_of_variables_lp, change_of_variables_quadrature, check_equivariance,
    curvature_function_ellipsoid, pushforward, Ball, Ellipsoid, LinearMap, RadialFn, StarBody,
};
pub use polytope::{
    cone_volume_measure, lp_masses, lp_measure, surface_area_measure, volume_lower_bound,
    ZERO_OFFSET,
};
