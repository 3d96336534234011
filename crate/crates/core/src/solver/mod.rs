//! Variational solvers for the discrete L_p Minkowski problem, the planar
//! L_p Monge-Ampere residual, the linearized operator at the ball, and the
//! translation-infimum functional used for negative exponents.

mod functional;
mod minkowski;
mod objective;
mod pde;
mod problem;

pub use functional::{
    direct_j, eval_j, holder_interpolation_check, nonuniqueness_probe, parallel_facet_normal, stretch_along,
    JFunctionalEval,
};
pub use minkowski::{measure_residual, solve_minkowski};
pub use objective::{
    normalized_j_objective, recenter, recentered_objective, regime_objective, volume_and_gradient, Regime,
};
pub use pde::{linearized_operator, monge_ampere_residual};
pub use problem::{DegeneracyFlag, MinkowskiProblem, SolveConfig, SolveReport, TraceRow};
