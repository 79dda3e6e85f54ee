//! Scalar measurement laws, their exact moments, the parameter planner for
//! the spiky construction, and seeded sampling of measurement matrices.

mod law;
mod matrix;
mod plan;

pub use law::{
    empirical_moment, fourth_moment_linear_form, moment_lp_norm, moment_ratio,
    normalized_fourth_moment, small_ball_paley_zygmund, ScalarLaw,
};
pub use matrix::{sample_matrix, EnsembleSpec, MeasurementMatrix};
pub use plan::{
    evaluate_conditions, plan_parameters, plan_parameters_with, spike_magnitude, Condition,
    ParameterPlan, PlannerConstants,
};

use crate::error::{domain, Result};

/// Row count `sqrt(p) n^{1/p}` below which the spiky ensemble with moment
/// level `p` is expected to break basis pursuit. The implied constant is 1.
pub fn max_rows_theorem_a_prime(n_cols: usize, p: f64) -> Result<f64> {
    if n_cols < 2 {
        return domain(format!("need n >= 2, got {n_cols}"));
    }
    if !(p.is_finite() && p > 2.0) {
        return domain(format!("need p > 2, got {p}"));
    }
    Ok(p.sqrt() * (n_cols as f64).powf(1.0 / p))
}
