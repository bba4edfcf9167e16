//! Exact constants, closed-form bounds, and the Monte Carlo soundness
//! checks that pin the estimators to them.

mod checks;
mod constants;
mod inequalities;
mod report;

pub use checks::{
    cubic_bound_check, exit_uniformity_check, flux_mass_check, phase_volume_check,
    rotation_gap_check, transport_bound_check, visibility_bound_scan,
};
pub use constants::{
    asymptotic_coefficient, rotation_mismatch_integral, rotation_mismatch_quadrature,
    rotation_mismatch_slope, unit_ball_volume, unit_sphere_area,
};
pub use inequalities::{
    bound_profile_minimizer, cubic_resistance_bound, reduced_resistance_floor,
    rotation_gap_envelope, volume_upper_bound, PROFILE_BRANCH_LIMIT,
};
pub use report::{BoundReport, Relation, Verdict, SIGMA_GATE};
