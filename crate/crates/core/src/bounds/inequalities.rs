//! Closed-form bounds relating visibility, resistance and body volume.

use crate::bounds::constants::{rotation_mismatch_integral, unit_ball_volume, unit_sphere_area};
use crate::error::Error;
use crate::estimators::AngleFunction;
use crate::numerics::{bisect_nondecreasing, grid_golden_min};
use crate::{Dim, Result};

use std::f64::consts::PI;

/// Upper bound on the volume of a body inside the ball of `radius`, given
/// its visibility index under deviation profile `f`.
///
/// The bound is the infimum over the cutoff angle of
/// `2 r F / (s f(phi)) + 2 b s' r^d I_d(phi) / s`; it is finite for every
/// finite positive index. A non-finite index yields the enclosing ball
/// volume, which dominates any admissible body.
pub fn volume_upper_bound(
    dim: Dim,
    radius: f64,
    f: &AngleFunction,
    visibility: f64,
) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain("radius must be positive".into()));
    }
    if visibility <= 0.0 {
        // Zero visibility forces zero volume; negative input is Monte Carlo
        // noise around an empty body.
        return Ok(0.0);
    }
    let d = dim.ambient() as u32;
    let ball = unit_ball_volume(d) * radius.powi(d as i32);
    if !visibility.is_finite() {
        return Ok(ball);
    }
    let s_top = unit_sphere_area(d - 1);
    let first_coeff = 2.0 * radius * visibility / s_top;
    let second_coeff =
        2.0 * unit_ball_volume(d - 1) * unit_sphere_area(d - 2) * radius.powi(d as i32) / s_top;
    let objective = |phi: f64| {
        let fv = f.eval(phi);
        let mismatch = rotation_mismatch_integral(d, phi).unwrap_or(f64::INFINITY);
        if fv <= 0.0 {
            f64::INFINITY
        } else {
            first_coeff / fv + second_coeff * mismatch
        }
    };
    let (_, value) = grid_golden_min(&objective, 1e-6, PI - 1e-6, 256, 1e-9);
    if value.is_finite() {
        Ok(value)
    } else {
        Ok(ball)
    }
}

/// Cubic lower bound on mean resistance: small bodies inside the ball of
/// `radius` resist at least proportionally to the cube of their volume.
pub fn cubic_resistance_bound(dim: Dim, volume: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain("radius must be positive".into()));
    }
    let v = volume.max(0.0);
    Ok(match dim {
        Dim::Two => radius * (PI / 54.0) * (v / (radius * radius)).powi(3),
        Dim::Three => radius * radius * (1.0 / (27.0 * PI)) * (v / radius.powi(3)).powi(3),
    })
}

/// Same cubic bound in reduced form: the normalized resistance of a body
/// occupying volume fraction `kappa` of its enclosing ball.
pub fn reduced_resistance_floor(dim: Dim, kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::Domain(format!(
            "volume fraction {kappa} outside [0, 1]"
        )));
    }
    Ok(match dim {
        Dim::Two => PI.powi(3) / 288.0 * kappa.powi(3),
        Dim::Three => 16.0 / 729.0 * kappa.powi(3),
    })
}

/// Largest admissible reduced resistance for which the three-dimensional
/// profile minimization stays on its analytic branch.
pub const PROFILE_BRANCH_LIMIT: f64 = 27.0 / 256.0;

/// Minimizes the three-dimensional bound profile
/// `h(z) = f_tilde / z^2 + 2 z - z^2` over `z` in `(0, 3/4]`.
///
/// The minimizer solves `z^3 (1 - z) = f_tilde`, which is solvable exactly
/// when `f_tilde <= 27/256`; beyond that the branch assumption fails and an
/// `OutOfBranch` error reports the offending value. Returns the pair
/// `(z_star, h(z_star))`.
pub fn bound_profile_minimizer(f_tilde: f64) -> Result<(f64, f64)> {
    if !(f_tilde > 0.0 && f_tilde.is_finite()) {
        return Err(Error::Domain(format!(
            "reduced resistance {f_tilde} must be positive and finite"
        )));
    }
    if f_tilde > PROFILE_BRANCH_LIMIT {
        return Err(Error::OutOfBranch(f_tilde));
    }
    // z^3 (1 - z) increases on [0, 3/4], so the root is unique there.
    let g = |z: f64| z.powi(3) * (1.0 - z) - f_tilde;
    let z = bisect_nondecreasing(&g, 0.0, 0.75, 1e-12);
    let h = f_tilde / (z * z) + 2.0 * z - z * z;
    Ok((z, h))
}

/// Envelope for the half-angle of the exit rotation mismatch: with both
/// directions within `phi0` of each other, `sin(beta/2)` never exceeds
/// this function of the incoming polar angle `alpha`.
pub fn rotation_gap_envelope(dim: Dim, phi0: f64, alpha: f64) -> f64 {
    let s = (phi0 / 2.0).sin();
    match dim {
        Dim::Two => s,
        Dim::Three => {
            if alpha < PI - phi0 {
                (s / (alpha / 2.0).cos()).min(1.0)
            } else {
                1.0
            }
        }
    }
}
