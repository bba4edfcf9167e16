//! Dimensional constants and the rotation-mismatch integral.
//!
//! Sphere areas and ball volumes come from the two-step recurrence
//! s_k = 2*pi/(k-1) * s_{k-2} so that low-dimensional values are exact
//! products of pi in floating point, not Gamma-function approximations.

use statrs::function::beta::beta;

use crate::error::Error;
use crate::numerics::adaptive_simpson;
use crate::Result;

use std::f64::consts::{PI, TAU};

/// Surface measure of the unit k-sphere embedded in R^{k+1}.
///
/// s_0 = 2 (two points), s_1 = 2*pi, s_2 = 4*pi, s_3 = 2*pi^2, ...
pub fn unit_sphere_area(k: u32) -> f64 {
    match k {
        0 => 2.0,
        1 => TAU,
        _ => TAU / (k as f64 - 1.0) * unit_sphere_area(k - 2),
    }
}

/// Volume of the unit ball in R^d; b_d = s_{d-1} / d, b_0 = 1.
pub fn unit_ball_volume(d: u32) -> f64 {
    if d == 0 {
        1.0
    } else {
        unit_sphere_area(d - 1) / d as f64
    }
}

/// Coefficient in front of the cubic-type lower bound for a power-law
/// deviation profile f(phi) >= c * phi^kappa near zero.
///
/// Requires d >= 2, c > 0, kappa > 0.
pub fn asymptotic_coefficient(d: u32, c: f64, kappa: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain("dimension must be at least 2".into()));
    }
    if !(c > 0.0 && c.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Domain("profile constants must be positive".into()));
    }
    let common = c * kappa.powf(kappa) / (kappa + 1.0).powf(kappa + 1.0);
    if d == 2 {
        return Ok(common * PI / 2f64.powf(kappa));
    }
    let df = f64::from(d);
    let s_top = unit_sphere_area(d - 1);
    let s_sub = unit_sphere_area(d - 2);
    let b_sub = unit_ball_volume(d - 1);
    let b = beta((df - 1.0) / 2.0, (df - 2.0) / 2.0);
    let pow2 = 2f64.powf(-1.0 - df * kappa + 2.0 * kappa);
    Ok(common * s_top.powf(kappa + 1.0) * pow2 / (b_sub * s_sub * b).powf(kappa))
}

/// Angular mismatch integral I_d(phi) entering the visibility volume bound.
///
/// Closed forms in dimensions 2 and 3; numeric quadrature above.
pub fn rotation_mismatch_integral(d: u32, phi: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain("dimension must be at least 2".into()));
    }
    if !(0.0..=PI).contains(&phi) {
        return Err(Error::Domain(format!("angle {phi} outside [0, pi]")));
    }
    let s = (phi / 2.0).sin();
    match d {
        2 => Ok(PI * s),
        3 => Ok(4.0 * s - 2.0 * s * s),
        _ => rotation_mismatch_quadrature(d, phi),
    }
}

/// Quadrature form of I_d, valid for d >= 3. Used directly for d >= 4 and
/// as an independent cross-check of the d = 3 closed form.
pub fn rotation_mismatch_quadrature(d: u32, phi: f64) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(
            "quadrature form needs dimension at least 3".into(),
        ));
    }
    if !(0.0..=PI).contains(&phi) {
        return Err(Error::Domain(format!("angle {phi} outside [0, pi]")));
    }
    let p = f64::from(d) - 2.0;
    // sin^{d-2}(a) / cos(a/2) rewritten via half angles so the a = pi
    // endpoint stays finite.
    let near = |a: f64| 2f64.powf(p) * (a / 2.0).sin().powf(p) * (a / 2.0).cos().powf(p - 1.0);
    let far = |a: f64| a.sin().powf(p);
    let s = (phi / 2.0).sin();
    let first = adaptive_simpson(&near, 0.0, PI - phi, 1e-10);
    let second = adaptive_simpson(&far, PI - phi, PI, 1e-10);
    Ok(s * first + second)
}

/// Slope of I_d at phi = 0: I_d(phi) ~ slope * phi for small phi.
pub fn rotation_mismatch_slope(d: u32) -> Result<f64> {
    match d {
        0 | 1 => Err(Error::Domain("dimension must be at least 2".into())),
        2 => Ok(PI / 2.0),
        _ => {
            let df = f64::from(d);
            Ok(2f64.powi(d as i32 - 3) * beta((df - 1.0) / 2.0, (df - 2.0) / 2.0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas_match_exact_products() {
        assert!(unit_sphere_area(0) == 2.0);
        assert!(unit_sphere_area(1) == TAU);
        assert!(unit_sphere_area(2) == 4.0 * PI);
        assert!(unit_sphere_area(3) == TAU / 2.0 * TAU);
        assert!((unit_sphere_area(3) - 2.0 * PI * PI).abs() < 1e-15);
        assert!((unit_sphere_area(4) - 8.0 * PI * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn ball_volumes_match_exact_products() {
        assert!(unit_ball_volume(0) == 1.0);
        assert!(unit_ball_volume(1) == 2.0);
        assert!(unit_ball_volume(2) == PI);
        assert!(unit_ball_volume(3) == 4.0 * PI / 3.0);
    }

    #[test]
    fn coefficient_reference_values() {
        // One-minus-cos profile behaves like phi^2/2 at zero: c = 1/2, kappa = 2.
        let c2 = asymptotic_coefficient(2, 0.5, 2.0).unwrap();
        assert!((c2 - PI / 54.0).abs() < 1e-12 * (PI / 54.0));
        let c3 = asymptotic_coefficient(3, 0.5, 2.0).unwrap();
        assert!((c3 - 1.0 / (27.0 * PI)).abs() < 1e-12 / (27.0 * PI));
    }

    #[test]
    fn coefficient_dim3_reduces_to_two_pi_form() {
        // In dimension 3 the general expression collapses to
        // c * kappa^kappa / (kappa+1)^{kappa+1} * (2 pi)^{1-kappa}.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(71);
        for _ in 0..100 {
            let c = rng.gen_range(0.05..5.0);
            let k = rng.gen_range(0.2..4.0);
            let general = asymptotic_coefficient(3, c, k).unwrap();
            let collapsed = c * k.powf(k) / (k + 1.0).powf(k + 1.0) * TAU.powf(1.0 - k);
            assert!((general - collapsed).abs() <= 1e-12 * collapsed.abs());
        }
    }

    #[test]
    fn coefficient_rejects_bad_input() {
        assert!(asymptotic_coefficient(1, 0.5, 2.0).is_err());
        assert!(asymptotic_coefficient(2, 0.0, 2.0).is_err());
        assert!(asymptotic_coefficient(2, 0.5, -1.0).is_err());
    }

    #[test]
    fn mismatch_integral_closed_forms() {
        let i2 = rotation_mismatch_integral(2, PI / 3.0).unwrap();
        assert!((i2 - PI * 0.5).abs() < 1e-15);
        // Endpoints.
        assert!(rotation_mismatch_integral(3, 0.0).unwrap() == 0.0);
        let full = rotation_mismatch_integral(3, PI).unwrap();
        assert!((full - 2.0).abs() < 1e-15);
        assert!(rotation_mismatch_integral(2, 3.5).is_err());
    }

    #[test]
    fn mismatch_integral_quadrature_agrees_in_dim3() {
        for i in 0..=20 {
            let phi = PI * i as f64 / 20.0;
            let closed = rotation_mismatch_integral(3, phi).unwrap();
            let quad = rotation_mismatch_quadrature(3, phi).unwrap();
            assert!(
                (closed - quad).abs() < 1e-10,
                "phi={phi}: {closed} vs {quad}"
            );
        }
    }

    #[test]
    fn mismatch_integral_monotone() {
        for d in 2..=6 {
            let mut prev = 0.0;
            for i in 1..=40 {
                let phi = PI * i as f64 / 40.0;
                let v = rotation_mismatch_integral(d, phi).unwrap();
                assert!(v >= prev - 1e-12, "d={d} phi={phi}");
                prev = v;
            }
        }
    }

    #[test]
    fn mismatch_slope_matches_small_angles() {
        for d in 2..=5 {
            let slope = rotation_mismatch_slope(d).unwrap();
            let phi = 1e-5;
            let v = rotation_mismatch_integral(d, phi).unwrap();
            assert!(
                (v / phi - slope).abs() < 1e-4,
                "d={d}: {} vs {slope}",
                v / phi
            );
        }
        assert!((rotation_mismatch_slope(3).unwrap() - 2.0).abs() < 1e-13);
    }
}
