//! Monte Carlo soundness checks: every estimate the simulator produces is
//! held against an exact identity or a proven inequality.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::billiard::{Scene, TraceStatus};
use crate::bounds::constants::{unit_ball_volume, unit_sphere_area};
use crate::bounds::inequalities::{
    cubic_resistance_bound, rotation_gap_envelope, volume_upper_bound,
};
use crate::bounds::report::BoundReport;
use crate::estimators::{
    estimate_f, mean_resistance, Acc, AngleFunction, Estimate, EstimatorConfig,
};
use crate::quat::Quat;
use crate::sampling::{
    flux_mass, flux_mass_mc, project_hemisphere, sample_incoming, unit_direction, PoleRotation,
    StreamRng,
};
use crate::{Dim, Result, Vec3};

use std::f64::consts::{PI, TAU};

/// Monte Carlo integration of the incoming flux against its closed form.
pub fn flux_mass_check(dim: Dim, radius: f64, samples: u64, seed: u64) -> BoundReport {
    let mc = flux_mass_mc(dim, radius, samples, seed);
    let exact = flux_mass(dim, radius);
    BoundReport::eq(
        format!("flux mass (d={})", dim.ambient()),
        mc.mean,
        mc.stderr,
        exact,
    )
}

fn trapped_note(est: &Estimate) -> Option<String> {
    if est.is_reliable() {
        None
    } else {
        Some(format!(
            "trapped fraction {:.2e} exceeds 1e-2",
            est.trapped_fraction
        ))
    }
}

/// Mean free path against the accessible phase volume: the flux integral of
/// the path length never exceeds `s_{d-1} (b_d R^d - |D|)`, with equality
/// for the empty body.
pub fn phase_volume_check(scene: &Scene, volume: &Estimate, cfg: &EstimatorConfig) -> BoundReport {
    let dim = scene.dim();
    let d = dim.ambient() as u32;
    let radius = scene.sphere_radius();
    let center = scene.center();
    let rng = StreamRng::new(cfg.seed);
    let acc = crate::estimators::par_accumulate(cfg.samples, |range| {
        let mut acc = Acc::default();
        for i in range {
            let mut r = rng.stream(i);
            let ps = sample_incoming(dim, radius, &mut r);
            let outcome = scene.trace(ps.v, center + ps.xi, cfg.max_reflections);
            match outcome.status {
                TraceStatus::Exited => acc.add_exited(outcome.path_length),
                TraceStatus::Trapped => acc.add_trapped(0.0),
                TraceStatus::DiscardedSingular => acc.add_discarded(0.0),
            }
        }
        acc
    });
    let est = crate::estimators::finish(acc, cfg.samples, flux_mass(dim, radius), cfg.seed);
    let s_top = unit_sphere_area(d - 1);
    let ball_phase = s_top * unit_ball_volume(d) * radius.powi(d as i32);
    let total = ball_phase - s_top * volume.mean;
    let sigma = (est.stderr * est.stderr + (s_top * volume.stderr).powi(2)).sqrt();
    let name = format!("phase volume (d={})", d);
    // Equality is forced both for the empty body and for a body that fills
    // its sphere (zero accessible volume, so the one-sided test degenerates).
    let equality = scene.body().aabb().is_none() || total.abs() <= 1e-9 * ball_phase;
    let report = if equality {
        BoundReport::eq(name, est.mean, sigma.max(1e-12 * ball_phase), total)
    } else {
        BoundReport::leq(name, est.mean, sigma, total)
    };
    match trapped_note(&est) {
        Some(n) => report.mark_unreliable(n),
        None => report,
    }
}

/// Transported-exit separation against the minimal chord mass: the flux
/// integral of `|R_v xi - R_{v+} xi+|` is at least `s_{d-1} b_d R^d`, with
/// equality exactly when nothing obstructs the chords.
pub fn transport_bound_check(scene: &Scene, cfg: &EstimatorConfig) -> BoundReport {
    let dim = scene.dim();
    let d = dim.ambient() as u32;
    let radius = scene.sphere_radius();
    let center = scene.center();
    let rng = StreamRng::new(cfg.seed);
    let acc = crate::estimators::par_accumulate(cfg.samples, |range| {
        let mut acc = Acc::default();
        for i in range {
            let mut r = rng.stream(i);
            let ps = sample_incoming(dim, radius, &mut r);
            let outcome = scene.trace(ps.v, center + ps.xi, cfg.max_reflections);
            match outcome.status {
                TraceStatus::Exited => {
                    let a = project_hemisphere(dim, ps.v, ps.xi);
                    let b = project_hemisphere(dim, outcome.v_plus, outcome.xi_plus - center);
                    acc.add_exited(a.dist(b));
                }
                TraceStatus::Trapped => acc.add_trapped(0.0),
                TraceStatus::DiscardedSingular => acc.add_discarded(0.0),
            }
        }
        acc
    });
    let est = crate::estimators::finish(acc, cfg.samples, flux_mass(dim, radius), cfg.seed);
    let floor = unit_sphere_area(d - 1) * unit_ball_volume(d) * radius.powi(d as i32);
    let name = format!("transport separation (d={})", d);
    let report = if scene.body().aabb().is_none() {
        BoundReport::eq(name, est.mean, est.stderr, floor)
    } else {
        BoundReport::geq(name, est.mean, est.stderr, floor)
    };
    match trapped_note(&est) {
        Some(n) => report.mark_unreliable(n),
        None => report,
    }
}

/// Chi-squared test that exit states fill the product chart uniformly, as
/// measure preservation of the exit map demands.  Exited trajectories are
/// binned by the lateral part of the rotated exit point into 100
/// equal-measure cells; the verdict compares the p-value against 0.001.
pub fn exit_uniformity_check(scene: &Scene, cfg: &EstimatorConfig) -> BoundReport {
    const BINS: usize = 100;
    let dim = scene.dim();
    let radius = scene.sphere_radius();
    let center = scene.center();
    let rng = StreamRng::new(cfg.seed);
    let mut counts = [0u64; BINS];
    let mut exited = 0u64;
    let mut lost = 0u64;
    for i in 0..cfg.samples {
        let mut r = rng.stream(i);
        let ps = sample_incoming(dim, radius, &mut r);
        let outcome = scene.trace(ps.v, center + ps.xi, cfg.max_reflections);
        if outcome.status != TraceStatus::Exited {
            lost += 1;
            continue;
        }
        let eta = project_hemisphere(dim, outcome.v_plus, outcome.xi_plus - center);
        let bin = match dim {
            Dim::Two => {
                // 100 equal-length slices of the lateral coordinate.
                let t = (eta.x + radius) / (2.0 * radius);
                (t * BINS as f64) as usize
            }
            Dim::Three => {
                // 10 equal-area rings times 10 angular sectors.
                let r2 = (eta.x * eta.x + eta.y * eta.y) / (radius * radius);
                let ring = (r2 * 10.0) as usize;
                let sector = ((eta.y.atan2(eta.x) + PI) / TAU * 10.0) as usize;
                ring.min(9) * 10 + sector.min(9)
            }
        }
        .min(BINS - 1);
        counts[bin] += 1;
        exited += 1;
    }
    let expect = exited as f64 / BINS as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expect;
            d * d / expect
        })
        .sum();
    let dist = ChiSquared::new((BINS - 1) as f64).expect("valid dof");
    let p = 1.0 - dist.cdf(chi2);
    BoundReport::geq(
        format!("exit uniformity (d={})", dim.ambient()),
        p,
        0.0,
        1e-3,
    )
    .with_note(format!(
        "chi2 {chi2:.2} over {BINS} bins, {exited} exits, {lost} lost"
    ))
}

/// Samples direction pairs at most `phi0` apart and verifies that the
/// half-angle of the induced pole-rotation mismatch stays under the
/// analytic envelope.  Reports the worst excess against a 1e-9 tolerance.
pub fn rotation_gap_check(dim: Dim, phi0: f64, samples: u64, seed: u64) -> Result<BoundReport> {
    if !(0.0..=PI).contains(&phi0) || phi0 == 0.0 {
        return Err(crate::error::Error::Domain(format!(
            "cap angle {phi0} outside (0, pi]"
        )));
    }
    let mut rng = StreamRng::new(seed).stream(0);
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0u64;
    for _ in 0..samples {
        let v = unit_direction(dim, &mut rng);
        let excess = match dim {
            Dim::Two => {
                let delta = (2.0 * rng.gen::<f64>() - 1.0) * phi0;
                let (s, c) = delta.sin_cos();
                let v_plus = Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, 0.0);
                let x = Vec3::new(1.0, 0.0, 0.0);
                let moved = PoleRotation::for_direction(dim, v_plus)
                    .apply_inverse(PoleRotation::for_direction(dim, v).apply(x));
                let cos_beta = x.dot(moved).clamp(-1.0, 1.0);
                let sin_half = ((1.0 - cos_beta) / 2.0).max(0.0).sqrt();
                sin_half - rotation_gap_envelope(dim, phi0, 0.0)
            }
            Dim::Three => {
                let cos_t = 1.0 - rng.gen::<f64>() * (1.0 - phi0.cos());
                let psi = rng.gen::<f64>() * TAU;
                let st = (1.0 - cos_t * cos_t).max(0.0).sqrt();
                let local = Vec3::new(st * psi.cos(), st * psi.sin(), cos_t);
                let v_plus = PoleRotation::for_direction(dim, v).apply_inverse(local);
                let q = pole_alignment(v);
                let q_plus = pole_alignment(v_plus);
                let alpha = v.z.clamp(-1.0, 1.0).acos();
                q_plus.conjugate().mul(q).sin_half_angle() - rotation_gap_envelope(dim, phi0, alpha)
            }
        };
        if excess > worst {
            worst = excess;
        }
        if excess > 1e-9 {
            violations += 1;
        }
    }
    Ok(BoundReport::leq(
        format!("rotation gap (d={}, phi0={phi0})", dim.ambient()),
        worst,
        0.0,
        1e-9,
    )
    .with_note(format!(
        "{violations} excesses beyond 1e-9 in {samples} pairs"
    )))
}

/// Geodesic rotation taking `v` to the 3D pole, as a quaternion.
fn pole_alignment(v: Vec3) -> Quat {
    let pole = Vec3::new(0.0, 0.0, 1.0);
    let axis = v.cross(pole);
    let n = axis.norm();
    let alpha = v.z.clamp(-1.0, 1.0).acos();
    if n < 1e-14 {
        // v is (anti)parallel to the pole; any perpendicular axis works.
        Quat::from_axis_angle(Vec3::new(1.0, 0.0, 0.0), alpha)
    } else {
        Quat::from_axis_angle(axis * (1.0 / n), alpha)
    }
}

/// Resistance against its cubic-in-volume lower bound for one scene.
pub fn cubic_bound_check(
    name: &str,
    scene: &Scene,
    volume: &Estimate,
    cfg: &EstimatorConfig,
) -> Result<BoundReport> {
    let dim = scene.dim();
    let radius = scene.sphere_radius();
    let res = mean_resistance(scene, cfg);
    let bound = cubic_resistance_bound(dim, volume.mean, radius)?;
    // The bound moves cubically with the volume estimate; fold that noise in.
    let slope = if volume.mean > 0.0 {
        3.0 * bound / volume.mean
    } else {
        0.0
    };
    let sigma = (res.stderr * res.stderr + (slope * volume.stderr).powi(2)).sqrt();
    let report = BoundReport::geq(format!("cubic bound ({name})"), res.mean, sigma, bound);
    Ok(match trapped_note(&res) {
        Some(n) => report.mark_unreliable(n),
        None => report,
    })
}

/// Volume bound sweep: for each named scene, estimates the visibility index
/// and checks that the induced volume bound indeed exceeds the body volume.
pub fn visibility_bound_scan(
    entries: &[(String, Scene, Estimate)],
    f: &AngleFunction,
    cfg: &EstimatorConfig,
) -> Result<Vec<BoundReport>> {
    let mut out = Vec::with_capacity(entries.len());
    for (name, scene, volume) in entries {
        let dim = scene.dim();
        let radius = scene.sphere_radius();
        let index = estimate_f(scene, f, cfg);
        let bound = volume_upper_bound(dim, radius, f, index.mean)?;
        let hi = volume_upper_bound(dim, radius, f, index.mean + index.stderr)?;
        let lo = volume_upper_bound(dim, radius, f, (index.mean - index.stderr).max(0.0))?;
        let sigma = ((hi - lo) / 2.0).abs().hypot(volume.stderr);
        let report = BoundReport::geq(format!("volume bound ({name})"), bound, sigma, volume.mean)
            .with_note(format!("index {:.6e} +- {:.1e}", index.mean, index.stderr));
        out.push(match trapped_note(&index) {
            Some(n) => report.mark_unreliable(n),
            None => report,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::ReflectionLaw;
    use crate::bounds::report::Verdict;
    use crate::geometry::{Body, Node, VolumeConfig};

    fn disc_scene() -> Scene {
        let body = Body::new(
            Dim::Two,
            Node::Ball {
                center: Vec3::ZERO,
                radius: 1.0,
            },
        )
        .unwrap();
        Scene::new(body, ReflectionLaw::Specular).unwrap()
    }

    fn annulus_scene() -> Scene {
        let node = Node::Difference {
            base: Box::new(Node::Ball {
                center: Vec3::ZERO,
                radius: 1.0,
            }),
            cut: Box::new(Node::Ball {
                center: Vec3::ZERO,
                radius: 0.5,
            }),
        };
        Scene::new(Body::new(Dim::Two, node).unwrap(), ReflectionLaw::Specular).unwrap()
    }

    fn empty_scene(dim: Dim) -> Scene {
        Scene::with_radius(Body::empty(dim), ReflectionLaw::Specular, 1.0).unwrap()
    }

    #[test]
    fn flux_mass_agrees_both_dims() {
        for dim in [Dim::Two, Dim::Three] {
            let r = flux_mass_check(dim, 1.3, 40_000, 9);
            assert!(r.verdict == Verdict::Holds, "{r}");
        }
    }

    #[test]
    fn phase_volume_equality_on_empty() {
        let cfg = EstimatorConfig::new(30_000, 11);
        for dim in [Dim::Two, Dim::Three] {
            let scene = empty_scene(dim);
            let r = phase_volume_check(&scene, &Estimate::exact(0.0), &cfg);
            assert!(r.verdict == Verdict::Holds, "{r}");
            assert!(r.relation == crate::bounds::report::Relation::Eq);
        }
    }

    #[test]
    fn phase_volume_bound_on_disc() {
        let cfg = EstimatorConfig::new(30_000, 12);
        // Disc in a sphere of twice its radius: every free state is swept by
        // some entering trajectory, so this is an equality scene and the
        // estimate must sit within noise of the exact total.
        let body = Body::new(
            Dim::Two,
            Node::Ball {
                center: Vec3::ZERO,
                radius: 1.0,
            },
        )
        .unwrap();
        let vol = body.volume(&VolumeConfig::new(10_000, 1));
        let scene = Scene::with_radius(body, ReflectionLaw::Specular, 2.0).unwrap();
        let r = phase_volume_check(&scene, &vol, &cfg);
        assert!(r.verdict == Verdict::Holds, "{r}");
        assert!(r.margin_sigmas.abs() < 4.0, "{r}");
    }

    #[test]
    fn phase_volume_strict_slack_with_sealed_cavity() {
        // Touching annulus: the cavity is unreachable, so the path integral
        // misses exactly the cavity's share of the phase volume.
        let cfg = EstimatorConfig::new(30_000, 19);
        let scene = annulus_scene();
        let vol = scene.body().volume(&VolumeConfig::new(10_000, 1));
        let r = phase_volume_check(&scene, &vol, &cfg);
        assert!(r.verdict == Verdict::Holds, "{r}");
        // lhs ~ 0, rhs ~ cavity phase volume pi^2/2.
        assert!(r.lhs < 0.1 && (r.rhs - PI * PI / 2.0).abs() < 0.05, "{r}");
    }

    #[test]
    fn phase_volume_equality_when_body_fills_sphere() {
        // Touching scene: zero accessible phase volume on both sides.
        let cfg = EstimatorConfig::new(20_000, 21);
        let scene = disc_scene();
        let vol = scene.body().volume(&VolumeConfig::new(10_000, 1));
        let r = phase_volume_check(&scene, &vol, &cfg);
        assert!(r.verdict == Verdict::Holds, "{r}");
        assert!(r.relation == crate::bounds::report::Relation::Eq);
    }

    #[test]
    fn transport_equality_on_empty_and_excess_on_annulus() {
        let cfg = EstimatorConfig::new(30_000, 13);
        let r = transport_bound_check(&empty_scene(Dim::Three), &cfg);
        assert!(r.verdict == Verdict::Holds, "{r}");
        let r = transport_bound_check(&annulus_scene(), &cfg);
        assert!(r.verdict == Verdict::Holds, "{r}");
        assert!(r.lhs > r.rhs);
    }

    #[test]
    fn exit_uniformity_on_free_flight() {
        let cfg = EstimatorConfig::new(40_000, 14);
        for dim in [Dim::Two, Dim::Three] {
            let r = exit_uniformity_check(&empty_scene(dim), &cfg);
            assert!(r.verdict == Verdict::Holds, "{r}");
        }
    }

    #[test]
    fn rotation_gap_has_no_excess() {
        for dim in [Dim::Two, Dim::Three] {
            for phi0 in [0.3, 1.2] {
                let r = rotation_gap_check(dim, phi0, 20_000, 15).unwrap();
                assert!(r.verdict == Verdict::Holds, "{r}");
            }
        }
        assert!(rotation_gap_check(Dim::Two, 0.0, 10, 1).is_err());
    }

    #[test]
    fn cubic_bound_on_disc() {
        let cfg = EstimatorConfig::new(30_000, 16);
        let scene = disc_scene();
        let vol = scene.body().volume(&VolumeConfig::new(10_000, 1));
        let r = cubic_bound_check("disc", &scene, &vol, &cfg).unwrap();
        assert!(r.verdict == Verdict::Holds, "{r}");
    }

    #[test]
    fn volume_bound_scan_covers_disc() {
        let cfg = EstimatorConfig::new(30_000, 17);
        let scene = disc_scene();
        let vol = scene.body().volume(&VolumeConfig::new(10_000, 1));
        let entries = vec![("disc".to_string(), scene, vol)];
        let out = visibility_bound_scan(&entries, &AngleFunction::OneMinusCos, &cfg).unwrap();
        assert!(out.len() == 1);
        assert!(out[0].verdict == Verdict::Holds, "{}", out[0]);
    }
}
