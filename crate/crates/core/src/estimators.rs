//! Monte Carlo estimation of the visibility index, the mean resistance, and
//! the reduced (scale-free) quantities.
//!
//! All estimators share one accumulation scheme: the sample index range is
//! split into fixed chunks, chunks are reduced in parallel, and the partial
//! sums are folded in chunk order.  Floating-point addition order is therefore
//! a function of the sample count alone, never of the worker count, which
//! makes every estimate byte-reproducible for a given seed.

use std::ops::Range;

use rayon::prelude::*;

use crate::billiard::{Scene, TraceStatus};
use crate::error::Error;
use crate::sampling::{self, StreamRng};
use crate::vec3::{Dim, Vec3};
use crate::Result;

/// Samples per reduction chunk.  Chosen so a chunk amortizes task overhead
/// while keeping enough chunks for load balancing at n = 10^5..10^7.
pub(crate) const CHUNK: u64 = 4096;

/// Partial sums of one scalar functional over a block of samples.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Acc {
    pub sum: f64,
    pub sum_sq: f64,
    pub exited: u64,
    pub trapped: u64,
    pub discarded: u64,
}

impl Acc {
    pub fn add_exited(&mut self, value: f64) {
        self.sum += value;
        self.sum_sq += value * value;
        self.exited += 1;
    }

    /// A sample lost to the reflection cap; `value` is its bracket surrogate.
    pub fn add_trapped(&mut self, value: f64) {
        self.sum += value;
        self.sum_sq += value * value;
        self.trapped += 1;
    }

    /// A sample discarded near an edge/tangency; `value` as for trapped.
    pub fn add_discarded(&mut self, value: f64) {
        self.sum += value;
        self.sum_sq += value * value;
        self.discarded += 1;
    }

    pub fn merge(mut self, other: Acc) -> Acc {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.exited += other.exited;
        self.trapped += other.trapped;
        self.discarded += other.discarded;
        self
    }
}

/// Runs `worker` over `0..samples` in fixed chunks and folds the partial
/// accumulators in chunk order.  The reduction tree is independent of the
/// rayon thread count, so results are bit-stable across `--threads` settings.
pub(crate) fn par_accumulate<F>(samples: u64, worker: F) -> Acc
where
    F: Fn(Range<u64>) -> Acc + Sync + Send,
{
    let chunks: Vec<Range<u64>> = (0..samples)
        .step_by(CHUNK as usize)
        .map(|lo| lo..(lo + CHUNK).min(samples))
        .collect();
    let parts: Vec<Acc> = chunks.into_par_iter().map(worker).collect();
    parts.into_iter().fold(Acc::default(), Acc::merge)
}

/// A Monte Carlo result: mean with standard error plus the bookkeeping needed
/// to judge and replay it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    /// Samples drawn.
    pub n_total: u64,
    /// Samples that exited cleanly and carry functional values.
    pub n_effective: u64,
    pub trapped_fraction: f64,
    pub discarded_fraction: f64,
    /// Seed that reproduces this estimate exactly.
    pub seed: u64,
}

impl Estimate {
    /// Wraps an analytically known value (zero spread, no sampling).
    pub fn exact(value: f64) -> Estimate {
        Estimate {
            mean: value,
            stderr: 0.0,
            n_total: 0,
            n_effective: 0,
            trapped_fraction: 0.0,
            discarded_fraction: 0.0,
            seed: 0,
        }
    }

    /// False when more than 1% of samples hit the reflection cap; the unknown
    /// contribution of those trajectories could then exceed the error bar.
    pub fn is_reliable(&self) -> bool {
        self.trapped_fraction <= 0.01
    }
}

pub(crate) fn finish(acc: Acc, samples: u64, scale: f64, seed: u64) -> Estimate {
    let n = samples.max(1) as f64;
    let mean_raw = acc.sum / n;
    let var_raw = if samples > 1 {
        ((acc.sum_sq - acc.sum * acc.sum / n) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Estimate {
        mean: scale * mean_raw,
        stderr: scale.abs() * (var_raw / n).sqrt(),
        n_total: samples,
        n_effective: acc.exited,
        trapped_fraction: acc.trapped as f64 / n,
        discarded_fraction: acc.discarded as f64 / n,
        seed,
    }
}

/// Monotone deviation-angle weight `f` on `[0, pi]` with `f(0) = 0`.
#[derive(Clone, Debug)]
pub enum AngleFunction {
    /// `f(theta) = 1 - cos(theta)`; turns the index into the mean resistance.
    OneMinusCos,
    /// `f(theta) = coeff * theta^exponent`, the leading small-angle form.
    PowerLaw { coeff: f64, exponent: f64 },
    /// Piecewise-linear table on a uniform grid over `[0, pi]`.
    Custom(AngleTable),
}

impl AngleFunction {
    pub fn power_law(coeff: f64, exponent: f64) -> Result<AngleFunction> {
        if !(coeff > 0.0 && coeff.is_finite() && exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::Domain(format!(
                "power-law angle function needs positive finite coeff and exponent, got {coeff}, {exponent}"
            )));
        }
        Ok(AngleFunction::PowerLaw { coeff, exponent })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            AngleFunction::OneMinusCos => 1.0 - theta.cos(),
            AngleFunction::PowerLaw { coeff, exponent } => coeff * theta.powf(*exponent),
            AngleFunction::Custom(table) => table.eval(theta),
        }
    }
}

/// Monotone nondecreasing values on the uniform grid `0, h, .., pi`.
#[derive(Clone, Debug)]
pub struct AngleTable {
    values: Vec<f64>,
}

impl AngleTable {
    pub fn new(values: Vec<f64>) -> Result<AngleTable> {
        if values.len() < 2 {
            return Err(Error::Domain("angle table needs at least 2 knots".into()));
        }
        if values[0] != 0.0 {
            return Err(Error::Domain("angle table must start at f(0) = 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "angle table contains non-finite values".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("angle table must be nondecreasing".into()));
        }
        Ok(AngleTable { values })
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let m = self.values.len() - 1;
        let x = (theta.clamp(0.0, std::f64::consts::PI) / std::f64::consts::PI) * m as f64;
        let i = (x.floor() as usize).min(m - 1);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Knobs common to all trajectory estimators.
#[derive(Clone, Copy, Debug)]
pub struct EstimatorConfig {
    pub samples: u64,
    pub seed: u64,
    /// Reflection cap per trajectory before declaring it trapped.
    pub max_reflections: u32,
    /// When true, trapped/discarded samples contribute `f(pi)` instead of 0,
    /// bracketing the excluded set from above.
    pub upper_bracket: bool,
}

impl EstimatorConfig {
    pub fn new(samples: u64, seed: u64) -> EstimatorConfig {
        EstimatorConfig {
            samples,
            seed,
            max_reflections: 10_000,
            upper_bracket: false,
        }
    }
}

fn lost_value(f: &AngleFunction, cfg: &EstimatorConfig) -> f64 {
    if cfg.upper_bracket {
        f.eval(std::f64::consts::PI)
    } else {
        0.0
    }
}

/// Angle between two vectors of equal length.  Exact at both ends: bitwise
/// equal inputs give 0, exact opposites give pi, and there is no precision
/// cliff near either (unlike acos of the dot product).
fn angle_between(a: Vec3, b: Vec3) -> f64 {
    2.0 * (a - b).norm().atan2((a + b).norm())
}

/// Visibility index of the scene's body: the flux-measure integral of
/// `f(angle between incoming and outgoing direction)`.
pub fn estimate_f(scene: &Scene, f: &AngleFunction, cfg: &EstimatorConfig) -> Estimate {
    let dim = scene.dim();
    let radius = scene.sphere_radius();
    let center = scene.center();
    let lost = lost_value(f, cfg);
    let rng = StreamRng::new(cfg.seed);
    let acc = par_accumulate(cfg.samples, |range| {
        let mut acc = Acc::default();
        for i in range {
            let mut r = rng.stream(i);
            let ps = sampling::sample_incoming(dim, radius, &mut r);
            let outcome = scene.trace(ps.v, center + ps.xi, cfg.max_reflections);
            match outcome.status {
                TraceStatus::Exited => {
                    let theta = angle_between(ps.v, outcome.v_plus);
                    acc.add_exited(f.eval(theta));
                }
                TraceStatus::Trapped => acc.add_trapped(lost),
                TraceStatus::DiscardedSingular => acc.add_discarded(lost),
            }
        }
        acc
    });
    finish(acc, cfg.samples, sampling::flux_mass(dim, radius), cfg.seed)
}

/// Finite-sphere variant: the deviation is measured as the angular distance,
/// seen from the center, between the trajectory's exit point and the exit
/// point of the undeflected chord.  Converges to `estimate_f` as the sphere
/// grows.
pub fn estimate_f_at_radius(
    scene: &Scene,
    radius: f64,
    f: &AngleFunction,
    cfg: &EstimatorConfig,
) -> Result<Estimate> {
    let grown = scene.with_sphere_radius(radius)?;
    let dim = grown.dim();
    let center = grown.center();
    let lost = lost_value(f, cfg);
    let rng = StreamRng::new(cfg.seed);
    let acc = par_accumulate(cfg.samples, |range| {
        let mut acc = Acc::default();
        for i in range {
            let mut r = rng.stream(i);
            let ps = sampling::sample_incoming(dim, radius, &mut r);
            let xi = center + ps.xi;
            let outcome = grown.trace(ps.v, xi, cfg.max_reflections);
            match outcome.status {
                TraceStatus::Exited => {
                    let straight = grown.free_exit(ps.v, xi);
                    let theta = angle_between(outcome.xi_plus - center, straight - center);
                    acc.add_exited(f.eval(theta));
                }
                TraceStatus::Trapped => acc.add_trapped(lost),
                TraceStatus::DiscardedSingular => acc.add_discarded(lost),
            }
        }
        acc
    });
    Ok(finish(
        acc,
        cfg.samples,
        sampling::flux_mass(dim, radius),
        cfg.seed,
    ))
}

/// Mean resistance: the visibility index with `f(theta) = 1 - cos(theta)`.
pub fn mean_resistance(scene: &Scene, cfg: &EstimatorConfig) -> Estimate {
    estimate_f(scene, &AngleFunction::OneMinusCos, cfg)
}

/// Exact mean resistance of a convex body from its boundary area:
/// `4/(d+1) * b_{d-1} * |boundary|`, i.e. `8A/3` in 2D and `pi A` in 3D.
pub fn convex_resistance(dim: Dim, boundary_area: f64) -> f64 {
    match dim {
        Dim::Two => 8.0 * boundary_area / 3.0,
        Dim::Three => std::f64::consts::PI * boundary_area,
    }
}

/// Scale-free pair: reduced volume (fraction of the enclosing ball filled)
/// and reduced resistance (normalized so a ball scores exactly 1).
#[derive(Clone, Copy, Debug)]
pub struct ReducedQuantities {
    pub kappa: f64,
    pub kappa_stderr: f64,
    pub f_hat: f64,
    pub f_hat_stderr: f64,
}

pub fn reduced_quantities(
    dim: Dim,
    volume: &Estimate,
    resistance: &Estimate,
    r0: f64,
) -> Result<ReducedQuantities> {
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::Domain(format!(
            "reduced quantities need r0 > 0, got {r0}"
        )));
    }
    let d = dim.ambient() as i32;
    let ball = crate::bounds::unit_ball_volume(d as u32) * r0.powi(d);
    let denom = 4.0 / (d as f64 + 1.0)
        * crate::bounds::unit_ball_volume(d as u32 - 1)
        * crate::bounds::unit_sphere_area(d as u32 - 1)
        * r0.powi(d - 1);
    let kappa = volume.mean / ball;
    let kappa_stderr = volume.stderr / ball;
    if kappa > 1.0 + 4.0 * kappa_stderr {
        return Err(Error::InconsistentInputs(format!(
            "volume {} exceeds the enclosing ball volume {ball} beyond 4 sigma",
            volume.mean
        )));
    }
    Ok(ReducedQuantities {
        kappa,
        kappa_stderr,
        f_hat: resistance.mean / denom,
        f_hat_stderr: resistance.stderr / denom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::ReflectionLaw;
    use crate::geometry::{Body, Node};

    fn disc_scene(radius: f64) -> Scene {
        let body = Body::new(
            Dim::Two,
            Node::Ball {
                center: Vec3::ZERO,
                radius,
            },
        )
        .unwrap();
        Scene::new(body, ReflectionLaw::Specular).unwrap()
    }

    #[test]
    fn finish_matches_hand_computed_mean_and_stderr() {
        let mut acc = Acc::default();
        for v in [1.0, 2.0, 3.0, 4.0] {
            acc.add_exited(v);
        }
        let e = finish(acc, 4, 2.0, 7);
        assert!((e.mean - 5.0).abs() < 1e-15); // 2 * 2.5
                                               // sample variance of 1..4 is 5/3; stderr = 2*sqrt(5/12)
        assert!((e.stderr - 2.0 * (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(e.n_effective == 4 && e.seed == 7);
    }

    #[test]
    fn chunked_reduction_is_chunk_order_stable() {
        // Values designed so that summation order matters in f64.
        let val = |i: u64| if i % 3 == 0 { 1e16 } else { 1.0 };
        let worker = |range: std::ops::Range<u64>| {
            let mut acc = Acc::default();
            for i in range {
                acc.add_exited(val(i));
            }
            acc
        };
        let a = par_accumulate(100_000, worker);
        let b = par_accumulate(100_000, worker);
        assert!(a.sum.to_bits() == b.sum.to_bits());
        assert!(a.sum_sq.to_bits() == b.sum_sq.to_bits());
    }

    #[test]
    fn angle_functions_evaluate() {
        let f = AngleFunction::OneMinusCos;
        assert!(f.eval(0.0) == 0.0);
        assert!((f.eval(std::f64::consts::PI) - 2.0).abs() < 1e-15);
        let p = AngleFunction::power_law(0.5, 2.0).unwrap();
        assert!((p.eval(2.0) - 2.0).abs() < 1e-15);
        assert!(AngleFunction::power_law(-1.0, 2.0).is_err());
    }

    #[test]
    fn angle_table_interpolates_and_validates() {
        let t = AngleTable::new(vec![0.0, 1.0, 4.0]).unwrap();
        assert!(t.eval(0.0) == 0.0);
        assert!((t.eval(std::f64::consts::PI) - 4.0).abs() < 1e-15);
        assert!((t.eval(std::f64::consts::PI / 2.0) - 1.0).abs() < 1e-12);
        assert!((t.eval(3.0 * std::f64::consts::PI / 4.0) - 2.5).abs() < 1e-12);
        assert!(AngleTable::new(vec![0.5, 1.0]).is_err());
        assert!(AngleTable::new(vec![0.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn convex_resistance_exact_values() {
        assert!(convex_resistance(Dim::Two, 4.0) == 32.0 / 3.0);
        let pi = std::f64::consts::PI;
        assert!(convex_resistance(Dim::Three, 4.0 * pi) == pi * (4.0 * pi));
    }

    #[test]
    fn reduced_quantities_of_the_unit_disc_are_one() {
        let pi = std::f64::consts::PI;
        let vol = Estimate::exact(pi);
        let res = Estimate::exact(16.0 * pi / 3.0);
        let rq = reduced_quantities(Dim::Two, &vol, &res, 1.0).unwrap();
        assert!((rq.kappa - 1.0).abs() < 1e-15);
        assert!((rq.f_hat - 1.0).abs() < 1e-15);
    }

    #[test]
    fn oversized_volume_is_rejected() {
        let vol = Estimate::exact(4.0); // > pi for r0 = 1
        let res = Estimate::exact(1.0);
        assert!(reduced_quantities(Dim::Two, &vol, &res, 1.0).is_err());
    }

    #[test]
    fn unreliable_flag_trips_above_one_percent() {
        let mut e = Estimate::exact(1.0);
        e.trapped_fraction = 0.02;
        assert!(!e.is_reliable());
        e.trapped_fraction = 0.005;
        assert!(e.is_reliable());
    }

    #[test]
    fn empty_body_scores_zero_with_zero_spread() {
        let scene =
            Scene::with_radius(Body::empty(Dim::Two), ReflectionLaw::Specular, 1.0).unwrap();
        let cfg = EstimatorConfig::new(2_000, 5);
        let e = estimate_f(&scene, &AngleFunction::OneMinusCos, &cfg);
        assert!(e.mean == 0.0 && e.stderr == 0.0 && e.n_effective == e.n_total);
        let r = mean_resistance(&scene, &cfg);
        assert!(r.mean == 0.0 && r.stderr == 0.0);
        let g = estimate_f_at_radius(&scene, 3.0, &AngleFunction::OneMinusCos, &cfg).unwrap();
        assert!(g.mean == 0.0 && g.stderr == 0.0);
    }

    #[test]
    fn reduced_quantities_of_the_retro_disc() {
        let pi = std::f64::consts::PI;
        let rq = reduced_quantities(
            Dim::Two,
            &Estimate::exact(pi),
            &Estimate::exact(8.0 * pi),
            1.0,
        )
        .unwrap();
        assert!((rq.kappa - 1.0).abs() < 1e-15);
        assert!((rq.f_hat - 1.5).abs() < 1e-12);
    }

    #[test]
    fn doubling_the_whole_scene_leaves_reduced_quantities_invariant() {
        let pi = std::f64::consts::PI;
        let cfg = EstimatorConfig::new(50_000, 11);
        let small = disc_scene(1.0);
        let big = disc_scene(2.0);
        let rq1 = reduced_quantities(
            Dim::Two,
            &Estimate::exact(pi),
            &mean_resistance(&small, &cfg),
            1.0,
        )
        .unwrap();
        let rq2 = reduced_quantities(
            Dim::Two,
            &Estimate::exact(4.0 * pi),
            &mean_resistance(&big, &cfg),
            2.0,
        )
        .unwrap();
        assert!(rq1.kappa == 1.0 && rq2.kappa == 1.0);
        let joint = rq1.f_hat_stderr.hypot(rq2.f_hat_stderr);
        assert!((rq1.f_hat - rq2.f_hat).abs() <= 4.0 * joint);
    }

    #[test]
    fn growing_the_reference_sphere_does_not_move_the_index() {
        let cfg = EstimatorConfig::new(150_000, 13);
        let touching = disc_scene(1.0);
        let grown = touching.with_sphere_radius(2.0).unwrap();
        let a = estimate_f(&touching, &AngleFunction::OneMinusCos, &cfg);
        let b = estimate_f(&grown, &AngleFunction::OneMinusCos, &cfg);
        assert!((a.mean - b.mean).abs() <= 4.0 * a.stderr.hypot(b.stderr));
    }

    #[test]
    fn pointwise_dominated_weight_gives_a_dominated_index() {
        // 1 - cos(theta) <= theta^2 / 2 everywhere, and both estimates reuse
        // the same trajectories, so the ordering is exact, not statistical.
        let cfg = EstimatorConfig::new(50_000, 7);
        let scene = disc_scene(1.0);
        let lo = estimate_f(&scene, &AngleFunction::OneMinusCos, &cfg);
        let hi = estimate_f(&scene, &AngleFunction::power_law(0.5, 2.0).unwrap(), &cfg);
        assert!(lo.mean <= hi.mean + 1e-12);
        assert!(lo.mean > 0.0);
    }

    #[test]
    fn finite_sphere_estimates_approach_the_asymptotic_index() {
        let cfg = EstimatorConfig::new(150_000, 9);
        let scene = disc_scene(1.0);
        let f = AngleFunction::OneMinusCos;
        let target = estimate_f(&scene, &f, &cfg);
        let runs: Vec<Estimate> = [4.0, 16.0, 64.0]
            .iter()
            .map(|&r| estimate_f_at_radius(&scene, r, &f, &cfg).unwrap())
            .collect();
        let dev: Vec<f64> = runs.iter().map(|e| (e.mean - target.mean).abs()).collect();
        let joint: Vec<f64> = runs.iter().map(|e| e.stderr.hypot(target.stderr)).collect();
        // Deviation shrinks as the sphere grows, up to sampling noise.
        assert!(dev[1] <= dev[0] + 4.0 * joint[0].hypot(joint[1]));
        assert!(dev[2] <= dev[1] + 4.0 * joint[1].hypot(joint[2]));
        assert!(dev[2] <= 4.0 * joint[2]);
    }
}
