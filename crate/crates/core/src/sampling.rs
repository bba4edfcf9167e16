//! Sampling of incoming (direction, sphere point) pairs under the
//! cosine-weighted flux measure, plus the direction-to-pole rotations used
//! both by the sampler and by the transport-bound checks.
//!
//! The sampler works in the rotated frame where the direction points at the
//! pole: there the flux measure factorizes into (uniform direction) x
//! (uniform point on the equatorial disc), with the sphere point recovered as
//! the lower-hemisphere lift of the disc point.  Rotating back with the
//! inverse pole rotation yields pairs distributed per the flux measure.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bounds;
use crate::estimators::{self, Acc, Estimate};
use crate::vec3::{Dim, Vec3};

/// Seed wrapper handing out one independent, reproducible generator per
/// sample index.  Identical (seed, index) always yields the same draws, so
/// estimates are replayable and independent of how work is split.
#[derive(Clone, Copy, Debug)]
pub struct StreamRng {
    seed: u64,
}

impl StreamRng {
    pub fn new(seed: u64) -> StreamRng {
        StreamRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// An incoming pair: unit direction `v` and sphere point `xi` (relative to
/// the sphere center) with `<v, xi> <= 0`.
#[derive(Clone, Copy, Debug)]
pub struct PhaseSample {
    pub v: Vec3,
    pub xi: Vec3,
}

/// Uniform unit direction.  Draw order (fixed for reproducibility): 2D one
/// angle; 3D axial coordinate then azimuth.
pub fn unit_direction(dim: Dim, rng: &mut ChaCha8Rng) -> Vec3 {
    match dim {
        Dim::Two => {
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            Vec3::new(a.cos(), a.sin(), 0.0)
        }
        Dim::Three => {
            let z = 2.0 * rng.gen::<f64>() - 1.0;
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            let s = (1.0 - z * z).max(0.0).sqrt();
            Vec3::new(s * a.cos(), s * a.sin(), z)
        }
    }
}

/// Uniform point on the equatorial disc of radius `r` (an interval in 2D),
/// embedded in the pole frame with zero axial component.
fn equatorial_point(dim: Dim, r: f64, rng: &mut ChaCha8Rng) -> Vec3 {
    match dim {
        Dim::Two => Dim::Two.assemble([(2.0 * rng.gen::<f64>() - 1.0) * r, 0.0], 0.0),
        Dim::Three => {
            let rho = r * rng.gen::<f64>().sqrt();
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            Dim::Three.assemble([rho * a.cos(), rho * a.sin()], 0.0)
        }
    }
}

/// Draws one incoming pair distributed per the (normalized) flux measure on
/// the sphere of radius `radius` centered at the origin.  The total measure
/// mass is carried separately by [`flux_mass`].
pub fn sample_incoming(dim: Dim, radius: f64, rng: &mut ChaCha8Rng) -> PhaseSample {
    let v = unit_direction(dim, rng);
    let flat = equatorial_point(dim, radius, rng);
    let axial = -(radius * radius - flat.norm2()).max(0.0).sqrt();
    let eta = flat + dim.pole() * axial;
    let xi = PoleRotation::for_direction(dim, v).apply_inverse(eta);
    PhaseSample { v, xi }
}

/// Total flux-measure mass of the incoming boundary: the product of the unit
/// sphere area, the unit equatorial-ball volume, and `radius^(d-1)`.
/// 2D: `4 pi R`; 3D: `4 pi^2 R^2`.
pub fn flux_mass(dim: Dim, radius: f64) -> f64 {
    let d = dim.ambient() as u32;
    bounds::unit_sphere_area(d - 1) * bounds::unit_ball_volume(d - 1) * radius.powi(d as i32 - 1)
}

/// Monte Carlo cross-check of [`flux_mass`] by direct integration of
/// `max(0, -<v, n>)` over independent uniform directions and sphere points.
pub fn flux_mass_mc(dim: Dim, radius: f64, samples: u64, seed: u64) -> Estimate {
    let d = dim.ambient() as u32;
    let sphere_area = bounds::unit_sphere_area(d - 1) * radius.powi(d as i32 - 1);
    let scale = bounds::unit_sphere_area(d - 1) * sphere_area;
    let rng = StreamRng::new(seed);
    let acc = estimators::par_accumulate(samples, |range| {
        let mut acc = Acc::default();
        for i in range {
            let mut r = rng.stream(i);
            let v = unit_direction(dim, &mut r);
            let n = unit_direction(dim, &mut r);
            acc.add_exited((-v.dot(n)).max(0.0));
        }
        acc
    });
    estimators::finish(acc, samples, scale, seed)
}

/// The rotation taking a given unit direction to the pole, acting as a plane
/// rotation on the span of the two and as identity on their orthogonal
/// complement.  Near the antipode of the pole that plane degenerates; the
/// conventional fallback is the half-turn in the (first axis, pole) plane.
#[derive(Clone, Copy, Debug)]
pub struct PoleRotation {
    dim: Dim,
    kind: Kind,
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    Generic { v: Vec3 },
    Flip,
}

impl PoleRotation {
    pub fn for_direction(dim: Dim, v: Vec3) -> PoleRotation {
        let kind = if 1.0 + v.dot(dim.pole()) < 1e-12 {
            Kind::Flip
        } else {
            Kind::Generic { v }
        };
        PoleRotation { dim, kind }
    }

    /// Applies the rotation (direction goes to the pole).
    pub fn apply(&self, x: Vec3) -> Vec3 {
        match self.kind {
            Kind::Generic { v } => {
                let pole = self.dim.pole();
                let u = v + pole;
                let c = 1.0 + v.dot(pole);
                x - u * (u.dot(x) / c) + pole * (2.0 * v.dot(x))
            }
            Kind::Flip => flip(self.dim, x),
        }
    }

    /// Applies the inverse rotation (pole goes back to the direction).
    pub fn apply_inverse(&self, x: Vec3) -> Vec3 {
        match self.kind {
            Kind::Generic { v } => {
                let pole = self.dim.pole();
                let u = v + pole;
                let c = 1.0 + v.dot(pole);
                x - u * (u.dot(x) / c) + v * (2.0 * pole.dot(x))
            }
            Kind::Flip => flip(self.dim, x),
        }
    }
}

/// Half-turn in the plane spanned by the first coordinate axis and the pole;
/// self-inverse, maps the antipode of the pole to the pole.
fn flip(dim: Dim, x: Vec3) -> Vec3 {
    let e1 = Vec3::new(1.0, 0.0, 0.0);
    let pole = dim.pole();
    x - e1 * (2.0 * e1.dot(x)) - pole * (2.0 * pole.dot(x))
}

/// Pole-frame image of a sphere point under the rotation of its paired
/// direction.  For incoming pairs the result lies on the lower hemisphere
/// (negative axial part), for outgoing pairs on the upper one; the lateral
/// part is the quantity that measure-preservation tests bin.
pub fn project_hemisphere(dim: Dim, v: Vec3, xi: Vec3) -> Vec3 {
    PoleRotation::for_direction(dim, v).apply(xi)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn rotation_examples_in_2d() {
        // Direction already at the pole: identity on everything.
        let r = PoleRotation::for_direction(Dim::Two, Vec3::new(0.0, 1.0, 0.0));
        let x = Vec3::new(0.3, -0.8, 0.0);
        assert!(r.apply(x).dist(x) < 1e-15);
        // Direction (1,0): quarter turn sending (1,0) to (0,1).
        let r = PoleRotation::for_direction(Dim::Two, Vec3::new(1.0, 0.0, 0.0));
        assert!(
            r.apply(Vec3::new(1.0, 0.0, 0.0))
                .dist(Vec3::new(0.0, 1.0, 0.0))
                < 1e-15
        );
        assert!(
            r.apply(Vec3::new(-1.0, 0.0, 0.0))
                .dist(Vec3::new(0.0, -1.0, 0.0))
                < 1e-15
        );
    }

    #[test]
    fn rotation_example_in_3d_fixes_orthogonal_axis() {
        let r = PoleRotation::for_direction(Dim::Three, Vec3::new(1.0, 0.0, 0.0));
        assert!(
            r.apply(Vec3::new(1.0, 0.0, 0.0))
                .dist(Vec3::new(0.0, 0.0, 1.0))
                < 1e-15
        );
        assert!(
            r.apply(Vec3::new(0.0, 1.0, 0.0))
                .dist(Vec3::new(0.0, 1.0, 0.0))
                < 1e-15
        );
    }

    #[test]
    fn inverse_undoes_apply_even_near_the_antipode() {
        let mut rng = StreamRng::new(11).stream(0);
        for dim in [Dim::Two, Dim::Three] {
            for i in 0..200 {
                let v = if i % 10 == 0 {
                    // Exercise the degenerate branch.
                    -dim.pole()
                } else {
                    unit_direction(dim, &mut rng)
                };
                let r = PoleRotation::for_direction(dim, v);
                let x = unit_direction(dim, &mut rng);
                assert!(r.apply_inverse(r.apply(x)).dist(x) < 1e-12);
                assert!(r.apply(v).dist(dim.pole()) < 1e-12);
            }
        }
    }

    #[test]
    fn flip_is_a_self_inverse_isometry() {
        for dim in [Dim::Two, Dim::Three] {
            let mut rng = StreamRng::new(3).stream(5);
            for _ in 0..50 {
                let x = unit_direction(dim, &mut rng);
                let y = flip(dim, x);
                assert!((y.norm() - 1.0).abs() < 1e-12);
                assert!(flip(dim, y).dist(x) < 1e-15);
            }
        }
    }

    #[test]
    fn samples_are_incoming_and_on_the_sphere() {
        for dim in [Dim::Two, Dim::Three] {
            for i in 0..500 {
                let mut rng = StreamRng::new(42).stream(i);
                let ps = sample_incoming(dim, 2.5, &mut rng);
                assert!((ps.v.norm() - 1.0).abs() < 1e-12);
                assert!((ps.xi.norm() - 2.5).abs() < 1e-9);
                assert!(ps.v.dot(ps.xi) <= 1e-9);
                if dim == Dim::Two {
                    assert!(ps.v.z == 0.0 && ps.xi.z == 0.0);
                }
            }
        }
    }

    #[test]
    fn identical_seed_and_stream_reproduce_the_sample() {
        let a = sample_incoming(Dim::Three, 1.0, &mut StreamRng::new(7).stream(13));
        let b = sample_incoming(Dim::Three, 1.0, &mut StreamRng::new(7).stream(13));
        assert!(a.v == b.v && a.xi == b.xi);
        let c = sample_incoming(Dim::Three, 1.0, &mut StreamRng::new(7).stream(14));
        assert!(a.v != c.v);
    }

    #[test]
    fn mean_incidence_cosine_matches_the_flat_construction() {
        // E[-<v, n(xi)>] equals pi/4 in 2D and 2/3 in 3D.
        for (dim, expect) in [(Dim::Two, PI / 4.0), (Dim::Three, 2.0 / 3.0)] {
            let n = 200_000u64;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for i in 0..n {
                let mut rng = StreamRng::new(5).stream(i);
                let ps = sample_incoming(dim, 1.0, &mut rng);
                let c = -ps.v.dot(ps.xi);
                sum += c;
                sum_sq += c * c;
            }
            let mean = sum / n as f64;
            let sd = ((sum_sq / n as f64 - mean * mean) / n as f64).sqrt();
            assert!(
                (mean - expect).abs() < 4.0 * sd,
                "dim {dim}: mean {mean} vs {expect} (sd {sd})"
            );
        }
    }

    #[test]
    fn flux_mass_closed_forms() {
        assert!((flux_mass(Dim::Two, 1.0) - 4.0 * PI).abs() < 1e-14);
        assert!((flux_mass(Dim::Three, 1.0) - 4.0 * PI * PI).abs() < 1e-13);
        assert!((flux_mass(Dim::Three, 2.0) - 16.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn flux_mass_monte_carlo_agrees() {
        for dim in [Dim::Two, Dim::Three] {
            let exact = flux_mass(dim, 1.0);
            let est = flux_mass_mc(dim, 1.0, 200_000, 9);
            assert!(
                (est.mean - exact).abs() < 4.0 * est.stderr,
                "dim {dim}: {} vs {exact} ({})",
                est.mean,
                est.stderr
            );
        }
    }

    #[test]
    fn projection_examples() {
        let eta = project_hemisphere(
            Dim::Two,
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, -1.0, 0.0),
        );
        assert!(eta.dist(Vec3::new(0.0, -1.0, 0.0)) < 1e-15);
        let eta = project_hemisphere(
            Dim::Two,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
        );
        assert!(eta.dist(Vec3::new(0.0, -1.0, 0.0)) < 1e-15);
    }
}
