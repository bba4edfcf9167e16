//! Trajectory tracing: free flight inside the sampling sphere, reflections
//! off the body under a pluggable law, exit bookkeeping.
//!
//! The first cast starts a hair *behind* the sphere point, against the
//! incoming direction, with the path length pre-decremented by the same
//! amount.  Bodies are allowed to touch the sampling sphere (a body's own
//! enclosing sphere is the default), and then the entry point *is* a boundary
//! point: casting from behind finds that reflection at a strictly positive
//! ray parameter instead of losing it to the self-intersection filter.

use crate::error::Error;
use crate::geometry::Body;
use crate::vec3::{Dim, Vec3};
use crate::Result;

/// Incidence below this |cosine| counts as grazing and discards the sample.
pub const GRAZING_TOL: f64 = 1e-12;

/// Relative backset of the first cast behind the sphere point.
const BACK_REL: f64 = 1e-9;

/// Boundary reflection rule applied at each hit.
#[derive(Clone, Debug)]
pub enum ReflectionLaw {
    /// Mirror law: tangential component kept, normal component negated.
    Specular,
    /// Direction reversal `v -> -v`; realizes the resistance supremum.
    Retro,
    /// 2D generalized law acting on the sine of the incidence angle.
    PseudoBilliard2D(AngleMap),
}

/// Measure-preserving map of the incidence sine `s in [-1, 1)`.  The flux
/// measure on incidence angles is `cos(phi) dphi = d(sin(phi))`, i.e. plain
/// length in `s`, so any length-preserving bijection of the interval
/// qualifies.
#[derive(Clone, Copy, Debug)]
pub enum AngleMap {
    /// `s -> s`: reproduces the specular law.
    Identity,
    /// `s -> -s`: reproduces the retro law (in 2D).
    Negate,
    /// `s -> s + offset (mod [-1, 1))`: a nontrivial piecewise translation.
    /// No continuous monotone map other than the two above preserves the
    /// measure, so "nontrivial" forces the wrap-around cut.
    SinShift(f64),
}

impl AngleMap {
    pub fn apply(&self, s: f64) -> f64 {
        match self {
            AngleMap::Identity => s,
            AngleMap::Negate => -s,
            AngleMap::SinShift(offset) => (s + offset + 1.0).rem_euclid(2.0) - 1.0,
        }
    }

    fn validate(&self) -> Result<()> {
        if let AngleMap::SinShift(offset) = self {
            if !offset.is_finite() {
                return Err(Error::InvalidScene(
                    "sine-shift offset must be finite".into(),
                ));
            }
        }
        let defect = measure_defect(|s| self.apply(s));
        if defect > 4.0 / GRID as f64 {
            return Err(Error::InvalidScene(format!(
                "angle map fails the measure-preservation grid check (defect {defect:.3e})"
            )));
        }
        Ok(())
    }
}

const GRID: usize = 1024;

/// Grid test of measure preservation on `[-1, 1)`: pushes cell midpoints
/// through the map and compares the sorted images with uniform quantiles.
/// Zero (up to one cell width) for measure-preserving bijections.
pub(crate) fn measure_defect(map: impl Fn(f64) -> f64) -> f64 {
    let mut images: Vec<f64> = (0..GRID)
        .map(|k| map(-1.0 + (2.0 * k as f64 + 1.0) / GRID as f64))
        .collect();
    images.sort_by(|a, b| a.partial_cmp(b).unwrap());
    images
        .iter()
        .enumerate()
        .map(|(k, s)| (s - (-1.0 + (2.0 * k as f64 + 1.0) / GRID as f64)).abs())
        .fold(0.0, f64::max)
}

/// Mirror reflection `v - 2 <v,n> n`; `None` when the incidence is grazing
/// (the caller discards such samples as singular).
pub fn specular_reflect(v: Vec3, n: Vec3) -> Option<Vec3> {
    let c = v.dot(n);
    if c.abs() < GRAZING_TOL {
        return None;
    }
    Some(v - n * (2.0 * c))
}

/// How a trace ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceStatus {
    Exited,
    /// Reflection cap reached without exiting.
    Trapped,
    /// Hit a near-edge/seam point or grazed; excluded as measure-zero.
    DiscardedSingular,
}

/// Exit data of one trajectory.  For non-exited statuses the pair holds the
/// last direction and position reached.
#[derive(Clone, Copy, Debug)]
pub struct TraceOutcome {
    pub v_plus: Vec3,
    pub xi_plus: Vec3,
    pub path_length: f64,
    pub reflections: u32,
    pub status: TraceStatus,
}

/// A body fixed inside its sampling sphere together with a reflection law:
/// the unit of simulation.
#[derive(Clone, Debug)]
pub struct Scene {
    body: Body,
    law: ReflectionLaw,
    center: Vec3,
    r0: f64,
    sphere_radius: f64,
}

impl Scene {
    /// Scene over the body's own enclosing sphere (the tight default; the
    /// body then touches the sphere).
    pub fn new(body: Body, law: ReflectionLaw) -> Result<Scene> {
        let r0 = body.enclosing_radius();
        if r0 <= 0.0 {
            return Err(Error::InvalidScene(
                "body has zero enclosing radius; give the sphere radius explicitly".into(),
            ));
        }
        Scene::with_radius(body, law, r0)
    }

    /// Scene with an explicit sphere radius (must contain the body).
    pub fn with_radius(body: Body, law: ReflectionLaw, sphere_radius: f64) -> Result<Scene> {
        if !(sphere_radius > 0.0 && sphere_radius.is_finite()) {
            return Err(Error::InvalidScene(format!(
                "sphere radius must be positive and finite, got {sphere_radius}"
            )));
        }
        let r0 = body.enclosing_radius();
        if sphere_radius < r0 * (1.0 - 1e-12) {
            return Err(Error::InvalidScene(format!(
                "sphere radius {sphere_radius} smaller than the body's enclosing radius {r0}"
            )));
        }
        if let ReflectionLaw::PseudoBilliard2D(map) = &law {
            if body.dim() != Dim::Two {
                return Err(Error::InvalidScene(
                    "the pseudo-billiard law is defined for 2D scenes only".into(),
                ));
            }
            map.validate()?;
        }
        let center = body.enclosing_ball().0;
        Ok(Scene {
            body,
            law,
            center,
            r0,
            sphere_radius,
        })
    }

    /// Same body and law under a larger sphere.
    pub fn with_sphere_radius(&self, sphere_radius: f64) -> Result<Scene> {
        Scene::with_radius(self.body.clone(), self.law.clone(), sphere_radius)
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn law(&self) -> &ReflectionLaw {
        &self.law
    }

    pub fn dim(&self) -> Dim {
        self.body.dim()
    }

    /// Sampling sphere center (the body's enclosing-ball center).
    pub fn center(&self) -> Vec3 {
        self.center
    }

    /// Enclosing radius of the body.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn sphere_radius(&self) -> f64 {
        self.sphere_radius
    }

    /// Traces from sphere point `xi` (world coordinates) with incoming
    /// direction `v` until the trajectory exits the sphere, the reflection
    /// cap trips, or a singular feature is hit.
    pub fn trace(&self, v: Vec3, xi: Vec3, max_reflections: u32) -> TraceOutcome {
        self.trace_impl(v, xi, max_reflections, None)
    }

    /// As `trace`, also recording the polyline: start, each reflection point,
    /// and the final position.
    pub fn trace_path(&self, v: Vec3, xi: Vec3, max_reflections: u32) -> (Vec<Vec3>, TraceOutcome) {
        let mut pts = Vec::new();
        let outcome = self.trace_impl(v, xi, max_reflections, Some(&mut pts));
        (pts, outcome)
    }

    fn trace_impl(
        &self,
        v: Vec3,
        xi: Vec3,
        max_reflections: u32,
        mut path: Option<&mut Vec<Vec3>>,
    ) -> TraceOutcome {
        let eps_back = BACK_REL * self.sphere_radius;
        let mut dir = v;
        let mut pos = xi - dir * eps_back;
        let mut length = -eps_back;
        let mut reflections = 0u32;
        if let Some(p) = path.as_deref_mut() {
            p.push(xi);
        }
        loop {
            let t_sphere = self.sphere_exit_t(pos, dir);
            match self.body.ray_intersect(pos, dir) {
                Some(hit) if hit.t <= t_sphere => {
                    if hit.near_edge || dir.dot(hit.normal) > 0.0 {
                        // Seam/edge contact, or a crossing seen from the
                        // material side (a filtered entry put us past a
                        // boundary): both are singular-set territory.
                        return self.finish(
                            dir,
                            hit.point,
                            length + hit.t,
                            reflections,
                            TraceStatus::DiscardedSingular,
                            path,
                        );
                    }
                    let Some(out) = self.reflect_once(dir, hit.normal) else {
                        return self.finish(
                            dir,
                            hit.point,
                            length + hit.t,
                            reflections,
                            TraceStatus::DiscardedSingular,
                            path,
                        );
                    };
                    length += hit.t;
                    pos = hit.point;
                    dir = out;
                    reflections += 1;
                    if let Some(p) = path.as_deref_mut() {
                        p.push(pos);
                    }
                    if reflections >= max_reflections {
                        return self.finish(
                            dir,
                            pos,
                            length,
                            reflections,
                            TraceStatus::Trapped,
                            path,
                        );
                    }
                }
                _ => {
                    let exit = pos + dir * t_sphere;
                    return self.finish(
                        dir,
                        exit,
                        length + t_sphere,
                        reflections,
                        TraceStatus::Exited,
                        path,
                    );
                }
            }
        }
    }

    fn finish(
        &self,
        v_plus: Vec3,
        xi_plus: Vec3,
        path_length: f64,
        reflections: u32,
        status: TraceStatus,
        path: Option<&mut Vec<Vec3>>,
    ) -> TraceOutcome {
        if let Some(p) = path {
            if p.last() != Some(&xi_plus) {
                p.push(xi_plus);
            }
        }
        TraceOutcome {
            v_plus,
            xi_plus,
            path_length,
            reflections,
            status,
        }
    }

    /// Largest root of |pos + t dir - center| = sphere_radius: the forward
    /// sphere crossing.  Starting points may sit a hair outside the sphere
    /// (the backset of the first cast); taking the largest root skips the
    /// re-entry crossing and lands on the true exit.
    fn sphere_exit_t(&self, pos: Vec3, dir: Vec3) -> f64 {
        let p = pos - self.center;
        let b = p.dot(dir);
        let disc = b * b - (p.norm2() - self.sphere_radius * self.sphere_radius);
        -b + disc.max(0.0).sqrt()
    }

    /// Exit point of the undeflected chord from `xi` in direction `v`,
    /// computed with the same arithmetic as a free flight inside `trace` so
    /// that the two agree bitwise when the body is never hit.
    pub(crate) fn free_exit(&self, v: Vec3, xi: Vec3) -> Vec3 {
        let pos = xi - v * (BACK_REL * self.sphere_radius);
        pos + v * self.sphere_exit_t(pos, v)
    }

    fn reflect_once(&self, v: Vec3, n: Vec3) -> Option<Vec3> {
        match &self.law {
            ReflectionLaw::Specular => specular_reflect(v, n),
            ReflectionLaw::Retro => Some(-v),
            ReflectionLaw::PseudoBilliard2D(map) => {
                let c = v.dot(n);
                if c.abs() < GRAZING_TOL {
                    return None;
                }
                let tangent = n.perp2();
                let s_out = map.apply(v.dot(tangent));
                let c_out = (1.0 - s_out * s_out).max(0.0).sqrt();
                Some(tangent * s_out + n * c_out)
            }
        }
    }
}

/// Traces the reversed exit `(-v_plus, xi_plus)` and reports the worst
/// mismatch against the reversed start, positions and directions on a common
/// length scale.  Near zero iff the exit map is invertible along this orbit.
pub fn reversibility_error(
    scene: &Scene,
    outcome: &TraceOutcome,
    v: Vec3,
    xi: Vec3,
    max_reflections: u32,
) -> f64 {
    debug_assert!(outcome.status == TraceStatus::Exited);
    let back = scene.trace(-outcome.v_plus, outcome.xi_plus, max_reflections);
    if back.status != TraceStatus::Exited {
        return f64::INFINITY;
    }
    let pos_err = back.xi_plus.dist(xi);
    let dir_err = scene.sphere_radius() * back.v_plus.dist(-v);
    pos_err.max(dir_err)
}
