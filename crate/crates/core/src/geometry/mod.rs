//! Constructive solid geometry for mirror bodies.
//!
//! A [`Body`] is a validated CSG tree over four primitive leaves (balls,
//! axis-aligned boxes, simple 2D polygons, bounded halfspace polytopes)
//! combined by `Union` and `Difference`.  Validation happens once at
//! construction: afterwards every query (`contains`, `ray_intersect`,
//! `volume`, ...) can assume a well-formed bounded shape with a known
//! enclosing ball.

mod enclosing;
mod intersect;
mod measure;
mod node;
mod polytope;
mod shapefile;

pub use node::{Halfspace, Node};
pub use shapefile::{
    shape_from_json, shape_to_json, spec_from_body, FaceSpec, ShapeNode, ShapeSpec,
};

use crate::error::Error;
use crate::estimators::Estimate;
use crate::vec3::{Dim, Vec3};
use crate::Result;

/// Minimum ray advance, relative to the enclosing radius.  Intersections
/// closer than this along a ray are treated as the surface the ray just left.
pub const EPS_STEP_REL: f64 = 1e-12;

/// Feature-proximity band, relative to the enclosing radius.  Hits within
/// this distance of a vertex, edge or CSG seam are flagged [`Hit::near_edge`]
/// and later discarded by the tracer.
pub const EPS_EDGE_REL: f64 = 1e-9;

/// First intersection of a ray with the body boundary.
#[derive(Clone, Copy, Debug)]
pub struct Hit {
    /// Ray parameter of the intersection (`point = origin + t * dir`).
    pub t: f64,
    /// Intersection point, on the boundary within `1e-9 * r0`.
    pub point: Vec3,
    /// Unit normal pointing out of the body material at `point`.
    pub normal: Vec3,
    /// True when the hit is within the feature-proximity band of a vertex,
    /// box edge, polytope edge or CSG seam; such reflections are unreliable.
    pub near_edge: bool,
}

/// Controls the volume query: sample count and seed for the Monte Carlo
/// fallback used when no analytic volume is available.
#[derive(Clone, Copy, Debug)]
pub struct VolumeConfig {
    pub samples: u64,
    pub seed: u64,
    /// Skip the analytic fast path even when one exists (dual-route testing).
    pub force_monte_carlo: bool,
}

impl VolumeConfig {
    pub fn new(samples: u64, seed: u64) -> VolumeConfig {
        VolumeConfig {
            samples,
            seed,
            force_monte_carlo: false,
        }
    }
}

/// A validated, bounded mirror body.
#[derive(Clone, Debug)]
pub struct Body {
    dim: Dim,
    node: Node,
    enclosing_center: Vec3,
    enclosing_radius: f64,
}

impl Body {
    /// Validates the CSG tree and computes the enclosing ball.  Polytope
    /// normals are unit-normalized in place.
    ///
    /// Rejected shapes: non-positive radii, inverted box extents, polygons
    /// that are non-simple / clockwise / not in the `z = 0` plane, unbounded
    /// or empty polytopes, polygons in 3D scenes, and non-finite input.
    pub fn new(dim: Dim, mut node: Node) -> Result<Body> {
        node::validate(&mut node, dim)?;
        let (enclosing_center, enclosing_radius) = enclosing::node_ball(&node, dim);
        Ok(Body {
            dim,
            node,
            enclosing_center,
            enclosing_radius,
        })
    }

    /// The empty body (a union of zero children).  Its enclosing radius is 0,
    /// so scenes over it must specify the sphere radius explicitly.
    pub fn empty(dim: Dim) -> Body {
        Body {
            dim,
            node: Node::Union {
                children: Vec::new(),
            },
            enclosing_center: Vec3::ZERO,
            enclosing_radius: 0.0,
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    /// Center and radius of the enclosing ball computed at construction:
    /// minimal for primitives, minimal over child balls for unions, and the
    /// base child's ball (a valid but possibly loose cover) for differences.
    pub fn enclosing_ball(&self) -> (Vec3, f64) {
        (self.enclosing_center, self.enclosing_radius)
    }

    pub fn enclosing_radius(&self) -> f64 {
        self.enclosing_radius
    }

    /// Closed-set membership: boundary points count as inside, and points of
    /// a subtracted region count as removed only when strictly interior to it.
    pub fn contains(&self, p: Vec3) -> bool {
        node::contains(&self.node, p, false)
    }

    /// Nearest boundary crossing of the ray `origin + t * dir` (unit `dir`)
    /// with `t > EPS_STEP_REL * r0`, or `None` if the ray misses.  The normal
    /// always points out of the material, so entering hits have
    /// `dot(dir, normal) < 0`.
    pub fn ray_intersect(&self, origin: Vec3, dir: Vec3) -> Option<Hit> {
        intersect::ray_intersect(self, origin, dir)
    }

    /// Axis-aligned bounding box, `None` for the empty body.
    pub fn aabb(&self) -> Option<(Vec3, Vec3)> {
        node::aabb(&self.node, self.dim)
    }

    /// d-volume of the body: analytic (zero stderr) for primitives, provably
    /// disjoint unions and ball-minus-ball differences; otherwise a hit-or-
    /// miss Monte Carlo estimate over the bounding box.
    pub fn volume(&self, cfg: &VolumeConfig) -> Estimate {
        measure::volume(self, cfg)
    }

    /// The analytic fast path of [`Body::volume`], when one exists.
    pub fn analytic_volume(&self) -> Option<f64> {
        measure::analytic_volume(&self.node, self.dim)
    }

    /// The Monte Carlo route of [`Body::volume`], always available.
    pub fn monte_carlo_volume(&self, samples: u64, seed: u64) -> Estimate {
        measure::monte_carlo_volume(self, samples, seed)
    }

    /// Exact boundary measure (perimeter in 2D, surface area in 3D) for
    /// convex primitives; `None` for CSG trees and nonconvex polygons.
    pub fn boundary_area(&self) -> Option<f64> {
        measure::boundary_area(&self.node, self.dim)
    }

    /// Parses and validates a body from the JSON shape format.
    pub fn from_spec(spec: &ShapeSpec) -> Result<Body> {
        shapefile::body_from_spec(spec)
    }

    /// Reads a shape file from disk.
    pub fn load(path: &std::path::Path) -> Result<Body> {
        let text = std::fs::read_to_string(path)?;
        let spec = shape_from_json(&text)?;
        Body::from_spec(&spec)
    }

    pub(crate) fn feature_eps(&self) -> f64 {
        EPS_EDGE_REL * self.enclosing_radius
    }

    pub(crate) fn step_eps(&self) -> f64 {
        EPS_STEP_REL * self.enclosing_radius
    }
}

/// Guards against silently treating a 3D point as 2D input.
pub(crate) fn check_planar(dim: Dim, p: Vec3) -> std::result::Result<(), Error> {
    if dim == Dim::Two && p.z != 0.0 {
        return Err(Error::InvalidBody(format!(
            "2D point has nonzero z component: {p:?}"
        )));
    }
    Ok(())
}
