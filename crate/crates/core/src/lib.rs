//! Estimation of the visibility index and mean resistance of mirror bodies.
//!
//! A *mirror body* is a bounded reflecting obstacle sitting inside a reference
//! sphere.  Incoming rays are sampled on the sphere with the flux measure
//! `|<v, n>| dv dxi`, traced through specular (or generalized) reflections off
//! the body, and the deviation angle between entry and exit direction is
//! aggregated into integral functionals:
//!
//! * the visibility index `F(D) = ∫ f(arccos<v, v+>) dmu` for a monotone
//!   angle weight `f` with `f(0) = 0`, and
//! * the mean resistance, the special case `f(theta) = 1 - cos(theta)`.
//!
//! The crate provides the geometry kernel (CSG bodies over balls, boxes,
//! polygons and halfspace polytopes), the billiard tracer, flux-measure
//! samplers, Monte Carlo estimators, closed-form and numeric bound checks
//! (volume/visibility inequalities, transport and phase-volume identities,
//! rotation-gap envelopes), and derivative-free search over small shape
//! families.

pub mod billiard;
pub mod bounds;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod numerics;
pub mod quat;
pub mod sampling;
pub mod search;
pub mod vec3;

pub use error::Error;
pub use vec3::{Dim, Vec3};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
