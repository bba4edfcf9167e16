//! Small fixed-size vector type shared by the 2D and 3D code paths.
//!
//! Planar bodies are embedded in the `z = 0` plane: every 2D vector is a
//! [`Vec3`] with `z == 0`, and all operations used on the 2D path preserve
//! that invariant.  The "last coordinate" of the ambient space (the axis the
//! sampling construction rotates to) is `y` in 2D and `z` in 3D; use
//! [`Dim::pole`] and [`Dim::axial`] instead of touching fields directly.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Ambient dimension of a scene.  Only 2 and 3 are supported by the geometry
/// kernel; purely numeric routines (surface areas, integrals) accept wider
/// ranges as plain `usize`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn ambient(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn from_usize(d: usize) -> Option<Dim> {
        match d {
            2 => Some(Dim::Two),
            3 => Some(Dim::Three),
            _ => None,
        }
    }

    /// Unit vector along the distinguished last coordinate axis: `(0, 1)` in
    /// 2D, `(0, 0, 1)` in 3D.
    pub fn pole(self) -> Vec3 {
        match self {
            Dim::Two => Vec3::new(0.0, 1.0, 0.0),
            Dim::Three => Vec3::new(0.0, 0.0, 1.0),
        }
    }

    /// Component of `p` along the pole axis.
    pub fn axial(self, p: Vec3) -> f64 {
        match self {
            Dim::Two => p.y,
            Dim::Three => p.z,
        }
    }

    /// Squared norm of the component of `p` orthogonal to the pole axis.
    pub fn lateral_norm2(self, p: Vec3) -> f64 {
        match self {
            Dim::Two => p.x * p.x,
            Dim::Three => p.x * p.x + p.y * p.y,
        }
    }

    /// Builds a vector from a lateral part (`x` in 2D, `(x, y)` in 3D) and an
    /// axial part.
    pub fn assemble(self, lateral: [f64; 2], axial: f64) -> Vec3 {
        match self {
            Dim::Two => Vec3::new(lateral[0], axial, 0.0),
            Dim::Three => Vec3::new(lateral[0], lateral[1], axial),
        }
    }
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.ambient())
    }
}

/// A point or direction; 2D data lives in the `z = 0` slice.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn new(x: f64, y: f64, z: f64) -> Vec3 {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// `self / |self|`; returns `None` when the norm is below `1e-300`.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self / n)
        }
    }

    /// Counterclockwise 90-degree rotation in the plane (2D helper).
    pub fn perp2(self) -> Vec3 {
        Vec3::new(-self.y, self.x, 0.0)
    }

    /// Componentwise finiteness check, used by input validation.
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_follows_right_hand_rule() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(x.cross(y), Vec3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn perp2_rotates_ccw() {
        let e = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(e.perp2(), Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(e.perp2().perp2(), -e);
    }

    #[test]
    fn dim_assemble_and_split_are_inverse() {
        let p = Dim::Two.assemble([0.25, 0.0], -0.5);
        assert_eq!(p, Vec3::new(0.25, -0.5, 0.0));
        assert_eq!(Dim::Two.axial(p), -0.5);
        assert_eq!(Dim::Two.lateral_norm2(p), 0.0625);

        let q = Dim::Three.assemble([0.3, -0.4], 0.9);
        assert_eq!(Dim::Three.axial(q), 0.9);
        assert!((Dim::Three.lateral_norm2(q) - 0.25).abs() < 1e-15);
    }
}
