//! Unit quaternions for composing 3D rotations in the rotation-gap check.

use crate::vec3::Vec3;

/// Quaternion `w + x i + y j + z k`.  Rotations act as `p -> q p q^-1`, so a
/// unit quaternion `cos(a/2) + sin(a/2) * axis` rotates by angle `a` about
/// `axis` (right-handed).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let (s, c) = (0.5 * angle).sin_cos();
        Quat {
            w: c,
            x: s * axis.x,
            y: s * axis.y,
            z: s * axis.z,
        }
    }

    /// Inverse of a unit quaternion.
    pub fn conjugate(self) -> Quat {
        Quat {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Hamilton product; `(a * b)` applies `b` first, then `a`.
    pub fn mul(self, o: Quat) -> Quat {
        Quat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    pub fn rotate(self, p: Vec3) -> Vec3 {
        // q p q^-1 expanded via the double-cross form.
        let u = Vec3::new(self.x, self.y, self.z);
        let t = u.cross(p) * 2.0;
        p + t * self.w + u.cross(t)
    }

    /// Rotation angle in `[0, pi]` represented by this unit quaternion.
    pub fn angle(self) -> f64 {
        2.0 * self.w.abs().clamp(0.0, 1.0).acos()
    }

    /// `sin(angle / 2)` of the represented rotation, with the angle reduced
    /// to `[0, pi]`.
    pub fn sin_half_angle(self) -> f64 {
        (1.0 - (self.w * self.w).min(1.0)).max(0.0).sqrt()
    }
}
