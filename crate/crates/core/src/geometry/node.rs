//! CSG tree nodes, construction-time validation and point queries.

use super::polytope;
use crate::error::Error;
use crate::vec3::{Dim, Vec3};
use crate::Result;

/// Halfspace `dot(normal, x) <= offset`; normals are unit length after body
/// validation.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Vec3,
    pub offset: f64,
}

/// One node of a CSG tree.  2D geometry lives in the `z = 0` plane.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Ball {
        center: Vec3,
        radius: f64,
    },
    /// Axis-aligned box with `min < max` componentwise (z fixed to 0 in 2D).
    Cuboid {
        min: Vec3,
        max: Vec3,
    },
    /// Simple polygon with counterclockwise vertex order; 2D scenes only.
    Polygon {
        vertices: Vec<Vec3>,
    },
    /// Bounded nonempty intersection of halfspaces.
    Polytope {
        faces: Vec<Halfspace>,
    },
    /// Union of children; an empty list is the empty body.
    Union {
        children: Vec<Node>,
    },
    /// Material of `base` minus the interior of `cut`.
    Difference {
        base: Box<Node>,
        cut: Box<Node>,
    },
}

pub(super) fn validate(node: &mut Node, dim: Dim) -> Result<()> {
    match node {
        Node::Ball { center, radius } => {
            if !center.is_finite() || !radius.is_finite() || *radius <= 0.0 {
                return Err(Error::InvalidBody(format!(
                    "ball needs finite center and radius > 0, got radius {radius}"
                )));
            }
            super::check_planar(dim, *center)?;
        }
        Node::Cuboid { min, max } => {
            if !min.is_finite() || !max.is_finite() {
                return Err(Error::InvalidBody("box extents must be finite".into()));
            }
            super::check_planar(dim, *min)?;
            super::check_planar(dim, *max)?;
            let ok = match dim {
                Dim::Two => min.x < max.x && min.y < max.y,
                Dim::Three => min.x < max.x && min.y < max.y && min.z < max.z,
            };
            if !ok {
                return Err(Error::InvalidBody(format!(
                    "box needs min < max componentwise: {min:?} .. {max:?}"
                )));
            }
        }
        Node::Polygon { vertices } => {
            if dim != Dim::Two {
                return Err(Error::InvalidBody(
                    "polygons are only available in 2D scenes".into(),
                ));
            }
            validate_polygon(vertices)?;
        }
        Node::Polytope { faces } => {
            for f in faces.iter_mut() {
                if !f.normal.is_finite() || !f.offset.is_finite() {
                    return Err(Error::InvalidBody("polytope face must be finite".into()));
                }
                super::check_planar(dim, f.normal)?;
                let n = f.normal.norm();
                if n < 1e-12 {
                    return Err(Error::InvalidBody(
                        "polytope face normal is (near) zero".into(),
                    ));
                }
                // Normalize so later code can treat offsets as distances.
                f.normal = f.normal / n;
                f.offset /= n;
            }
            polytope::validate_bounded_nonempty(faces, dim)?;
        }
        Node::Union { children } => {
            for c in children.iter_mut() {
                validate(c, dim)?;
            }
        }
        Node::Difference { base, cut } => {
            validate(base, dim)?;
            validate(cut, dim)?;
        }
    }
    Ok(())
}

fn validate_polygon(vertices: &[Vec3]) -> Result<()> {
    let m = vertices.len();
    if m < 3 {
        return Err(Error::InvalidBody(format!(
            "polygon needs >= 3 vertices, got {m}"
        )));
    }
    for v in vertices {
        if !v.is_finite() {
            return Err(Error::InvalidBody("polygon vertex must be finite".into()));
        }
        super::check_planar(Dim::Two, *v)?;
    }
    let scale = vertices
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for i in 0..m {
        let e = vertices[(i + 1) % m] - vertices[i];
        if e.norm() < 1e-12 * scale {
            return Err(Error::InvalidBody(format!(
                "polygon has a degenerate edge at vertex {i}"
            )));
        }
    }
    // Counterclockwise orientation <=> positive shoelace sum.
    if shoelace_area(vertices) <= 0.0 {
        return Err(Error::InvalidBody(
            "polygon vertices must be in counterclockwise order".into(),
        ));
    }
    // Simplicity: no two non-adjacent edges may intersect.
    for i in 0..m {
        let (a1, a2) = (vertices[i], vertices[(i + 1) % m]);
        for j in (i + 1)..m {
            // Skip the shared-endpoint pairs (i, i+1) and the closing pair (0, m-1).
            if j == i + 1 || (i == 0 && j == m - 1) {
                continue;
            }
            let (b1, b2) = (vertices[j], vertices[(j + 1) % m]);
            if segments_intersect(a1, a2, b1, b2) {
                return Err(Error::InvalidBody(format!(
                    "polygon is not simple: edges {i} and {j} cross"
                )));
            }
        }
    }
    Ok(())
}

/// Signed polygon area (positive for CCW order).
pub(super) fn shoelace_area(vertices: &[Vec3]) -> f64 {
    let m = vertices.len();
    let mut acc = 0.0;
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        acc += a.x * b.y - b.x * a.y;
    }
    0.5 * acc
}

fn segments_intersect(a1: Vec3, a2: Vec3, b1: Vec3, b2: Vec3) -> bool {
    let d = |p: Vec3, q: Vec3, r: Vec3| (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    let d1 = d(b1, b2, a1);
    let d2 = d(b1, b2, a2);
    let d3 = d(a1, a2, b1);
    let d4 = d(a1, a2, b2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |p: Vec3, q: Vec3, r: Vec3, dv: f64| {
        dv == 0.0
            && r.x >= p.x.min(q.x)
            && r.x <= p.x.max(q.x)
            && r.y >= p.y.min(q.y)
            && r.y <= p.y.max(q.y)
    };
    on(b1, b2, a1, d1) || on(b1, b2, a2, d2) || on(a1, a2, b1, d3) || on(a1, a2, b2, d4)
}

/// Membership test.  `strict` asks for the open interior; the closed flavour
/// is used for material, the strict one for subtracted regions, so that a
/// `Difference` keeps its internal boundary.
pub(super) fn contains(node: &Node, p: Vec3, strict: bool) -> bool {
    match node {
        Node::Ball { center, radius } => {
            let d2 = (p - *center).norm2();
            let r2 = radius * radius;
            if strict {
                d2 < r2
            } else {
                d2 <= r2
            }
        }
        Node::Cuboid { min, max } => {
            let inside = |lo: f64, hi: f64, x: f64| {
                if strict {
                    lo < x && x < hi
                } else {
                    lo <= x && x <= hi
                }
            };
            // In 2D min.z == max.z == 0 and p.z == 0, so the closed test is
            // satisfied; treat the z axis as closed regardless of `strict`.
            inside(min.x, max.x, p.x) && inside(min.y, max.y, p.y) && min.z <= p.z && p.z <= max.z
        }
        Node::Polygon { vertices } => polygon_contains(vertices, p),
        Node::Polytope { faces } => faces.iter().all(|f| {
            let s = f.normal.dot(p) - f.offset;
            if strict {
                s < 0.0
            } else {
                s <= 0.0
            }
        }),
        Node::Union { children } => children.iter().any(|c| contains(c, p, strict)),
        Node::Difference { base, cut } => contains(base, p, strict) && !contains(cut, p, !strict),
    }
}

/// Even-odd crossing test; boundary points resolve arbitrarily, which is fine
/// for the measure-zero situations where it matters.
fn polygon_contains(vertices: &[Vec3], p: Vec3) -> bool {
    let m = vertices.len();
    let mut inside = false;
    let mut j = m - 1;
    for i in 0..m {
        let (a, b) = (vertices[i], vertices[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Axis-aligned bounding box; `None` for (unions of) nothing.
pub(super) fn aabb(node: &Node, dim: Dim) -> Option<(Vec3, Vec3)> {
    match node {
        Node::Ball { center, radius } => {
            let r = *radius;
            let rz = if dim == Dim::Two { 0.0 } else { r };
            Some((
                Vec3::new(center.x - r, center.y - r, center.z - rz),
                Vec3::new(center.x + r, center.y + r, center.z + rz),
            ))
        }
        Node::Cuboid { min, max } => Some((*min, *max)),
        Node::Polygon { vertices } => point_cloud_aabb(vertices),
        Node::Polytope { faces } => point_cloud_aabb(&polytope::vertices(faces, dim)),
        Node::Union { children } => {
            let mut acc: Option<(Vec3, Vec3)> = None;
            for c in children {
                if let Some((lo, hi)) = aabb(c, dim) {
                    acc = Some(match acc {
                        None => (lo, hi),
                        Some((alo, ahi)) => (
                            Vec3::new(alo.x.min(lo.x), alo.y.min(lo.y), alo.z.min(lo.z)),
                            Vec3::new(ahi.x.max(hi.x), ahi.y.max(hi.y), ahi.z.max(hi.z)),
                        ),
                    });
                }
            }
            acc
        }
        Node::Difference { base, .. } => aabb(base, dim),
    }
}

fn point_cloud_aabb(pts: &[Vec3]) -> Option<(Vec3, Vec3)> {
    let first = *pts.first()?;
    let mut lo = first;
    let mut hi = first;
    for p in &pts[1..] {
        lo = Vec3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
        hi = Vec3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
    }
    Some((lo, hi))
}

/// Approximate distance from `p` to the boundary of a primitive leaf, exact
/// for balls and boxes.  Only used to flag hits near CSG seams, so a slight
/// underestimate (polytope face planes extended beyond their faces) merely
/// widens the discarded band.
pub(super) fn boundary_distance(node: &Node, dim: Dim, p: Vec3) -> f64 {
    match node {
        Node::Ball { center, radius } => ((p - *center).norm() - radius).abs(),
        Node::Cuboid { min, max } => {
            // Per-axis signed distance to the slab (negative inside).
            let dx = (min.x - p.x).max(p.x - max.x);
            let dy = (min.y - p.y).max(p.y - max.y);
            let mut worst = dx.max(dy);
            let mut out2 = dx.max(0.0).powi(2) + dy.max(0.0).powi(2);
            if dim == Dim::Three {
                let dz = (min.z - p.z).max(p.z - max.z);
                worst = worst.max(dz);
                out2 += dz.max(0.0).powi(2);
            }
            if worst > 0.0 {
                out2.sqrt()
            } else {
                -worst
            }
        }
        Node::Polygon { vertices } => {
            let m = vertices.len();
            let mut best = f64::INFINITY;
            for i in 0..m {
                best = best.min(segment_distance(vertices[i], vertices[(i + 1) % m], p));
            }
            best
        }
        Node::Polytope { faces } => faces
            .iter()
            .map(|f| (f.normal.dot(p) - f.offset).abs())
            .fold(f64::INFINITY, f64::min),
        Node::Union { .. } | Node::Difference { .. } => {
            unreachable!("boundary_distance is a leaf query")
        }
    }
}

fn segment_distance(a: Vec3, b: Vec3, p: Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.norm2()).clamp(0.0, 1.0);
    (a + ab * t).dist(p)
}

/// Visits every primitive leaf of the tree.
pub(super) fn for_each_leaf<'a>(node: &'a Node, f: &mut impl FnMut(&'a Node)) {
    match node {
        Node::Union { children } => {
            for c in children {
                for_each_leaf(c, f);
            }
        }
        Node::Difference { base, cut } => {
            for_each_leaf(base, f);
            for_each_leaf(cut, f);
        }
        leaf => f(leaf),
    }
}
