//! Enclosing-ball computation for CSG trees.
//!
//! Primitives get their minimal enclosing ball directly (closed form for
//! balls and boxes, Welzl's algorithm over vertices for polygons and
//! polytopes).  Unions take the minimal ball containing the children's
//! balls — exact closed form for two balls, ellipsoid-method minimization of
//! the convex cover radius `max_i(|c - c_i| + r_i)` for more.  Differences
//! reuse the base child's ball, a valid (possibly loose) cover.

use super::node::Node;
use super::polytope;
use crate::vec3::{Dim, Vec3};

pub(super) fn node_ball(node: &Node, dim: Dim) -> (Vec3, f64) {
    match node {
        Node::Ball { center, radius } => (*center, *radius),
        Node::Cuboid { min, max } => {
            let center = (*min + *max) * 0.5;
            (center, (*max - center).norm())
        }
        Node::Polygon { vertices } => welzl(vertices),
        Node::Polytope { faces } => welzl(&polytope::vertices(faces, dim)),
        Node::Union { children } => {
            let balls: Vec<(Vec3, f64)> = children.iter().map(|c| node_ball(c, dim)).collect();
            ball_cover(&balls, dim)
        }
        Node::Difference { base, .. } => node_ball(base, dim),
    }
}

/// Minimal enclosing ball of a point set (Welzl, deterministic input order).
/// The sets here are polytope/polygon vertex lists, small enough that the
/// worst-case recursion depth is irrelevant.
pub(super) fn welzl(points: &[Vec3]) -> (Vec3, f64) {
    fn contains(b: (Vec3, f64), p: Vec3) -> bool {
        p.dist(b.0) <= b.1 * (1.0 + 1e-12) + 1e-300
    }

    fn mb(points: &[Vec3], end: usize, support: &mut Vec<Vec3>) -> (Vec3, f64) {
        if end == 0 || support.len() == 4 {
            return trivial_ball(support);
        }
        let p = points[end - 1];
        let b = mb(points, end - 1, support);
        if contains(b, p) {
            return b;
        }
        support.push(p);
        let b = mb(points, end - 1, support);
        support.pop();
        b
    }

    mb(points, points.len(), &mut Vec::new())
}

/// Smallest ball with the support points on its boundary (up to 4 points).
fn trivial_ball(support: &[Vec3]) -> (Vec3, f64) {
    match support.len() {
        0 => (Vec3::ZERO, 0.0),
        1 => (support[0], 0.0),
        2 => two_point_ball(support[0], support[1]),
        3 => circumball3(support[0], support[1], support[2])
            .unwrap_or_else(|| farthest_pair_ball(support)),
        _ => circumball4(support[0], support[1], support[2], support[3])
            .or_else(|| circumball3(support[0], support[1], support[2]))
            .unwrap_or_else(|| farthest_pair_ball(support)),
    }
}

fn two_point_ball(a: Vec3, b: Vec3) -> (Vec3, f64) {
    let c = (a + b) * 0.5;
    (c, c.dist(a))
}

fn farthest_pair_ball(pts: &[Vec3]) -> (Vec3, f64) {
    let mut best = (pts[0], pts[0], 0.0);
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            let d = a.dist(b);
            if d > best.2 {
                best = (a, b, d);
            }
        }
    }
    two_point_ball(best.0, best.1)
}

/// Circumscribed ball of a (non-degenerate) triangle in 2D or 3D space.
fn circumball3(a: Vec3, b: Vec3, c: Vec3) -> Option<(Vec3, f64)> {
    let ab = b - a;
    let ac = c - a;
    let n = ab.cross(ac);
    let denom = 2.0 * n.norm2();
    if denom < 1e-24 * ab.norm2() * ac.norm2() {
        return None; // collinear
    }
    let rel = (n.cross(ab) * ac.norm2() + ac.cross(n) * ab.norm2()) / denom;
    let center = a + rel;
    Some((center, rel.norm()))
}

/// Circumscribed ball of a (non-degenerate) tetrahedron.
fn circumball4(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Option<(Vec3, f64)> {
    // Solve 2 (p_i - a) . x = |p_i|^2 - |a|^2 for the center.
    let rows = [b - a, c - a, d - a];
    let rhs = [
        0.5 * (b.norm2() - a.norm2()),
        0.5 * (c.norm2() - a.norm2()),
        0.5 * (d.norm2() - a.norm2()),
    ];
    let det = rows[0].dot(rows[1].cross(rows[2]));
    let scale = rows[0].norm() * rows[1].norm() * rows[2].norm();
    if det.abs() < 1e-12 * scale.max(1e-300) {
        return None; // coplanar
    }
    let x = rows[1].cross(rows[2]) * rhs[0]
        + rows[2].cross(rows[0]) * rhs[1]
        + rows[0].cross(rows[1]) * rhs[2];
    let center = x / det;
    Some((center, center.dist(a)))
}

/// Minimal ball containing all given balls.
pub(super) fn ball_cover(balls: &[(Vec3, f64)], dim: Dim) -> (Vec3, f64) {
    // Drop balls contained in another; handles the nested closed forms.
    let mut active: Vec<(Vec3, f64)> = Vec::new();
    for &(c, r) in balls {
        if balls
            .iter()
            .any(|&(c2, r2)| (c2, r2) != (c, r) && c2.dist(c) + r <= r2 + 1e-15 * r2.max(1.0))
        {
            continue;
        }
        if !active.contains(&(c, r)) {
            active.push((c, r));
        }
    }
    match active.len() {
        0 => (Vec3::ZERO, 0.0),
        1 => active[0],
        2 => {
            let ((c1, r1), (c2, r2)) = (active[0], active[1]);
            let d = c1.dist(c2);
            let r = 0.5 * (d + r1 + r2);
            let u = (c2 - c1) / d;
            (c1 + u * (r - r1), r)
        }
        _ => minimize_cover_radius(&active, dim),
    }
}

/// Ellipsoid-method minimization of the convex function
/// `f(c) = max_i (|c - c_i| + r_i)` — the radius of the smallest ball at
/// center `c` covering all children.  Deterministic and accurate to well
/// below the geometric tolerances used elsewhere.
fn minimize_cover_radius(balls: &[(Vec3, f64)], dim: Dim) -> (Vec3, f64) {
    let d = dim.ambient();
    let f = |c: Vec3| -> f64 {
        balls
            .iter()
            .map(|&(ci, ri)| c.dist(ci) + ri)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let subgrad = |c: Vec3| -> Vec3 {
        let mut best = f64::NEG_INFINITY;
        let mut g = Vec3::new(1.0, 0.0, 0.0);
        for &(ci, ri) in balls {
            let dist = c.dist(ci);
            if dist + ri > best {
                best = dist + ri;
                g = if dist > 1e-300 {
                    (c - ci) / dist
                } else {
                    Vec3::new(1.0, 0.0, 0.0)
                };
            }
        }
        g
    };

    let mut x = balls.iter().fold(Vec3::ZERO, |a, &(c, _)| a + c) / balls.len() as f64;
    let r0 = f(x);
    // P spans only the active coordinates; z stays zero in 2D.
    let mut p = [[0.0f64; 3]; 3];
    for (i, row) in p.iter_mut().enumerate().take(d) {
        row[i] = r0 * r0 * 4.0;
    }
    let nf = d as f64;
    let mut best = (x, f(x));
    for _ in 0..1600 {
        let g = subgrad(x);
        let gv = [g.x, g.y, g.z];
        let mut pg = [0.0f64; 3];
        for i in 0..d {
            for (j, &gj) in gv.iter().enumerate().take(d) {
                pg[i] += p[i][j] * gj;
            }
        }
        let gpg: f64 = (0..d).map(|i| gv[i] * pg[i]).sum();
        if gpg <= 1e-300 {
            break;
        }
        let denom = gpg.sqrt();
        x = x - Vec3::new(pg[0], pg[1], pg[2]) / ((nf + 1.0) * denom);
        let fx = f(x);
        if fx < best.1 {
            best = (x, fx);
        }
        let scale = nf * nf / (nf * nf - 1.0);
        for i in 0..d {
            for j in 0..d {
                p[i][j] = scale * (p[i][j] - 2.0 / (nf + 1.0) * pg[i] * pg[j] / gpg);
            }
        }
    }
    best
}
