//! Ray/CSG intersection via material-interval (span) composition.
//!
//! Each node contributes the sorted disjoint intervals of ray parameters
//! where the ray is inside its material, together with the boundary surface
//! data at each interval end.  Union merges intervals, Difference subtracts
//! them (flipping the subtracted child's normals), and the final hit is the
//! earliest interval boundary past the minimum ray advance.

use super::node::{self, Halfspace, Node};
use super::{Body, Hit};
use crate::vec3::{Dim, Vec3};

#[derive(Clone, Copy, Debug)]
struct Surface {
    normal: Vec3,
    near_edge: bool,
}

#[derive(Clone, Copy, Debug)]
struct Span {
    t_in: f64,
    s_in: Surface,
    t_out: f64,
    s_out: Surface,
}

pub(super) fn ray_intersect(body: &Body, origin: Vec3, dir: Vec3) -> Option<Hit> {
    let dir = dir.normalized()?;
    let eps_edge = body.feature_eps();
    let eps_step = body.step_eps();
    let spans = node_spans(&body.node, body.dim, origin, dir, eps_edge);

    let mut first: Option<(f64, Surface)> = None;
    for sp in &spans {
        for (t, s) in [(sp.t_in, sp.s_in), (sp.t_out, sp.s_out)] {
            if t > eps_step && first.map_or(true, |(bt, _)| t < bt) {
                first = Some((t, s));
            }
        }
    }
    let (t, surf) = first?;
    let point = origin + dir * t;
    let near_edge = surf.near_edge || near_csg_seam(&body.node, body.dim, point, eps_edge);
    Some(Hit {
        t,
        point,
        normal: surf.normal,
        near_edge,
    })
}

/// A point is near a seam when it sits within the feature band of the
/// boundaries of two or more primitive leaves (its own contributor counts as
/// one of them).
fn near_csg_seam(tree: &Node, dim: Dim, p: Vec3, eps: f64) -> bool {
    let mut close = 0u32;
    node::for_each_leaf(tree, &mut |leaf| {
        if node::boundary_distance(leaf, dim, p) < eps {
            close += 1;
        }
    });
    close >= 2
}

fn node_spans(tree: &Node, dim: Dim, o: Vec3, d: Vec3, eps: f64) -> Vec<Span> {
    match tree {
        Node::Ball { center, radius } => ball_spans(*center, *radius, o, d),
        Node::Cuboid { min, max } => cuboid_spans(*min, *max, dim, o, d, eps),
        Node::Polygon { vertices } => polygon_spans(vertices, o, d, eps),
        Node::Polytope { faces } => polytope_spans(faces, o, d, eps),
        Node::Union { children } => {
            let mut all: Vec<Span> = Vec::new();
            for c in children {
                all.extend(node_spans(c, dim, o, d, eps));
            }
            merge_spans(all)
        }
        Node::Difference { base, cut } => {
            let b = node_spans(base, dim, o, d, eps);
            let c = node_spans(cut, dim, o, d, eps);
            subtract_spans(b, &c)
        }
    }
}

fn ball_spans(center: Vec3, radius: f64, o: Vec3, d: Vec3) -> Vec<Span> {
    let oc = o - center;
    let b = oc.dot(d);
    let disc = b * b - (oc.norm2() - radius * radius);
    if disc <= 0.0 {
        return Vec::new(); // miss or tangent graze
    }
    let s = disc.sqrt();
    let (t1, t2) = (-b - s, -b + s);
    let n_at = |t: f64| ((o + d * t) - center) / radius;
    vec![Span {
        t_in: t1,
        s_in: Surface {
            normal: n_at(t1),
            near_edge: false,
        },
        t_out: t2,
        s_out: Surface {
            normal: n_at(t2),
            near_edge: false,
        },
    }]
}

fn cuboid_spans(min: Vec3, max: Vec3, dim: Dim, o: Vec3, d: Vec3, eps: f64) -> Vec<Span> {
    let axes: &[(f64, f64, f64, f64, Vec3)] = &[
        (o.x, d.x, min.x, max.x, Vec3::new(1.0, 0.0, 0.0)),
        (o.y, d.y, min.y, max.y, Vec3::new(0.0, 1.0, 0.0)),
        (o.z, d.z, min.z, max.z, Vec3::new(0.0, 0.0, 1.0)),
    ];
    let n_axes = dim.ambient();
    let mut t_in = f64::NEG_INFINITY;
    let mut t_out = f64::INFINITY;
    let mut n_in = Vec3::ZERO;
    let mut n_out = Vec3::ZERO;
    for &(oo, dd, lo, hi, e) in &axes[..n_axes] {
        if dd == 0.0 {
            if oo < lo || oo > hi {
                return Vec::new();
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - oo) / dd, (hi - oo) / dd);
        let mut ne = -e * dd.signum();
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        if ta > t_in {
            t_in = ta;
            n_in = ne;
        }
        ne = -ne;
        if tb < t_out {
            t_out = tb;
            n_out = ne;
        }
    }
    if t_in >= t_out || t_in == f64::NEG_INFINITY {
        return Vec::new();
    }
    let edge_flag = |t: f64, face_n: Vec3| {
        let p = o + d * t;
        let mut m = f64::INFINITY;
        for &(_, _, lo, hi, e) in &axes[..n_axes] {
            if e.dot(face_n).abs() > 0.5 {
                continue; // skip the face's own axis
            }
            let x = p.dot(e);
            m = m.min((x - lo).abs().min((hi - x).abs()));
        }
        m < eps
    };
    vec![Span {
        t_in,
        s_in: Surface {
            normal: n_in,
            near_edge: edge_flag(t_in, n_in),
        },
        t_out,
        s_out: Surface {
            normal: n_out,
            near_edge: edge_flag(t_out, n_out),
        },
    }]
}

fn polygon_spans(vertices: &[Vec3], o: Vec3, d: Vec3, eps: f64) -> Vec<Span> {
    let m = vertices.len();
    let mut crossings: Vec<(f64, Surface)> = Vec::new();
    for i in 0..m {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let e = b - a;
        // Solve o + t d = a + u e in the plane (2x2 Cramer).
        let det = d.x * -e.y - d.y * -e.x;
        if det.abs() < 1e-300 {
            continue; // ray parallel to the edge
        }
        let rx = a.x - o.x;
        let ry = a.y - o.y;
        let t = (rx * -e.y - ry * -e.x) / det;
        let u = (d.x * ry - d.y * rx) / det;
        // Half-open edge parameter keeps shared vertices from double-counting.
        if !(0.0..1.0).contains(&u) {
            continue;
        }
        let elen = e.norm();
        let near_edge = u * elen < eps || (1.0 - u) * elen < eps;
        let normal = Vec3::new(e.y, -e.x, 0.0) / elen; // outward for CCW order
        crossings.push((t, Surface { normal, near_edge }));
    }
    crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Even-odd pairing; an odd tail (vertex graze) is dropped.
    let mut spans = Vec::new();
    let mut it = crossings.chunks_exact(2);
    for pair in &mut it {
        spans.push(Span {
            t_in: pair[0].0,
            s_in: pair[0].1,
            t_out: pair[1].0,
            s_out: pair[1].1,
        });
    }
    spans
}

fn polytope_spans(faces: &[Halfspace], o: Vec3, d: Vec3, eps: f64) -> Vec<Span> {
    let mut t_in = f64::NEG_INFINITY;
    let mut t_out = f64::INFINITY;
    let mut n_in = Vec3::ZERO;
    let mut n_out = Vec3::ZERO;
    for f in faces {
        let denom = f.normal.dot(d);
        let dist = f.normal.dot(o) - f.offset;
        if denom.abs() < 1e-300 {
            if dist > 0.0 {
                return Vec::new();
            }
            continue;
        }
        let t = -dist / denom;
        if denom < 0.0 {
            if t > t_in {
                t_in = t;
                n_in = f.normal;
            }
        } else if t < t_out {
            t_out = t;
            n_out = f.normal;
        }
    }
    if t_in >= t_out || t_in == f64::NEG_INFINITY || t_out == f64::INFINITY {
        return Vec::new();
    }
    let edge_flag = |t: f64, own: Vec3| {
        let p = o + d * t;
        faces
            .iter()
            .any(|f| f.normal != own && (f.normal.dot(p) - f.offset).abs() < eps)
    };
    vec![Span {
        t_in,
        s_in: Surface {
            normal: n_in,
            near_edge: edge_flag(t_in, n_in),
        },
        t_out,
        s_out: Surface {
            normal: n_out,
            near_edge: edge_flag(t_out, n_out),
        },
    }]
}

/// Interval union of possibly overlapping spans (closed-set semantics:
/// touching intervals merge).
fn merge_spans(mut spans: Vec<Span>) -> Vec<Span> {
    if spans.len() <= 1 {
        return spans;
    }
    spans.sort_by(|a, b| a.t_in.partial_cmp(&b.t_in).unwrap());
    let mut out: Vec<Span> = Vec::new();
    for sp in spans {
        match out.last_mut() {
            Some(cur) if sp.t_in <= cur.t_out => {
                if sp.t_out > cur.t_out {
                    cur.t_out = sp.t_out;
                    cur.s_out = sp.s_out;
                }
            }
            _ => out.push(sp),
        }
    }
    out
}

/// Interval subtraction `base \ cut`; boundaries created by the cut carry the
/// cut child's normal flipped to point out of the remaining material.
fn subtract_spans(base: Vec<Span>, cut: &[Span]) -> Vec<Span> {
    let flip = |s: Surface| Surface {
        normal: -s.normal,
        near_edge: s.near_edge,
    };
    let mut out = Vec::new();
    for b in base {
        let mut start = b.t_in;
        let mut start_surf = b.s_in;
        let mut alive = true;
        for c in cut {
            if c.t_out <= start || c.t_in >= b.t_out {
                continue;
            }
            if c.t_in > start {
                out.push(Span {
                    t_in: start,
                    s_in: start_surf,
                    t_out: c.t_in,
                    s_out: flip(c.s_in),
                });
            }
            if c.t_out >= b.t_out {
                alive = false;
                break;
            }
            start = c.t_out;
            start_surf = flip(c.s_out);
        }
        if alive && start < b.t_out {
            out.push(Span {
                t_in: start,
                s_in: start_surf,
                t_out: b.t_out,
                s_out: b.s_out,
            });
        }
    }
    out
}
