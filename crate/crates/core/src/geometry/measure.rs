//! Volumes and boundary areas: closed forms where the tree structure allows
//! them, hit-or-miss Monte Carlo over the bounding box otherwise.

use super::node::{self, Node};
use super::{enclosing, polytope, Body, VolumeConfig};
use crate::estimators::{self, Acc, Estimate};
use crate::sampling::StreamRng;
use crate::vec3::{Dim, Vec3};

pub(super) fn volume(body: &Body, cfg: &VolumeConfig) -> Estimate {
    if !cfg.force_monte_carlo {
        if let Some(v) = analytic_volume(&body.node, body.dim) {
            return Estimate::exact(v);
        }
    }
    monte_carlo_volume(body, cfg.samples, cfg.seed)
}

/// Exact volume when the tree admits one: primitives, unions whose children
/// have pairwise disjoint enclosing balls, and ball-minus-ball differences
/// with clear containment.  `None` sends the caller to Monte Carlo.
pub(super) fn analytic_volume(tree: &Node, dim: Dim) -> Option<f64> {
    match tree {
        Node::Ball { radius, .. } => Some(match dim {
            Dim::Two => std::f64::consts::PI * radius * radius,
            Dim::Three => 4.0 * std::f64::consts::PI * radius.powi(3) / 3.0,
        }),
        Node::Cuboid { min, max } => {
            let e = *max - *min;
            Some(match dim {
                Dim::Two => e.x * e.y,
                Dim::Three => e.x * e.y * e.z,
            })
        }
        Node::Polygon { vertices } => Some(node::shoelace_area(vertices)),
        Node::Polytope { faces } => Some(match dim {
            Dim::Two => node::shoelace_area(&polytope::ordered_cycle_2d(faces)),
            Dim::Three => {
                // Divergence theorem with F = x/3 over the planar faces:
                // each face contributes offset * area / 3.
                faces
                    .iter()
                    .zip(polytope::face_areas_3d(faces))
                    .map(|(f, a)| f.offset * a)
                    .sum::<f64>()
                    / 3.0
            }
        }),
        Node::Union { children } => {
            let balls: Vec<(Vec3, f64)> = children
                .iter()
                .map(|c| enclosing::node_ball(c, dim))
                .collect();
            for i in 0..balls.len() {
                for j in i + 1..balls.len() {
                    if balls[i].0.dist(balls[j].0) < balls[i].1 + balls[j].1 {
                        return None; // possible overlap: no additivity
                    }
                }
            }
            let mut total = 0.0;
            for c in children {
                total += analytic_volume(c, dim)?;
            }
            Some(total)
        }
        Node::Difference { base, cut } => {
            let (bc, br) = enclosing::node_ball(base, dim);
            let (cc, cr) = enclosing::node_ball(cut, dim);
            if bc.dist(cc) >= br + cr {
                return analytic_volume(base, dim); // cut misses the base
            }
            if let (
                Node::Ball {
                    center: b0,
                    radius: rb,
                },
                Node::Ball {
                    center: c0,
                    radius: rc,
                },
            ) = (base.as_ref(), cut.as_ref())
            {
                let d = b0.dist(*c0);
                if d + rc <= *rb {
                    // Cut fully interior: annulus / shell.
                    return Some(analytic_volume(base, dim)? - analytic_volume(cut, dim).unwrap());
                }
                if d + rb <= *rc {
                    return Some(0.0); // base swallowed entirely
                }
            }
            None
        }
    }
}

/// Hit-or-miss estimate over the axis-aligned bounding box with one RNG
/// stream per sample; byte-stable for a fixed seed.
pub(super) fn monte_carlo_volume(body: &Body, samples: u64, seed: u64) -> Estimate {
    let Some((lo, hi)) = body.aabb() else {
        return Estimate::exact(0.0);
    };
    let e = hi - lo;
    let box_volume = match body.dim {
        Dim::Two => e.x * e.y,
        Dim::Three => e.x * e.y * e.z,
    };
    if box_volume <= 0.0 {
        return Estimate::exact(0.0);
    }
    let rng = StreamRng::new(seed);
    let acc = estimators::par_accumulate(samples, |range| {
        let mut acc = Acc::default();
        for i in range {
            let mut r = rng.stream(i);
            let p = sample_box(body.dim, lo, e, &mut r);
            acc.add_exited(if body.contains(p) { 1.0 } else { 0.0 });
        }
        acc
    });
    estimators::finish(acc, samples, box_volume, seed)
}

fn sample_box(dim: Dim, lo: Vec3, extent: Vec3, rng: &mut rand_chacha::ChaCha8Rng) -> Vec3 {
    use rand::Rng as _;
    let x = lo.x + rng.gen::<f64>() * extent.x;
    let y = lo.y + rng.gen::<f64>() * extent.y;
    let z = match dim {
        Dim::Two => 0.0,
        Dim::Three => lo.z + rng.gen::<f64>() * extent.z,
    };
    Vec3::new(x, y, z)
}

/// Exact boundary measure for convex primitives (circumference in 2D, surface
/// area in 3D); `None` for CSG trees and non-convex polygons, which the
/// convex-resistance formula does not cover.
pub(super) fn boundary_area(tree: &Node, dim: Dim) -> Option<f64> {
    match tree {
        Node::Ball { radius, .. } => Some(match dim {
            Dim::Two => std::f64::consts::TAU * radius,
            Dim::Three => 4.0 * std::f64::consts::PI * radius * radius,
        }),
        Node::Cuboid { min, max } => {
            let e = *max - *min;
            Some(match dim {
                Dim::Two => 2.0 * (e.x + e.y),
                Dim::Three => 2.0 * (e.x * e.y + e.y * e.z + e.z * e.x),
            })
        }
        Node::Polygon { vertices } => {
            if !is_convex_ccw(vertices) {
                return None;
            }
            Some(perimeter(vertices))
        }
        Node::Polytope { faces } => Some(match dim {
            Dim::Two => perimeter(&polytope::ordered_cycle_2d(faces)),
            Dim::Three => polytope::face_areas_3d(faces).iter().sum(),
        }),
        Node::Union { .. } | Node::Difference { .. } => None,
    }
}

fn perimeter(cycle: &[Vec3]) -> f64 {
    let m = cycle.len();
    (0..m).map(|i| cycle[i].dist(cycle[(i + 1) % m])).sum()
}

fn is_convex_ccw(vertices: &[Vec3]) -> bool {
    let m = vertices.len();
    (0..m).all(|i| {
        let a = vertices[i];
        let b = vertices[(i + 1) % m];
        let c = vertices[(i + 2) % m];
        (b - a).cross(c - b).z >= 0.0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Halfspace;

    const PI: f64 = std::f64::consts::PI;

    fn ball(dim: Dim, c: (f64, f64, f64), r: f64) -> Node {
        let _ = dim;
        Node::Ball {
            center: Vec3::new(c.0, c.1, c.2),
            radius: r,
        }
    }

    fn cfg() -> VolumeConfig {
        VolumeConfig::new(200_000, 4)
    }

    #[test]
    fn primitive_volumes_are_exact() {
        let disc = Body::new(Dim::Two, ball(Dim::Two, (0.0, 0.0, 0.0), 1.0)).unwrap();
        let v = disc.volume(&cfg());
        assert!(v.mean == PI && v.stderr == 0.0);
        let b3 = Body::new(Dim::Three, ball(Dim::Three, (1.0, 0.0, 2.0), 0.5)).unwrap();
        assert!((b3.volume(&cfg()).mean - 4.0 * PI * 0.125 / 3.0).abs() < 1e-15);
        let sq = Body::new(
            Dim::Two,
            Node::Cuboid {
                min: Vec3::new(0.0, 0.0, 0.0),
                max: Vec3::new(2.0, 3.0, 0.0),
            },
        )
        .unwrap();
        assert!(sq.volume(&cfg()).mean == 6.0);
    }

    #[test]
    fn polygon_and_polytope_volumes() {
        let tri = Body::new(
            Dim::Two,
            Node::Polygon {
                vertices: vec![
                    Vec3::new(0.0, 0.0, 0.0),
                    Vec3::new(2.0, 0.0, 0.0),
                    Vec3::new(0.0, 1.0, 0.0),
                ],
            },
        )
        .unwrap();
        assert!((tri.volume(&cfg()).mean - 1.0).abs() < 1e-15);
        // Cube [-1,1]^3 as halfspaces: volume 8 via the divergence form.
        let faces = vec![
            Halfspace {
                normal: Vec3::new(1.0, 0.0, 0.0),
                offset: 1.0,
            },
            Halfspace {
                normal: Vec3::new(-1.0, 0.0, 0.0),
                offset: 1.0,
            },
            Halfspace {
                normal: Vec3::new(0.0, 1.0, 0.0),
                offset: 1.0,
            },
            Halfspace {
                normal: Vec3::new(0.0, -1.0, 0.0),
                offset: 1.0,
            },
            Halfspace {
                normal: Vec3::new(0.0, 0.0, 1.0),
                offset: 1.0,
            },
            Halfspace {
                normal: Vec3::new(0.0, 0.0, -1.0),
                offset: 1.0,
            },
        ];
        let cube = Body::new(Dim::Three, Node::Polytope { faces }).unwrap();
        assert!((cube.volume(&cfg()).mean - 8.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_union_sums_and_overlap_goes_monte_carlo() {
        let far = Body::new(
            Dim::Two,
            Node::Union {
                children: vec![
                    ball(Dim::Two, (-3.0, 0.0, 0.0), 1.0),
                    ball(Dim::Two, (3.0, 0.0, 0.0), 1.0),
                ],
            },
        )
        .unwrap();
        let v = far.volume(&cfg());
        assert!(v.stderr == 0.0 && (v.mean - 2.0 * PI).abs() < 1e-15);

        let near = Body::new(
            Dim::Two,
            Node::Union {
                children: vec![
                    ball(Dim::Two, (-0.5, 0.0, 0.0), 1.0),
                    ball(Dim::Two, (0.5, 0.0, 0.0), 1.0),
                ],
            },
        )
        .unwrap();
        assert!(near.analytic_volume().is_none());
        // Lens-area formula for two unit discs at center distance 1.
        let lens = 2.0 * (0.5f64).acos() - 0.5 * 3.0f64.sqrt();
        let expect = 2.0 * PI - lens;
        let v = near.volume(&cfg());
        assert!(v.stderr > 0.0);
        assert!(
            (v.mean - expect).abs() < 4.0 * v.stderr,
            "{} vs {expect}",
            v.mean
        );
    }

    #[test]
    fn difference_special_cases() {
        let annulus = Body::new(
            Dim::Two,
            Node::Difference {
                base: Box::new(ball(Dim::Two, (0.0, 0.0, 0.0), 1.0)),
                cut: Box::new(ball(Dim::Two, (0.0, 0.0, 0.0), 0.5)),
            },
        )
        .unwrap();
        assert!((annulus.volume(&cfg()).mean - 0.75 * PI).abs() < 1e-15);

        let miss = Body::new(
            Dim::Two,
            Node::Difference {
                base: Box::new(ball(Dim::Two, (0.0, 0.0, 0.0), 1.0)),
                cut: Box::new(ball(Dim::Two, (5.0, 0.0, 0.0), 1.0)),
            },
        )
        .unwrap();
        assert!(miss.volume(&cfg()).mean == PI);

        let gone = Body::new(
            Dim::Two,
            Node::Difference {
                base: Box::new(ball(Dim::Two, (0.0, 0.0, 0.0), 0.5)),
                cut: Box::new(ball(Dim::Two, (0.0, 0.0, 0.0), 2.0)),
            },
        )
        .unwrap();
        assert!(gone.volume(&cfg()).mean == 0.0);

        // Offset cut partially overlapping: no closed form here.
        let partial = Body::new(
            Dim::Two,
            Node::Difference {
                base: Box::new(ball(Dim::Two, (0.0, 0.0, 0.0), 1.0)),
                cut: Box::new(ball(Dim::Two, (1.0, 0.0, 0.0), 0.5)),
            },
        )
        .unwrap();
        assert!(partial.analytic_volume().is_none());
    }

    #[test]
    fn monte_carlo_route_agrees_with_closed_form() {
        let disc = Body::new(Dim::Two, ball(Dim::Two, (0.0, 0.0, 0.0), 1.0)).unwrap();
        let mut c = cfg();
        c.force_monte_carlo = true;
        let v = disc.volume(&c);
        assert!(v.stderr > 0.0);
        assert!(
            (v.mean - PI).abs() < 4.0 * v.stderr,
            "{} +- {}",
            v.mean,
            v.stderr
        );

        let shell = Body::new(
            Dim::Three,
            Node::Difference {
                base: Box::new(ball(Dim::Three, (0.0, 0.0, 0.0), 1.0)),
                cut: Box::new(ball(Dim::Three, (0.0, 0.0, 0.0), 0.6)),
            },
        )
        .unwrap();
        let exact = 4.0 * PI * (1.0 - 0.6f64.powi(3)) / 3.0;
        let v = shell.monte_carlo_volume(200_000, 11);
        assert!((v.mean - exact).abs() < 4.0 * v.stderr);
    }

    #[test]
    fn monte_carlo_volume_is_deterministic() {
        let body = Body::new(
            Dim::Two,
            Node::Union {
                children: vec![
                    ball(Dim::Two, (-0.5, 0.0, 0.0), 1.0),
                    ball(Dim::Two, (0.5, 0.0, 0.0), 1.0),
                ],
            },
        )
        .unwrap();
        let a = body.monte_carlo_volume(50_000, 3);
        let b = body.monte_carlo_volume(50_000, 3);
        assert!(a.mean.to_bits() == b.mean.to_bits());
        assert!(a.stderr.to_bits() == b.stderr.to_bits());
    }

    #[test]
    fn boundary_areas_of_convex_primitives() {
        let disc = Body::new(Dim::Two, ball(Dim::Two, (0.0, 0.0, 0.0), 1.0)).unwrap();
        assert!((disc.boundary_area().unwrap() - 2.0 * PI).abs() < 1e-15);
        let sphere = Body::new(Dim::Three, ball(Dim::Three, (0.0, 0.0, 0.0), 1.0)).unwrap();
        assert!((sphere.boundary_area().unwrap() - 4.0 * PI).abs() < 1e-15);
        let sq = Body::new(
            Dim::Two,
            Node::Cuboid {
                min: Vec3::new(0.0, 0.0, 0.0),
                max: Vec3::new(1.0, 1.0, 0.0),
            },
        )
        .unwrap();
        assert!(sq.boundary_area().unwrap() == 4.0);
        let tri = Body::new(
            Dim::Two,
            Node::Polygon {
                vertices: vec![
                    Vec3::new(0.0, 0.0, 0.0),
                    Vec3::new(3.0, 0.0, 0.0),
                    Vec3::new(0.0, 4.0, 0.0),
                ],
            },
        )
        .unwrap();
        assert!((tri.boundary_area().unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_area_refuses_nonconvex_and_csg() {
        let ell = Body::new(
            Dim::Two,
            Node::Polygon {
                vertices: vec![
                    Vec3::new(0.0, 0.0, 0.0),
                    Vec3::new(2.0, 0.0, 0.0),
                    Vec3::new(2.0, 1.0, 0.0),
                    Vec3::new(1.0, 1.0, 0.0),
                    Vec3::new(1.0, 2.0, 0.0),
                    Vec3::new(0.0, 2.0, 0.0),
                ],
            },
        )
        .unwrap();
        assert!(ell.boundary_area().is_none());
        let two = Body::new(
            Dim::Two,
            Node::Union {
                children: vec![
                    ball(Dim::Two, (-3.0, 0.0, 0.0), 1.0),
                    ball(Dim::Two, (3.0, 0.0, 0.0), 1.0),
                ],
            },
        )
        .unwrap();
        assert!(two.boundary_area().is_none());
    }
}
