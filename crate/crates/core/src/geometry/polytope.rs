//! Halfspace-polytope utilities: boundedness and emptiness validation,
//! vertex enumeration, and face geometry for areas and volumes.
//!
//! Everything here is exact combinatorial geometry on at most a few dozen
//! halfspaces, with tolerances scaled to the vertex magnitudes.

use super::node::Halfspace;
use crate::error::Error;
use crate::vec3::{Dim, Vec3};
use crate::Result;

/// Alignment tolerance for recession directions: a unit direction `u` is a
/// recession direction when `dot(n, u) <= REC_TOL` for every face normal.
const REC_TOL: f64 = 1e-10;

/// Rejects unbounded or empty polytopes.  Boundedness is decided exactly (up
/// to tolerance) by testing a complete candidate set of recession directions;
/// emptiness by enumerating feasible vertices.
pub(super) fn validate_bounded_nonempty(faces: &[Halfspace], dim: Dim) -> Result<()> {
    let d = dim.ambient();
    if faces.len() < d + 1 {
        return Err(Error::InvalidBody(format!(
            "polytope with {} halfspaces cannot be bounded in {d}D",
            faces.len()
        )));
    }
    if let Some(u) = recession_direction(faces, dim) {
        return Err(Error::InvalidBody(format!(
            "polytope is unbounded (recession direction ({:.3}, {:.3}, {:.3}))",
            u.x, u.y, u.z
        )));
    }
    if vertices(faces, dim).is_empty() {
        return Err(Error::InvalidBody(
            "polytope is empty (contradictory halfspaces)".into(),
        ));
    }
    Ok(())
}

/// Searches the finite candidate set that must contain a recession direction
/// whenever the cone `{u : dot(n_i, u) <= 0 for all i}` is nontrivial: every
/// extreme ray of that cone lies in the boundary of one constraint (2D) or
/// two constraints (3D), and the degenerate all-normals-parallel cases are
/// covered by explicit orthogonal vectors.
fn recession_direction(faces: &[Halfspace], dim: Dim) -> Option<Vec3> {
    let mut candidates: Vec<Vec3> = Vec::new();
    for f in faces {
        candidates.push(-f.normal);
        match dim {
            Dim::Two => {
                candidates.push(f.normal.perp2());
                candidates.push(-f.normal.perp2());
            }
            Dim::Three => {
                // Two unit vectors orthogonal to the normal.
                let helper = if f.normal.x.abs() < 0.9 {
                    Vec3::new(1.0, 0.0, 0.0)
                } else {
                    Vec3::new(0.0, 1.0, 0.0)
                };
                let u = f.normal.cross(helper).normalized().unwrap();
                candidates.push(u);
                candidates.push(f.normal.cross(u));
            }
        }
    }
    if dim == Dim::Three {
        for (i, a) in faces.iter().enumerate() {
            for b in &faces[i + 1..] {
                if let Some(u) = a.normal.cross(b.normal).normalized() {
                    candidates.push(u);
                    candidates.push(-u);
                }
            }
        }
    }
    candidates
        .into_iter()
        .find(|&u| faces.iter().all(|f| f.normal.dot(u) <= REC_TOL))
}

/// All vertices of the polytope: feasible intersection points of `d` face
/// planes, deduplicated.
pub(super) fn vertices(faces: &[Halfspace], dim: Dim) -> Vec<Vec3> {
    let scale = faces.iter().map(|f| f.offset.abs()).fold(1.0f64, f64::max);
    let feas_tol = 1e-9 * scale;
    let mut out: Vec<Vec3> = Vec::new();
    let mut push = |p: Vec3| {
        if faces.iter().all(|f| f.normal.dot(p) <= f.offset + feas_tol)
            && !out.iter().any(|q| q.dist(p) <= 1e-9 * scale)
        {
            out.push(p);
        }
    };
    match dim {
        Dim::Two => {
            for (i, a) in faces.iter().enumerate() {
                for b in &faces[i + 1..] {
                    let det = a.normal.x * b.normal.y - a.normal.y * b.normal.x;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let x = (a.offset * b.normal.y - b.offset * a.normal.y) / det;
                    let y = (a.normal.x * b.offset - b.normal.x * a.offset) / det;
                    push(Vec3::new(x, y, 0.0));
                }
            }
        }
        Dim::Three => {
            let m = faces.len();
            for i in 0..m {
                for j in (i + 1)..m {
                    for k in (j + 1)..m {
                        let (a, b, c) = (&faces[i], &faces[j], &faces[k]);
                        let bc = b.normal.cross(c.normal);
                        let det = a.normal.dot(bc);
                        if det.abs() < 1e-12 {
                            continue;
                        }
                        let p = (bc * a.offset
                            + c.normal.cross(a.normal) * b.offset
                            + a.normal.cross(b.normal) * c.offset)
                            / det;
                        push(p);
                    }
                }
            }
        }
    }
    out
}

/// 2D only: polytope vertices ordered counterclockwise around the centroid.
pub(super) fn ordered_cycle_2d(faces: &[Halfspace]) -> Vec<Vec3> {
    let mut vs = vertices(faces, Dim::Two);
    if vs.len() < 3 {
        return vs;
    }
    let centroid = vs.iter().fold(Vec3::ZERO, |a, &b| a + b) / vs.len() as f64;
    vs.sort_by(|a, b| {
        let ta = (a.y - centroid.y).atan2(a.x - centroid.x);
        let tb = (b.y - centroid.y).atan2(b.x - centroid.x);
        ta.partial_cmp(&tb).unwrap()
    });
    vs
}

/// 3D only: the area of each face (zero for redundant halfspaces), computed
/// by ordering each face's vertices around the face normal and fanning.
pub(super) fn face_areas_3d(faces: &[Halfspace]) -> Vec<f64> {
    let vs = vertices(faces, Dim::Three);
    let scale = vs.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
    let tol = 1e-8 * scale;
    faces
        .iter()
        .map(|f| {
            let mut on_face: Vec<Vec3> = vs
                .iter()
                .copied()
                .filter(|v| (f.normal.dot(*v) - f.offset).abs() <= tol)
                .collect();
            if on_face.len() < 3 {
                return 0.0;
            }
            // In-plane basis and angular sort around the face centroid.
            let helper = if f.normal.x.abs() < 0.9 {
                Vec3::new(1.0, 0.0, 0.0)
            } else {
                Vec3::new(0.0, 1.0, 0.0)
            };
            let e1 = f.normal.cross(helper).normalized().unwrap();
            let e2 = f.normal.cross(e1);
            let centroid = on_face.iter().fold(Vec3::ZERO, |a, &b| a + b) / on_face.len() as f64;
            on_face.sort_by(|a, b| {
                let ta = (*a - centroid).dot(e2).atan2((*a - centroid).dot(e1));
                let tb = (*b - centroid).dot(e2).atan2((*b - centroid).dot(e1));
                ta.partial_cmp(&tb).unwrap()
            });
            let mut acc = 0.0;
            for i in 0..on_face.len() {
                let a = on_face[i] - centroid;
                let b = on_face[(i + 1) % on_face.len()] - centroid;
                acc += a.cross(b).dot(f.normal);
            }
            0.5 * acc.abs()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hs(n: (f64, f64, f64), c: f64) -> Halfspace {
        Halfspace {
            normal: Vec3::new(n.0, n.1, n.2),
            offset: c,
        }
    }

    fn unit_square() -> Vec<Halfspace> {
        vec![
            hs((1.0, 0.0, 0.0), 1.0),
            hs((-1.0, 0.0, 0.0), 1.0),
            hs((0.0, 1.0, 0.0), 1.0),
            hs((0.0, -1.0, 0.0), 1.0),
        ]
    }

    fn unit_cube() -> Vec<Halfspace> {
        vec![
            hs((1.0, 0.0, 0.0), 1.0),
            hs((-1.0, 0.0, 0.0), 1.0),
            hs((0.0, 1.0, 0.0), 1.0),
            hs((0.0, -1.0, 0.0), 1.0),
            hs((0.0, 0.0, 1.0), 1.0),
            hs((0.0, 0.0, -1.0), 1.0),
        ]
    }

    #[test]
    fn square_is_bounded_with_four_vertices() {
        let faces = unit_square();
        assert!(validate_bounded_nonempty(&faces, Dim::Two).is_ok());
        assert_eq!(vertices(&faces, Dim::Two).len(), 4);
    }

    #[test]
    fn halfplane_pair_is_unbounded() {
        // A vertical slab has recession direction (0, 1).
        let faces = vec![
            hs((1.0, 0.0, 0.0), 1.0),
            hs((-1.0, 0.0, 0.0), 1.0),
            hs((0.0, 1.0, 0.0), 5.0),
        ];
        assert!(validate_bounded_nonempty(&faces, Dim::Two).is_err());
    }

    #[test]
    fn contradictory_faces_are_empty() {
        let mut faces = unit_square();
        faces.push(hs((1.0, 0.0, 0.0), -2.0)); // x <= -2 contradicts x >= -1
        let err = validate_bounded_nonempty(&faces, Dim::Two).unwrap_err();
        assert!(err.to_string().contains("empty"), "{err}");
    }

    #[test]
    fn tetrahedron_is_bounded() {
        let s = 3.0f64.sqrt();
        let faces = vec![
            hs((1.0 / s, 1.0 / s, 1.0 / s), 1.0),
            hs((-1.0, 0.0, 0.0), 0.0),
            hs((0.0, -1.0, 0.0), 0.0),
            hs((0.0, 0.0, -1.0), 0.0),
        ];
        assert!(validate_bounded_nonempty(&faces, Dim::Three).is_ok());
        assert_eq!(vertices(&faces, Dim::Three).len(), 4);
    }

    #[test]
    fn open_wedge_in_3d_is_unbounded() {
        let faces = vec![
            hs((1.0, 0.0, 0.0), 1.0),
            hs((0.0, 1.0, 0.0), 1.0),
            hs((0.0, 0.0, 1.0), 1.0),
            hs((-1.0, -1.0, 0.0), 1.0),
        ];
        assert!(validate_bounded_nonempty(&faces, Dim::Three).is_err());
    }

    #[test]
    fn cube_face_areas_and_cycle() {
        let areas = face_areas_3d(&unit_cube());
        assert_eq!(areas.len(), 6);
        for a in areas {
            assert!((a - 4.0).abs() < 1e-9, "face area {a}");
        }
        let cycle = ordered_cycle_2d(&unit_square());
        assert_eq!(cycle.len(), 4);
        // Ordered cycle must have positive shoelace area 4.
        let mut acc = 0.0;
        for i in 0..4 {
            let p = cycle[i];
            let q = cycle[(i + 1) % 4];
            acc += p.x * q.y - q.x * p.y;
        }
        assert!((0.5 * acc - 4.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_face_gets_zero_area() {
        let mut faces = unit_cube();
        faces.push(hs((1.0, 0.0, 0.0), 5.0)); // strictly outside the cube
        let areas = face_areas_3d(&faces);
        assert_eq!(areas[6], 0.0);
        assert!(validate_bounded_nonempty(&faces, Dim::Three).is_ok());
    }
}
