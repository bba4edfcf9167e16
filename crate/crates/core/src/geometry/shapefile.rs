//! The on-disk shape format: a JSON document `{"dim": 2|3, "shape": <node>}`
//! with tagged nodes (`ball`, `box`, `polygon`, `polytope`, `union`,
//! `difference`).  Points are arrays with exactly `dim` entries.  Numbers
//! survive a parse -> serialize -> parse cycle bit-exactly.

use serde::{Deserialize, Serialize};

use super::node::{Halfspace, Node};
use super::Body;
use crate::error::Error;
use crate::vec3::{Dim, Vec3};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeSpec {
    pub dim: usize,
    pub shape: ShapeNode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeNode {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    #[serde(rename = "box")]
    Cuboid {
        min: Vec<f64>,
        max: Vec<f64>,
    },
    Polygon {
        vertices: Vec<Vec<f64>>,
    },
    Polytope {
        faces: Vec<FaceSpec>,
    },
    Union {
        children: Vec<ShapeNode>,
    },
    Difference {
        base: Box<ShapeNode>,
        cut: Box<ShapeNode>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

pub fn shape_from_json(text: &str) -> Result<ShapeSpec> {
    Ok(serde_json::from_str(text)?)
}

pub fn shape_to_json(spec: &ShapeSpec) -> String {
    let mut s = serde_json::to_string_pretty(spec).expect("shape specs always serialize");
    s.push('\n');
    s
}

pub(super) fn body_from_spec(spec: &ShapeSpec) -> Result<Body> {
    let dim = Dim::from_usize(spec.dim)
        .ok_or_else(|| Error::ShapeFile(format!("dim must be 2 or 3, got {}", spec.dim)))?;
    let node = node_from_shape(&spec.shape, dim)?;
    Body::new(dim, node)
}

/// Inverse of `body_from_spec`; emits points with exactly `dim` entries.
pub fn spec_from_body(body: &Body) -> ShapeSpec {
    ShapeSpec {
        dim: body.dim().ambient(),
        shape: shape_from_node(body.node(), body.dim()),
    }
}

fn point(coords: &[f64], dim: Dim) -> Result<Vec3> {
    if coords.len() != dim.ambient() {
        return Err(Error::ShapeFile(format!(
            "point {coords:?} has {} coordinates, expected {}",
            coords.len(),
            dim.ambient()
        )));
    }
    Ok(match dim {
        Dim::Two => Vec3::new(coords[0], coords[1], 0.0),
        Dim::Three => Vec3::new(coords[0], coords[1], coords[2]),
    })
}

fn coords(p: Vec3, dim: Dim) -> Vec<f64> {
    match dim {
        Dim::Two => vec![p.x, p.y],
        Dim::Three => vec![p.x, p.y, p.z],
    }
}

fn node_from_shape(shape: &ShapeNode, dim: Dim) -> Result<Node> {
    Ok(match shape {
        ShapeNode::Ball { center, radius } => Node::Ball {
            center: point(center, dim)?,
            radius: *radius,
        },
        ShapeNode::Cuboid { min, max } => Node::Cuboid {
            min: point(min, dim)?,
            max: point(max, dim)?,
        },
        ShapeNode::Polygon { vertices } => Node::Polygon {
            vertices: vertices
                .iter()
                .map(|v| point(v, dim))
                .collect::<Result<_>>()?,
        },
        ShapeNode::Polytope { faces } => Node::Polytope {
            faces: faces
                .iter()
                .map(|f| {
                    Ok(Halfspace {
                        normal: point(&f.normal, dim)?,
                        offset: f.offset,
                    })
                })
                .collect::<Result<_>>()?,
        },
        ShapeNode::Union { children } => Node::Union {
            children: children
                .iter()
                .map(|c| node_from_shape(c, dim))
                .collect::<Result<_>>()?,
        },
        ShapeNode::Difference { base, cut } => Node::Difference {
            base: Box::new(node_from_shape(base, dim)?),
            cut: Box::new(node_from_shape(cut, dim)?),
        },
    })
}

fn shape_from_node(node: &Node, dim: Dim) -> ShapeNode {
    match node {
        Node::Ball { center, radius } => ShapeNode::Ball {
            center: coords(*center, dim),
            radius: *radius,
        },
        Node::Cuboid { min, max } => ShapeNode::Cuboid {
            min: coords(*min, dim),
            max: coords(*max, dim),
        },
        Node::Polygon { vertices } => ShapeNode::Polygon {
            vertices: vertices.iter().map(|v| coords(*v, dim)).collect(),
        },
        Node::Polytope { faces } => ShapeNode::Polytope {
            faces: faces
                .iter()
                .map(|f| FaceSpec {
                    normal: coords(f.normal, dim),
                    offset: f.offset,
                })
                .collect(),
        },
        Node::Union { children } => ShapeNode::Union {
            children: children.iter().map(|c| shape_from_node(c, dim)).collect(),
        },
        Node::Difference { base, cut } => ShapeNode::Difference {
            base: Box::new(shape_from_node(base, dim)),
            cut: Box::new(shape_from_node(cut, dim)),
        },
    }
}
