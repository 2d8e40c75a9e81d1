//! TOML scene documents.
//!
//! ```toml
//! gravity = [0.0, -9.81, 0.0]          # optional, this is the default
//!
//! [[bodies]]
//! mass = 1.0
//! inertia = [Ixx, Iyy, Izz, Ixy, Ixz, Iyz]   # about the center of mass
//! parent = 0                           # 0 = world, k = k-th body (1-based)
//! com = [0.0, -0.05, 0.0]              # optional, center of mass in the joint frame
//!
//! [bodies.joint]
//! type = "revolute"                    # or "prismatic"
//! axis = [0.0, 0.0, 1.0]               # unit, in the joint frame
//! offset = [tx, ty, tz, rx, ry, rz]    # optional; joint frame in the parent's
//!                                      # joint frame, rotation as axis-angle
//! ```
//!
//! Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use super::{Body, Joint, JointKind, KinematicTree, SpatialInertia, DEFAULT_GRAVITY};
use crate::error::{Error, Result};
use crate::liegroup::Vec3;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    #[serde(default = "default_gravity")]
    gravity: [f64; 3],
    bodies: Vec<BodyDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BodyDoc {
    mass: f64,
    inertia: [f64; 6],
    parent: usize,
    #[serde(default, skip_serializing_if = "is_zero")]
    com: [f64; 3],
    joint: JointDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JointDoc {
    #[serde(rename = "type")]
    kind: KindDoc,
    axis: [f64; 3],
    #[serde(default)]
    offset: [f64; 6],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindDoc {
    Revolute,
    Prismatic,
}

fn default_gravity() -> [f64; 3] {
    DEFAULT_GRAVITY
}

fn is_zero(v: &[f64; 3]) -> bool {
    v.iter().all(|x| *x == 0.0)
}

/// Parses and validates a scene document.
pub fn load_scene(text: &str) -> Result<KinematicTree> {
    let doc: SceneDoc = toml::from_str(text).map_err(|e| Error::Parse(e.message().to_string()))?;
    let mut bodies = Vec::with_capacity(doc.bodies.len());
    for (i, b) in doc.bodies.iter().enumerate() {
        let name = i + 1;
        let parent = match b.parent {
            0 => None,
            p if p >= name => {
                return Err(Error::Validation(format!(
                    "body {name}: parent {p} is not topologically sorted"
                )))
            }
            p => Some(p - 1),
        };
        let inertia = SpatialInertia::from_components(b.mass, b.inertia)
            .map_err(|e| Error::Validation(format!("body {name}: {}", strip(&e))))?;
        let [tx, ty, tz, rx, ry, rz] = b.joint.offset;
        let joint = Joint {
            kind: match b.joint.kind {
                KindDoc::Revolute => JointKind::Revolute,
                KindDoc::Prismatic => JointKind::Prismatic,
            },
            axis: Vec3::from(b.joint.axis),
            offset_translation: Vec3::new(tx, ty, tz),
            offset_rotation: Vec3::new(rx, ry, rz),
        };
        bodies.push(Body {
            inertia,
            joint,
            parent,
            com: Vec3::from(b.com),
        });
    }
    KinematicTree::new(bodies, Vec3::from(doc.gravity))
}

/// Writes a tree back out in the scene format.
pub fn save_scene(tree: &KinematicTree) -> String {
    let doc = SceneDoc {
        gravity: (*tree.gravity()).into(),
        bodies: tree
            .bodies()
            .iter()
            .map(|b| {
                let t = b.joint.offset_translation;
                let r = b.joint.offset_rotation;
                BodyDoc {
                    mass: b.inertia.mass(),
                    inertia: b.inertia.components(),
                    parent: b.parent.map_or(0, |p| p + 1),
                    com: b.com.into(),
                    joint: JointDoc {
                        kind: match b.joint.kind {
                            JointKind::Revolute => KindDoc::Revolute,
                            JointKind::Prismatic => KindDoc::Prismatic,
                        },
                        axis: b.joint.axis.into(),
                        offset: [t.x, t.y, t.z, r.x, r.y, r.z],
                    },
                }
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scene documents always serialize")
}

fn strip(e: &Error) -> String {
    match e {
        Error::Validation(m) => m.clone(),
        other => other.to_string(),
    }
}
