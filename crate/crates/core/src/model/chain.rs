use rand::Rng;

use super::{Body, Joint, KinematicTree, SpatialInertia, DEFAULT_GRAVITY};
use crate::error::{Error, Result};
use crate::liegroup::Vec3;

/// Physical parameters of one serial-chain link.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkParams {
    pub mass: f64,
    pub length: f64,
    /// Radius of the rod; only sets the (tiny) inertia about its long axis.
    pub radius: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            length: 0.1,
            radius: 0.005,
        }
    }
}

impl LinkParams {
    /// Uniform rod along the body y axis, about its center.
    pub fn inertia(&self) -> Result<SpatialInertia> {
        let transverse = self.mass * self.length * self.length / 12.0;
        let axial = 0.5 * self.mass * self.radius * self.radius;
        SpatialInertia::from_components(self.mass, [transverse, axial, transverse, 0.0, 0.0, 0.0])
    }
}

/// `n` identical rods joined by revolute joints about z, hanging along −y.
pub fn serial_chain(n: usize) -> Result<KinematicTree> {
    serial_chain_with(n, &LinkParams::default())
}

pub fn serial_chain_with(n: usize, params: &LinkParams) -> Result<KinematicTree> {
    if n == 0 {
        return Err(Error::Validation("serial chain needs at least one body".into()));
    }
    let inertia = params.inertia()?;
    let drop = Vec3::new(0.0, -params.length, 0.0);
    let bodies = (0..n)
        .map(|i| Body {
            inertia,
            joint: Joint::revolute(Vec3::z(), if i == 0 { Vec3::zeros() } else { drop }),
            parent: i.checked_sub(1),
            com: drop * 0.5,
        })
        .collect();
    KinematicTree::new(bodies, Vec3::from(DEFAULT_GRAVITY))
}

/// Random topologically sorted tree with mixed joint types, general axes and
/// non-diagonal inertias. Used by tests and benches.
pub fn branched_tree(n: usize, rng: &mut impl Rng) -> Result<KinematicTree> {
    if n == 0 {
        return Err(Error::Validation("tree needs at least one body".into()));
    }
    let mut bodies = Vec::with_capacity(n);
    for i in 0..n {
        let parent = if i == 0 { None } else { Some(rng.gen_range(0..i)) };
        let axis = v3(rng, 1.0).normalize();
        let offset = v3(rng, 0.15);
        let mut joint = if rng.gen_bool(0.8) {
            Joint::revolute(axis, offset)
        } else {
            Joint::prismatic(axis, offset)
        };
        joint.offset_rotation = v3(rng, 0.5);
        let mass = rng.gen_range(0.5..2.0);
        let principal = [
            rng.gen_range(0.002..0.02),
            rng.gen_range(0.002..0.02),
            rng.gen_range(0.002..0.02),
        ];
        let c = 0.2 * principal.iter().cloned().fold(f64::INFINITY, f64::min);
        let inertia = SpatialInertia::from_components(
            mass,
            [
                principal[0],
                principal[1],
                principal[2],
                rng.gen_range(-c..c),
                rng.gen_range(-c..c),
                rng.gen_range(-c..c),
            ],
        )?;
        bodies.push(Body {
            inertia,
            joint,
            parent,
            com: v3(rng, 0.08),
        });
    }
    KinematicTree::new(bodies, Vec3::from(DEFAULT_GRAVITY))
}

/// A free rigid body: three prismatic joints along x, y, z followed by
/// revolute joints about z, y, x, all at the body's center of mass and joined
/// by virtual links. Only the last body carries `inertia`; its world pose is
/// `T(q₀, q₁, q₂) · R_z(q₃) R_y(q₄) R_x(q₅)`. No gravity.
pub fn floating_body(inertia: SpatialInertia) -> Result<KinematicTree> {
    let axes = [Vec3::x(), Vec3::y(), Vec3::z(), Vec3::z(), Vec3::y(), Vec3::x()];
    let bodies = axes
        .iter()
        .enumerate()
        .map(|(i, axis)| Body {
            inertia: if i == 5 { inertia } else { SpatialInertia::virtual_link() },
            joint: if i < 3 {
                Joint::prismatic(*axis, Vec3::zeros())
            } else {
                Joint::revolute(*axis, Vec3::zeros())
            },
            parent: i.checked_sub(1),
            com: Vec3::zeros(),
        })
        .collect();
    KinematicTree::new(bodies, Vec3::zeros())
}

fn v3<R: Rng + ?Sized>(rng: &mut R, s: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_sizes() {
        assert_eq!(serial_chain(1).unwrap().dof(), 1);
        assert_eq!(serial_chain(10).unwrap().dof(), 10);
        assert!(serial_chain(0).is_err());
        for n in [1, 3, 17] {
            assert_eq!(serial_chain(n).unwrap().total_mass(), n as f64);
        }
    }

    #[test]
    fn chain_links_are_identical() {
        let tree = serial_chain(5).unwrap();
        for i in 2..5 {
            assert_eq!(tree.link(i), tree.link(1));
            assert_eq!(tree.parent(i), Some(i - 1));
        }
        assert_eq!(tree.children(4), &[] as &[usize]);
    }

    #[test]
    fn floating_body_reaches_arbitrary_pose() {
        use crate::liegroup::Transform;
        use crate::model::{forward_kinematics, DVec};
        let inertia = SpatialInertia::from_components(2.0, [0.1, 0.2, 0.3, 0.0, 0.0, 0.0]).unwrap();
        let tree = floating_body(inertia).unwrap();
        assert_eq!(tree.total_mass(), 2.0);
        let q = DVec::from_vec(vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6]);
        let pose = forward_kinematics(&tree, &q).unwrap()[5];
        let expected = Transform::from_translation(Vec3::new(0.1, -0.2, 0.3))
            .compose(&Transform::rot_z(0.4))
            .compose(&Transform::rot_y(-0.5))
            .compose(&Transform::rot_x(0.6));
        assert!(pose.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn branched_tree_is_valid() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let tree = branched_tree(12, &mut rng).unwrap();
        assert_eq!(tree.dof(), 12);
        for i in 1..12 {
            assert!(tree.parent(i).unwrap() < i);
        }
    }
}
