//! Kinematic-tree data model.
//!
//! Internally every body frame sits at the body's center of mass, so each
//! spatial inertia is block-diagonal `diag(I, m·Id₃)`. Scene documents are
//! free to place the body frame at the joint and give a separate center of
//! mass; the tree rebases frames and screws at construction.

mod chain;
mod scene;

pub use chain::{branched_tree, floating_body, serial_chain, serial_chain_with, LinkParams};
pub use scene::{load_scene, save_scene};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::liegroup::{retract, CoTwist, Mat3, Mat6, RetractionKind, Transform, Twist, Vec3};

pub type DVec = DVector<f64>;

const UNIT_TOL: f64 = 1e-6;

/// Rigid-body inertia about the center of mass.
///
/// Either symmetric positive-definite, or exactly zero for a virtual link: a
/// massless intermediate frame used to stack one-DOF joints into a
/// multi-DOF joint (see [`floating_body`]).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialInertia {
    mass: f64,
    rotational: Mat3,
}

impl SpatialInertia {
    pub fn new(mass: f64, rotational: Mat3) -> Result<Self> {
        if mass == 0.0 && rotational == Mat3::zeros() {
            return Ok(Self::virtual_link());
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Validation(format!("mass {mass} must be positive")));
        }
        if (rotational - rotational.transpose()).amax() > 1e-12 * (1.0 + rotational.amax()) {
            return Err(Error::Validation("rotational inertia is not symmetric".into()));
        }
        if rotational.iter().any(|x| !x.is_finite()) || rotational.cholesky().is_none() {
            return Err(Error::Validation("rotational inertia is not positive-definite".into()));
        }
        Ok(Self { mass, rotational })
    }

    /// Zero inertia of a massless frame.
    pub fn virtual_link() -> Self {
        Self {
            mass: 0.0,
            rotational: Mat3::zeros(),
        }
    }

    /// Builds from the six independent entries `Ixx Iyy Izz Ixy Ixz Iyz`.
    pub fn from_components(mass: f64, c: [f64; 6]) -> Result<Self> {
        let [xx, yy, zz, xy, xz, yz] = c;
        Self::new(mass, Mat3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz))
    }

    pub fn components(&self) -> [f64; 6] {
        let r = &self.rotational;
        [r[(0, 0)], r[(1, 1)], r[(2, 2)], r[(0, 1)], r[(0, 2)], r[(1, 2)]]
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn rotational(&self) -> &Mat3 {
        &self.rotational
    }

    pub fn matrix(&self) -> Mat6 {
        let mut m = Mat6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotational);
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Mat3::identity() * self.mass));
        m
    }

    /// `G·v`.
    #[inline]
    pub fn apply(&self, v: &Twist) -> CoTwist {
        CoTwist {
            angular: self.rotational * v.angular,
            linear: v.linear * self.mass,
        }
    }

    /// `½ vᵀ G v`.
    pub fn kinetic_energy(&self, v: &Twist) -> f64 {
        0.5 * self.apply(v).pair(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// One-DOF joint as written in a scene document.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Joint {
    pub kind: JointKind,
    /// Unit axis in the joint frame.
    pub axis: Vec3,
    /// Translation of the joint frame in the parent's document frame.
    pub offset_translation: Vec3,
    /// Rotation (axis-angle) of the joint frame relative to the parent's document frame.
    pub offset_rotation: Vec3,
}

impl Joint {
    pub fn revolute(axis: Vec3, offset_translation: Vec3) -> Self {
        Self {
            kind: JointKind::Revolute,
            axis,
            offset_translation,
            offset_rotation: Vec3::zeros(),
        }
    }

    pub fn prismatic(axis: Vec3, offset_translation: Vec3) -> Self {
        Self {
            kind: JointKind::Prismatic,
            ..Self::revolute(axis, offset_translation)
        }
    }

    pub fn offset(&self) -> Transform {
        let rot = Transform::from_rotation_vector(&self.offset_rotation);
        Transform::new(*rot.rotation(), self.offset_translation)
    }

    /// Unit twist of the joint expressed in the joint frame.
    pub fn joint_screw(&self) -> Twist {
        match self.kind {
            JointKind::Revolute => Twist::new(self.axis, Vec3::zeros()),
            JointKind::Prismatic => Twist::new(Vec3::zeros(), self.axis),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Body {
    pub inertia: SpatialInertia,
    pub joint: Joint,
    /// Parent body index, `None` for the inertial frame.
    pub parent: Option<usize>,
    /// Center of mass in the joint frame.
    pub com: Vec3,
}

/// Derived per-link data in center-of-mass frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Link {
    /// `M_i`: parent COM frame to child COM frame at `q_i = 0`.
    pub home: Transform,
    /// `S_i`: joint screw in the child COM frame.
    pub screw: Twist,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KinematicTree {
    bodies: Vec<Body>,
    links: Vec<Link>,
    children: Vec<Vec<usize>>,
    gravity: Vec3,
}

pub const DEFAULT_GRAVITY: [f64; 3] = [0.0, -9.81, 0.0];

impl KinematicTree {
    /// Validates and builds a tree; bodies must be topologically sorted.
    pub fn new(bodies: Vec<Body>, gravity: Vec3) -> Result<Self> {
        if bodies.is_empty() {
            return Err(Error::Validation("tree has no bodies".into()));
        }
        if gravity.iter().any(|g| !g.is_finite()) {
            return Err(Error::Validation("gravity must be finite".into()));
        }
        let mut children = vec![Vec::new(); bodies.len()];
        let mut links = Vec::with_capacity(bodies.len());
        for (i, body) in bodies.iter().enumerate() {
            if let Some(p) = body.parent {
                if p >= i {
                    return Err(Error::Validation(format!(
                        "body {}: parent {} is not topologically sorted",
                        i + 1,
                        p + 1
                    )));
                }
                children[p].push(i);
            }
            let n = body.joint.axis.norm();
            if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
                return Err(Error::Validation(format!(
                    "body {}: joint axis has norm {n}, expected unit",
                    i + 1
                )));
            }
            let finite = body
                .com
                .iter()
                .chain(body.joint.offset_translation.iter())
                .chain(body.joint.offset_rotation.iter())
                .all(|x| x.is_finite());
            if !finite {
                return Err(Error::Validation(format!("body {}: non-finite offset", i + 1)));
            }
            let parent_com = body.parent.map_or_else(Vec3::zeros, |p| bodies[p].com);
            let to_com = Transform::from_translation(body.com);
            let home = Transform::from_translation(-parent_com)
                .compose(&body.joint.offset())
                .compose(&to_com);
            let screw = to_com.ad_inv(&body.joint.joint_screw());
            links.push(Link { home, screw });
        }
        Ok(Self {
            bodies,
            links,
            children,
            gravity,
        })
    }

    /// Number of degrees of freedom (one per body).
    pub fn dof(&self) -> usize {
        self.bodies.len()
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    pub fn bodies(&self) -> &[Body] {
        &self.bodies
    }

    pub fn body(&self, i: usize) -> &Body {
        &self.bodies[i]
    }

    pub fn link(&self, i: usize) -> &Link {
        &self.links[i]
    }

    pub fn inertia(&self, i: usize) -> &SpatialInertia {
        &self.bodies[i].inertia
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.bodies[i].parent
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn gravity(&self) -> &Vec3 {
        &self.gravity
    }

    /// Copy of the tree with a different gravity vector.
    pub fn with_gravity(&self, gravity: Vec3) -> Self {
        Self {
            gravity,
            ..self.clone()
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.bodies.iter().map(|b| b.inertia.mass()).sum()
    }

    /// `T_{λ(i),i}(q_i) = M_i · exp(S_i q_i)`.
    #[inline]
    pub fn joint_transform(&self, i: usize, qi: f64) -> Transform {
        let link = &self.links[i];
        link.home
            .compose(&retract(&(link.screw * qi), RetractionKind::Exponential))
    }

    /// Relative transforms `T_{λ(i),i}` for every body.
    pub fn joint_transforms(&self, q: &DVec) -> Result<Vec<Transform>> {
        check_dim(self.dof(), q.len())?;
        Ok((0..self.dof()).map(|i| self.joint_transform(i, q[i])).collect())
    }

    /// `true` if `ancestor` lies on the path from `i` to the root (inclusive).
    pub fn is_ancestor_or_self(&self, ancestor: usize, mut i: usize) -> bool {
        loop {
            if i == ancestor {
                return true;
            }
            match self.parent(i) {
                Some(p) => i = p,
                None => return false,
            }
        }
    }
}

/// World pose of every body's center-of-mass frame, in one root-to-leaf pass.
pub fn forward_kinematics(tree: &KinematicTree, q: &DVec) -> Result<Vec<Transform>> {
    let rel = tree.joint_transforms(q)?;
    let mut poses: Vec<Transform> = Vec::with_capacity(tree.dof());
    for (i, t) in rel.into_iter().enumerate() {
        crate::instrument::count_body_visit();
        let pose = match tree.parent(i) {
            Some(p) => poses[p].compose(&t),
            None => t,
        };
        poses.push(pose);
    }
    Ok(poses)
}

/// Cached discrete momenta and average velocities of the previous step.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumCache {
    pub momenta: Vec<CoTwist>,
    pub velocities: Vec<Twist>,
}

/// Configuration pair `(q^{k−1}, q^k)` of a variational stepping loop.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub q_prev: DVec,
    pub q_curr: DVec,
    /// Per-body `μ^{k−1}` and `V^{k−1}`; recomputed from `(q_prev, q_curr)` when absent.
    pub cache: Option<MomentumCache>,
    pub time: f64,
}

impl SimState {
    pub fn new(q_prev: DVec, q_curr: DVec, time: f64) -> Result<Self> {
        check_dim(q_prev.len(), q_curr.len())?;
        Ok(Self {
            q_prev,
            q_curr,
            cache: None,
            time,
        })
    }

    /// State at rest at `q`.
    pub fn at_rest(q: DVec) -> Self {
        Self {
            q_prev: q.clone(),
            q_curr: q,
            cache: None,
            time: 0.0,
        }
    }

    pub fn dof(&self) -> usize {
        self.q_curr.len()
    }

    /// Finite-difference velocity `(q^k − q^{k−1})/dt`.
    pub fn velocity(&self, dt: f64) -> DVec {
        (&self.q_curr - &self.q_prev) / dt
    }
}
