//! SE(3) / se(3) spatial algebra.
//!
//! Twists and co-twists are stored angular block first, linear block second.
//! Every 6×6 matrix in the crate (adjoints, inertias, tangent maps) follows
//! the same ordering.

mod retraction;
mod transform;
mod twist;

pub use retraction::{
    dtau, dtau_inv, dtau_inv_dual, dtau_inv_matrix, dtau_inv_matrix_derivative, dtau_matrix,
    retract, retract_inverse, RetractionKind,
};
pub use transform::Transform;
pub use twist::{CoTwist, Twist};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;
pub type Vec6 = Vector6<f64>;
pub type Mat6 = Matrix6<f64>;

/// Skew-symmetric cross-product matrix: `hat(a) * b == a × b`.
#[inline]
pub fn hat(a: &Vec3) -> Mat3 {
    Mat3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

#[inline]
pub(crate) fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Assembles a 6×6 matrix from its four 3×3 blocks.
pub(crate) fn blocks(tl: &Mat3, tr: &Mat3, bl: &Mat3, br: &Mat3) -> Mat6 {
    let mut m = Mat6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(tl);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(tr);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(bl);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(br);
    m
}
