use std::ops::Mul;

use super::{blocks, hat, CoTwist, Mat3, Mat6, Twist, Vec3};

/// Drift threshold on `‖RᵀR − I‖_∞` above which a composed rotation is re-orthonormalized.
const ORTHO_TOL: f64 = 1e-9;

/// Rigid transform in SE(3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform {
    rotation: Mat3,
    translation: Vec3,
}

impl Default for Transform {
    fn default() -> Self {
        Self::identity()
    }
}

impl Transform {
    /// Builds a transform. The rotation is assumed orthonormal; callers with
    /// noisy input should go through [`Transform::orthonormalized`].
    pub fn new(rotation: Mat3, translation: Vec3) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn identity() -> Self {
        Self::new(Mat3::identity(), Vec3::zeros())
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self::new(Mat3::identity(), translation)
    }

    /// Rotation about the unit `axis` by `angle` radians (Rodrigues).
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        let k = hat(axis);
        let r = Mat3::identity() + k * angle.sin() + k * k * (1.0 - angle.cos());
        Self::new(r, Vec3::zeros())
    }

    /// Rotation given as an axis-angle vector (direction = axis, norm = angle).
    pub fn from_rotation_vector(rv: &Vec3) -> Self {
        let angle = rv.norm();
        if angle == 0.0 {
            Self::identity()
        } else {
            Self::from_axis_angle(&(rv / angle), angle)
        }
    }

    pub fn rot_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::x(), angle)
    }

    pub fn rot_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::y(), angle)
    }

    pub fn rot_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::z(), angle)
    }

    #[inline]
    pub fn rotation(&self) -> &Mat3 {
        &self.rotation
    }

    #[inline]
    pub fn translation(&self) -> &Vec3 {
        &self.translation
    }

    /// Axis-angle vector of the rotation block.
    pub fn rotation_vector(&self) -> Vec3 {
        super::retraction::so3_log(&self.rotation)
    }

    #[inline]
    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self::new(rt, -(rt * self.translation))
    }

    /// Group product `self · other`.
    #[inline]
    pub fn compose(&self, other: &Transform) -> Transform {
        let t = Self::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        );
        if t.orthonormality_error() > ORTHO_TOL {
            t.orthonormalized()
        } else {
            t
        }
    }

    /// `‖RᵀR − I‖_∞` (max absolute entry).
    pub fn orthonormality_error(&self) -> f64 {
        (self.rotation.transpose() * self.rotation - Mat3::identity()).amax()
    }

    /// Projects the rotation block back onto SO(3) by Newton iteration on the
    /// polar factor.
    pub fn orthonormalized(&self) -> Transform {
        let mut r = self.rotation;
        for _ in 0..8 {
            let inv_t = match r.try_inverse() {
                Some(inv) => inv.transpose(),
                None => break,
            };
            let next = (r + inv_t) * 0.5;
            let done = (next - r).amax() < 1e-15;
            r = next;
            if done {
                break;
            }
        }
        Transform::new(r, self.translation)
    }

    #[inline]
    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    /// 6×6 adjoint matrix `[[R, 0], [p̂R, R]]`.
    pub fn adjoint(&self) -> Mat6 {
        let r = &self.rotation;
        blocks(r, &Mat3::zeros(), &(hat(&self.translation) * r), r)
    }

    /// Adjoint action `Ad_T v = T v T⁻¹`.
    #[inline]
    pub fn ad(&self, v: &Twist) -> Twist {
        let w = self.rotation * v.angular;
        Twist {
            angular: w,
            linear: self.translation.cross(&w) + self.rotation * v.linear,
        }
    }

    /// `Ad_{T⁻¹} v`, without forming the inverse.
    #[inline]
    pub fn ad_inv(&self, v: &Twist) -> Twist {
        let rt = self.rotation.transpose();
        Twist {
            angular: rt * v.angular,
            linear: rt * (v.linear - self.translation.cross(&v.angular)),
        }
    }

    /// Co-adjoint action `Ad*_T f = Ad_Tᵀ f`, the dual of [`Transform::ad`].
    #[inline]
    pub fn ad_dual(&self, f: &CoTwist) -> CoTwist {
        let rt = self.rotation.transpose();
        CoTwist {
            angular: rt * (f.angular - self.translation.cross(&f.linear)),
            linear: rt * f.linear,
        }
    }

    /// `Ad*_{T⁻¹} f`: moves a co-twist expressed in the child frame of `self`
    /// into the parent frame.
    #[inline]
    pub fn ad_inv_dual(&self, f: &CoTwist) -> CoTwist {
        let n = self.rotation * f.linear;
        CoTwist {
            angular: self.rotation * f.angular + self.translation.cross(&n),
            linear: n,
        }
    }

    /// Max absolute componentwise difference, rotation and translation blocks.
    pub fn max_abs_diff(&self, other: &Transform) -> f64 {
        (self.rotation - other.rotation)
            .amax()
            .max((self.translation - other.translation).amax())
    }
}

impl Mul for Transform {
    type Output = Transform;
    #[inline]
    fn mul(self, rhs: Transform) -> Transform {
        self.compose(&rhs)
    }
}

impl Mul<&Transform> for &Transform {
    type Output = Transform;
    #[inline]
    fn mul(self, rhs: &Transform) -> Transform {
        self.compose(rhs)
    }
}
