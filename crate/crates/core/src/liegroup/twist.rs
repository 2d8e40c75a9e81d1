use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::{blocks, hat, Mat3, Mat6, Vec3, Vec6};
use crate::error::{Error, Result};

/// Element of se(3): a spatial velocity, a joint screw, or a scaled displacement.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Twist {
    pub angular: Vec3,
    pub linear: Vec3,
}

/// Element of the dual of se(3): momenta, impulses and wrench-impulses.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CoTwist {
    pub angular: Vec3,
    pub linear: Vec3,
}

macro_rules! spatial_vector {
    ($t:ident) => {
        impl $t {
            /// Builds the vector, panicking on NaN or infinite entries.
            pub fn new(angular: Vec3, linear: Vec3) -> Self {
                Self::try_new(angular, linear).expect("spatial vector entries must be finite")
            }

            pub fn try_new(angular: Vec3, linear: Vec3) -> Result<Self> {
                if angular.iter().chain(linear.iter()).all(|x| x.is_finite()) {
                    Ok(Self { angular, linear })
                } else {
                    Err(Error::Validation(format!(
                        "{} has non-finite entries",
                        stringify!($t)
                    )))
                }
            }

            pub fn zero() -> Self {
                Self::default()
            }

            pub fn from_array(a: [f64; 6]) -> Self {
                Self::new(Vec3::new(a[0], a[1], a[2]), Vec3::new(a[3], a[4], a[5]))
            }

            /// Unchecked construction from a stacked 6-vector.
            #[inline]
            pub fn from_vector(v: &Vec6) -> Self {
                Self {
                    angular: v.fixed_rows::<3>(0).into_owned(),
                    linear: v.fixed_rows::<3>(3).into_owned(),
                }
            }

            #[inline]
            pub fn to_vector(&self) -> Vec6 {
                Vec6::new(
                    self.angular.x,
                    self.angular.y,
                    self.angular.z,
                    self.linear.x,
                    self.linear.y,
                    self.linear.z,
                )
            }

            pub fn norm(&self) -> f64 {
                (self.angular.norm_squared() + self.linear.norm_squared()).sqrt()
            }

            pub fn max_abs(&self) -> f64 {
                self.angular.amax().max(self.linear.amax())
            }

            pub fn is_finite(&self) -> bool {
                self.angular.iter().chain(self.linear.iter()).all(|x| x.is_finite())
            }
        }

        impl Add for $t {
            type Output = $t;
            #[inline]
            fn add(self, rhs: $t) -> $t {
                $t {
                    angular: self.angular + rhs.angular,
                    linear: self.linear + rhs.linear,
                }
            }
        }

        impl AddAssign for $t {
            #[inline]
            fn add_assign(&mut self, rhs: $t) {
                self.angular += rhs.angular;
                self.linear += rhs.linear;
            }
        }

        impl Sub for $t {
            type Output = $t;
            #[inline]
            fn sub(self, rhs: $t) -> $t {
                $t {
                    angular: self.angular - rhs.angular,
                    linear: self.linear - rhs.linear,
                }
            }
        }

        impl SubAssign for $t {
            #[inline]
            fn sub_assign(&mut self, rhs: $t) {
                self.angular -= rhs.angular;
                self.linear -= rhs.linear;
            }
        }

        impl Neg for $t {
            type Output = $t;
            #[inline]
            fn neg(self) -> $t {
                $t {
                    angular: -self.angular,
                    linear: -self.linear,
                }
            }
        }

        impl Mul<f64> for $t {
            type Output = $t;
            #[inline]
            fn mul(self, s: f64) -> $t {
                $t {
                    angular: self.angular * s,
                    linear: self.linear * s,
                }
            }
        }

        impl Mul<$t> for f64 {
            type Output = $t;
            #[inline]
            fn mul(self, v: $t) -> $t {
                v * self
            }
        }
    };
}

spatial_vector!(Twist);
spatial_vector!(CoTwist);

impl Twist {
    /// Matrix of the Lie bracket `ad_self(w) = [self, w]`.
    pub fn ad_matrix(&self) -> Mat6 {
        let w = hat(&self.angular);
        blocks(&w, &Mat3::zeros(), &hat(&self.linear), &w)
    }

    /// Lie bracket `[self, other]`.
    #[inline]
    pub fn bracket(&self, other: &Twist) -> Twist {
        Twist {
            angular: self.angular.cross(&other.angular),
            linear: self.angular.cross(&other.linear) + self.linear.cross(&other.angular),
        }
    }

    /// Co-adjoint of the bracket, `ad_self^T f`.
    #[inline]
    pub fn ad_dual(&self, f: &CoTwist) -> CoTwist {
        // ad^T = [[-ŵ, -v̂], [0, -ŵ]]
        CoTwist {
            angular: f.angular.cross(&self.angular) + f.linear.cross(&self.linear),
            linear: f.linear.cross(&self.angular),
        }
    }
}

impl CoTwist {
    /// Natural pairing `<self, v>`.
    #[inline]
    pub fn pair(&self, v: &Twist) -> f64 {
        self.angular.dot(&v.angular) + self.linear.dot(&v.linear)
    }
}

impl Mul<Twist> for Mat6 {
    type Output = Twist;
    #[inline]
    fn mul(self, v: Twist) -> Twist {
        Twist::from_vector(&(self * v.to_vector()))
    }
}

impl Mul<CoTwist> for Mat6 {
    type Output = CoTwist;
    #[inline]
    fn mul(self, v: CoTwist) -> CoTwist {
        CoTwist::from_vector(&(self * v.to_vector()))
    }
}
