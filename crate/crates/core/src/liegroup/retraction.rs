//! Retraction maps `τ: se(3) → SE(3)` and their right-trivialized tangents.
//!
//! The tangent `dτ_v` is defined by `(∂/∂v τ(v)) w = dτ_v(w) τ(v)`. Both maps
//! are returned as 6×6 block lower-triangular matrices `[[A, 0], [C, B]]`.

use std::f64::consts::PI;

use super::{blocks, hat, vee, CoTwist, Mat3, Mat6, Transform, Twist, Vec3};
use crate::error::{Error, Result};

/// Angle margin kept away from the cut locus of the logarithm.
const LOG_MARGIN: f64 = 1e-6;

/// Below this angle the exponential-map coefficient functions are evaluated
/// by their power series.
const SERIES_ANGLE: f64 = 1e-4;

/// Squared-angle switch for the series form of the SO(3) `dexp⁻¹` coefficient.
const DEXP_INV_SERIES_SQ: f64 = 0.25;

/// Below this squared angle the SE(3) coupling coefficients, which suffer
/// cancellation like `ε/θ⁴`, are evaluated by their power series.
const COUPLING_SERIES_SQ: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RetractionKind {
    #[default]
    Exponential,
    Cayley,
}

/// `τ(v)`.
pub fn retract(v: &Twist, kind: RetractionKind) -> Transform {
    match kind {
        RetractionKind::Exponential => exp(v),
        RetractionKind::Cayley => cay(v),
    }
}

/// `τ⁻¹(t)`.
pub fn retract_inverse(t: &Transform, kind: RetractionKind) -> Result<Twist> {
    let r = t.rotation();
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin = vee(&(r - r.transpose())).norm() * 0.5;
    let angle = sin.atan2(cos);
    if angle >= PI - LOG_MARGIN {
        return Err(Error::Domain(format!(
            "rotation angle {angle} too close to π for the inverse retraction"
        )));
    }
    match kind {
        RetractionKind::Exponential => Ok(log(t)),
        RetractionKind::Cayley => Ok(cay_inv(t)),
    }
}

/// `dτ_v(w)`.
pub fn dtau(v: &Twist, w: &Twist, kind: RetractionKind) -> Twist {
    dtau_matrix(v, kind) * *w
}

/// `dτ⁻¹_v(w)`.
pub fn dtau_inv(v: &Twist, w: &Twist, kind: RetractionKind) -> Result<Twist> {
    Ok(dtau_inv_matrix(v, kind)? * *w)
}

/// `(dτ⁻¹_v)* f`, the transpose of [`dtau_inv`].
pub fn dtau_inv_dual(v: &Twist, f: &CoTwist, kind: RetractionKind) -> Result<CoTwist> {
    Ok(dtau_inv_matrix(v, kind)?.transpose() * *f)
}

/// Matrix of `dτ_v`.
pub fn dtau_matrix(v: &Twist, kind: RetractionKind) -> Mat6 {
    match kind {
        RetractionKind::Exponential => {
            let w = hat(&v.angular);
            let s = v.angular.norm_squared();
            let (_, b, c) = rodrigues_coeffs(s.sqrt());
            let j = Mat3::identity() + w * b + w * w * c;
            let q = coupling(&v.angular, &v.linear, s).0;
            blocks(&j, &Mat3::zeros(), &q, &j)
        }
        RetractionKind::Cayley => {
            // dcay_v(y) = (I − v/2)⁻¹ y (I + v/2)⁻¹ in 4×4 form.
            let w = hat(&v.angular);
            let k = 1.0 / (4.0 + v.angular.norm_squared());
            let rot_inv = (Mat3::identity() * 2.0 + w) * (2.0 * k);
            let lin_inv = Mat3::identity() + w * (2.0 * k) + w * w * k;
            let c = cayley_offdiag(&w, &v.linear);
            blocks(&rot_inv, &Mat3::zeros(), &(-(lin_inv * c * rot_inv)), &lin_inv)
        }
    }
}

/// Matrix of `dτ⁻¹_v`.
pub fn dtau_inv_matrix(v: &Twist, kind: RetractionKind) -> Result<Mat6> {
    match kind {
        RetractionKind::Exponential => {
            let s = v.angular.norm_squared();
            check_dexp_domain(s)?;
            let w = hat(&v.angular);
            let a = Mat3::identity() - w * 0.5 + w * w * dexp_inv_coeff(s).0;
            let q = coupling(&v.angular, &v.linear, s).0;
            Ok(blocks(&a, &Mat3::zeros(), &(-(a * q * a)), &a))
        }
        RetractionKind::Cayley => {
            let w = hat(&v.angular);
            let a = cayley_diag(&v.angular, &w);
            let c = cayley_offdiag(&w, &v.linear);
            Ok(blocks(&a, &Mat3::zeros(), &c, &(Mat3::identity() - w * 0.5)))
        }
    }
}

/// Directional derivative `d/ds dτ⁻¹_{v + s·dv}` at `s = 0`.
pub fn dtau_inv_matrix_derivative(v: &Twist, dv: &Twist, kind: RetractionKind) -> Result<Mat6> {
    match kind {
        RetractionKind::Exponential => {
            let s = v.angular.norm_squared();
            check_dexp_domain(s)?;
            let w = hat(&v.angular);
            let dw = hat(&dv.angular);
            let ds = 2.0 * v.angular.dot(&dv.angular);
            let (d, d_prime) = dexp_inv_coeff(s);
            let w2 = w * w;
            let a = Mat3::identity() - w * 0.5 + w2 * d;
            let da = -dw * 0.5 + w2 * (d_prime * ds) + (dw * w + w * dw) * d;
            let (q, dq) = coupling_with_derivative(&v.angular, &v.linear, &dv.angular, &dv.linear, s, ds);
            let dc = -(da * q * a + a * dq * a + a * q * da);
            Ok(blocks(&da, &Mat3::zeros(), &dc, &da))
        }
        RetractionKind::Cayley => {
            let w = hat(&v.angular);
            let dw = hat(&dv.angular);
            let da = -dw * 0.5 + (dv.angular * v.angular.transpose() + v.angular * dv.angular.transpose()) * 0.25;
            let dc = ((dw * 0.5) * hat(&v.linear) - (Mat3::identity() - w * 0.5) * hat(&dv.linear)) * 0.5;
            Ok(blocks(&da, &Mat3::zeros(), &dc, &(-dw * 0.5)))
        }
    }
}

fn check_dexp_domain(angle_sq: f64) -> Result<()> {
    let limit = 2.0 * PI - LOG_MARGIN;
    if angle_sq.sqrt() >= limit {
        Err(Error::Domain(format!(
            "rotation magnitude {} outside the dexp⁻¹ convergence domain",
            angle_sq.sqrt()
        )))
    } else {
        Ok(())
    }
}

/// `(sin θ/θ, (1 − cos θ)/θ², (θ − sin θ)/θ³)`.
fn rodrigues_coeffs(theta: f64) -> (f64, f64, f64) {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        (
            1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0)),
            0.5 - t2 / 24.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0)),
            1.0 / 6.0 - t2 / 120.0 * (1.0 - t2 / 42.0 * (1.0 - t2 / 72.0)),
        )
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        (s / theta, (1.0 - c) / t2, (theta - s) / (t2 * theta))
    }
}

/// Coefficient of ω̂² in `dexp⁻¹` on SO(3), `(1 − (θ/2)cot(θ/2))/θ²`, and its
/// derivative with respect to `θ²`.
fn dexp_inv_coeff(angle_sq: f64) -> (f64, f64) {
    // Bernoulli series; radius of convergence (2π)².
    const C: [f64; 6] = [
        1.0 / 12.0,
        1.0 / 720.0,
        1.0 / 30240.0,
        1.0 / 1209600.0,
        1.0 / 47900160.0,
        691.0 / 1307674368000.0,
    ];
    if angle_sq < DEXP_INV_SERIES_SQ {
        let s = angle_sq;
        let d = C.iter().rev().fold(0.0, |acc, c| acc * s + c);
        let dd = C
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (n, c)| acc * s + n as f64 * c);
        (d, dd)
    } else {
        let theta = angle_sq.sqrt();
        let half = 0.5 * theta;
        let (sin, cos) = half.sin_cos();
        let cot = cos / sin;
        let d = (1.0 - half * cot) / angle_sq;
        let csc2 = 1.0 / (sin * sin);
        let dd_dtheta = (-0.5 * cot + 0.5 * half * csc2) / angle_sq - 2.0 * d / theta;
        (d, dd_dtheta / (2.0 * theta))
    }
}

/// Coefficients of the SE(3) coupling block as functions of `s = θ²`,
/// together with their `s`-derivatives:
/// `a1 = (θ − sin θ)/θ³`, `a2 = (θ² + 2cos θ − 2)/(2θ⁴)`,
/// `a3 = (2θ − 3 sin θ + θ cos θ)/(2θ⁵)`.
fn coupling_coeffs(s: f64) -> ([f64; 3], [f64; 3]) {
    if s < COUPLING_SERIES_SQ {
        // a1 = Σ (−1)^m s^m/(2m+3)!, a2 = Σ (−1)^m s^m/(2m+4)!,
        // a3 = Σ (−1)^m (m+1) s^m/(2m+5)!
        let mut a = [0.0; 3];
        let mut da = [0.0; 3];
        let mut pow = 1.0; // s^m
        let mut pow_prev = 0.0; // m·s^(m−1)
        let mut sign = 1.0;
        for m in 0..12u32 {
            let f3 = factorial(2 * m + 3);
            let f4 = f3 * f64::from(2 * m + 4);
            let f5 = f4 * f64::from(2 * m + 5);
            let mf = f64::from(m);
            a[0] += sign * pow / f3;
            a[1] += sign * pow / f4;
            a[2] += sign * (mf + 1.0) * pow / f5;
            da[0] += sign * pow_prev / f3;
            da[1] += sign * pow_prev / f4;
            da[2] += sign * (mf + 1.0) * pow_prev / f5;
            pow_prev = (mf + 1.0) * pow;
            pow *= s;
            sign = -sign;
        }
        (a, da)
    } else {
        let t = s.sqrt();
        let (sn, cs) = t.sin_cos();
        let t3 = s * t;
        let t4 = s * s;
        let t5 = t4 * t;
        let t6 = t4 * s;
        let a1 = (t - sn) / t3;
        let a2 = (s + 2.0 * cs - 2.0) / (2.0 * t4);
        let a3 = (2.0 * t - 3.0 * sn + t * cs) / (2.0 * t5);
        let d1 = (1.0 - cs) / t3 - 3.0 * (t - sn) / t4;
        let d2 = (t - sn) / t4 - 2.0 * (s + 2.0 * cs - 2.0) / t5;
        let d3 = (2.0 - 2.0 * cs - t * sn) / (2.0 * t5) - 5.0 * (2.0 * t - 3.0 * sn + t * cs) / (2.0 * t6);
        let ds = 1.0 / (2.0 * t);
        ([a1, a2, a3], [d1 * ds, d2 * ds, d3 * ds])
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * f64::from(k))
}

/// Lower-left block `Q` of `dexp` on SE(3) for twist `(ω, v)`.
fn coupling(omega: &Vec3, v: &Vec3, s: f64) -> (Mat3, [f64; 3]) {
    let (a, _) = coupling_coeffs(s);
    let w = hat(omega);
    let r = hat(v);
    let wr = w * r;
    let rw = r * w;
    let wrw = wr * w;
    let ww = w * w;
    let p1 = wr + rw + wrw;
    let p2 = ww * r + rw * w - wrw * 3.0;
    let p3 = wrw * w + w * wrw;
    (r * 0.5 + p1 * a[0] + p2 * a[1] + p3 * a[2], a)
}

/// `Q` and its directional derivative along `(dω, dv)`, with `ds = d(θ²)`.
fn coupling_with_derivative(omega: &Vec3, v: &Vec3, d_omega: &Vec3, dv: &Vec3, s: f64, ds: f64) -> (Mat3, Mat3) {
    let (a, da) = coupling_coeffs(s);
    let w = hat(omega);
    let r = hat(v);
    let dw = hat(d_omega);
    let dr = hat(dv);

    let wr = w * r;
    let rw = r * w;
    let ww = w * w;
    let wrw = wr * w;

    let d_wr = dw * r + w * dr;
    let d_rw = dr * w + r * dw;
    let d_ww = dw * w + w * dw;
    let d_wrw = d_wr * w + wr * dw;

    let p1 = wr + rw + wrw;
    let p2 = ww * r + rw * w - wrw * 3.0;
    let p3 = wrw * w + w * wrw;

    let dp1 = d_wr + d_rw + d_wrw;
    let dp2 = d_ww * r + ww * dr + d_rw * w + rw * dw - d_wrw * 3.0;
    let dp3 = d_wrw * w + wrw * dw + dw * wrw + w * d_wrw;

    let q = r * 0.5 + p1 * a[0] + p2 * a[1] + p3 * a[2];
    let dq = dr * 0.5
        + p1 * (da[0] * ds)
        + p2 * (da[1] * ds)
        + p3 * (da[2] * ds)
        + dp1 * a[0]
        + dp2 * a[1]
        + dp3 * a[2];
    (q, dq)
}

fn exp(v: &Twist) -> Transform {
    let theta = v.angular.norm();
    let w = hat(&v.angular);
    let ww = w * w;
    let (a, b, c) = rodrigues_coeffs(theta);
    let r = Mat3::identity() + w * a + ww * b;
    let j = Mat3::identity() + w * b + ww * c;
    Transform::new(r, j * v.linear)
}

/// Logarithm on SO(3), valid for angles below π.
pub(crate) fn so3_log(r: &Mat3) -> Vec3 {
    let skew = vee(&(r - r.transpose())) * 0.5; // sin θ · axis
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin = skew.norm();
    let theta = sin.atan2(cos);
    if theta < SERIES_ANGLE {
        // θ/sin θ ≈ 1 + θ²/6
        skew * (1.0 + theta * theta / 6.0)
    } else if theta < PI - 1e-2 {
        skew * (theta / sin)
    } else {
        // Near π the skew part vanishes; recover the axis from the symmetric part
        // (R + Rᵀ)/2 = cos θ·I + (1 − cos θ)·a·aᵀ.
        let sym = (r + r.transpose()) * 0.5 - Mat3::identity() * cos;
        let k = (0..3)
            .max_by(|&i, &j| sym[(i, i)].total_cmp(&sym[(j, j)]))
            .unwrap_or(0);
        let mut axis = sym.column(k).into_owned();
        axis /= axis.norm();
        if axis.dot(&skew) < 0.0 {
            axis = -axis;
        }
        axis * theta
    }
}

fn log(t: &Transform) -> Twist {
    let omega = so3_log(t.rotation());
    let s = omega.norm_squared();
    let w = hat(&omega);
    let j_inv = Mat3::identity() - w * 0.5 + w * w * dexp_inv_coeff(s).0;
    Twist {
        angular: omega,
        linear: j_inv * t.translation(),
    }
}

fn cay(v: &Twist) -> Transform {
    let w = hat(&v.angular);
    let ww = w * w;
    let k = 1.0 / (4.0 + v.angular.norm_squared());
    let r = Mat3::identity() + (w + ww * 0.5) * (4.0 * k);
    // (I − ŵ/2)⁻¹ = I + 2k·ŵ + k·ŵ²
    let p = (Mat3::identity() + w * (2.0 * k) + ww * k) * v.linear;
    Transform::new(r, p)
}

fn cay_inv(t: &Transform) -> Twist {
    let r = t.rotation();
    let omega = vee(&(r - r.transpose())) * (2.0 / (1.0 + r.trace()));
    let linear = (Mat3::identity() - hat(&omega) * 0.5) * t.translation();
    Twist {
        angular: omega,
        linear,
    }
}

fn cayley_diag(omega: &Vec3, w: &Mat3) -> Mat3 {
    Mat3::identity() - w * 0.5 + omega * omega.transpose() * 0.25
}

fn cayley_offdiag(w: &Mat3, v: &Vec3) -> Mat3 {
    -(Mat3::identity() - w * 0.5) * hat(v) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::Vec6;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const KINDS: [RetractionKind; 2] = [RetractionKind::Exponential, RetractionKind::Cayley];

    fn random_twist(rng: &mut impl Rng, ang: f64, lin: f64) -> Twist {
        let dir = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).normalize();
        Twist {
            angular: dir * rng.gen_range(0.0..ang),
            linear: Vec3::new(rng.gen_range(-lin..lin), rng.gen_range(-lin..lin), rng.gen_range(-lin..lin)),
        }
    }

    /// Truncated power series `Σ c_k ad^k` with `c_k = 1/(k+1)!`.
    fn dexp_series(v: &Twist) -> Mat6 {
        let ad = v.ad_matrix();
        let mut term = Mat6::identity();
        let mut sum = Mat6::identity();
        for k in 1..80 {
            term = term * ad / (k as f64 + 1.0);
            sum += term;
        }
        sum
    }

    /// 4×4 homogeneous representation, used by the finite-difference oracles.
    fn homogeneous(t: &Transform) -> nalgebra::Matrix4<f64> {
        let mut m = nalgebra::Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(t.rotation());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(t.translation());
        m
    }

    fn twist_of_hat(m: &nalgebra::Matrix4<f64>) -> Twist {
        let rot = m.fixed_view::<3, 3>(0, 0).into_owned();
        Twist {
            angular: vee(&((rot - rot.transpose()) * 0.5)),
            linear: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    #[test]
    fn zero_twist_is_identity() {
        for kind in KINDS {
            assert_eq!(retract(&Twist::zero(), kind), Transform::identity());
            assert_eq!(retract_inverse(&Transform::identity(), kind).unwrap(), Twist::zero());
            let w = Twist::from_array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
            assert_eq!(dtau_inv(&Twist::zero(), &w, kind).unwrap(), w);
            let f = CoTwist::from_array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
            assert_eq!(dtau_inv_dual(&Twist::zero(), &f, kind).unwrap(), f);
        }
    }

    #[test]
    fn pure_translation() {
        let t = retract(&Twist::from_array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]), RetractionKind::Exponential);
        assert_eq!(*t.rotation(), Mat3::identity());
        assert_eq!(*t.translation(), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn exp_of_quarter_turn() {
        let t = retract(&Twist::from_array([0.0, 0.0, PI / 2.0, 0.0, 0.0, 0.0]), RetractionKind::Exponential);
        assert!(t.max_abs_diff(&Transform::rot_z(PI / 2.0)) < 1e-15);
    }

    #[test]
    fn log_near_half_turn() {
        let angle = PI - 1e-3;
        let v = retract_inverse(&Transform::rot_z(angle), RetractionKind::Exponential).unwrap();
        assert!((v - Twist::from_array([0.0, 0.0, angle, 0.0, 0.0, 0.0])).max_abs() < 1e-12);
        // off-axis rotation close to π
        let axis = Vec3::new(1.0, -2.0, 0.5).normalize();
        let angle = PI - 2e-6;
        let t = Transform::from_axis_angle(&axis, angle);
        let v = retract_inverse(&t, RetractionKind::Exponential).unwrap();
        assert!((v.angular - axis * angle).amax() < 1e-9);
    }

    #[test]
    fn log_rejects_half_turn() {
        for kind in KINDS {
            let err = retract_inverse(&Transform::rot_x(PI), kind).unwrap_err();
            assert!(matches!(err, Error::Domain(_)));
            assert!(retract_inverse(&Transform::rot_x(PI - 1e-7), kind).is_err());
        }
    }

    #[test]
    fn dexp_inv_rejects_outside_domain() {
        let v = Twist::from_array([0.0, 2.0 * PI, 0.0, 0.0, 0.0, 0.0]);
        assert!(dtau_inv_matrix(&v, RetractionKind::Exponential).is_err());
        assert!(dtau_inv_matrix(&v, RetractionKind::Cayley).is_ok());
    }

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in KINDS {
            for _ in 0..1000 {
                let v = random_twist(&mut rng, 3.0, 2.0);
                let back = retract_inverse(&retract(&v, kind), kind).unwrap();
                assert!((back - v).norm() <= 1e-9 * (1.0 + v.norm()), "{kind:?}: {v:?} -> {back:?}");
                let t = retract(&v, kind);
                assert!(retract(&back, kind).max_abs_diff(&t) < 1e-10);
            }
        }
    }

    #[test]
    fn dexp_matches_power_series() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let v = random_twist(&mut rng, 3.0, 2.0);
            let closed = dtau_matrix(&v, RetractionKind::Exponential);
            assert!((closed - dexp_series(&v)).amax() < 1e-12, "{v:?}");
        }
        // tiny and moderate angles hit the series branches
        for scale in [1e-9, 1e-5, 1e-3, 0.5, 0.999, 1.001] {
            let v = Twist::from_array([0.3 * scale, -0.8 * scale, 0.52 * scale, 0.4, -1.1, 0.7]);
            let closed = dtau_matrix(&v, RetractionKind::Exponential);
            assert!((closed - dexp_series(&v)).amax() < 1e-13, "scale {scale}");
        }
    }

    #[test]
    fn tangent_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-5;
        for kind in KINDS {
            for _ in 0..100 {
                let v = random_twist(&mut rng, 2.5, 1.5);
                let w = random_twist(&mut rng, 1.0, 1.0);
                let plus = homogeneous(&retract(&(v + w * h), kind));
                let minus = homogeneous(&retract(&(v - w * h), kind));
                let tinv = homogeneous(&retract(&v, kind).inverse());
                let fd = twist_of_hat(&((plus - minus) / (2.0 * h) * tinv));
                let an = dtau(&v, &w, kind);
                let rel = (fd - an).norm() / an.norm().max(1e-12);
                assert!(rel < 1e-6, "{kind:?} rel {rel}");
            }
        }
    }

    #[test]
    fn inverse_tangent_inverts_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in KINDS {
            for _ in 0..200 {
                let v = random_twist(&mut rng, 3.0, 2.0);
                let prod = dtau_inv_matrix(&v, kind).unwrap() * dtau_matrix(&v, kind);
                assert!((prod - Mat6::identity()).amax() < 1e-9);
                let w = random_twist(&mut rng, 1.0, 1.0);
                let back = dtau_inv(&v, &dtau(&v, &w, kind), kind).unwrap();
                assert!((back - w).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn dual_is_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for kind in KINDS {
            for _ in 0..100 {
                let v = random_twist(&mut rng, 3.0, 2.0);
                let f = CoTwist::from_vector(&random_twist(&mut rng, 1.0, 1.0).to_vector());
                let w = random_twist(&mut rng, 1.0, 1.0);
                let lhs = dtau_inv_dual(&v, &f, kind).unwrap().pair(&w);
                let rhs = f.pair(&dtau_inv(&v, &w, kind).unwrap());
                assert!((lhs - rhs).abs() < 1e-12);

                // column probing
                let mut cols = Mat6::zeros();
                for j in 0..6 {
                    let e = Twist::from_vector(&Vec6::from_fn(|i, _| if i == j { 1.0 } else { 0.0 }));
                    cols.set_column(j, &dtau_inv(&v, &e, kind).unwrap().to_vector());
                }
                let mut dual_cols = Mat6::zeros();
                for j in 0..6 {
                    let e = CoTwist::from_vector(&Vec6::from_fn(|i, _| if i == j { 1.0 } else { 0.0 }));
                    dual_cols.set_column(j, &dtau_inv_dual(&v, &e, kind).unwrap().to_vector());
                }
                assert!((dual_cols - cols.transpose()).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn inverse_tangent_derivative_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = 1e-6;
        for kind in KINDS {
            for k in 0..200 {
                let ang = if k % 4 == 0 { 0.9 } else { 3.0 };
                let v = random_twist(&mut rng, ang, 2.0);
                let dv = random_twist(&mut rng, 1.0, 1.0);
                let fd = (dtau_inv_matrix(&(v + dv * h), kind).unwrap() - dtau_inv_matrix(&(v - dv * h), kind).unwrap())
                    / (2.0 * h);
                let an = dtau_inv_matrix_derivative(&v, &dv, kind).unwrap();
                assert!((fd - an).amax() < 1e-7 * (1.0 + an.amax()), "{kind:?} {v:?}");
            }
        }
    }

    #[test]
    fn retractions_agree_to_third_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let v = random_twist(&mut rng, 1.0, 1.0);
            let v = v * (1e-2 / v.norm());
            let e = retract(&v, RetractionKind::Exponential);
            let c = retract(&v, RetractionKind::Cayley);
            let n = v.norm();
            assert!(e.max_abs_diff(&c) <= 0.5 * n * n * n);
        }
    }
}
