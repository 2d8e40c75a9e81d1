use nalgebra::DMatrix;

use crate::error::{check_dim, Result};
use crate::instrument::count_body_visit;
use crate::liegroup::{CoTwist, Twist};
use crate::model::{DVec, KinematicTree};

/// Continuous inverse dynamics `τ = M(q)q̈ + C(q, q̇)q̇ + g(q)`, with the
/// gravity term only when `gravity_on`.
pub fn rnea(tree: &KinematicTree, q: &DVec, qdot: &DVec, qddot: &DVec, gravity_on: bool) -> Result<DVec> {
    let n = tree.dof();
    check_dim(n, q.len())?;
    check_dim(n, qdot.len())?;
    check_dim(n, qddot.len())?;
    let transforms = tree.joint_transforms(q)?;
    // gravity enters as a fictitious upward base acceleration
    let base_accel = if gravity_on {
        Twist::new(Default::default(), -tree.gravity())
    } else {
        Twist::zero()
    };

    let mut vel: Vec<Twist> = Vec::with_capacity(n);
    let mut acc: Vec<Twist> = Vec::with_capacity(n);
    for i in 0..n {
        count_body_visit();
        let t = &transforms[i];
        let s = tree.link(i).screw;
        let (vp, ap) = match tree.parent(i) {
            Some(p) => (vel[p], acc[p]),
            None => (Twist::zero(), base_accel),
        };
        let v = t.ad_inv(&vp) + s * qdot[i];
        let a = t.ad_inv(&ap) + s * qddot[i] + v.bracket(&(s * qdot[i]));
        vel.push(v);
        acc.push(a);
    }

    let mut force: Vec<CoTwist> = (0..n)
        .map(|i| {
            let g = tree.inertia(i);
            g.apply(&acc[i]) - vel[i].ad_dual(&g.apply(&vel[i]))
        })
        .collect();
    let mut tau = DVec::zeros(n);
    for i in (0..n).rev() {
        count_body_visit();
        let f = force[i];
        tau[i] = f.pair(&tree.link(i).screw);
        if let Some(p) = tree.parent(i) {
            force[p] += transforms[i].ad_inv_dual(&f);
        }
    }
    Ok(tau)
}

/// Body-frame twists for joint rates `qdot`.
pub fn body_velocities(tree: &KinematicTree, q: &DVec, qdot: &DVec) -> Result<Vec<Twist>> {
    let n = tree.dof();
    check_dim(n, qdot.len())?;
    let transforms = tree.joint_transforms(q)?;
    let mut vel: Vec<Twist> = Vec::with_capacity(n);
    for i in 0..n {
        let vp = tree.parent(i).map_or_else(Twist::zero, |p| vel[p]);
        vel.push(transforms[i].ad_inv(&vp) + tree.link(i).screw * qdot[i]);
    }
    Ok(vel)
}

/// Dense joint-space mass matrix, column `j` = `rnea(q, 0, e_j, gravity off)`.
pub fn mass_matrix(tree: &KinematicTree, q: &DVec) -> Result<DMatrix<f64>> {
    let n = tree.dof();
    let zero = DVec::zeros(n);
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVec::zeros(n);
        e[j] = 1.0;
        m.set_column(j, &rnea(tree, q, &zero, &e, false)?);
    }
    Ok(m)
}
