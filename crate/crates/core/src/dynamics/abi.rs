use crate::error::{check_dim, Error, Result};
use crate::instrument::count_body_visit;
use crate::liegroup::{Mat6, Vec6};
use crate::model::{DVec, KinematicTree};

use super::rnea::rnea;

/// Articulated-inertia pivots below this are reported as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

/// `M(q)⁻¹ · rhs` in `O(n)`.
///
/// Articulated-body recursion with velocity and gravity zeroed, so every bias
/// term vanishes: the backward pass only carries articulated inertias and the
/// propagated joint forces, the forward pass only accelerations.
pub fn abi_solve(tree: &KinematicTree, q: &DVec, rhs: &DVec) -> Result<DVec> {
    let n = tree.dof();
    check_dim(n, q.len())?;
    check_dim(n, rhs.len())?;
    let transforms = tree.joint_transforms(q)?;
    // Ad_{T⁻¹} for each joint: maps parent-frame twists into the child frame.
    let to_child: Vec<Mat6> = transforms.iter().map(|t| t.inverse().adjoint()).collect();

    let mut inertia: Vec<Mat6> = (0..n).map(|i| tree.inertia(i).matrix()).collect();
    let mut bias: Vec<Vec6> = vec![Vec6::zeros(); n];
    let mut u_vec: Vec<Vec6> = vec![Vec6::zeros(); n];
    let mut d = vec![0.0; n];
    let mut u = vec![0.0; n];

    for i in (0..n).rev() {
        count_body_visit();
        let s = tree.link(i).screw.to_vector();
        let ui = inertia[i] * s;
        let di = s.dot(&ui);
        // negated so that a NaN pivot is rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(di > SINGULAR_PIVOT) {
            return Err(Error::SingularJoint { joint: i + 1, pivot: di });
        }
        u_vec[i] = ui;
        d[i] = di;
        u[i] = rhs[i] - s.dot(&bias[i]);
        if let Some(p) = tree.parent(i) {
            let ia = inertia[i] - ui * ui.transpose() / di;
            let pa = bias[i] + ui * (u[i] / di);
            let x = &to_child[i];
            inertia[p] += x.transpose() * ia * x;
            bias[p] += x.transpose() * pa;
        }
    }

    let mut accel: Vec<Vec6> = vec![Vec6::zeros(); n];
    let mut out = DVec::zeros(n);
    for i in 0..n {
        count_body_visit();
        let a = match tree.parent(i) {
            Some(p) => to_child[i] * accel[p],
            None => Vec6::zeros(),
        };
        let qdd = (u[i] - u_vec[i].dot(&a)) / d[i];
        out[i] = qdd;
        accel[i] = a + tree.link(i).screw.to_vector() * qdd;
    }
    Ok(out)
}

/// Continuous forward dynamics `q̈ = M⁻¹(τ − C(q, q̇) − g(q))`.
pub fn forward_dynamics(tree: &KinematicTree, q: &DVec, qdot: &DVec, tau: &DVec) -> Result<DVec> {
    check_dim(tree.dof(), tau.len())?;
    let bias = rnea(tree, q, qdot, &DVec::zeros(tree.dof()), true)?;
    abi_solve(tree, q, &(tau - bias))
}
