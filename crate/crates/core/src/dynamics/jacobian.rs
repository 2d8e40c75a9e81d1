use nalgebra::DMatrix;

use super::drnea::{forward_pass, DiscreteStepContext};
use crate::error::{check_dim, Result};
use crate::instrument::count_body_visit;
use crate::liegroup::{dtau_inv_matrix, dtau_inv_matrix_derivative, CoTwist, Mat6, Twist};
use crate::model::DVec;

/// Exact `∂f/∂q^{k+1}` at `q_next`.
///
/// Column `j` seeds the forward pass with `S_j` at body `j` and pushes the
/// perturbation through `j`'s subtree (`ξ_i = Ad_{B_i⁻¹} ξ_λ + S_i δ_ij`,
/// `∂V_i = dτ⁻¹(Ad_{ΔT_i} ξ_i)/Δt`), then runs the dual backward pass over the
/// subtree and up the ancestor path. Entries outside those sets are zero, so a
/// chain costs `O(n²)` body visits.
pub fn drnea_jacobian(ctx: &DiscreteStepContext<'_>, q_next: &DVec) -> Result<DMatrix<f64>> {
    let tree = ctx.tree();
    let n = tree.dof();
    let dt = ctx.dt();
    let kind = ctx.retraction();
    check_dim(n, q_next.len())?;
    let next = tree.joint_transforms(q_next)?;
    let pass = forward_pass(tree, &ctx.curr_transforms, &next, dt, kind)?;

    let mut dinv: Vec<Mat6> = Vec::with_capacity(n);
    let mut gv: Vec<CoTwist> = Vec::with_capacity(n);
    for i in 0..n {
        dinv.push(dtau_inv_matrix(&(pass.velocities[i] * dt), kind)?);
        gv.push(tree.inertia(i).apply(&pass.velocities[i]));
    }

    let mut jac = DMatrix::zeros(n, n);
    let mut in_subtree = vec![false; n];
    let mut xi = vec![Twist::zero(); n];
    let mut dforce = vec![CoTwist::zero(); n];
    for j in 0..n {
        in_subtree.iter_mut().for_each(|s| *s = false);
        let mut members = Vec::new();
        for i in j..n {
            let seeded = i == j || tree.parent(i).is_some_and(|p| p >= j && in_subtree[p]);
            if !seeded {
                continue;
            }
            count_body_visit();
            in_subtree[i] = true;
            members.push(i);
            let mut x = if i == j { tree.link(i).screw } else { Twist::zero() };
            if i != j {
                let p = tree.parent(i).expect("subtree member below j has a parent");
                x += pass.next_transforms[i].ad_inv(&xi[p]);
            }
            xi[i] = x;
            let dv = dinv[i] * pass.displacements[i].ad(&x) * (1.0 / dt);
            let d_dinv = dtau_inv_matrix_derivative(&(pass.velocities[i] * dt), &(dv * dt), kind)?;
            let g = tree.inertia(i);
            dforce[i] = d_dinv.transpose() * gv[i] + dinv[i].transpose() * g.apply(&dv);
        }
        // backward over the subtree, then up the ancestor path of j
        for &i in members.iter().rev() {
            count_body_visit();
            let f = dforce[i];
            jac[(i, j)] = f.pair(&tree.link(i).screw);
            if i != j {
                let p = tree.parent(i).expect("subtree member below j has a parent");
                dforce[p] += ctx.curr_transforms[i].ad_inv_dual(&f);
            }
        }
        let mut child = j;
        let mut carried = dforce[j];
        while let Some(p) = tree.parent(child) {
            count_body_visit();
            carried = ctx.curr_transforms[child].ad_inv_dual(&carried);
            jac[(p, j)] = carried.pair(&tree.link(p).screw);
            child = p;
        }
    }
    Ok(jac)
}
