use crate::error::{check_dim, Error, Result};
use crate::instrument::count_body_visit;
use crate::liegroup::{dtau_inv_dual, retract, retract_inverse, CoTwist, RetractionKind, Transform, Twist};
use crate::model::{forward_kinematics, DVec, KinematicTree, MomentumCache};

/// Everything about step `k` that does not depend on the unknown `q^{k+1}`.
///
/// Construction does the `q^k`-only work once: relative joint transforms,
/// the gravity impulses, and the previous momenta transported into the
/// current frames. Solvers evaluate [`drnea`] many times against one context.
#[derive(Clone, Debug)]
pub struct DiscreteStepContext<'a> {
    tree: &'a KinematicTree,
    dt: f64,
    q_prev: DVec,
    q_curr: DVec,
    external_impulses: Vec<CoTwist>,
    joint_impulses: DVec,
    retraction: RetractionKind,
    /// `T_{λ(i),i}(q^k)`.
    pub(crate) curr_transforms: Vec<Transform>,
    /// `Ad*_{τ(Δt V^{k−1})} μ^{k−1} − Δt·(0, −m Rᵀg)`, the part of `F_i` known before solving.
    pub(crate) known_impulse: Vec<CoTwist>,
    gravity_impulse: Vec<CoTwist>,
}

/// Output of one [`drnea`] evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    /// `f_i`, one entry per joint (N·m·s or N·s).
    pub residual: DVec,
    /// `μ_i^k` in body frames.
    pub per_body_momentum: Vec<CoTwist>,
    /// `V_i^k` in body frames.
    pub per_body_velocity: Vec<Twist>,
}

impl ResidualReport {
    pub fn norm_inf(&self) -> f64 {
        self.residual.amax()
    }

    /// Momenta and velocities to seed the next step's context.
    pub fn into_cache(self) -> MomentumCache {
        MomentumCache {
            momenta: self.per_body_momentum,
            velocities: self.per_body_velocity,
        }
    }
}

impl<'a> DiscreteStepContext<'a> {
    /// Context with zero applied impulses. `cache`, when given, must hold the
    /// `μ^{k−1}, V^{k−1}` produced by the step that reached `q_curr`.
    pub fn new(
        tree: &'a KinematicTree,
        dt: f64,
        q_prev: DVec,
        q_curr: DVec,
        retraction: RetractionKind,
        cache: Option<&MomentumCache>,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Validation(format!("time step {dt} must be positive")));
        }
        let n = tree.dof();
        check_dim(n, q_prev.len())?;
        check_dim(n, q_curr.len())?;
        if q_prev.iter().chain(q_curr.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Validation("configuration is not finite".into()));
        }
        let curr_transforms = tree.joint_transforms(&q_curr)?;

        let owned;
        let prev = match cache {
            Some(c) => {
                check_dim(n, c.momenta.len())?;
                check_dim(n, c.velocities.len())?;
                c
            }
            None => {
                let prev_transforms = tree.joint_transforms(&q_prev)?;
                let pass = forward_pass(tree, &prev_transforms, &curr_transforms, dt, retraction)?;
                owned = MomentumCache {
                    momenta: momenta(tree, &pass.velocities, dt, retraction)?,
                    velocities: pass.velocities,
                };
                &owned
            }
        };

        let poses = forward_kinematics(tree, &q_curr)?;
        let g = tree.gravity();
        let mut gravity_impulse = Vec::with_capacity(n);
        let mut known_impulse = Vec::with_capacity(n);
        for (i, pose) in poses.iter().enumerate() {
            let m = tree.inertia(i).mass();
            // gradient of P = −m gᵀp in the body frame, times Δt
            let grav = CoTwist::new(Default::default(), pose.rotation().transpose() * g * (-m * dt));
            let transport = retract(&(prev.velocities[i] * dt), retraction).ad_dual(&prev.momenta[i]);
            known_impulse.push(transport - grav);
            gravity_impulse.push(grav);
        }

        Ok(Self {
            tree,
            dt,
            q_prev,
            q_curr,
            external_impulses: vec![CoTwist::zero(); n],
            joint_impulses: DVec::zeros(n),
            retraction,
            curr_transforms,
            known_impulse,
            gravity_impulse,
        })
    }

    /// Sets `F_i^{ext,k}`, one body-frame impulse per body.
    pub fn with_external_impulses(mut self, impulses: Vec<CoTwist>) -> Result<Self> {
        check_dim(self.tree.dof(), impulses.len())?;
        self.external_impulses = impulses;
        Ok(self)
    }

    /// Sets `Q^k`, one generalized impulse per joint.
    pub fn with_joint_impulses(mut self, impulses: DVec) -> Result<Self> {
        check_dim(self.tree.dof(), impulses.len())?;
        self.joint_impulses = impulses;
        Ok(self)
    }

    pub fn tree(&self) -> &'a KinematicTree {
        self.tree
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn q_prev(&self) -> &DVec {
        &self.q_prev
    }

    pub fn q_curr(&self) -> &DVec {
        &self.q_curr
    }

    pub fn external_impulses(&self) -> &[CoTwist] {
        &self.external_impulses
    }

    pub fn joint_impulses(&self) -> &DVec {
        &self.joint_impulses
    }

    pub fn retraction(&self) -> RetractionKind {
        self.retraction
    }

    /// `Δt·(0, −m Rᵀg)` for each body at `q^k`.
    pub fn gravity_impulses(&self) -> &[CoTwist] {
        &self.gravity_impulse
    }
}

pub(crate) struct ForwardPass {
    /// `ΔT_i`, body displacement over the step in its own frame.
    pub displacements: Vec<Transform>,
    /// `T_{λ(i),i}` at the end of the step.
    pub next_transforms: Vec<Transform>,
    pub velocities: Vec<Twist>,
}

/// Displacements and average velocities between two sets of joint transforms.
pub(crate) fn forward_pass(
    tree: &KinematicTree,
    from: &[Transform],
    to: &[Transform],
    dt: f64,
    kind: RetractionKind,
) -> Result<ForwardPass> {
    let n = tree.dof();
    let mut displacements: Vec<Transform> = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for i in 0..n {
        count_body_visit();
        // ΔT_i = T_{λi}^{k,−1} ΔT_λ T_{λi}^{k+1}
        let d = match tree.parent(i) {
            Some(p) => from[i].inverse().compose(&displacements[p]).compose(&to[i]),
            None => from[i].inverse().compose(&to[i]),
        };
        let v = retract_inverse(&d, kind).map_err(|e| match e {
            Error::Domain(m) => Error::Domain(format!("body {}: {m}", i + 1)),
            other => other,
        })?;
        velocities.push(v * (1.0 / dt));
        displacements.push(d);
    }
    Ok(ForwardPass {
        displacements,
        next_transforms: to.to_vec(),
        velocities,
    })
}

/// `μ_i = (dτ⁻¹_{Δt V_i})* G_i V_i`.
pub(crate) fn momenta(tree: &KinematicTree, velocities: &[Twist], dt: f64, kind: RetractionKind) -> Result<Vec<CoTwist>> {
    velocities
        .iter()
        .enumerate()
        .map(|(i, v)| dtau_inv_dual(&(*v * dt), &tree.inertia(i).apply(v), kind))
        .collect()
}

/// Forced discrete Euler-Lagrange residual at `q_next`.
///
/// One root-to-leaf pass for displacements and velocities, one leaf-to-root
/// pass accumulating
/// `F_i = μ_i^k − Ad*_{τ(Δt V_i^{k−1})} μ_i^{k−1} + Δt·(0, −m_i R_iᵀg) − F_i^{ext} + Σ_c Ad*_{T_{ic}^{−1}} F_c`
/// and projecting `f_i = S_iᵀ F_i − Q_i`.
pub fn drnea(ctx: &DiscreteStepContext<'_>, q_next: &DVec) -> Result<ResidualReport> {
    let tree = ctx.tree;
    let n = tree.dof();
    check_dim(n, q_next.len())?;
    let next = tree.joint_transforms(q_next)?;
    let pass = forward_pass(tree, &ctx.curr_transforms, &next, ctx.dt, ctx.retraction)?;
    let mu = momenta(tree, &pass.velocities, ctx.dt, ctx.retraction)?;

    let mut force: Vec<CoTwist> = (0..n)
        .map(|i| mu[i] - ctx.known_impulse[i] - ctx.external_impulses[i])
        .collect();
    let mut residual = DVec::zeros(n);
    for i in (0..n).rev() {
        count_body_visit();
        let f = force[i];
        residual[i] = f.pair(&tree.link(i).screw) - ctx.joint_impulses[i];
        if let Some(p) = tree.parent(i) {
            force[p] += ctx.curr_transforms[i].ad_inv_dual(&f);
        }
    }
    if residual.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("residual is not finite".into()));
    }
    Ok(ResidualReport {
        residual,
        per_body_momentum: mu,
        per_body_velocity: pass.velocities,
    })
}
