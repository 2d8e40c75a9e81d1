//! Independent oracles shared by the integration tests. Nothing here calls
//! the recursive kernels; everything is built from world poses and finite
//! differences.

#![allow(dead_code)]

use rand::Rng;
use varint::liegroup::{retract, retract_inverse, CoTwist, RetractionKind, Transform, Twist};
use varint::model::{branched_tree, serial_chain, DVec, KinematicTree};

/// World pose of every body by walking each body's path to the root.
pub fn naive_poses(tree: &KinematicTree, q: &DVec) -> Vec<Transform> {
    (0..tree.dof())
        .map(|i| {
            let mut t = Transform::identity();
            let mut j = Some(i);
            while let Some(k) = j {
                let link = tree.link(k);
                t = link.home.compose(&retract(&(link.screw * q[k]), RetractionKind::Exponential)).compose(&t);
                j = tree.parent(k);
            }
            t
        })
        .collect()
}

fn potential(tree: &KinematicTree, poses: &[Transform]) -> f64 {
    poses
        .iter()
        .enumerate()
        .map(|(i, p)| -tree.inertia(i).mass() * tree.gravity().dot(p.translation()))
        .sum()
}

/// Trapezoidal discrete Lagrangian summed over bodies, velocities from world poses.
pub fn discrete_lagrangian(tree: &KinematicTree, q0: &DVec, q1: &DVec, dt: f64, kind: RetractionKind) -> f64 {
    let p0 = naive_poses(tree, q0);
    let p1 = naive_poses(tree, q1);
    let mut kinetic = 0.0;
    for i in 0..tree.dof() {
        let v = retract_inverse(&p0[i].inverse().compose(&p1[i]), kind).unwrap() * (1.0 / dt);
        kinetic += tree.inertia(i).kinetic_energy(&v);
    }
    dt * kinetic - 0.5 * dt * (potential(tree, &p0) + potential(tree, &p1))
}

/// Forced discrete Euler-Lagrange residual at the middle configuration,
/// `−∂/∂q^k [L_d(q^{k−1}, q^k) + L_d(q^k, q^{k+1})] − Σ J_iᵀ F_i − Q`,
/// all derivatives by central differences.
#[allow(clippy::too_many_arguments)]
pub fn dense_residual(
    tree: &KinematicTree,
    dt: f64,
    kind: RetractionKind,
    q_prev: &DVec,
    q_curr: &DVec,
    q_next: &DVec,
    external: &[CoTwist],
    joint: &DVec,
    h: f64,
) -> DVec {
    let n = tree.dof();
    let action = |q: &DVec| discrete_lagrangian(tree, q_prev, q, dt, kind) + discrete_lagrangian(tree, q, q_next, dt, kind);
    let base = naive_poses(tree, q_curr);
    DVec::from_fn(n, |j, _| {
        let mut qp = q_curr.clone();
        let mut qm = q_curr.clone();
        qp[j] += h;
        qm[j] -= h;
        let grad = (action(&qp) - action(&qm)) / (2.0 * h);
        let (pp, pm) = (naive_poses(tree, &qp), naive_poses(tree, &qm));
        let mut work = 0.0;
        for i in 0..n {
            let up = retract_inverse(&base[i].inverse().compose(&pp[i]), RetractionKind::Exponential).unwrap();
            let down = retract_inverse(&base[i].inverse().compose(&pm[i]), RetractionKind::Exponential).unwrap();
            let jac: Twist = (up - down) * (1.0 / (2.0 * h));
            work += external[i].pair(&jac);
        }
        -grad - work - joint[j]
    })
}

pub fn random_vec(rng: &mut impl Rng, n: usize, s: f64) -> DVec {
    DVec::from_fn(n, |_, _| rng.gen_range(-s..s))
}

pub fn random_cotwist(rng: &mut impl Rng, s: f64) -> CoTwist {
    CoTwist::from_array(std::array::from_fn(|_| rng.gen_range(-s..s)))
}

/// A random stepping instance: tree, step size and three configurations.
pub struct Instance {
    pub tree: KinematicTree,
    pub dt: f64,
    pub q_prev: DVec,
    pub q_curr: DVec,
    pub q_next: DVec,
    pub external: Vec<CoTwist>,
    pub joint: DVec,
    pub label: String,
}

/// Fifty instances over serial and branched trees with n ∈ {2, 5, 9}.
pub fn instance_set(rng: &mut impl Rng) -> Vec<Instance> {
    let mut out = Vec::new();
    for k in 0..50 {
        let n = [2, 5, 9][k % 3];
        let branched = (k / 3) % 2 == 1;
        let tree = if branched { branched_tree(n, rng).unwrap() } else { serial_chain(n).unwrap() };
        let dt = [1e-3, 1e-2][k % 2];
        let q_prev = random_vec(rng, n, 3.0);
        let q_curr = &q_prev + random_vec(rng, n, 3.0) * dt;
        let q_next = &q_curr + random_vec(rng, n, 3.0) * dt;
        let external = (0..n).map(|_| random_cotwist(rng, 0.01)).collect();
        let joint = random_vec(rng, n, 0.01);
        out.push(Instance {
            label: format!("{} n={n} dt={dt}", if branched { "branched" } else { "serial" }),
            tree,
            dt,
            q_prev,
            q_curr,
            q_next,
            external,
            joint,
        });
    }
    out
}

pub fn rel_err(a: &DVec, reference: &DVec) -> f64 {
    (a - reference).amax() / reference.amax().max(1e-300)
}
