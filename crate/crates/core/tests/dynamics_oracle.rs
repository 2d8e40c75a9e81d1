mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use varint::dynamics::{drnea, DiscreteStepContext};
use varint::liegroup::RetractionKind;

fn check(kind: RetractionKind, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for inst in instance_set(&mut rng) {
        let ctx = DiscreteStepContext::new(&inst.tree, inst.dt, inst.q_prev.clone(), inst.q_curr.clone(), kind, None)
            .unwrap()
            .with_external_impulses(inst.external.clone())
            .unwrap()
            .with_joint_impulses(inst.joint.clone())
            .unwrap();
        let fast = drnea(&ctx, &inst.q_next).unwrap().residual;
        let dense = dense_residual(&inst.tree, inst.dt, kind, &inst.q_prev, &inst.q_curr, &inst.q_next, &inst.external, &inst.joint, 1e-6);
        let e = rel_err(&fast, &dense);
        assert!(e < 1e-6, "{}: relative error {e:e}\nfast  {fast}\ndense {dense}", inst.label);
    }
}

#[test]
fn drnea_matches_dense_lagrangian_exponential() {
    check(RetractionKind::Exponential, 1);
}

#[test]
fn drnea_matches_dense_lagrangian_cayley() {
    check(RetractionKind::Cayley, 2);
}

#[test]
fn serial_chain_of_three() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tree = varint::serial_chain(3).unwrap();
    let z = varint::DVec::zeros(3);
    for _ in 0..10 {
        let q0 = random_vec(&mut rng, 3, 2.0);
        let q1 = &q0 + random_vec(&mut rng, 3, 0.01);
        let q2 = &q1 + random_vec(&mut rng, 3, 0.01);
        let ctx = DiscreteStepContext::new(&tree, 1e-2, q0.clone(), q1.clone(), RetractionKind::Exponential, None).unwrap();
        let fast = drnea(&ctx, &q2).unwrap().residual;
        let zero = vec![varint::CoTwist::zero(); 3];
        let dense = dense_residual(&tree, 1e-2, RetractionKind::Exponential, &q0, &q1, &q2, &zero, &z, 1e-6);
        assert!(rel_err(&fast, &dense) < 1e-6);
    }
}
