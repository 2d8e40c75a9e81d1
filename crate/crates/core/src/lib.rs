//! Linear-time variational integrator for multibody systems.
//!
//! The discrete Euler-Lagrange residual of a kinematic tree is evaluated by a
//! discrete recursive Newton-Euler pass ([`dynamics::drnea`]), and roots are
//! found with an impulse-based quasi-Newton method whose inverse-Jacobian
//! surrogate `dt·M⁻¹` is applied by the articulated-body recursion
//! ([`dynamics::abi_solve`]). Exact Newton and Broyden solvers are provided
//! as baselines.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod instrument;
pub mod integrators;
pub mod liegroup;
pub mod model;
pub mod solvers;

pub use error::{Error, Result};
pub use liegroup::{CoTwist, RetractionKind, Transform, Twist};
pub use model::{forward_kinematics, load_scene, save_scene, serial_chain, DVec, KinematicTree, SimState};
