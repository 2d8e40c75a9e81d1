//! Recursive dynamics kernels.
//!
//! * [`drnea`]: discrete recursive Newton-Euler evaluation of the forced
//!   discrete Euler-Lagrange residual, one forward and one backward pass.
//! * [`drnea_jacobian`]: exact `∂f/∂q^{k+1}` by differentiating both passes.
//! * [`abi_solve`]: `M(q)⁻¹·rhs` via the articulated-body recursion.
//! * [`rnea`]: continuous inverse dynamics, used for bias forces, mass-matrix
//!   probing and the semi-implicit Euler baseline.

mod abi;
mod drnea;
mod jacobian;
mod rnea;

pub use abi::{abi_solve, forward_dynamics, SINGULAR_PIVOT};
pub use drnea::{drnea, DiscreteStepContext, ResidualReport};
pub use jacobian::drnea_jacobian;
pub use rnea::{body_velocities, mass_matrix, rnea};
