//! Root-finding for the discrete Euler-Lagrange residual.
//!
//! * [`SolverMethod::Riqn`]: `q ← q − Δt·M(q^k)⁻¹·f(q)`, one ABI pass per iteration.
//! * [`SolverMethod::Newton`]: exact Jacobian from [`drnea_jacobian`], dense LU.
//! * [`SolverMethod::Broyden`]: "good" rank-1 updates of an inverse-Jacobian
//!   estimate seeded with `Δt·M⁻¹`.

use std::fmt;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;

use crate::dynamics::{abi_solve, drnea, drnea_jacobian, forward_dynamics, DiscreteStepContext, ResidualReport};
use crate::error::{Error, Result};
use crate::instrument::count_dense;
use crate::model::DVec;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SolverMethod {
    #[default]
    Riqn,
    Newton,
    Broyden,
}

impl fmt::Display for SolverMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverMethod::Riqn => "riqn",
            SolverMethod::Newton => "newton",
            SolverMethod::Broyden => "broyden",
        })
    }
}

/// Starting point for the iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum InitialGuess {
    /// `q^{k+1} = q^k`.
    Hold,
    /// `q^{k+1} = q^k + (q^k − q^{k−1})`.
    #[default]
    ExplicitEuler,
    /// Semi-implicit Euler predictor from the continuous forward dynamics.
    ForwardDynamics,
    /// `q^{k+1} = 0`; only useful for convergence studies.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub method: SolverMethod,
    /// Stop once `‖f‖_∞` is at or below this (N·m·s). May be `∞`.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub initial_guess: InitialGuess,
    /// Halve a step while it increases the residual norm.
    pub line_search: bool,
    /// Re-evaluate `M⁻¹` at each RIQN iterate instead of freezing it at `q^k`.
    pub refresh_mass: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolverMethod::Riqn,
            tolerance: 1e-9,
            max_iterations: 30,
            initial_guess: InitialGuess::ExplicitEuler,
            line_search: false,
            refresh_mass: false,
        }
    }
}

impl SolverConfig {
    pub fn with_method(method: SolverMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Validation(format!("tolerance {} must be positive", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveTrace {
    pub iterations: usize,
    /// `‖f‖_∞` at the initial guess and after every iteration.
    pub residual_norms: Vec<f64>,
    pub converged: bool,
    pub wall_time: Duration,
}

#[derive(Clone, Debug)]
pub struct StepSolution {
    pub q_next: DVec,
    pub report: ResidualReport,
    pub trace: SolveTrace,
}

/// A failed solve. For non-convergence `best` holds the iterate with the
/// smallest residual and the full trace.
#[derive(Clone, Debug)]
pub struct StepError {
    pub error: Error,
    pub best: Option<Box<StepSolution>>,
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for StepError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for StepError {
    fn from(error: Error) -> Self {
        Self { error, best: None }
    }
}

impl From<StepError> for Error {
    fn from(e: StepError) -> Self {
        e.error
    }
}

/// Starting iterate for `kind`.
pub fn initial_guess(ctx: &DiscreteStepContext<'_>, kind: InitialGuess) -> Result<DVec> {
    let (q0, q1) = (ctx.q_prev(), ctx.q_curr());
    Ok(match kind {
        InitialGuess::Hold => q1.clone(),
        InitialGuess::ExplicitEuler => q1 * 2.0 - q0,
        InitialGuess::ForwardDynamics => {
            let dt = ctx.dt();
            let qdot = (q1 - q0) / dt;
            let tau = ctx.joint_impulses() / dt;
            let qddot = forward_dynamics(ctx.tree(), q1, &qdot, &tau)?;
            q1 + (qdot + qddot * dt) * dt
        }
        InitialGuess::Zero => DVec::zeros(q1.len()),
    })
}

enum Direction {
    Riqn,
    Newton,
    Broyden(DMatrix<f64>),
}

/// Solves `f(q^{k+1}) = 0` for one step.
pub fn solve_step(ctx: &DiscreteStepContext<'_>, cfg: &SolverConfig) -> Result<StepSolution, StepError> {
    cfg.validate()?;
    let start = Instant::now();
    let tree = ctx.tree();
    let dt = ctx.dt();
    let n = tree.dof();

    let mut q = initial_guess(ctx, cfg.initial_guess)?;
    let mut report = drnea(ctx, &q)?;
    let mut norms = vec![report.norm_inf()];
    let mut best = (q.clone(), report.clone());
    let mut direction = match cfg.method {
        SolverMethod::Riqn => Direction::Riqn,
        SolverMethod::Newton => Direction::Newton,
        SolverMethod::Broyden => Direction::Broyden(scaled_inverse_mass(ctx)?),
    };

    let mut iterations = 0;
    while report.norm_inf() > cfg.tolerance && iterations < cfg.max_iterations {
        let f = &report.residual;
        let step = match &direction {
            Direction::Riqn => {
                let at = if cfg.refresh_mass { &q } else { ctx.q_curr() };
                -abi_solve(tree, at, f)? * dt
            }
            Direction::Newton => {
                let jac = drnea_jacobian(ctx, &q)?;
                count_dense((n * n * n / 3 + 2 * n * n) as u64);
                let lu = jac.lu();
                -lu.solve(f).ok_or_else(|| Error::Domain("singular Jacobian".into()))?
            }
            Direction::Broyden(h) => {
                count_dense((n * n) as u64);
                -(h * f)
            }
        };

        let (mut q_new, mut r_new) = trial(ctx, &q, &step, 1.0)?;
        if cfg.line_search {
            let mut scale = 1.0;
            while r_new.norm_inf() > report.norm_inf() && scale > 1e-3 {
                scale *= 0.5;
                (q_new, r_new) = trial(ctx, &q, &step, scale)?;
            }
        }

        if let Direction::Broyden(h) = &mut direction {
            let s = &q_new - &q;
            let y = &r_new.residual - f;
            let hy = &*h * &y;
            let denom = s.dot(&hy);
            if denom.abs() > f64::EPSILON * s.norm() * hy.norm() {
                let st_h = s.transpose() * &*h;
                *h += (s - hy) * st_h / denom;
                count_dense((4 * n * n) as u64);
            }
        }

        q = q_new;
        report = r_new;
        iterations += 1;
        norms.push(report.norm_inf());
        if report.norm_inf() < best.1.norm_inf() {
            best = (q.clone(), report.clone());
        }
    }

    let converged = report.norm_inf() <= cfg.tolerance;
    let trace = SolveTrace {
        iterations,
        residual_norms: norms,
        converged,
        wall_time: start.elapsed(),
    };
    if converged {
        return Ok(StepSolution { q_next: q, report, trace });
    }
    let residual = best.1.norm_inf();
    Err(StepError {
        error: Error::NonConvergence { iterations, residual },
        best: Some(Box::new(StepSolution {
            q_next: best.0,
            report: best.1,
            trace,
        })),
    })
}

fn trial(ctx: &DiscreteStepContext<'_>, q: &DVec, step: &DVec, scale: f64) -> Result<(DVec, ResidualReport)> {
    let candidate = q + step * scale;
    let report = drnea(ctx, &candidate)?;
    Ok((candidate, report))
}

/// Dense `Δt·M(q^k)⁻¹`, one ABI solve per column.
fn scaled_inverse_mass(ctx: &DiscreteStepContext<'_>) -> Result<DMatrix<f64>> {
    let n = ctx.tree().dof();
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = DVec::zeros(n);
        e[j] = 1.0;
        h.set_column(j, &(abi_solve(ctx.tree(), ctx.q_curr(), &e)? * ctx.dt()));
    }
    Ok(h)
}
