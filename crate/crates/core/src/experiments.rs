//! Experiment harness: energy behavior, cost scaling and solver convergence.
//!
//! Every run produces a [`Table`] whose first line is a metadata comment
//! (`# key=value ...`) followed by an ordinary CSV header and rows.

use std::fmt;
use std::io::{self, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::DiscreteStepContext;
use crate::error::{Error, Result};
use crate::integrators::{bootstrap, simulate, step_variational, total_energy, Integrator};
use crate::liegroup::RetractionKind;
use crate::model::{serial_chain, DVec, KinematicTree, SimState};
use crate::solvers::{solve_step, InitialGuess, SolveTrace, SolverConfig, SolverMethod};

/// Revision of the source tree this binary was built from.
pub const GIT_REVISION: &str = env!("VARINT_GIT_REVISION");

/// Residuals below this (N·m·s) are round-off, not convergence behavior. One
/// ulp of `q^{k+1}` moves the residual by roughly `‖M‖/dt · ε`, which for the
/// 10-body chain at 1 ms already reaches ~1e-13.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    Energy,
    Scaling,
    Convergence,
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Energy => "energy",
            Experiment::Scaling => "scaling",
            Experiment::Convergence => "convergence",
        })
    }
}

#[derive(Clone, Debug)]
pub struct BenchSpec {
    pub experiment: Experiment,
    /// Chain sizes; energy and convergence use the first entry.
    pub dof_list: Vec<usize>,
    /// Replaces the generated chain (energy and convergence only).
    pub scene: Option<KinematicTree>,
    pub dt: f64,
    /// Steps per run (energy, convergence) or timed steps per repetition (scaling).
    pub frames: usize,
    pub solver: SolverConfig,
    pub methods: Vec<SolverMethod>,
    pub retraction: RetractionKind,
    pub rng_seed: u64,
    pub repetitions: usize,
    pub warmup_frames: usize,
    /// Convergence study: every joint starts at this angle (rad), at rest.
    pub curl: f64,
}

impl BenchSpec {
    /// Passive 10-body chain released horizontally, 10k frames at 1 ms.
    pub fn energy() -> Self {
        Self {
            experiment: Experiment::Energy,
            dof_list: vec![10],
            scene: None,
            dt: 1e-3,
            frames: 10_000,
            solver: SolverConfig::default(),
            methods: vec![SolverMethod::Riqn],
            retraction: RetractionKind::Exponential,
            rng_seed: 0,
            repetitions: 1,
            warmup_frames: 0,
            curl: 0.0,
        }
    }

    /// Chains of 5 to 160 bodies from a seeded random pose.
    pub fn scaling() -> Self {
        Self {
            experiment: Experiment::Scaling,
            dof_list: vec![5, 10, 20, 40, 80, 100, 160],
            frames: 50,
            methods: vec![SolverMethod::Riqn, SolverMethod::Newton, SolverMethod::Broyden],
            repetitions: 3,
            warmup_frames: 100,
            ..Self::energy()
        }
    }

    /// Zero-initial-guess solves along a gently swinging 10-body chain.
    pub fn convergence() -> Self {
        Self {
            experiment: Experiment::Convergence,
            frames: 1000,
            solver: SolverConfig {
                tolerance: 1e-11,
                ..SolverConfig::default()
            },
            methods: vec![SolverMethod::Newton, SolverMethod::Riqn],
            curl: 0.03,
            ..Self::energy()
        }
    }

    pub fn for_experiment(experiment: Experiment) -> Self {
        match experiment {
            Experiment::Energy => Self::energy(),
            Experiment::Scaling => Self::scaling(),
            Experiment::Convergence => Self::convergence(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames == 0 {
            return Err(Error::Validation("frames must be at least 1".into()));
        }
        if self.dof_list.is_empty() && self.scene.is_none() {
            return Err(Error::Validation("dof list is empty".into()));
        }
        if self.dof_list.contains(&0) {
            return Err(Error::Validation("chain sizes must be positive".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Validation(format!("time step {} must be positive", self.dt)));
        }
        if self.methods.is_empty() {
            return Err(Error::Validation("no solver methods selected".into()));
        }
        if self.experiment == Experiment::Scaling && self.repetitions == 0 {
            return Err(Error::Validation("repetitions must be at least 1".into()));
        }
        self.solver.validate()
    }

    fn tree(&self) -> Result<KinematicTree> {
        match &self.scene {
            Some(t) => Ok(t.clone()),
            None => serial_chain(self.dof_list[0]),
        }
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let mut m = vec![
            ("experiment".to_string(), self.experiment.to_string()),
            ("git_revision".into(), GIT_REVISION.into()),
            ("dt".into(), self.dt.to_string()),
            ("tolerance".into(), self.solver.tolerance.to_string()),
            ("max_iterations".into(), self.solver.max_iterations.to_string()),
            ("seed".into(), self.rng_seed.to_string()),
            ("frames".into(), self.frames.to_string()),
            ("retraction".into(), format!("{:?}", self.retraction).to_lowercase()),
        ];
        if self.scene.is_some() {
            m.push(("scene".into(), "custom".into()));
        }
        m
    }
}

/// Metadata comment line, CSV header and rows. Rows may be ragged.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(metadata: Vec<(String, String)>, header: &[&str]) -> Self {
        Self {
            metadata,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let meta: Vec<String> = self.metadata.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "# {}", meta.join(" "))?;
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// Least-squares slope of `y` against `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Mean and population standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n).sqrt())
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len();
    if k % 2 == 1 {
        s[k / 2]
    } else {
        0.5 * (s[k / 2 - 1] + s[k / 2])
    }
}

/// `r_{l+1} ≤ r_l` for every `l ≥ 1`.
pub fn is_monotone_after_first(norms: &[f64]) -> bool {
    norms.windows(2).skip(1).all(|w| w[1] <= w[0])
}

/// Contraction ratios `r_{l+1}/r_l` are below one and strictly decrease
/// from iteration 1 on, a finite-sample form of `r_{l+1}/r_l → 0`. The first
/// ratio is skipped: from a cold guess the first step is a global one whose
/// ratio says nothing about the local rate. Steps landing below `floor` are
/// round-off and ignored; with fewer than two ratios left the series reached
/// the floor too fast to tell and counts as superlinear.
pub fn is_superlinear(norms: &[f64], floor: f64) -> bool {
    let ratios: Vec<f64> = norms
        .windows(2)
        .filter(|w| w[1] > floor)
        .map(|w| w[1] / w[0])
        .skip(1)
        .collect();
    ratios.iter().all(|&r| r < 1.0) && ratios.windows(2).all(|w| w[1] < w[0])
}

// ---------------------------------------------------------------- energy

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySummary {
    pub integrator: Integrator,
    /// Least-squares slope of `(E_k − E_0)/scale` per frame.
    pub slope_per_frame: f64,
    /// `max_k |E_k − E_0|/scale`.
    pub max_relative_deviation: f64,
}

#[derive(Clone, Debug)]
pub struct EnergyReport {
    pub table: Table,
    /// Normalizer for energy errors: `E_0` minus the potential of the zero
    /// configuration (the hanging rest pose of a serial chain).
    pub energy_scale: f64,
    pub summaries: Vec<EnergySummary>,
}

impl EnergyReport {
    pub fn summary(&self, integrator: Integrator) -> Option<&EnergySummary> {
        self.summaries.iter().find(|s| s.integrator == integrator)
    }
}

/// Initial pose of the energy study: first joint at 90°, i.e. a chain held horizontal.
pub fn horizontal_pose(n: usize) -> DVec {
    let mut q = DVec::zeros(n);
    q[0] = std::f64::consts::FRAC_PI_2;
    q
}

pub fn run_energy(spec: &BenchSpec) -> Result<EnergyReport> {
    spec.validate()?;
    let tree = spec.tree()?;
    let n = tree.dof();
    let q0 = horizontal_pose(n);
    let qdot0 = DVec::zeros(n);
    let (k0, p0) = total_energy(&tree, &q0, &qdot0)?;
    let e0 = k0 + p0;
    let (_, p_ref) = total_energy(&tree, &DVec::zeros(n), &qdot0)?;
    let energy_scale = if (e0 - p_ref).abs() > 1e-12 {
        (e0 - p_ref).abs()
    } else if e0 != 0.0 {
        e0.abs()
    } else {
        1.0
    };

    let mut table = Table::new(spec.metadata(), &["integrator", "frame", "t", "E_kin", "E_pot", "E_total"]);
    table.metadata.push(("energy_scale".into(), energy_scale.to_string()));
    let mut summaries = Vec::new();
    for integrator in [Integrator::Variational, Integrator::SemiImplicitEuler] {
        let traj = simulate(&tree, &q0, &qdot0, spec.dt, spec.frames, integrator, &spec.solver, spec.retraction)
            .map_err(|e| annotate(e, &format!("energy run ({integrator})")))?;
        for (k, (t, (ek, ep))) in traj.times.iter().zip(&traj.energies).enumerate() {
            table.rows.push(vec![
                integrator.to_string(),
                k.to_string(),
                format!("{t}"),
                num(*ek),
                num(*ep),
                num(ek + ep),
            ]);
        }
        let drift: Vec<f64> = traj.total_energy().iter().map(|e| (e - e0) / energy_scale).collect();
        let frames: Vec<f64> = (0..drift.len()).map(|k| k as f64).collect();
        summaries.push(EnergySummary {
            integrator,
            slope_per_frame: if drift.len() > 1 { least_squares_slope(&frames, &drift) } else { 0.0 },
            max_relative_deviation: drift.iter().fold(0.0, |a, d| a.max(d.abs())),
        });
    }
    Ok(EnergyReport {
        table,
        energy_scale,
        summaries,
    })
}

fn annotate(e: Error, what: &str) -> Error {
    match e {
        Error::AtFrame { frame, source } => Error::AtFrame {
            frame,
            source: Box::new(annotate(*source, what)),
        },
        Error::Domain(m) => Error::Domain(format!("{what}: {m}")),
        Error::SingularJoint { .. } | Error::NonConvergence { .. } | Error::Dimension { .. } => e,
        Error::Parse(m) => Error::Parse(format!("{what}: {m}")),
        Error::Validation(m) => Error::Validation(format!("{what}: {m}")),
    }
}

// --------------------------------------------------------------- scaling

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingCell {
    pub dof: usize,
    pub method: SolverMethod,
    /// Seconds per step, one entry per repetition.
    pub step_times: Vec<f64>,
    pub mean: f64,
    pub stddev: f64,
    pub median: f64,
    pub mean_iterations: f64,
}

#[derive(Clone, Debug)]
pub struct ScalingReport {
    pub table: Table,
    pub cells: Vec<ScalingCell>,
    /// Log-log slope of mean step time against DOF count, per method.
    pub slopes: Vec<(SolverMethod, f64)>,
}

impl ScalingReport {
    pub fn slope(&self, method: SolverMethod) -> Option<f64> {
        self.slopes.iter().find(|(m, _)| *m == method).map(|(_, s)| *s)
    }

    pub fn cell(&self, dof: usize, method: SolverMethod) -> Option<&ScalingCell> {
        self.cells.iter().find(|c| c.dof == dof && c.method == method)
    }
}

/// Seeded random pose for the scaling study, joint angles in ±0.5 rad.
pub fn random_pose(n: usize, seed: u64) -> DVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVec::from_fn(n, |_, _| rng.gen_range(-0.5..0.5))
}

fn advance(state: &SimState, tree: &KinematicTree, spec: &BenchSpec, cfg: &SolverConfig, frames: usize) -> Result<(SimState, usize)> {
    let mut s = state.clone();
    let mut iterations = 0;
    for _ in 0..frames {
        let (next, trace) = step_variational(&s, tree, spec.dt, cfg, spec.retraction)?;
        iterations += trace.iterations;
        s = next;
    }
    Ok((s, iterations))
}

pub fn run_scaling(spec: &BenchSpec) -> Result<ScalingReport> {
    spec.validate()?;
    let mut table = Table::new(
        spec.metadata(),
        &["n", "method", "mean_step_time_s", "stddev_s", "median_s", "mean_iterations"],
    );
    table.metadata.push(("repetitions".into(), spec.repetitions.to_string()));
    table.metadata.push(("warmup_frames".into(), spec.warmup_frames.to_string()));
    let mut cells = Vec::new();
    for &n in &spec.dof_list {
        let tree = serial_chain(n)?;
        let start = bootstrap(&tree, &random_pose(n, spec.rng_seed), &DVec::zeros(n), spec.dt)?;
        for &method in &spec.methods {
            let cfg = SolverConfig { method, ..spec.solver };
            let what = format!("scaling n={n} {method}");
            let (warm, _) = advance(&start, &tree, spec, &cfg, spec.warmup_frames).map_err(|e| annotate(e, &what))?;
            let mut step_times = Vec::with_capacity(spec.repetitions);
            let mut iterations = 0;
            for _ in 0..spec.repetitions {
                let clock = Instant::now();
                let (_, its) = advance(&warm, &tree, spec, &cfg, spec.frames).map_err(|e| annotate(e, &what))?;
                step_times.push(clock.elapsed().as_secs_f64() / spec.frames as f64);
                iterations += its;
            }
            let (mean, stddev) = mean_std(&step_times);
            let cell = ScalingCell {
                dof: n,
                method,
                median: median(&step_times),
                mean,
                stddev,
                mean_iterations: iterations as f64 / (spec.frames * spec.repetitions) as f64,
                step_times,
            };
            table.rows.push(vec![
                n.to_string(),
                method.to_string(),
                num(cell.mean),
                num(cell.stddev),
                num(cell.median),
                format!("{:.3}", cell.mean_iterations),
            ]);
            cells.push(cell);
        }
    }
    let mut slopes = Vec::new();
    if spec.dof_list.len() >= 2 {
        for &method in &spec.methods {
            let (x, y): (Vec<f64>, Vec<f64>) = cells
                .iter()
                .filter(|c| c.method == method)
                .map(|c| ((c.dof as f64).ln(), c.mean.ln()))
                .unzip();
            let s = least_squares_slope(&x, &y);
            table.rows.push(vec!["loglog_slope".into(), method.to_string(), format!("{s:.4}")]);
            slopes.push((method, s));
        }
    }
    Ok(ScalingReport { table, cells, slopes })
}

// ----------------------------------------------------------- convergence

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub frame: usize,
    pub method: SolverMethod,
    pub trace: SolveTrace,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceSummary {
    pub method: SolverMethod,
    pub mean_iterations: f64,
    pub std_iterations: f64,
    pub failures: usize,
    /// Converged series whose residual rises after the first iteration.
    pub non_monotone: usize,
    /// Series whose contraction ratios do not shrink (see [`is_superlinear`]).
    pub non_superlinear: usize,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub table: Table,
    pub records: Vec<ConvergenceRecord>,
    pub summaries: Vec<ConvergenceSummary>,
}

impl ConvergenceReport {
    pub fn summary(&self, method: SolverMethod) -> Option<&ConvergenceSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }
}

/// Every joint at `curl`: the chain curls into a gentle arc.
pub fn curled_pose(n: usize, curl: f64) -> DVec {
    DVec::from_element(n, curl)
}

/// Steps a reference trajectory (RIQN, explicit-Euler guess) and, at every
/// frame, solves the same step with each method from `q^{k+1} = 0`.
pub fn run_convergence(spec: &BenchSpec) -> Result<ConvergenceReport> {
    spec.validate()?;
    let tree = spec.tree()?;
    let n = tree.dof();
    let reference = SolverConfig {
        method: SolverMethod::Riqn,
        initial_guess: InitialGuess::ExplicitEuler,
        ..spec.solver
    };
    let mut table = Table::new(spec.metadata(), &["frame", "method", "iterations", "converged", "residual_norms..."]);
    table.metadata.push(("curl".into(), spec.curl.to_string()));
    let mut state = bootstrap(&tree, &curled_pose(n, spec.curl), &DVec::zeros(n), spec.dt)?;
    let mut records = Vec::new();
    for frame in 2..=spec.frames + 1 {
        let ctx = DiscreteStepContext::new(&tree, spec.dt, state.q_prev.clone(), state.q_curr.clone(), spec.retraction, state.cache.as_ref())?;
        for &method in &spec.methods {
            let cfg = SolverConfig {
                method,
                initial_guess: InitialGuess::Zero,
                ..spec.solver
            };
            let trace = match solve_step(&ctx, &cfg) {
                Ok(sol) => sol.trace,
                Err(e) => match e.best {
                    Some(best) if e.error.is_non_convergence() => best.trace,
                    _ => {
                        // outside the retraction domain: no series to record
                        SolveTrace {
                            iterations: 0,
                            residual_norms: Vec::new(),
                            converged: false,
                            wall_time: Default::default(),
                        }
                    }
                },
            };
            let mut row = vec![frame.to_string(), method.to_string(), trace.iterations.to_string(), trace.converged.to_string()];
            row.extend(trace.residual_norms.iter().map(|r| num(*r)));
            table.rows.push(row);
            records.push(ConvergenceRecord { frame, method, trace });
        }
        state = step_variational(&state, &tree, spec.dt, &reference, spec.retraction)?.0;
    }

    let summaries = spec
        .methods
        .iter()
        .map(|&method| {
            let mine: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.method == method).collect();
            let converged: Vec<&&ConvergenceRecord> = mine.iter().filter(|r| r.trace.converged).collect();
            let iters: Vec<f64> = converged.iter().map(|r| r.trace.iterations as f64).collect();
            let (mean_iterations, std_iterations) = if iters.is_empty() { (f64::NAN, f64::NAN) } else { mean_std(&iters) };
            ConvergenceSummary {
                method,
                mean_iterations,
                std_iterations,
                failures: mine.len() - converged.len(),
                non_monotone: converged.iter().filter(|r| !is_monotone_after_first(&r.trace.residual_norms)).count(),
                non_superlinear: mine
                    .iter()
                    .filter(|r| !is_superlinear(&r.trace.residual_norms, RESIDUAL_FLOOR))
                    .count(),
            }
        })
        .collect();
    Ok(ConvergenceReport { table, records, summaries })
}

// --------------------------------------------------------------- gnuplot

/// Gnuplot script plotting a CSV written by the matching experiment.
pub fn gnuplot_script(experiment: Experiment, csv_path: &str) -> String {
    let head = format!("set datafile separator ','\nset key outside\nset grid\nfile = '{csv_path}'\n");
    let body = match experiment {
        Experiment::Energy => "\
set xlabel 'frame'
set ylabel 'total energy (J)'
plot file skip 2 using (strcol(1) eq 'variational' ? $2 : 1/0):6 with lines title 'variational', \\
     file skip 2 using (strcol(1) eq 'euler' ? $2 : 1/0):6 with lines title 'semi-implicit Euler'
",
        Experiment::Scaling => "\
set logscale xy
set xlabel 'degrees of freedom'
set ylabel 'mean step time (s)'
plot for [m in 'riqn newton broyden'] file skip 2 using (strcol(2) eq m && strcol(1) ne 'loglog_slope' ? $1 : 1/0):3 with linespoints title m
",
        Experiment::Convergence => "\
set multiplot layout 1,2
set logscale y
set xlabel 'iteration'
set ylabel 'residual (N m s)'
set title 'residual against iteration, all frames'
plot for [c=5:35] file skip 2 using (strcol(2) eq 'newton' ? c-5 : 1/0):c with points pt 7 ps 0.3 lc 1 notitle, \\
     for [c=5:35] file skip 2 using (strcol(2) eq 'riqn' ? c-5 + 0.2 : 1/0):c with points pt 7 ps 0.3 lc 2 notitle
unset logscale y
set xlabel 'frame'
set ylabel 'iterations'
set title 'iterations per frame'
plot for [m in 'newton riqn'] file skip 2 using (strcol(2) eq m ? $1 : 1/0):3 with points title m
unset multiplot
",
    };
    head + body
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(experiment: Experiment) -> BenchSpec {
        BenchSpec {
            dof_list: vec![3],
            frames: 20,
            ..BenchSpec::for_experiment(experiment)
        }
    }

    #[test]
    fn energy_rows_and_identity() {
        let report = run_energy(&small(Experiment::Energy)).unwrap();
        assert_eq!(report.table.rows.len(), 2 * 21);
        for row in &report.table.rows {
            let v: Vec<f64> = row[3..].iter().map(|s| s.parse().unwrap()).collect();
            assert!((v[0] + v[1] - v[2]).abs() <= 1e-12 * (1.0 + v[2].abs()));
        }
        let one = run_energy(&BenchSpec { frames: 1, ..small(Experiment::Energy) }).unwrap();
        assert_eq!(one.table.rows.len(), 4);
        let text = one.table.to_csv_string();
        assert!(text.starts_with("# experiment=energy git_revision="));
        assert_eq!(text.lines().count(), 1 + 1 + 4);
    }

    #[test]
    fn initial_energy_is_analytic() {
        // horizontal 3-chain at rest: every center of mass at the joint height
        let report = run_energy(&BenchSpec { frames: 1, ..small(Experiment::Energy) }).unwrap();
        let e0: f64 = report.table.rows[0][5].parse().unwrap();
        assert!(e0.abs() < 1e-12);
        assert!((report.energy_scale - 9.81 * (0.05 + 0.15 + 0.25)).abs() < 1e-12);
    }

    #[test]
    fn scaling_single_dof_emits_one_row_per_method() {
        let spec = BenchSpec {
            dof_list: vec![1],
            frames: 3,
            warmup_frames: 2,
            ..BenchSpec::scaling()
        };
        let report = run_scaling(&spec).unwrap();
        assert_eq!(report.table.rows.len(), 3);
        assert!(report.slopes.is_empty());
        assert!(report.cells.iter().all(|c| c.step_times.len() == 3 && c.mean > 0.0));
    }

    #[test]
    fn convergence_rows_and_tolerance_monotonicity() {
        let loose = run_convergence(&BenchSpec {
            solver: SolverConfig { tolerance: 1e-3, ..SolverConfig::default() },
            ..small(Experiment::Convergence)
        })
        .unwrap();
        let tight = run_convergence(&BenchSpec {
            solver: SolverConfig { tolerance: 1e-9, ..SolverConfig::default() },
            ..small(Experiment::Convergence)
        })
        .unwrap();
        assert_eq!(tight.records.len(), 2 * 20);
        for (a, b) in loose.records.iter().zip(&tight.records) {
            assert_eq!((a.frame, a.method), (b.frame, b.method));
            assert!(a.trace.iterations <= b.trace.iterations);
        }
    }

    #[test]
    fn convergence_propagates_reference_failure() {
        let spec = BenchSpec {
            solver: SolverConfig { max_iterations: 1, ..BenchSpec::convergence().solver },
            ..small(Experiment::Convergence)
        };
        // the reference stepper shares the iteration cap, so it fails too
        assert!(run_convergence(&spec).unwrap_err().is_non_convergence());
    }

    #[test]
    fn csv_is_deterministic_apart_from_timing() {
        let a = run_convergence(&small(Experiment::Convergence)).unwrap().table.to_csv_string();
        let b = run_convergence(&small(Experiment::Convergence)).unwrap().table.to_csv_string();
        assert_eq!(a, b);
    }

    #[test]
    fn series_classifiers() {
        assert!(is_monotone_after_first(&[1.0, 5.0, 2.0, 1.0]));
        assert!(!is_monotone_after_first(&[10.0, 1.0, 2.0, 0.1]));
        assert!(is_superlinear(&[1.0, 1e-1, 1e-3, 1e-7], 1e-13));
        assert!(!is_superlinear(&[1.0, 0.5, 0.25, 0.125], 1e-13));
        assert!(!is_superlinear(&[1.0, 1e-3, 2e-3, 1e-3], 1e-13));
        // last step lands in round-off: judged on the steps above the floor
        assert!(is_superlinear(&[258.0, 0.19, 6e-4, 4e-9, 3e-14], 1e-13));
        assert!((least_squares_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(run_energy(&BenchSpec { frames: 0, ..BenchSpec::energy() }).is_err());
        assert!(run_scaling(&BenchSpec { dof_list: vec![], ..BenchSpec::scaling() }).is_err());
        assert!(run_scaling(&BenchSpec { repetitions: 0, ..BenchSpec::scaling() }).is_err());
    }

    #[test]
    fn gnuplot_mentions_file() {
        for e in [Experiment::Energy, Experiment::Scaling, Experiment::Convergence] {
            assert!(gnuplot_script(e, "out.csv").contains("file = 'out.csv'"));
        }
    }
}
