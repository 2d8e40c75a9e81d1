//! `varint-dyn`: run the energy, scaling and convergence experiments or
//! simulate a single trajectory, writing CSV.
//!
//! Exit codes: 0 success, 2 solver non-convergence, 3 parse or validation
//! error, 1 anything else.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use varint::experiments::{
    gnuplot_script, horizontal_pose, run_convergence, run_energy, run_scaling, BenchSpec, Experiment, Table,
};
use varint::integrators::{simulate, Integrator};
use varint::solvers::{InitialGuess, SolverMethod};
use varint::{load_scene, DVec, Error, RetractionKind};

#[derive(Parser, Debug)]
#[command(name = "varint-dyn", version, about = "Variational multibody dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy of a passive chain under the variational and semi-implicit Euler integrators.
    Energy(Opts),
    /// Mean step time against degrees of freedom, per solver.
    Scaling(Opts),
    /// Iteration counts and residual series from a zero initial guess.
    Convergence(Opts),
    /// One trajectory: joint angles and energy per frame.
    Simulate(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// TOML scene file (not used by `scaling`).
    #[arg(long, conflicts_with = "chain")]
    scene: Option<PathBuf>,
    /// Serial chain size; a comma-separated list for `scaling`.
    #[arg(long, value_delimiter = ',')]
    chain: Vec<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    frames: Option<usize>,
    /// Root finder; `scaling` and `convergence` compare their defaults unless given.
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Integrator for `simulate` (`energy` always runs both).
    #[arg(long, value_enum, default_value = "variational")]
    integrator: IntegratorArg,
    /// Initial guess for each step's solve.
    #[arg(long, value_enum)]
    guess: Option<GuessArg>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum, default_value = "exp")]
    retraction: RetractionArg,
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV (requires --out).
    #[arg(long, requires = "out")]
    emit_gnuplot: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolverArg {
    Riqn,
    Newton,
    Broyden,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IntegratorArg {
    Variational,
    Euler,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GuessArg {
    Hold,
    Euler,
    Fd,
    Zero,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RetractionArg {
    Exp,
    Cayley,
}

impl From<SolverArg> for SolverMethod {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Riqn => SolverMethod::Riqn,
            SolverArg::Newton => SolverMethod::Newton,
            SolverArg::Broyden => SolverMethod::Broyden,
        }
    }
}

impl From<GuessArg> for InitialGuess {
    fn from(g: GuessArg) -> Self {
        match g {
            GuessArg::Hold => InitialGuess::Hold,
            GuessArg::Euler => InitialGuess::ExplicitEuler,
            GuessArg::Fd => InitialGuess::ForwardDynamics,
            GuessArg::Zero => InitialGuess::Zero,
        }
    }
}

fn spec_from(experiment: Experiment, o: &Opts) -> Result<BenchSpec> {
    let mut spec = BenchSpec::for_experiment(experiment);
    if let Some(path) = &o.scene {
        if experiment == Experiment::Scaling {
            return Err(Error::Validation("scaling runs generated chains; use --chain".into()).into());
        }
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        spec.scene = Some(load_scene(&text).with_context(|| format!("scene {}", path.display()))?);
    }
    if !o.chain.is_empty() {
        if experiment != Experiment::Scaling && o.chain.len() > 1 {
            return Err(Error::Validation("--chain takes a single size here".into()).into());
        }
        spec.dof_list = o.chain.clone();
    }
    if let Some(dt) = o.dt {
        spec.dt = dt;
    }
    if let Some(f) = o.frames {
        spec.frames = f;
    }
    if let Some(s) = o.solver {
        spec.solver.method = s.into();
        spec.methods = vec![s.into()];
    }
    if let Some(g) = o.guess {
        spec.solver.initial_guess = g.into();
    }
    if let Some(t) = o.tol {
        spec.solver.tolerance = t;
    }
    if let Some(m) = o.max_iter {
        spec.solver.max_iterations = m;
    }
    if let Some(s) = o.seed {
        spec.rng_seed = s;
    }
    spec.retraction = match o.retraction {
        RetractionArg::Exp => RetractionKind::Exponential,
        RetractionArg::Cayley => RetractionKind::Cayley,
    };
    spec.validate()?;
    Ok(spec)
}

fn simulate_table(spec: &BenchSpec, integrator: Integrator) -> Result<Table> {
    let tree = match &spec.scene {
        Some(t) => t.clone(),
        None => varint::serial_chain(spec.dof_list[0])?,
    };
    let n = tree.dof();
    let traj = simulate(&tree, &horizontal_pose(n), &DVec::zeros(n), spec.dt, spec.frames, integrator, &spec.solver, spec.retraction)?;
    let mut header = vec!["frame".to_string(), "t".into()];
    header.extend((0..n).map(|i| format!("q{i}")));
    header.extend(["E_kin", "E_pot", "E_total"].map(String::from));
    let mut metadata = spec.metadata();
    metadata[0].1 = "simulate".into();
    metadata.push(("integrator".into(), integrator.to_string()));
    metadata.push(("solver".into(), spec.solver.method.to_string()));
    let mut table = Table { metadata, header, rows: Vec::new() };
    for (k, ((t, q), (ek, ep))) in traj.times.iter().zip(&traj.configurations).zip(&traj.energies).enumerate() {
        let mut row = vec![k.to_string(), t.to_string()];
        row.extend(q.iter().map(|x| format!("{x:e}")));
        row.extend([ek, ep, &(ek + ep)].map(|x| format!("{x:e}")));
        table.rows.push(row);
    }
    Ok(table)
}

const SIMULATE_GNUPLOT: &str = "\
set xlabel 't (s)'
set ylabel 'energy (J)'
plot file skip 1 using 2:'E_total' with lines title 'total', \\
     file skip 1 using 2:'E_kin' with lines title 'kinetic', \\
     file skip 1 using 2:'E_pot' with lines title 'potential'
";

fn write_outputs(table: &Table, o: &Opts, script: impl FnOnce(&str) -> String) -> Result<()> {
    match &o.out {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write_csv(io::BufWriter::new(file))?;
            if o.emit_gnuplot {
                let gp = path.with_extension("gp");
                fs::write(&gp, script(&file_name(path))).with_context(|| format!("writing {}", gp.display()))?;
            }
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Energy(o) => {
            let spec = spec_from(Experiment::Energy, &o)?;
            let report = run_energy(&spec)?;
            for s in &report.summaries {
                eprintln!(
                    "{}: slope {:.3e}/frame, max |dE|/E {:.3e}",
                    s.integrator, s.slope_per_frame, s.max_relative_deviation
                );
            }
            write_outputs(&report.table, &o, |f| gnuplot_script(Experiment::Energy, f))
        }
        Command::Scaling(o) => {
            let spec = spec_from(Experiment::Scaling, &o)?;
            let report = run_scaling(&spec)?;
            for (m, s) in &report.slopes {
                eprintln!("{m}: log-log slope {s:.3}");
            }
            write_outputs(&report.table, &o, |f| gnuplot_script(Experiment::Scaling, f))
        }
        Command::Convergence(o) => {
            let spec = spec_from(Experiment::Convergence, &o)?;
            let report = run_convergence(&spec)?;
            for s in &report.summaries {
                eprintln!(
                    "{}: mean iterations {:.3} (sd {:.3}), failures {}, non-monotone {}, non-superlinear {}",
                    s.method, s.mean_iterations, s.std_iterations, s.failures, s.non_monotone, s.non_superlinear
                );
            }
            write_outputs(&report.table, &o, |f| gnuplot_script(Experiment::Convergence, f))
        }
        Command::Simulate(o) => {
            let spec = spec_from(Experiment::Energy, &o)?;
            let integrator = match o.integrator {
                IntegratorArg::Variational => Integrator::Variational,
                IntegratorArg::Euler => Integrator::SemiImplicitEuler,
            };
            let table = simulate_table(&spec, integrator)?;
            write_outputs(&table, &o, |f| {
                format!("set datafile separator ','\nset key outside\nset grid\nset datafile columnheaders\nfile = '{f}'\n{SIMULATE_GNUPLOT}")
            })
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>().map(Error::root) {
        Some(e) if e.is_non_convergence() => 2,
        Some(Error::Parse(_) | Error::Validation(_) | Error::Dimension { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
