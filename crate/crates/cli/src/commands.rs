use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use sdnop_core::alm::{alm_solve, AlmError};
use sdnop_core::diagnostics::{nondegeneracy_check, rate_constants, strong_sosc_check, ReferenceStructure};
use sdnop_core::problem::{kkt_residual, KktPoint, MultiplierTriple, ProblemOracle};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::generate::{generate, GenerateSpec, Profile};
use crate::instance::{load_instance, read_json, Instance, InstanceJson};
use crate::output::*;
use crate::sweep::parallel_rate_sweep;

#[derive(Debug, Parser)]
#[command(name = "sdnop", version, about = "Augmented Lagrangian solves, assumption checks and rate sweeps")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for the generator, the sweep perturbation and the rotation sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Outer KKT residual tolerance for `solve` and `rate-sweep`.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the multiplier method; writes solution.json and trace.csv.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        max_outer: Option<usize>,
        #[arg(long)]
        c0: Option<f64>,
    },
    /// Check the reference KKT point; writes report.json.
    Check { instance: PathBuf },
    /// Fixed-penalty runs over a penalty grid; writes rate.csv and fit.json.
    RateSweep {
        instance: PathBuf,
        /// Comma-separated increasing penalties.
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<f64>>,
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Write a synthetic instance with a known KKT point to instance.json.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        p: usize,
        #[arg(long, value_enum)]
        profile: Profile,
    },
}

pub fn load_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg: RunConfig = match &global.config {
        Some(path) => read_json(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = global.seed {
        cfg.sweep.seed = seed;
        cfg.check.seed = seed;
    }
    if let Some(tol) = global.tol {
        if !(tol > 0.0) {
            return Err(CliError::input("--tol must be positive"));
        }
        cfg.alm.outer_tol = tol;
        cfg.sweep.residual_tol = tol;
    }
    Ok(cfg)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("sdnop: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    let mut cfg = load_config(&cli.global)?;
    let out = &cli.global.out;
    ensure_dir(out)?;
    let mut manifest = RunManifest {
        command: String::new(),
        instance: None,
        generator: None,
        config: cfg.clone(),
        out: out.clone(),
        seed: cli.global.seed,
        exit_code: 0,
    };
    let result = match &cli.command {
        Command::Solve { instance, max_outer, c0 } => {
            if let Some(k) = max_outer {
                cfg.alm.max_outer = *k;
            }
            if let Some(c) = c0 {
                cfg.alm.c0 = *c;
                cfg.alm.c_max = cfg.alm.c_max.max(*c);
            }
            manifest.command = "solve".into();
            manifest.instance = Some(instance.clone());
            cmd_solve(&load_instance(instance)?, &cfg, out)
        }
        Command::Check { instance } => {
            manifest.command = "check".into();
            manifest.instance = Some(instance.clone());
            cmd_check(&load_instance(instance)?, &cfg, out)
        }
        Command::RateSweep { instance, grid, delta } => {
            if let Some(g) = grid {
                cfg.sweep.grid = g.clone();
            }
            if let Some(d) = delta {
                cfg.sweep.delta = *d;
            }
            manifest.command = "rate-sweep".into();
            manifest.instance = Some(instance.clone());
            cmd_rate_sweep(&load_instance(instance)?, &cfg, out)
        }
        Command::Generate { n, q, m, p, profile } => {
            let spec = GenerateSpec { n: *n, q: *q, m: *m, p: *p, profile: *profile, seed: cli.global.seed.unwrap_or(0) };
            manifest.command = "generate".into();
            manifest.generator = Some(spec.clone());
            cmd_generate(&spec, &cfg, out)
        }
    };
    manifest.config = cfg;
    manifest.exit_code = match &result {
        Ok(()) => 0,
        Err(e) => e.exit_code(),
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    result
}

pub fn cmd_solve(inst: &Instance, cfg: &RunConfig, out: &Path) -> Result<()> {
    let p = &inst.problem;
    let d = p.dims();
    let alm = cfg.alm.to_core();
    let y0 = MultiplierTriple::zeros(d);
    let x0 = DVector::zeros(d.n);
    let (status, outcome) = match alm_solve(p, &y0, &alm, &x0, inst.reference.as_ref()) {
        Ok((point, trace)) => ("converged", Ok((point, trace))),
        Err(AlmError::Invalid(e)) => return Err(e.into()),
        Err(AlmError::MaxIterations { trace }) => ("max_iterations", Err((CliError::MaxIterations, trace))),
        Err(AlmError::InnerSolve { k, failure, trace }) => {
            ("inner_solve_failure", Err((CliError::InnerSolve(format!("outer iteration {k}: {failure}")), trace)))
        }
    };
    let (point, trace, err) = match outcome {
        Ok((point, trace)) => (point, trace, None),
        Err((e, trace)) => {
            let last = trace.last().ok_or_else(|| CliError::InnerSolve("empty trace".into()))?;
            let point = KktPoint { x: last.x.clone(), multipliers: last.multipliers.clone(), residual: last.residual };
            (point, trace, Some(e))
        }
    };
    log::info!("solve: {status} after {} outer iterations, residual {:e}", trace.iterates.len().saturating_sub(1), point.residual.total());
    write_json(&out.join("solution.json"), &SolutionJson::new(status, &point, &trace))?;
    write_text(&out.join("trace.csv"), &trace_csv(&trace))?;
    err.map_or(Ok(()), Err)
}

pub fn check_report(inst: &Instance, cfg: &RunConfig) -> Result<ReportJson> {
    let reference = inst.reference.as_ref().ok_or_else(|| CliError::input("check: the instance has no reference_kkt"))?;
    let p = &inst.problem;
    let residual = kkt_residual(p, &reference.x, &reference.multipliers)?;
    let s = ReferenceStructure::new(p, &reference.x, &reference.multipliers, cfg.check.kkt_tol)?;
    let nd = nondegeneracy_check(&s, cfg.check.rank_tol);
    let sosc = strong_sosc_check(&s, cfg.check.sosc_tol)?;
    let (constants, constants_error) = match rate_constants(&s, &cfg.check.constants()) {
        Ok(c) => (Some(ConstantsJson::from(&c)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ReportJson {
        residual: (&residual).into(),
        nondegeneracy: NondegeneracyJson {
            holds: nd.holds,
            sigma_min: nd.sigma_min,
            sigma_max: nd.sigma_max,
            rows: nd.rows,
            cols: nd.cols,
        },
        sosc: SoscJson {
            holds: sosc.holds,
            min_value: sosc.min_value.is_finite().then_some(sosc.min_value),
            app_dim: sosc.app_dim,
        },
        constants,
        constants_error,
    })
}

pub fn cmd_check(inst: &Instance, cfg: &RunConfig, out: &Path) -> Result<()> {
    let report = check_report(inst, cfg)?;
    write_json(&out.join("report.json"), &report)
}

pub fn cmd_rate_sweep(inst: &Instance, cfg: &RunConfig, out: &Path) -> Result<()> {
    let reference = inst.reference.as_ref().ok_or_else(|| CliError::input("rate-sweep: the instance has no reference_kkt"))?;
    let fit = parallel_rate_sweep(&inst.problem, reference, &cfg.sweep.to_core(), cfg.sweep.threads)?;
    write_text(&out.join("rate.csv"), &rate_csv(&fit))?;
    write_json(&out.join("fit.json"), &FitJson::from(&fit))?;
    if fit.points.iter().all(|p| !p.converged) {
        return Err(CliError::Sweep("no grid point converged".into()));
    }
    Ok(())
}

pub fn cmd_generate(spec: &GenerateSpec, cfg: &RunConfig, out: &Path) -> Result<()> {
    let g = generate(spec, &cfg.generate)?;
    let x = DVector::zeros(spec.n);
    let json = InstanceJson::from_problem(&g.problem, Some((&x, &g.multipliers)));
    write_json(&out.join("instance.json"), &json)
}
