//! Report types and CSV/JSON writers.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sdnop_core::alm::AlmTrace;
use sdnop_core::diagnostics::{RateConstants, RateFit, RateFlag};
use sdnop_core::problem::{KktPoint, KktResidual};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::instance::{rows, Rows};

/// Floats in CSV files: 17 significant digits.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.to_path_buf(), source })?;
    text.push('\n');
    write_text(path, &text)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualJson {
    pub stationarity: f64,
    pub subgradient: f64,
    pub feasibility_h: f64,
    pub feasibility_g: f64,
    pub dual_feasibility: f64,
    pub complementarity: f64,
    pub total: f64,
}

impl From<&KktResidual> for ResidualJson {
    fn from(r: &KktResidual) -> Self {
        Self {
            stationarity: r.stationarity,
            subgradient: r.subgradient,
            feasibility_h: r.feasibility_h,
            feasibility_g: r.feasibility_g,
            dual_feasibility: r.dual_feasibility,
            complementarity: r.complementarity,
            total: r.total(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub status: String,
    pub outer_iterations: usize,
    pub final_c: f64,
    pub x: Vec<f64>,
    #[serde(rename = "Y")]
    pub y: Rows,
    pub mu: Vec<f64>,
    #[serde(rename = "Gamma")]
    pub gamma: Rows,
    pub residual: ResidualJson,
}

impl SolutionJson {
    pub fn new(status: &str, point: &KktPoint, trace: &AlmTrace) -> Self {
        let last = trace.last();
        Self {
            status: status.to_string(),
            outer_iterations: trace.iterates.len().saturating_sub(1),
            final_c: last.map_or(f64::NAN, |r| r.c),
            x: point.x.iter().copied().collect(),
            y: rows(point.multipliers.y.as_matrix()),
            mu: point.multipliers.mu.iter().copied().collect(),
            gamma: rows(point.multipliers.gamma.as_matrix()),
            residual: (&point.residual).into(),
        }
    }
}

pub fn trace_csv(trace: &AlmTrace) -> String {
    let mut s = String::from(
        "k,c,stationarity,subgradient,feasibility_h,feasibility_g,dual_feasibility,complementarity,total,\
         inner_iterations,inner_stagnated,dist_x,dist_y,outside_trust_ball\n",
    );
    for r in &trace.iterates {
        let res = &r.residual;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.k,
            float(r.c),
            float(res.stationarity),
            float(res.subgradient),
            float(res.feasibility_h),
            float(res.feasibility_g),
            float(res.dual_feasibility),
            float(res.complementarity),
            float(res.total()),
            r.inner_iterations,
            r.inner_stagnated,
            opt(r.dist_x),
            opt(r.dist_y),
            r.outside_trust_ball,
        );
    }
    s
}

pub fn rate_csv(fit: &RateFit) -> String {
    let mut s = String::from("c,iterations,median_ratio,predicted_ratio_proxy,converged\n");
    for p in &fit.points {
        let _ = writeln!(s, "{},{},{},{},{}", float(p.c), p.iterations, opt(p.median_ratio), opt(p.predicted_ratio), p.converged);
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatePointJson {
    pub c: f64,
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub median_ratio: Option<f64>,
    pub predicted_ratio_proxy: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitJson {
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub rho2_proxy: Option<f64>,
    pub flags: Vec<String>,
    pub points: Vec<RatePointJson>,
}

pub fn flag_name(f: RateFlag) -> &'static str {
    match f {
        RateFlag::AssumptionsUnverified => "assumptions_unverified",
        RateFlag::Nonconvergent => "nonconvergent",
        RateFlag::InsufficientPoints => "insufficient_points",
    }
}

impl From<&RateFit> for FitJson {
    fn from(f: &RateFit) -> Self {
        Self {
            slope: f.slope,
            intercept: f.intercept,
            r2: f.r2,
            rho2_proxy: f.rho2_proxy,
            flags: f.flags.iter().map(|x| flag_name(*x).to_string()).collect(),
            points: f
                .points
                .iter()
                .map(|p| RatePointJson {
                    c: p.c,
                    iterations: p.iterations,
                    ratios: p.ratios.clone(),
                    median_ratio: p.median_ratio,
                    predicted_ratio_proxy: p.predicted_ratio,
                    converged: p.converged,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyJson {
    pub holds: bool,
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoscJson {
    pub holds: bool,
    /// `null` when the `app` subspace is `{0}`.
    pub min_value: Option<f64>,
    pub app_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsJson {
    pub nu_lower0: Option<f64>,
    pub nu_upper0: Option<f64>,
    pub nu_bar: f64,
    pub nu_bar_vacuous: bool,
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    pub spectrum_multiplicity: bool,
    pub eta_c0: Option<f64>,
    pub eta_lower: Option<f64>,
    pub eta_upper: Option<f64>,
    pub c_bar: Option<f64>,
    pub kappa0: Option<f64>,
    pub rho0: Option<f64>,
    pub rho1: Option<f64>,
}

impl From<&RateConstants> for ConstantsJson {
    fn from(c: &RateConstants) -> Self {
        Self {
            nu_lower0: c.nu_lower0,
            nu_upper0: c.nu_upper0,
            nu_bar: c.nu_bar,
            nu_bar_vacuous: c.nu_bar_vacuous,
            sigma_lower: c.sigma_lower,
            sigma_upper: c.sigma_upper,
            spectrum_multiplicity: c.spectrum_multiplicity,
            eta_c0: c.eta.map(|e| e.c0),
            eta_lower: c.eta.map(|e| e.eta_lower),
            eta_upper: c.eta.map(|e| e.eta_upper),
            c_bar: c.c_bar,
            kappa0: c.kappa0,
            rho0: c.rho0,
            rho1: c.rho1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub residual: ResidualJson,
    pub nondegeneracy: NondegeneracyJson,
    pub sosc: SoscJson,
    pub constants: Option<ConstantsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<crate::generate::GenerateSpec>,
    pub config: crate::config::RunConfig,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub exit_code: i32,
}
