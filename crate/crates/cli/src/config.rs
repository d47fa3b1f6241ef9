//! Run configuration read from `--config`. Every field has a default.

use sdnop_core::alm::{AlmConfig, InnerConfig, PenaltyMode};
use sdnop_core::diagnostics::{RateConstantsConfig, RateSweepConfig, DEFAULT_KKT_TOL, DEFAULT_RANK_TOL};
use serde::{Deserialize, Serialize};

use crate::generate::GeneratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyModeJson {
    Fixed,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InnerSection {
    pub grad_tol: f64,
    pub grad_tol_rel: f64,
    pub max_iter: usize,
}

impl InnerSection {
    fn from_core(c: &InnerConfig) -> Self {
        Self { grad_tol: c.grad_tol, grad_tol_rel: c.grad_tol_rel, max_iter: c.max_iter }
    }

    pub fn to_core(&self) -> InnerConfig {
        InnerConfig { grad_tol: self.grad_tol, grad_tol_rel: self.grad_tol_rel, max_iter: self.max_iter, ..InnerConfig::default() }
    }
}

impl Default for InnerSection {
    fn default() -> Self {
        Self::from_core(&InnerConfig::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlmSection {
    pub c0: f64,
    pub kappa: f64,
    pub penalty_mode: PenaltyModeJson,
    pub residual_decrease_ratio: f64,
    pub c_max: f64,
    pub outer_tol: f64,
    pub max_outer: usize,
    pub trust_radius: Option<f64>,
    pub inner: InnerSection,
}

impl Default for AlmSection {
    fn default() -> Self {
        let d = AlmConfig::default();
        Self {
            c0: d.c0,
            kappa: d.kappa,
            penalty_mode: PenaltyModeJson::Adaptive,
            residual_decrease_ratio: d.residual_decrease_ratio,
            c_max: d.c_max,
            outer_tol: d.outer_tol,
            max_outer: d.max_outer,
            trust_radius: d.trust_radius,
            inner: InnerSection::from_core(&d.inner),
        }
    }
}

impl AlmSection {
    pub fn to_core(&self) -> AlmConfig {
        AlmConfig {
            c0: self.c0,
            kappa: self.kappa,
            penalty_mode: match self.penalty_mode {
                PenaltyModeJson::Fixed => PenaltyMode::Fixed,
                PenaltyModeJson::Adaptive => PenaltyMode::Adaptive,
            },
            residual_decrease_ratio: self.residual_decrease_ratio,
            c_max: self.c_max,
            outer_tol: self.outer_tol,
            max_outer: self.max_outer,
            inner: self.inner.to_core(),
            trust_radius: self.trust_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub grid: Vec<f64>,
    pub delta: f64,
    pub seed: u64,
    pub residual_tol: f64,
    pub max_outer: usize,
    pub noise_floor: f64,
    pub reference_tol: f64,
    pub inner: InnerSection,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let d = RateSweepConfig::default();
        Self {
            grid: d.grid,
            delta: d.delta,
            seed: d.seed,
            residual_tol: d.residual_tol,
            max_outer: d.max_outer,
            noise_floor: d.noise_floor,
            reference_tol: d.reference_tol,
            inner: InnerSection::from_core(&d.inner),
            threads: 0,
        }
    }
}

impl SweepSection {
    pub fn to_core(&self) -> RateSweepConfig {
        RateSweepConfig {
            grid: self.grid.clone(),
            delta: self.delta,
            seed: self.seed,
            residual_tol: self.residual_tol,
            max_outer: self.max_outer,
            noise_floor: self.noise_floor,
            reference_tol: self.reference_tol,
            inner: self.inner.to_core(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSection {
    pub kkt_tol: f64,
    pub rank_tol: f64,
    pub sosc_tol: f64,
    pub c0_grid: Vec<f64>,
    pub c_factors: Vec<f64>,
    pub rotation_samples: usize,
    pub seed: u64,
}

impl Default for CheckSection {
    fn default() -> Self {
        let d = RateConstantsConfig::default();
        Self {
            kkt_tol: DEFAULT_KKT_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            sosc_tol: 0.0,
            c0_grid: d.c0_grid,
            c_factors: d.c_factors,
            rotation_samples: d.rotation_samples,
            seed: d.seed,
        }
    }
}

impl CheckSection {
    pub fn constants(&self) -> RateConstantsConfig {
        RateConstantsConfig {
            c0_grid: self.c0_grid.clone(),
            c_factors: self.c_factors.clone(),
            rotation_samples: self.rotation_samples,
            seed: self.seed,
            rank_tol: self.rank_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub alm: AlmSection,
    pub sweep: SweepSection,
    pub check: CheckSection,
    pub generate: GeneratorConfig,
}
