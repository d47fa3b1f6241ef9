use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{nondegeneracy_check, strong_sosc_check, ReferenceStructure, DEFAULT_KKT_TOL, DEFAULT_RANK_TOL};
use crate::alm::{alm_solve, AlmConfig, AlmError, InnerConfig, PenaltyMode};
use crate::problem::{kkt_residual, Dims, KktPoint, MultiplierTriple, ProblemOracle};
use crate::spectral::SymMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateSweepConfig {
    /// Strictly increasing penalties.
    pub grid: Vec<f64>,
    /// Radius of the multiplier perturbation of the starting point.
    pub delta: f64,
    pub seed: u64,
    /// Outer stopping tolerance of each fixed-penalty run.
    pub residual_tol: f64,
    pub max_outer: usize,
    /// Ratios are only taken while `||y^k - ybar||` stays above this floor.
    pub noise_floor: f64,
    /// Largest KKT residual accepted at the reference point.
    pub reference_tol: f64,
    pub inner: InnerConfig,
}

impl Default for RateSweepConfig {
    fn default() -> Self {
        Self {
            grid: alloc::vec![10.0, 100.0, 1000.0, 10000.0],
            delta: 1e-2,
            seed: 7,
            residual_tol: 1e-12,
            max_outer: 40,
            noise_floor: 1e-9,
            reference_tol: 1e-10,
            inner: InnerConfig { grad_tol: 1e-11, grad_tol_rel: 1e-6, ..InnerConfig::default() },
        }
    }
}

impl RateSweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() || self.grid.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::invalid("rate sweep: penalties must be positive and finite"));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("rate sweep: penalty grid must be strictly increasing"));
        }
        if !(self.delta > 0.0) || !(self.noise_floor >= 0.0) || !(self.residual_tol > 0.0) || self.max_outer == 0 {
            return Err(Error::invalid("rate sweep: radius, tolerances and iteration limit must be positive"));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub c: f64,
    /// Outer iterations performed.
    pub iterations: usize,
    pub ratios: Vec<f64>,
    pub median_ratio: Option<f64>,
    pub converged: bool,
    /// `rho2 / c` with the fitted `rho2`; filled in by [`fit_rate`].
    pub predicted_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFlag {
    /// Nondegeneracy or the strong second order condition failed or could not be checked.
    AssumptionsUnverified,
    /// At least one grid point did not converge and was left out of the fit.
    Nonconvergent,
    /// Fewer than two usable points, so no slope.
    InsufficientPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    /// Least-squares slope of `log r` against `log c`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    /// Fitted constant of the `rho2 / c` law, `exp(mean log(r_j c_j))`.
    pub rho2_proxy: Option<f64>,
    pub flags: Vec<RateFlag>,
}

fn random_sym(k: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let mut m = DMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            let v = rng.random_range(-1.0..1.0);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrix::symmetrize(m)
}

/// Deterministic unit-norm multiplier direction drawn from `seed`.
pub fn unit_perturbation(d: Dims, seed: u64) -> MultiplierTriple {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = random_sym(d.q, &mut rng);
    let mu = DVector::from_fn(d.m, |_, _| rng.random_range(-1.0..1.0));
    let gamma = random_sym(d.p, &mut rng);
    let t = MultiplierTriple { y, mu, gamma };
    let n = t.norm();
    if n > 0.0 {
        t.scale(1.0 / n)
    } else {
        t
    }
}

fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let k = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[k] } else { 0.5 * (s[k - 1] + s[k]) })
}

/// One fixed-penalty run from `(xbar, ybar + delta u)`.
pub fn rate_point<P: ProblemOracle + ?Sized>(
    p: &P,
    reference: &KktPoint,
    c: f64,
    u: &MultiplierTriple,
    cfg: &RateSweepConfig,
) -> Result<RatePoint> {
    let alm = AlmConfig {
        c0: c,
        penalty_mode: PenaltyMode::Fixed,
        c_max: c,
        outer_tol: cfg.residual_tol,
        max_outer: cfg.max_outer,
        inner: cfg.inner.clone(),
        ..AlmConfig::default()
    };
    let y0 = reference.multipliers.add(&u.scale(cfg.delta));
    let (trace, reached) = match alm_solve(p, &y0, &alm, &reference.x, Some(reference)) {
        Ok((_, trace)) => (trace, true),
        Err(AlmError::Invalid(e)) => return Err(e),
        Err(e) => {
            log::info!("c = {c:e}: {e}");
            (e.trace().cloned().unwrap_or_default(), false)
        }
    };
    let dists: Vec<f64> = trace.iterates.iter().filter_map(|r| r.dist_y).collect();
    let ratios: Vec<f64> = dists
        .windows(2)
        .take_while(|w| w[0] > cfg.noise_floor && w[1] > cfg.noise_floor)
        .map(|w| w[1] / w[0])
        .collect();
    let floor_hit = dists.last().is_some_and(|d| *d <= cfg.noise_floor);
    Ok(RatePoint {
        c,
        iterations: trace.iterates.len().saturating_sub(1),
        median_ratio: median(&ratios),
        ratios,
        converged: reached || floor_hit,
        predicted_ratio: None,
    })
}

/// Least-squares fit of `log r = s log c + b` over the converged points with a ratio.
pub fn fit_rate(mut points: Vec<RatePoint>, assumptions_verified: bool) -> RateFit {
    let mut flags = Vec::new();
    if !assumptions_verified {
        flags.push(RateFlag::AssumptionsUnverified);
    }
    if points.iter().any(|p| !p.converged) {
        flags.push(RateFlag::Nonconvergent);
    }
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.converged)
        .filter_map(|p| p.median_ratio.filter(|r| *r > 0.0).map(|r| (libm::log(p.c), libm::log(r))))
        .collect();
    let k = usable.len() as f64;
    let rho2_proxy = (!usable.is_empty()).then(|| libm::exp(usable.iter().map(|(x, y)| x + y).sum::<f64>() / k));
    if let Some(rho) = rho2_proxy {
        for p in points.iter_mut() {
            p.predicted_ratio = Some(rho / p.c);
        }
    }
    let (mut slope, mut intercept, mut r2) = (None, None, None);
    if usable.len() >= 2 {
        let mx = usable.iter().map(|v| v.0).sum::<f64>() / k;
        let my = usable.iter().map(|v| v.1).sum::<f64>() / k;
        let sxx: f64 = usable.iter().map(|v| (v.0 - mx) * (v.0 - mx)).sum();
        let sxy: f64 = usable.iter().map(|v| (v.0 - mx) * (v.1 - my)).sum();
        let syy: f64 = usable.iter().map(|v| (v.1 - my) * (v.1 - my)).sum();
        let s = sxy / sxx;
        slope = Some(s);
        intercept = Some(my - s * mx);
        r2 = Some(if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 });
    } else {
        flags.push(RateFlag::InsufficientPoints);
    }
    RateFit { points, slope, intercept, r2, rho2_proxy, flags }
}

/// Checks the sweep preconditions and returns the perturbation direction and
/// whether nondegeneracy and the strong second order condition were confirmed.
pub fn prepare_sweep<P: ProblemOracle + ?Sized>(
    p: &P,
    reference: &KktPoint,
    cfg: &RateSweepConfig,
) -> Result<(MultiplierTriple, bool)> {
    cfg.validate()?;
    let residual = kkt_residual(p, &reference.x, &reference.multipliers)?.total();
    if !(residual <= cfg.reference_tol) {
        return Err(Error::NotAKktPoint { residual });
    }
    let verified = match ReferenceStructure::new(p, &reference.x, &reference.multipliers, DEFAULT_KKT_TOL) {
        Ok(s) => {
            nondegeneracy_check(&s, DEFAULT_RANK_TOL).holds && strong_sosc_check(&s, 0.0).is_ok_and(|r| r.holds)
        }
        Err(_) => false,
    };
    Ok((unit_perturbation(p.dims(), cfg.seed), verified))
}

/// Runs [`rate_point`] over the grid in order and fits the result.
pub fn rate_sweep<P: ProblemOracle + ?Sized>(p: &P, reference: &KktPoint, cfg: &RateSweepConfig) -> Result<RateFit> {
    let (u, verified) = prepare_sweep(p, reference, cfg)?;
    let points = cfg.grid.iter().map(|&c| rate_point(p, reference, c, &u, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(fit_rate(points, verified))
}
