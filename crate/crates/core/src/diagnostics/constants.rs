use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::aqp::{block_rows, report, vstack};
use super::{b_form, svd_full, AqpMatrix, ReferenceStructure, DEFAULT_RANK_TOL};
use crate::nuclear::KinkChoices;
use crate::problem::NewtonChoices;
use crate::spectral::{lambda_max, lambda_min, BlockChoice};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RateConstantsConfig {
    /// Candidate `c0` values, tried in order until the lower `eta` estimate is positive.
    pub c0_grid: Vec<f64>,
    /// Penalties `c = c0 * k` sampled for the `eta` estimates.
    pub c_factors: Vec<f64>,
    /// Random intra-block basis rotations used when eigenvalues repeat.
    pub rotation_samples: usize,
    pub seed: u64,
    pub rank_tol: f64,
}

impl Default for RateConstantsConfig {
    fn default() -> Self {
        Self {
            c0_grid: alloc::vec![1.0, 10.0, 100.0, 1000.0],
            c_factors: alloc::vec![1.0, 10.0, 100.0, 1e3, 1e4],
            rotation_samples: 32,
            seed: 0,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

/// `(min, max)` of each ratio family; `None` when one of its index sets is empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NuTable {
    /// `(1 - w_j) / lambda_i`, `i in a`, `j in b_S`.
    pub a_bs: Option<(f64, f64)>,
    /// `2 / lambda_i`, `i in a`, `b_L` non-empty.
    pub a_bl: Option<(f64, f64)>,
    /// `2 / (lambda_i - lambda_j)`, `i in a`, `j in c`.
    pub a_c: Option<(f64, f64)>,
    /// `2 / (-lambda_j)`, `j in c`, `b_U` non-empty.
    pub c_bu: Option<(f64, f64)>,
    /// `(1 + w_i) / (-lambda_j)`, `i in b_S`, `j in c`.
    pub c_bs: Option<(f64, f64)>,
    /// `lambda_i / |lambda_j|` on the spectrum of `Gammabar - g(xbar)`, `i in alpha`, `j in gamma`.
    pub alpha_gamma: Option<(f64, f64)>,
}

impl NuTable {
    fn entries(&self) -> [Option<(f64, f64)>; 6] {
        [self.a_bs, self.a_bl, self.a_c, self.c_bu, self.c_bs, self.alpha_gamma]
    }

    pub fn lower0(&self) -> Option<f64> {
        self.entries().iter().flatten().map(|e| e.0).reduce(f64::min)
    }

    /// Largest of the row maxima.
    pub fn upper0(&self) -> Option<f64> {
        self.entries().iter().flatten().map(|e| e.1).reduce(f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaEstimate {
    pub c0: f64,
    pub eta_lower: f64,
    pub eta_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateConstants {
    pub nu: NuTable,
    pub nu_lower0: Option<f64>,
    pub nu_upper0: Option<f64>,
    /// Upper bound on the coupling block `C` and its transformed version.
    pub nu_bar: f64,
    /// `C` had no rows or vanished, so any positive bound is valid and 1 is used.
    pub nu_bar_vacuous: bool,
    pub sigma_lower: f64,
    pub sigma_upper: f64,
    /// Some eigenvalue group of `F(xbar)`, of the `b`-weights, or of `Gammabar - g(xbar)` is repeated.
    pub spectrum_multiplicity: bool,
    pub eta: Option<EtaEstimate>,
    pub c_bar: Option<f64>,
    pub kappa0: Option<f64>,
    pub rho0: Option<f64>,
    pub rho1: Option<f64>,
}

fn ratio_range(rows: &[usize], cols: &[usize], f: impl Fn(usize, usize) -> f64) -> Option<(f64, f64)> {
    let mut out: Option<(f64, f64)> = None;
    for &i in rows {
        for &j in cols {
            let v = f(i, j);
            out = Some(match out {
                None => (v, v),
                Some((lo, hi)) => (lo.min(v), hi.max(v)),
            });
        }
    }
    out
}

fn nu_table(s: &ReferenceStructure) -> Result<NuTable> {
    let sp = &s.nuclear;
    let lam = &sp.values;
    let w = &sp.w;
    let mu = &s.psd_eig.values;
    let ftol = s.nuclear.eigen().sign_tol();
    let ptol = s.psd_eig.sign_tol();
    for &i in sp.a.iter().chain(sp.c.iter()) {
        if lam[i].abs() <= ftol {
            return Err(Error::DegenerateSpectrum(alloc::format!("eigenvalue {} of F is numerically zero", lam[i])));
        }
    }
    for &i in s.psd.alpha.iter().chain(s.psd.gamma.iter()) {
        if mu[i].abs() <= ptol {
            return Err(Error::DegenerateSpectrum(alloc::format!("eigenvalue {} of Gamma - g is numerically zero", mu[i])));
        }
    }
    Ok(NuTable {
        a_bs: ratio_range(&sp.a, &sp.b_strict, |i, j| (1.0 - w[j]) / lam[i]),
        a_bl: ratio_range(&sp.a, &sp.b_lower, |i, _| 2.0 / lam[i]),
        a_c: ratio_range(&sp.a, &sp.c, |i, j| 2.0 / (lam[i] - lam[j])),
        c_bu: ratio_range(&sp.b_upper, &sp.c, |_, j| 2.0 / -lam[j]),
        c_bs: ratio_range(&sp.b_strict, &sp.c, |i, j| (w[i] + 1.0) / -lam[j]),
        alpha_gamma: ratio_range(&s.psd.alpha, &s.psd.gamma, |i, j| mu[i] / mu[j].abs()),
    })
}

/// Splits `idx` (sorted by `vals`) into runs of numerically equal values.
fn equal_runs(idx: &[usize], vals: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for &i in idx {
        match out.last_mut() {
            Some(run) if (vals[run[0]] - vals[i]).abs() <= 1e-8 * (1.0 + vals[i].abs()) => run.push(i),
            _ => out.push(alloc::vec![i]),
        }
    }
    out
}

fn rotation_groups(s: &ReferenceStructure) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let sp = &s.nuclear;
    let mut f_groups = equal_runs(&sp.a, &sp.values);
    f_groups.extend(equal_runs(&sp.c, &sp.values));
    f_groups.push(sp.b_upper.clone());
    f_groups.push(sp.b_lower.clone());
    f_groups.extend(equal_runs(&sp.b_strict, &sp.w));
    let mu = &s.psd_eig.values;
    let mut p_groups = equal_runs(&s.psd.alpha, mu);
    p_groups.extend(equal_runs(&s.psd.gamma, mu));
    p_groups.push(s.psd.beta.clone());
    f_groups.retain(|g| g.len() > 1);
    p_groups.retain(|g| g.len() > 1);
    (f_groups, p_groups)
}

fn random_orthogonal(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
    m.qr().q()
}

fn rotate(basis: &DMatrix<f64>, groups: &[Vec<usize>], rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut out = basis.clone();
    for g in groups {
        let o = random_orthogonal(g.len(), rng);
        let cols = crate::spectral::select_columns(basis, g);
        let rotated = cols * o;
        for (k, &j) in g.iter().enumerate() {
            out.set_column(j, &rotated.column(k));
        }
    }
    out
}

/// `(min sigma_i^-2, max sigma_i^-2)` clipped against 1.
fn sigma_bounds(a: &DMatrix<f64>, rank_tol: f64) -> Result<(f64, f64)> {
    let r = report(a, rank_tol);
    match (r.sigma_min, r.sigma_max) {
        (None, _) | (_, None) => Ok((1.0, 1.0)),
        _ if !r.holds => Err(Error::DegenerateSpectrum("A(Q, P) does not have full row rank".into())),
        (Some(lo), Some(hi)) => Ok((1.0f64.min(1.0 / (hi * hi)), 1.0f64.max(1.0 / (lo * lo)))),
    }
}

fn coupling_matrix(s: &ReferenceStructure) -> DMatrix<f64> {
    let fq = s.df_adapted();
    let gp = s.dg_adapted();
    let sp = &s.nuclear;
    let parts = [
        block_rows(&fq, &sp.a, &sp.b_strict, false),
        block_rows(&fq, &sp.a, &sp.b_lower, false),
        block_rows(&fq, &sp.a, &sp.c, false),
        block_rows(&fq, &sp.c, &sp.b_upper, false),
        block_rows(&fq, &sp.c, &sp.b_strict, false),
        -block_rows(&gp, &s.psd.alpha, &s.psd.gamma, false),
    ];
    vstack(&parts, s.n())
}

fn spectral_norm_sq(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    lambda_max(&(m * m.transpose()))
}

fn nu_bar(s: &ReferenceStructure, a: &DMatrix<f64>) -> f64 {
    let c = coupling_matrix(s);
    let n2 = a.nrows();
    let (values, r) = svd_full(a);
    let mut rt = r.clone();
    if n2 > 0 {
        let r1 = r.columns(0, n2).into_owned();
        let sinv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n2, values.iter().map(|v| 1.0 / v)));
        let u = a * &r1 * &sinv;
        rt.columns_mut(0, n2).copy_from(&(&r1 * &sinv * u.transpose()));
    }
    let ct = &c * rt;
    spectral_norm_sq(&c).max(spectral_norm_sq(&ct))
}

fn all_choices() -> Vec<NewtonChoices> {
    let opts = [BlockChoice::Zero, BlockChoice::Identity];
    let mut out = Vec::new();
    for u in &opts {
        for l in &opts {
            for p in &opts {
                out.push(NewtonChoices { prox: KinkChoices { upper: u.clone(), lower: l.clone() }, psd: p.clone() });
            }
        }
    }
    out
}

fn estimate_eta(s: &ReferenceStructure, cfg: &RateConstantsConfig) -> Result<Option<EtaEstimate>> {
    let choices = all_choices();
    for &c0 in &cfg.c0_grid {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &k in &cfg.c_factors {
            for ch in &choices {
                let b = b_form(s, c0, c0 * k, ch)?;
                lo = lo.min(lambda_min(&b));
                hi = hi.max(lambda_max(&b));
            }
        }
        if lo > 0.0 {
            return Ok(Some(EtaEstimate { c0, eta_lower: lo, eta_upper: hi }));
        }
        log::debug!("c0 = {c0:e}: lower eta estimate {lo:e} is not positive");
    }
    Ok(None)
}

/// The constants of the local rate bound at a reference point.
///
/// `sigma` bounds come from the singular values of `A(Q, P)` for the computed
/// bases, bracketed over random rotations inside repeated eigenvalue groups.
/// `eta` bounds are estimates from the extreme eigenvalues of the Newton
/// matrices with penalty `c0` on the `A`-part over a grid of `c >= c0`.
pub fn rate_constants(s: &ReferenceStructure, cfg: &RateConstantsConfig) -> Result<RateConstants> {
    let nu = nu_table(s)?;
    let aqp = AqpMatrix::from_structure(s);
    let (mut sigma_lower, mut sigma_upper) = sigma_bounds(&aqp.matrix, cfg.rank_tol)?;
    let (f_groups, p_groups) = rotation_groups(s);
    let multiplicity = !f_groups.is_empty() || !p_groups.is_empty();
    if multiplicity && aqp.matrix.nrows() > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.rotation_samples {
            let mut r = s.clone();
            r.nuclear.basis = rotate(&s.nuclear.basis, &f_groups, &mut rng);
            r.psd_eig.basis = rotate(&s.psd_eig.basis, &p_groups, &mut rng);
            let (lo, hi) = sigma_bounds(&AqpMatrix::from_structure(&r).matrix, cfg.rank_tol)?;
            sigma_lower = sigma_lower.min(lo);
            sigma_upper = sigma_upper.max(hi);
        }
    }
    let raw_nu_bar = nu_bar(s, &aqp.matrix);
    let nu_bar_vacuous = !(raw_nu_bar > 0.0);
    let nu_bar = if nu_bar_vacuous { 1.0 } else { raw_nu_bar };

    let eta = estimate_eta(s, cfg)?;
    let mut out = RateConstants {
        nu,
        nu_lower0: nu.lower0(),
        nu_upper0: nu.upper0(),
        nu_bar,
        nu_bar_vacuous,
        sigma_lower,
        sigma_upper,
        spectrum_multiplicity: multiplicity,
        eta,
        c_bar: None,
        kappa0: None,
        rho0: None,
        rho1: None,
    };
    if let Some(e) = eta {
        let (sl, su) = (sigma_lower, sigma_upper);
        let k0 = kappa0(sl, su, e.eta_lower, e.eta_upper);
        let r0 = rho0(&nu, nu_bar, sl, su, e.eta_lower, k0);
        out.c_bar = Some(c_bar(e.c0, sl, su, e.eta_lower, e.eta_upper));
        out.kappa0 = Some(k0);
        out.rho0 = Some(r0);
        out.rho1 = Some(2.0 * r0);
    }
    Ok(out)
}

fn sq(v: f64) -> f64 {
    v * v
}

/// `max{(2 + sqrt 2) c0, (su eu - c0)^2 / c0, (sl el / 2 - c0)^2 / c0}`.
pub fn c_bar(c0: f64, sigma_lower: f64, sigma_upper: f64, eta_lower: f64, eta_upper: f64) -> f64 {
    ((2.0 + core::f64::consts::SQRT_2) * c0)
        .max(sq(sigma_upper * eta_upper - c0) / c0)
        .max(sq(sigma_lower * eta_lower / 2.0 - c0) / c0)
}

/// `sqrt 2 (su + (sl el)^-2 (su eu)^2)`.
pub fn kappa0(sigma_lower: f64, sigma_upper: f64, eta_lower: f64, eta_upper: f64) -> f64 {
    core::f64::consts::SQRT_2 * (sigma_upper + sq(sigma_upper * eta_upper) / sq(sigma_lower * eta_lower))
}

/// `rho0` from the row maxima of the `nu` table; absent rows count as zero.
pub fn rho0(nu: &NuTable, nu_bar: f64, sigma_lower: f64, sigma_upper: f64, eta_lower: f64, kappa0: f64) -> f64 {
    let get = |v: Option<(f64, f64)>| v.map_or(0.0, |x| x.1);
    let inner = [
        8.0 * sq(get(nu.a_bs)),
        16.0 * sq(get(nu.a_bl)),
        32.0 * sq(get(nu.a_c)),
        64.0 * sq(get(nu.c_bu)),
        128.0 * sq(get(nu.c_bs)),
        128.0 * sq(nu.upper0().unwrap_or(0.0)),
        4.0 * sq(kappa0),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    libm::sqrt(nu_bar * sigma_upper / sq(sigma_lower) / sq(eta_lower) * inner)
}
