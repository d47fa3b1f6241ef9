use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::aqp::lineality_system;
use super::{app_cone_basis, null_space, ReferenceStructure, DEFAULT_RANK_TOL};
use crate::nuclear::{critical_cone_theta_contains, psi_conjugate_reduced};
use crate::problem::{apply_partials, ProblemOracle};
use crate::psd_cone::critical_contains;
use crate::spectral::{eig_sym, pinv_sym, lambda_min, SymMatrix};
use crate::{Error, Result};

/// `2 <Gamma, (Dg(x) d) g(x)^+ (Dg(x) d)>`.
pub fn sigma_term_psd<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, gamma: &SymMatrix, d: &DVector<f64>) -> Result<f64> {
    let dims = p.dims();
    if x.len() != dims.n || d.len() != dims.n || gamma.dim() != dims.p {
        return Err(Error::invalid("dimension mismatch"));
    }
    let g = p.g(x);
    let pinv = g_pinv(&g)?;
    let h = apply_partials(&p.g_partials(x), d, dims.p);
    Ok(sigma_with(&pinv, gamma, &h))
}

fn g_pinv(g: &SymMatrix) -> Result<SymMatrix> {
    let e = eig_sym(g)?;
    pinv_sym(g, e.sign_tol())
}

fn sigma_with(pinv: &SymMatrix, gamma: &SymMatrix, h: &SymMatrix) -> f64 {
    let hm = h.as_matrix();
    2.0 * gamma.as_matrix().dot(&(hm * pinv.as_matrix() * hm))
}

/// The second order form
/// `q(d) = <d, grad^2 L d> - psi*(Ybar; DF d) + 2 <Gammabar, (Dg d) g^+ (Dg d)>`
/// at a reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureForm {
    hess_l: DMatrix<f64>,
    f_bar: SymMatrix,
    y_bar: SymMatrix,
    gamma: SymMatrix,
    g_pinv: SymMatrix,
    df: Vec<SymMatrix>,
    dg: Vec<SymMatrix>,
}

impl CurvatureForm {
    pub fn new(s: &ReferenceStructure) -> Result<Self> {
        Ok(Self {
            hess_l: s.hess_l.clone(),
            f_bar: s.f_bar.clone(),
            y_bar: s.multipliers.y.clone(),
            gamma: s.multipliers.gamma.clone(),
            g_pinv: if s.g_bar.dim() > 0 { g_pinv(&s.g_bar)? } else { SymMatrix::zeros(0) },
            df: s.df.clone(),
            dg: s.dg.clone(),
        })
    }

    pub fn eval(&self, d: &DVector<f64>) -> Result<f64> {
        let mut v = d.dot(&(&self.hess_l * d));
        let q = self.f_bar.dim();
        if q > 0 {
            let h = apply_partials(&self.df, d, q);
            v -= psi_conjugate_reduced(&self.f_bar, &h, &self.y_bar)?;
        }
        let p = self.gamma.dim();
        if p > 0 {
            let h = apply_partials(&self.dg, d, p);
            v += sigma_with(&self.g_pinv, &self.gamma, &h);
        }
        Ok(v)
    }

    /// `[q(b_i + b_j) - q(b_i) - q(b_j)] / 2` over the columns of `basis`.
    pub fn reduced(&self, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let r = basis.ncols();
        let cols: Vec<DVector<f64>> = (0..r).map(|i| basis.column(i).into_owned()).collect();
        let diag: Vec<f64> = cols.iter().map(|b| self.eval(b)).collect::<Result<_>>()?;
        let mut out = DMatrix::zeros(r, r);
        for i in 0..r {
            out[(i, i)] = diag[i];
            for j in 0..i {
                let v = 0.5 * (self.eval(&(&cols[i] + &cols[j]))? - diag[i] - diag[j]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }
}

/// Matrix of `q` in the standard basis of `R^n`.
pub fn second_order_matrix(s: &ReferenceStructure) -> Result<DMatrix<f64>> {
    CurvatureForm::new(s)?.reduced(&DMatrix::identity(s.n(), s.n()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoscReport {
    pub holds: bool,
    /// Smallest eigenvalue of the reduced form; `+inf` when `app` is `{0}`.
    pub min_value: f64,
    pub app_dim: usize,
    pub reduced: DMatrix<f64>,
}

/// Strong second order sufficient condition: `q` restricted to an orthonormal
/// basis of `app` has smallest eigenvalue above `tol`.
pub fn strong_sosc_check(s: &ReferenceStructure, tol: f64) -> Result<SoscReport> {
    let basis = app_cone_basis(s);
    let reduced = CurvatureForm::new(s)?.reduced(&basis)?;
    let min_value = lambda_min(&reduced);
    Ok(SoscReport { holds: min_value > tol, min_value, app_dim: basis.ncols(), reduced })
}

/// `d` in the critical cone at the reference point: `Jh d = 0`,
/// `DF d` in the critical cone of the nuclear norm at `Fbar + Ybar` and
/// `Dg d` in the critical cone of `S_+` at `g(xbar)` for `Gammabar`.
pub fn critical_cone_contains(s: &ReferenceStructure, d: &DVector<f64>, tol: f64) -> Result<bool> {
    if d.len() != s.n() {
        return Err(Error::invalid("direction has the wrong length"));
    }
    if (&s.jh * d).amax() > tol * (1.0 + d.norm()) {
        return Ok(false);
    }
    let q = s.f_bar.dim();
    if q > 0 && !critical_cone_theta_contains(&s.f_bar, &s.multipliers.y, &apply_partials(&s.df, d, q), tol)? {
        return Ok(false);
    }
    let p = s.g_bar.dim();
    if p > 0 {
        let m = &s.g_bar - &s.multipliers.gamma;
        return critical_contains(&m, &apply_partials(&s.dg, d, p), tol);
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NecessaryReport {
    pub holds: bool,
    /// Number of critical directions evaluated.
    pub tested: usize,
    /// Smallest `q(d) / ||d||^2` seen; `+inf` when nothing was tested.
    pub worst: f64,
}

/// Evaluates `q` on the lineality directions of the critical cone and on up
/// to `samples` critical directions drawn from `app` by rejection, and passes
/// when every value is at least `-tol ||d||^2`.
pub fn second_order_necessary_check(s: &ReferenceStructure, samples: usize, seed: u64, tol: f64) -> Result<NecessaryReport> {
    let app = app_cone_basis(s);
    let mut report = NecessaryReport { holds: true, tested: 0, worst: f64::INFINITY };
    if app.ncols() == 0 {
        return Ok(report);
    }
    let q = second_order_matrix(s)?;
    let mut record = |d: &DVector<f64>| {
        let v = d.dot(&(&q * d)) / d.norm_squared();
        report.worst = report.worst.min(v);
        report.tested += 1;
    };
    let lin = null_space(&lineality_system(s), s.n(), DEFAULT_RANK_TOL);
    for col in lin.column_iter() {
        record(&col.into_owned());
    }
    let member_tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut accepted = 0;
    let r = app.ncols();
    for _ in 0..samples.saturating_mul(50) {
        if accepted == samples {
            break;
        }
        let z = DVector::from_fn(r, |_, _| rng.random_range(-1.0..1.0));
        if z.norm() == 0.0 {
            continue;
        }
        let d = &app * z.normalize();
        for cand in [d.clone(), -d] {
            if critical_cone_contains(s, &cand, member_tol)? {
                record(&cand);
                accepted += 1;
                break;
            }
        }
    }
    report.holds = report.worst >= -tol;
    Ok(report)
}
