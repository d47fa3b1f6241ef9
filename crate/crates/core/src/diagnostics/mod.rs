//! Numerical checks of the assumptions behind the local linear rate of the
//! multiplier method: constraint nondegeneracy through the rank of `A(Q, P)`,
//! the strong second order sufficient condition on the `app` subspace, the
//! constants entering the rate bound, and empirical rate sweeps.

mod aqp;
mod constants;
mod rate;
mod sosc;

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub use aqp::{
    app_cone_basis, b_form, build_aqp, nondegeneracy_check, AqpMatrix, AqpRows, NondegeneracyReport,
};
pub use constants::{c_bar, kappa0, rate_constants, rho0, EtaEstimate, NuTable, RateConstants, RateConstantsConfig};
pub use rate::{fit_rate, prepare_sweep, rate_point, rate_sweep, unit_perturbation, RateFit, RateFlag, RatePoint, RateSweepConfig};
pub use sosc::{
    critical_cone_contains, second_order_matrix, second_order_necessary_check, sigma_term_psd, strong_sosc_check,
    CurvatureForm, NecessaryReport, SoscReport,
};

use crate::nuclear::{subdiff_partition, SubgradientPartition};
use crate::problem::{kkt_residual, MultiplierTriple, ProblemOracle};
use crate::spectral::{eig_sym, partition_by_sign, EigenDecomposition, SignPartition, SymMatrix};
use crate::{Error, Result};

/// KKT residual accepted when building a [`ReferenceStructure`].
pub const DEFAULT_KKT_TOL: f64 = 1e-6;

/// Relative rank tolerance for `A(Q, P)` and the `app` system.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Everything the checks need at a reference point `(xbar, Ybar, mubar, Gammabar)`.
///
/// `nuclear` holds the adapted eigenbasis of `F(xbar)`; `psd_eig` and `psd`
/// hold the eigenbasis and sign partition of `Mbar = Gammabar - g(xbar)`, so
/// `alpha` indexes the support of `Gammabar` and `gamma` that of `g(xbar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceStructure {
    pub x: DVector<f64>,
    pub multipliers: MultiplierTriple,
    pub f_bar: SymMatrix,
    pub g_bar: SymMatrix,
    pub nuclear: SubgradientPartition,
    pub psd_eig: EigenDecomposition,
    pub psd: SignPartition,
    pub jh: DMatrix<f64>,
    pub df: Vec<SymMatrix>,
    pub dg: Vec<SymMatrix>,
    pub hess_l: DMatrix<f64>,
}

impl ReferenceStructure {
    pub fn new<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple, kkt_tol: f64) -> Result<Self> {
        let residual = kkt_residual(p, x, y)?.total();
        if !(residual <= kkt_tol) {
            return Err(Error::NotAKktPoint { residual });
        }
        let d = p.dims();
        let f_bar = p.big_f(x);
        let nuclear = if d.q > 0 { subdiff_partition(&f_bar, &y.y)? } else { empty_partition() };
        let g_bar = p.g(x);
        let psd_eig = eig_sym(&(&y.gamma - &g_bar))?;
        let psd = partition_by_sign(&psd_eig, psd_eig.sign_tol());
        Ok(Self {
            x: x.clone(),
            multipliers: y.clone(),
            f_bar,
            g_bar,
            nuclear,
            psd_eig,
            psd,
            jh: p.h_jacobian(x),
            df: p.big_f_partials(x),
            dg: p.g_partials(x),
            hess_l: crate::problem::hess_xx_lagrangian(p, x, y)?,
        })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `Qbar^T (dF/dx_l) Qbar` for every `l`.
    pub fn df_adapted(&self) -> Vec<DMatrix<f64>> {
        let q = &self.nuclear.basis;
        self.df.iter().map(|j| q.transpose() * j.as_matrix() * q).collect()
    }

    /// `Pbar^T (dg/dx_l) Pbar` for every `l`.
    pub fn dg_adapted(&self) -> Vec<DMatrix<f64>> {
        let p = &self.psd_eig.basis;
        self.dg.iter().map(|j| p.transpose() * j.as_matrix() * p).collect()
    }
}

fn empty_partition() -> SubgradientPartition {
    SubgradientPartition {
        values: Vec::new(),
        basis: DMatrix::zeros(0, 0),
        w: Vec::new(),
        a: Vec::new(),
        b: Vec::new(),
        c: Vec::new(),
        b_upper: Vec::new(),
        b_strict: Vec::new(),
        b_lower: Vec::new(),
    }
}

/// Singular values in descending order and a full right orthogonal factor
/// whose leading columns match them.
pub(crate) fn svd_full(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.ncols();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let rows = a.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested right factor");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let mut v = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        v.set_column(k, &vt.row(i).transpose());
    }
    let count = a.nrows().min(n);
    let values = order.iter().take(count).map(|&i| svd.singular_values[i]).collect();
    (values, v)
}

/// Orthonormal basis (columns) of the null space of `k`, with rank decided
/// relative to the largest singular value.
pub(crate) fn null_space(k: &DMatrix<f64>, n: usize, rel_tol: f64) -> DMatrix<f64> {
    if k.nrows() == 0 {
        return DMatrix::identity(n, n);
    }
    let (values, v) = svd_full(k);
    let smax = values.first().copied().unwrap_or(0.0);
    let rank = values.iter().filter(|&&s| s > rel_tol * smax && s > 0.0).count();
    v.columns(rank, n - rank).into_owned()
}

#[cfg(test)]
mod tests;
