//! The nuclear norm on symmetric matrices: value, subdifferential, first and
//! second order directional derivatives, proximal mapping and Moreau envelope,
//! critical cone, and the conjugate of its second-order directional derivative.

mod conjugate;
mod directional;
mod prox;

use alloc::vec::Vec;

use nalgebra::DMatrix;

pub use conjugate::{
    critical_cone_theta_contains, critical_cone_theta_contains_trace_form, project_critical_cone_theta,
    psi_conjugate_critical, psi_conjugate_full, psi_conjugate_full_with, psi_conjugate_reduced,
    psi_conjugate_zero_block, OffDomain,
};
pub use directional::{eig_dir_derivs, eig_second_dir_derivs, theta_dir_deriv, theta_second_dir_deriv};
pub use prox::{
    grad_env_bsub_element, grad_moreau_env, grad_moreau_env_with, moreau_env, moreau_env_with,
    prox_bsub_element, prox_bsub_element_at, prox_dir_deriv, prox_divided_diff, prox_nuclear,
    prox_nuclear_with, soft_threshold, DividedDifference, KinkChoices, MoreauConvention, ProxJacobianElement,
};

use crate::spectral::{eig_sym, partition_by_sign, select_columns, submatrix, EigenDecomposition, SymMatrix};
use crate::{Error, Result};

/// Default tolerance for splitting the zero block by subgradient weight.
pub const DEFAULT_SPLIT_TOL: f64 = 1e-6;

/// Default bound on the subgradient defect accepted by [`subdiff_partition`].
pub const DEFAULT_SUBGRAD_TOL: f64 = 1e-7;

/// `||X||_*`, the sum of absolute eigenvalues.
pub fn nuclear_norm(x: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(x)?.values.iter().map(|v| v.abs()).sum())
}

/// Largest violation of the conditions characterising `Y in d||X||_*`.
pub fn subdiff_defect(x: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    check_dims(x, y)?;
    let e = eig_sym(x)?;
    let p = partition_by_sign(&e, e.sign_tol());
    let yh = e.to_basis(y);
    let mut d: f64 = 0.0;
    for (i, &a) in p.alpha.iter().enumerate() {
        for (j, &a2) in p.alpha.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            d = d.max((yh[(a, a2)] - target).abs());
        }
    }
    for (i, &c) in p.gamma.iter().enumerate() {
        for (j, &c2) in p.gamma.iter().enumerate() {
            let target = if i == j { -1.0 } else { 0.0 };
            d = d.max((yh[(c, c2)] - target).abs());
        }
    }
    for (s, t) in [(&p.alpha, &p.beta), (&p.alpha, &p.gamma), (&p.beta, &p.gamma)] {
        for &i in s.iter() {
            for &j in t.iter() {
                d = d.max(yh[(i, j)].abs());
            }
        }
    }
    if !p.beta.is_empty() {
        let ybb = submatrix(&yh, &p.beta, &p.beta);
        let ev = crate::spectral::eigenvalues_desc(&ybb);
        let spec = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        d = d.max(spec - 1.0);
    }
    Ok(d.max(0.0))
}

pub fn subdiff_contains(x: &SymMatrix, y: &SymMatrix, tol: f64) -> Result<bool> {
    Ok(subdiff_defect(x, y)? <= tol)
}

fn check_dims(x: &SymMatrix, y: &SymMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    Ok(())
}

/// Index structure of a pair `(X, Y)` with `Y in d||X||_*`.
///
/// `basis` is an eigenbasis of `X` ordered `[a, b, c]` in which `Q^T Y Q` is
/// diagonal, with `w = diag(Q^T Y Q)`. The zero block `b` is ordered by
/// decreasing weight and split into `b_upper` (`w = 1`), `b_strict`
/// (`|w| < 1`) and `b_lower` (`w = -1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientPartition {
    pub values: Vec<f64>,
    pub basis: DMatrix<f64>,
    pub w: Vec<f64>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
    pub b_upper: Vec<usize>,
    pub b_strict: Vec<usize>,
    pub b_lower: Vec<usize>,
}

impl SubgradientPartition {
    pub fn eigen(&self) -> EigenDecomposition {
        EigenDecomposition { values: self.values.clone(), basis: self.basis.clone() }
    }

    pub fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        select_columns(&self.basis, idx)
    }
}

pub fn subdiff_partition(x: &SymMatrix, y: &SymMatrix) -> Result<SubgradientPartition> {
    subdiff_partition_with(x, y, DEFAULT_SUBGRAD_TOL, DEFAULT_SPLIT_TOL)
}

pub fn subdiff_partition_with(x: &SymMatrix, y: &SymMatrix, subgrad_tol: f64, split_tol: f64) -> Result<SubgradientPartition> {
    let defect = subdiff_defect(x, y)?;
    if defect > subgrad_tol {
        return Err(Error::NotASubgradient { defect });
    }
    let e = eig_sym(x)?;
    let p = partition_by_sign(&e, e.sign_tol());
    let mut basis = e.basis.clone();
    let mut w: Vec<f64> = Vec::with_capacity(e.dim());
    w.extend(p.alpha.iter().map(|_| 1.0));
    if !p.beta.is_empty() {
        let qb = select_columns(&e.basis, &p.beta);
        let ybb = y.congruence(&qb);
        let eb = eig_sym(&ybb)?;
        let rotated = &qb * &eb.basis;
        for (k, &i) in p.beta.iter().enumerate() {
            basis.set_column(i, &rotated.column(k));
        }
        w.extend(eb.values.iter().map(|v| v.clamp(-1.0, 1.0)));
    }
    w.extend(p.gamma.iter().map(|_| -1.0));

    let mut sp = SubgradientPartition {
        values: e.values.clone(),
        basis,
        w,
        a: p.alpha.clone(),
        b: p.beta.clone(),
        c: p.gamma.clone(),
        b_upper: Vec::new(),
        b_strict: Vec::new(),
        b_lower: Vec::new(),
    };
    for &i in &p.beta {
        let wi = sp.w[i];
        if wi >= 1.0 - split_tol {
            sp.b_upper.push(i);
        } else if wi <= -1.0 + split_tol {
            sp.b_lower.push(i);
        } else {
            sp.b_strict.push(i);
        }
    }
    Ok(sp)
}

/// Spectral norm of a symmetric dense matrix.
pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let ev = crate::spectral::eigenvalues_desc(m);
    ev.first().unwrap().abs().max(ev.last().unwrap().abs())
}

/// Nuclear norm of a symmetric dense matrix.
pub(crate) fn nuclear_dense(m: &DMatrix<f64>) -> f64 {
    crate::spectral::eigenvalues_desc(m).iter().map(|v| v.abs()).sum()
}
