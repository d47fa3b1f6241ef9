use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::psd_cone::{project_nsd_dense, project_psd_dense};
use crate::spectral::{
    eig_sym, group_distinct, lambda_max, lambda_min, select_columns, submatrix, SymMatrix, DEFAULT_REL_TOL,
};
use crate::{Error, Result};

use super::directional::shifted_pinv;
use super::{nuclear_dense, spectral_norm, subdiff_partition, SubgradientPartition};

/// What the full conjugate returns for arguments outside its domain, where
/// the true value is `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OffDomain {
    #[default]
    Error,
    /// Return 0.
    LiteralZero,
}

fn local_positions(within: &[usize], sub: &[usize]) -> Vec<usize> {
    sub.iter().map(|i| within.iter().position(|j| j == i).expect("subset")).collect()
}

/// `Q_b^T H X^+ H Q_b` in the adapted basis of a subgradient partition.
fn zero_block_curvature(sp: &SubgradientPartition, h: &SymMatrix) -> Result<DMatrix<f64>> {
    let e = sp.eigen();
    let blocks = group_distinct(&e, DEFAULT_REL_TOL);
    let s = blocks.zero_block.ok_or_else(|| Error::invalid("no zero block"))?;
    let qb = select_columns(&sp.basis, &sp.b);
    let hq = h.as_matrix() * &qb;
    Ok(hq.transpose() * shifted_pinv(&e, &blocks, s) * hq)
}

/// Sum over non-zero eigenvalue blocks of `2 sign_k Tr(Q_k^T H (X - w_k I)^+ H Q_k)`.
fn nonzero_block_terms(e: &crate::EigenDecomposition, h: &SymMatrix) -> f64 {
    let blocks = group_distinct(e, DEFAULT_REL_TOL);
    let split = blocks.split_index();
    let mut out = 0.0;
    for (k, blk) in blocks.blocks.iter().enumerate() {
        if blocks.zero_block == Some(k) {
            continue;
        }
        let sign = if k < split { 1.0 } else { -1.0 };
        let qk = select_columns(&e.basis, blk);
        let hq = h.as_matrix() * &qk;
        out += 2.0 * sign * (hq.transpose() * shifted_pinv(e, &blocks, k) * hq).trace();
    }
    out
}

pub fn psi_conjugate_full(x: &SymMatrix, h: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    psi_conjugate_full_with(x, h, y, OffDomain::Error)
}

/// Conjugate of `W -> ||.||_*''(X; H, W)` evaluated at `Y`.
pub fn psi_conjugate_full_with(x: &SymMatrix, h: &SymMatrix, y: &SymMatrix, off: OffDomain) -> Result<f64> {
    if x.dim() != h.dim() || x.dim() != y.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let e = eig_sym(x)?;
    let blocks = group_distinct(&e, DEFAULT_REL_TOL);
    let yhat = e.to_basis(y);
    let dtol = DEFAULT_REL_TOL * (1.0 + y.norm());
    let split = blocks.split_index();

    let mut violation: Option<alloc::string::String> = None;
    for (k, blk) in blocks.blocks.iter().enumerate() {
        for (l, blk2) in blocks.blocks.iter().enumerate() {
            if l == k {
                continue;
            }
            if submatrix(&yhat, blk, blk2).iter().any(|v| v.abs() > dtol) {
                violation = Some(format!("coupling between eigenvalue blocks {k} and {l}"));
            }
        }
        if blocks.zero_block == Some(k) {
            continue;
        }
        let sign = if k < split { 1.0 } else { -1.0 };
        let ykk = submatrix(&yhat, blk, blk);
        let target = DMatrix::<f64>::identity(blk.len(), blk.len()) * sign;
        if (ykk - target).iter().any(|v| v.abs() > dtol) {
            violation = Some(format!("block {k} is not {sign} times the identity"));
        }
    }

    let mut value = nonzero_block_terms(&e, h);

    if let Some(s) = blocks.zero_block {
        let blk = &blocks.blocks[s];
        let qs = select_columns(&e.basis, blk);
        let hss = h.congruence(&qs);
        let inner = eig_sym(&hss)?;
        let etol = DEFAULT_REL_TOL * (1.0 + h.norm());
        let plus: Vec<usize> = (0..inner.dim()).filter(|&i| inner.values[i] > etol).collect();
        let minus: Vec<usize> = (0..inner.dim()).filter(|&i| inner.values[i] < -etol).collect();
        let zero: Vec<usize> = (0..inner.dim()).filter(|&i| inner.values[i].abs() <= etol).collect();
        let rot = &qs * &inner.basis;
        let ytil = y.congruence(&rot).into_matrix();
        let hq = h.as_matrix() * &rot;
        let m = hq.transpose() * shifted_pinv(&e, &blocks, s) * hq;

        for (gi, gj) in [(&plus, &zero), (&plus, &minus), (&zero, &minus)] {
            if submatrix(&ytil, gi, gj).iter().any(|v| v.abs() > dtol) {
                violation = Some("zero block not block diagonal in the eigenbasis of H".into());
            }
        }
        let id = |n: usize| DMatrix::<f64>::identity(n, n);
        if (submatrix(&ytil, &plus, &plus) - id(plus.len())).iter().any(|v| v.abs() > dtol) {
            violation = Some("positive curvature group is not the identity".into());
        }
        if (submatrix(&ytil, &minus, &minus) + id(minus.len())).iter().any(|v| v.abs() > dtol) {
            violation = Some("negative curvature group is not minus the identity".into());
        }
        let y0 = submatrix(&ytil, &zero, &zero);
        if spectral_norm(&y0) > 1.0 + dtol {
            violation = Some("flat group has spectral norm above one".into());
        }
        value += 2.0 * submatrix(&m, &plus, &plus).trace() - 2.0 * submatrix(&m, &minus, &minus).trace()
            + 2.0 * y0.dot(&submatrix(&m, &zero, &zero));
    }

    match (violation, off) {
        (None, _) => Ok(value),
        (Some(_), OffDomain::LiteralZero) => Ok(0.0),
        (Some(msg), OffDomain::Error) => Err(Error::Domain(msg)),
    }
}

/// The conjugate for `H` in the critical cone, written with the weight split
/// of the zero block of `(X, Y)`.
pub fn psi_conjugate_critical(x: &SymMatrix, h: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    let sp = subdiff_partition(x, y)?;
    let mut value = nonzero_block_terms(&sp.eigen(), h);
    if !sp.b.is_empty() {
        let m = zero_block_curvature(&sp, h)?;
        let u = local_positions(&sp.b, &sp.b_upper);
        let l = local_positions(&sp.b, &sp.b_lower);
        let st = local_positions(&sp.b, &sp.b_strict);
        value += 2.0 * submatrix(&m, &u, &u).trace() - 2.0 * submatrix(&m, &l, &l).trace();
        for (k, &i) in st.iter().enumerate() {
            value += 2.0 * sp.w[sp.b_strict[k]] * m[(i, i)];
        }
    }
    Ok(value)
}

/// `2 sum_k <Q_k^T Y Q_k, Q_k^T H (X - w_k I)^+ H Q_k>` over all eigenvalue
/// blocks of `X`. Quadratic in `H`.
pub fn psi_conjugate_reduced(x: &SymMatrix, h: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    if x.dim() != h.dim() || x.dim() != y.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let e = eig_sym(x)?;
    let blocks = group_distinct(&e, DEFAULT_REL_TOL);
    let mut out = 0.0;
    for (k, blk) in blocks.blocks.iter().enumerate() {
        let qk = select_columns(&e.basis, blk);
        let hq = h.as_matrix() * &qk;
        let m = hq.transpose() * shifted_pinv(&e, &blocks, k) * hq;
        out += 2.0 * y.congruence(&qk).as_matrix().dot(&m);
    }
    Ok(out)
}

/// Same value as [`psi_conjugate_reduced`] for `Y in d||X||_*`, expressed
/// through the coupling of the zero block with the other blocks plus the
/// coupling between positive and negative blocks.
pub fn psi_conjugate_zero_block(x: &SymMatrix, h: &SymMatrix, y: &SymMatrix) -> Result<f64> {
    if x.dim() != h.dim() || x.dim() != y.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let e = eig_sym(x)?;
    let blocks = group_distinct(&e, DEFAULT_REL_TOL);
    let split = blocks.split_index();
    let hhat = e.to_basis(h);
    let mut out = 0.0;
    if let Some(s) = blocks.zero_block {
        let bs = &blocks.blocks[s];
        let ys = y.congruence(&select_columns(&e.basis, bs)).into_matrix();
        for (k, blk) in blocks.blocks.iter().enumerate() {
            if k == s {
                continue;
            }
            let sign = if k < split { 1.0 } else { -1.0 };
            let hsk = submatrix(&hhat, bs, blk);
            let m = &hsk * hsk.transpose();
            let shifted = &ys - DMatrix::<f64>::identity(bs.len(), bs.len()) * sign;
            out += 2.0 / blocks.values[k] * shifted.dot(&m);
        }
    }
    for (i, bi) in blocks.blocks.iter().enumerate() {
        if blocks.zero_block == Some(i) || i >= split {
            continue;
        }
        for (j, bj) in blocks.blocks.iter().enumerate() {
            if j < split || blocks.zero_block == Some(j) {
                continue;
            }
            let hij = submatrix(&hhat, bi, bj);
            out -= 4.0 * hij.norm_squared() / (blocks.values[i] - blocks.values[j]);
        }
    }
    Ok(out)
}

fn critical_blocks(x: &SymMatrix, y: &SymMatrix, h: &SymMatrix) -> Result<(SubgradientPartition, DMatrix<f64>)> {
    if x.dim() != h.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let sp = subdiff_partition(x, y)?;
    let hhat = h.congruence(&sp.basis).into_matrix();
    Ok((sp, hhat))
}

/// `H` in the critical cone of the nuclear norm at `X + Y`, `Y in d||X||_*`.
/// `tol` is relative to `1 + ||H||`.
pub fn critical_cone_theta_contains(x: &SymMatrix, y: &SymMatrix, h: &SymMatrix, tol: f64) -> Result<bool> {
    let (sp, hhat) = critical_blocks(x, y, h)?;
    let t = tol * (1.0 + h.norm());
    let zero = |r: &[usize], c: &[usize]| submatrix(&hhat, r, c).iter().all(|v| v.abs() <= t);
    let upper = submatrix(&hhat, &sp.b_upper, &sp.b_upper);
    let lower = submatrix(&hhat, &sp.b_lower, &sp.b_lower);
    Ok(zero(&sp.b_strict, &sp.b)
        && zero(&sp.b_upper, &sp.b_lower)
        && (upper.nrows() == 0 || lambda_min(&upper) >= -t)
        && (lower.nrows() == 0 || lambda_max(&lower) <= t))
}

/// Membership through the equivalent trace condition
/// `||Q_b^T H Q_b||_* = <Q_b^T Y Q_b, Q_b^T H Q_b>`.
pub fn critical_cone_theta_contains_trace_form(x: &SymMatrix, y: &SymMatrix, h: &SymMatrix, tol: f64) -> Result<bool> {
    let (sp, hhat) = critical_blocks(x, y, h)?;
    let hb = submatrix(&hhat, &sp.b, &sp.b);
    let yb = y.congruence(&select_columns(&sp.basis, &sp.b)).into_matrix();
    Ok((nuclear_dense(&hb) - yb.dot(&hb)).abs() <= tol * (1.0 + h.norm()))
}

/// Euclidean projection of `H` onto the critical cone at `X + Y`.
pub fn project_critical_cone_theta(x: &SymMatrix, y: &SymMatrix, h: &SymMatrix) -> Result<SymMatrix> {
    let (sp, mut hhat) = critical_blocks(x, y, h)?;
    let zero = |m: &mut DMatrix<f64>, r: &[usize], c: &[usize]| {
        for &i in r {
            for &j in c {
                m[(i, j)] = 0.0;
                m[(j, i)] = 0.0;
            }
        }
    };
    zero(&mut hhat, &sp.b_strict, &sp.b);
    zero(&mut hhat, &sp.b_upper, &sp.b_lower);
    for (idx, upper) in [(&sp.b_upper, true), (&sp.b_lower, false)] {
        let blk = submatrix(&hhat, idx, idx);
        let p = if upper { project_psd_dense(&blk)? } else { project_nsd_dense(&blk)? };
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                hhat[(i, j)] = p[(a, b)];
            }
        }
    }
    Ok(SymMatrix::symmetrize(&sp.basis * hhat * sp.basis.transpose()))
}
