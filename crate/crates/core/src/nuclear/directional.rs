use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::spectral::{
    eig_sym, eigenvalues_desc, group_distinct, select_columns, submatrix, DistinctBlocks, EigenDecomposition,
    SymMatrix, DEFAULT_REL_TOL,
};
use crate::{Error, Result};

use super::nuclear_dense;

struct Setup {
    eig: EigenDecomposition,
    blocks: DistinctBlocks,
    hhat: DMatrix<f64>,
}

fn setup(x: &SymMatrix, h: &SymMatrix) -> Result<Setup> {
    if x.dim() != h.dim() {
        return Err(Error::invalid("dimension mismatch"));
    }
    let eig = eig_sym(x)?;
    let blocks = group_distinct(&eig, DEFAULT_REL_TOL);
    let hhat = eig.to_basis(h);
    Ok(Setup { eig, blocks, hhat })
}

/// `(X - w_k I)^+` assembled from the block structure of `X`.
pub(crate) fn shifted_pinv(eig: &EigenDecomposition, blocks: &DistinctBlocks, k: usize) -> DMatrix<f64> {
    let n = eig.dim();
    let mut out = DMatrix::zeros(n, n);
    for (l, blk) in blocks.blocks.iter().enumerate() {
        if l == k {
            continue;
        }
        let ql = select_columns(&eig.basis, blk);
        out += (&ql * ql.transpose()) / (blocks.values[l] - blocks.values[k]);
    }
    out
}

/// `Q_k^T [W - 2 H (X - w_k I)^+ H] Q_k`.
fn vhat(s: &Setup, k: usize, h: &SymMatrix, w: &SymMatrix) -> DMatrix<f64> {
    let qk = select_columns(&s.eig.basis, &s.blocks.blocks[k]);
    let pk = shifted_pinv(&s.eig, &s.blocks, k);
    let hq = h.as_matrix() * &qk;
    qk.transpose() * w.as_matrix() * &qk - (hq.transpose() * pk * hq) * 2.0
}

fn block_sign(blocks: &DistinctBlocks, k: usize) -> f64 {
    if blocks.zero_block == Some(k) {
        0.0
    } else if k < blocks.split_index() {
        1.0
    } else {
        -1.0
    }
}

/// `||.||_*'(X; H)`.
pub fn theta_dir_deriv(x: &SymMatrix, h: &SymMatrix) -> Result<f64> {
    let s = setup(x, h)?;
    let mut out = 0.0;
    for (k, blk) in s.blocks.blocks.iter().enumerate() {
        let hkk = submatrix(&s.hhat, blk, blk);
        let sign = block_sign(&s.blocks, k);
        out += if sign == 0.0 { nuclear_dense(&hkk) } else { sign * hkk.trace() };
    }
    Ok(out)
}

/// First-order directional derivatives of the ordered eigenvalues.
pub fn eig_dir_derivs(x: &SymMatrix, h: &SymMatrix) -> Result<Vec<f64>> {
    let s = setup(x, h)?;
    let mut out = alloc::vec![0.0; x.dim()];
    for blk in &s.blocks.blocks {
        let ev = eigenvalues_desc(&submatrix(&s.hhat, blk, blk));
        for (pos, v) in blk.iter().zip(ev) {
            out[*pos] = v;
        }
    }
    Ok(out)
}

/// Per block of `X`: eigen-decomposition of `Hhat_kk` grouped by equal
/// eigenvalues, together with `Vhat_k`.
struct InnerBlock {
    inner: EigenDecomposition,
    groups: DistinctBlocks,
    vhat: DMatrix<f64>,
}

fn inner_block(s: &Setup, k: usize, h: &SymMatrix, w: &SymMatrix) -> Result<InnerBlock> {
    let blk = &s.blocks.blocks[k];
    let hkk = SymMatrix::symmetrize(submatrix(&s.hhat, blk, blk));
    let inner = eig_sym(&hkk)?;
    let groups = group_distinct(&inner, DEFAULT_REL_TOL * (1.0 + h.norm()));
    Ok(InnerBlock { inner, groups, vhat: vhat(s, k, h, w) })
}

/// Second-order directional derivatives of the ordered eigenvalues along
/// the parabolic arc `X + tH + t^2/2 W`.
pub fn eig_second_dir_derivs(x: &SymMatrix, h: &SymMatrix, w: &SymMatrix) -> Result<Vec<f64>> {
    let s = setup(x, h)?;
    let mut out = alloc::vec![0.0; x.dim()];
    for (k, blk) in s.blocks.blocks.iter().enumerate() {
        let ib = inner_block(&s, k, h, w)?;
        let mut pos = 0;
        for g in &ib.groups.blocks {
            let qg = select_columns(&ib.inner.basis, g);
            let ev = eigenvalues_desc(&(qg.transpose() * &ib.vhat * &qg));
            for v in ev {
                out[blk[pos]] = v;
                pos += 1;
            }
        }
    }
    Ok(out)
}

/// `||.||_*''(X; H, W)`.
pub fn theta_second_dir_deriv(x: &SymMatrix, h: &SymMatrix, w: &SymMatrix) -> Result<f64> {
    let s = setup(x, h)?;
    let mut out = 0.0;
    for k in 0..s.blocks.len() {
        let ib = inner_block(&s, k, h, w)?;
        let sign = block_sign(&s.blocks, k);
        if sign != 0.0 {
            out += sign * ib.vhat.trace();
            continue;
        }
        let split = ib.groups.split_index();
        for (j, g) in ib.groups.blocks.iter().enumerate() {
            let qg = select_columns(&ib.inner.basis, g);
            let vg = qg.transpose() * &ib.vhat * &qg;
            out += if ib.groups.zero_block == Some(j) {
                nuclear_dense(&vg)
            } else if j < split {
                vg.trace()
            } else {
                -vg.trace()
            };
        }
    }
    Ok(out)
}
