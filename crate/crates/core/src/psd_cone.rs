//! Projection onto the PSD cone, its directional derivative and generalised
//! Jacobian elements, and membership tests for the associated cones.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::spectral::{
    eig_sym, lambda_min, partition_by_sign, select_columns, BlockChoice, EigenDecomposition,
    SignPartition, SpectralOperator, SymMatrix,
};
use crate::Result;

/// `Pi_+(M)` together with the decomposition of `M` it was computed from.
pub fn project_psd(m: &SymMatrix) -> Result<(SymMatrix, EigenDecomposition)> {
    let e = eig_sym(m)?;
    Ok((e.map(|l| l.max(0.0)), e))
}

/// `Pi_-(M) = M - Pi_+(M)`.
pub fn project_nsd(m: &SymMatrix) -> Result<SymMatrix> {
    Ok(eig_sym(m)?.map(|l| l.min(0.0)))
}

/// Symmetric projection of a (sub)matrix given as a `DMatrix`.
pub(crate) fn project_psd_dense(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(project_psd(&SymMatrix::symmetrize(m.clone()))?.0.into_matrix())
}

pub(crate) fn project_nsd_dense(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(project_nsd(&SymMatrix::symmetrize(m.clone()))?.into_matrix())
}

/// Hadamard multiplier of a projection Jacobian element, in the eigenbasis of `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    pub entries: DMatrix<f64>,
    pub partition: SignPartition,
}

pub fn theta_matrix(eig: &EigenDecomposition, part: &SignPartition, beta_block: &BlockChoice) -> Result<ThetaMatrix> {
    beta_block.validate(part.beta.len())?;
    let n = eig.dim();
    let mut class = alloc::vec![0u8; n];
    let mut local = alloc::vec![0usize; n];
    for (k, &i) in part.alpha.iter().enumerate() {
        class[i] = 0;
        local[i] = k;
    }
    for (k, &i) in part.beta.iter().enumerate() {
        class[i] = 1;
        local[i] = k;
    }
    for (k, &i) in part.gamma.iter().enumerate() {
        class[i] = 2;
        local[i] = k;
    }
    let lam = &eig.values;
    let entries = DMatrix::from_fn(n, n, |i, j| match (class[i], class[j]) {
        (0, 0) | (0, 1) | (1, 0) => 1.0,
        (1, 1) => beta_block.entry(local[i], local[j]),
        (1, 2) | (2, 1) | (2, 2) => 0.0,
        (0, 2) => lam[i] / (lam[i] - lam[j]),
        _ => lam[j] / (lam[j] - lam[i]),
    });
    Ok(ThetaMatrix { entries, partition: part.clone() })
}

/// Element `V in d_B Pi_+(M)`, acting as `H -> P (Theta o P^T H P) P^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjBsubElement {
    pub op: SpectralOperator,
    pub theta: ThetaMatrix,
}

impl ProjBsubElement {
    pub fn apply(&self, h: &SymMatrix) -> SymMatrix {
        self.op.apply(h)
    }
}

pub fn proj_bsub_element(m: &SymMatrix, beta_block: &BlockChoice) -> Result<ProjBsubElement> {
    let e = eig_sym(m)?;
    let part = partition_by_sign(&e, e.kink_tol());
    proj_bsub_element_from(&e, &part, beta_block)
}

pub fn proj_bsub_element_from(
    eig: &EigenDecomposition,
    part: &SignPartition,
    beta_block: &BlockChoice,
) -> Result<ProjBsubElement> {
    let theta = theta_matrix(eig, part, beta_block)?;
    Ok(ProjBsubElement {
        op: SpectralOperator { basis: eig.basis.clone(), multipliers: theta.entries.clone() },
        theta,
    })
}

/// Directional derivative `Pi_+'(M; H)`.
pub fn proj_dir_deriv(m: &SymMatrix, h: &SymMatrix) -> Result<SymMatrix> {
    let e = eig_sym(m)?;
    let part = partition_by_sign(&e, e.sign_tol());
    proj_dir_deriv_from(&e, &part, h)
}

pub fn proj_dir_deriv_from(eig: &EigenDecomposition, part: &SignPartition, h: &SymMatrix) -> Result<SymMatrix> {
    let hhat = eig.to_basis(h);
    let theta = theta_matrix(eig, part, &BlockChoice::Zero)?;
    let mut out = hhat.component_mul(&theta.entries);
    if !part.beta.is_empty() {
        let hbb = crate::spectral::submatrix(&hhat, &part.beta, &part.beta);
        let pbb = project_psd_dense(&hbb)?;
        for (a, &i) in part.beta.iter().enumerate() {
            for (b, &j) in part.beta.iter().enumerate() {
                out[(i, j)] = pbb[(a, b)];
            }
        }
    }
    Ok(eig.from_basis(&out))
}

fn scaled_tol(tol: f64, b: &SymMatrix) -> f64 {
    tol * (1.0 + b.norm())
}

fn is_psd(m: &DMatrix<f64>, tol: f64) -> bool {
    m.nrows() == 0 || lambda_min(m) >= -tol
}

fn is_zero(m: &DMatrix<f64>, tol: f64) -> bool {
    m.iter().all(|v| v.abs() <= tol)
}

fn kernel_basis(m_plus: &SymMatrix) -> Result<DMatrix<f64>> {
    let e = eig_sym(m_plus)?;
    let tol = e.sign_tol();
    let idx: Vec<usize> = (0..e.dim()).filter(|&i| e.values[i] <= tol).collect();
    Ok(select_columns(&e.basis, &idx))
}

/// `B` in the tangent cone of `S_+` at the PSD matrix `m_plus`.
/// `tol` is relative: violations up to `tol * (1 + ||B||)` are accepted.
pub fn tangent_contains(m_plus: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    let k = kernel_basis(m_plus)?;
    Ok(is_psd(&(k.transpose() * b.as_matrix() * &k), scaled_tol(tol, b)))
}

/// `B` in the lineality space of the tangent cone at `m_plus`.
pub fn lineality_contains(m_plus: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    let k = kernel_basis(m_plus)?;
    Ok(is_zero(&(k.transpose() * b.as_matrix() * &k), scaled_tol(tol, b)))
}

fn blocks(m: &SymMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let e = eig_sym(m)?;
    let p = partition_by_sign(&e, e.sign_tol());
    Ok((e.columns(&p.beta), e.columns(&p.gamma)))
}

/// `B` in the critical cone of `S_+` at `Pi_+(M)` for the normal direction `Pi_+(M) - M`.
pub fn critical_contains(m: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    let (pb, pg) = blocks(m)?;
    let t = scaled_tol(tol, b);
    let bm = b.as_matrix();
    Ok(is_psd(&(pb.transpose() * bm * &pb), t)
        && is_zero(&(pb.transpose() * bm * &pg), t)
        && is_zero(&(pg.transpose() * bm * &pg), t))
}

/// `B` in the affine hull of that critical cone.
pub fn aff_critical_contains(m: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    let (pb, pg) = blocks(m)?;
    let t = scaled_tol(tol, b);
    let bm = b.as_matrix();
    Ok(is_zero(&(pb.transpose() * bm * &pg), t) && is_zero(&(pg.transpose() * bm * &pg), t))
}
