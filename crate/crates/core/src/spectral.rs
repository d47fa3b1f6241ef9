//! Dense symmetric matrices, ordered eigendecompositions, index partitions,
//! and the symmetric vectorisation used for operator representations.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative tolerance used for sign and multiplicity decisions.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

/// Relative tolerance for deciding that an eigenvalue sits exactly on a kink
/// when picking a Jacobian element; much tighter than [`DEFAULT_REL_TOL`].
pub const KINK_REL_TOL: f64 = 1e-12;

/// Real symmetric matrix. Symmetry is enforced by averaging with the transpose
/// whenever a value is constructed from a general square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Validates squareness and finiteness, then symmetrises.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid("matrix is not square"));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        Ok(Self::symmetrize(m))
    }

    /// Averages `m` with its transpose. Panics if `m` is not square.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "symmetrize: matrix is not square");
        let t = m.transpose();
        Self { m: (m + t) * 0.5 }
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::invalid("row slice length does not match dimension"));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self { m: DMatrix::from_diagonal(&DVector::from_column_slice(d)) }
    }

    /// `Q diag(values) Q^T`.
    pub fn from_spectral(basis: &DMatrix<f64>, values: &[f64]) -> Self {
        let mut scaled = basis.clone();
        for (j, v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*v);
        }
        Self::symmetrize(&scaled * basis.transpose())
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    /// Trace inner product `<A, B>`.
    pub fn inner(&self, other: &SymMatrix) -> f64 {
        self.m.dot(&other.m)
    }

    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.m.norm_squared()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn scale(&self, a: f64) -> SymMatrix {
        Self { m: &self.m * a }
    }

    /// `Q^T M Q` for a (possibly rectangular) `Q`.
    pub fn congruence(&self, q: &DMatrix<f64>) -> SymMatrix {
        Self::symmetrize(q.transpose() * &self.m * q)
    }

    /// `Q M Q^T`.
    pub fn sandwich(&self, q: &DMatrix<f64>) -> SymMatrix {
        Self::symmetrize(q * &self.m * q.transpose())
    }
}

macro_rules! sym_binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<&SymMatrix> for &SymMatrix {
            type Output = SymMatrix;
            fn $f(self, rhs: &SymMatrix) -> SymMatrix {
                SymMatrix { m: &self.m $op &rhs.m }
            }
        }
        impl $tr<SymMatrix> for SymMatrix {
            type Output = SymMatrix;
            fn $f(self, rhs: SymMatrix) -> SymMatrix {
                SymMatrix { m: self.m $op rhs.m }
            }
        }
        impl $tr<&SymMatrix> for SymMatrix {
            type Output = SymMatrix;
            fn $f(self, rhs: &SymMatrix) -> SymMatrix {
                SymMatrix { m: self.m $op &rhs.m }
            }
        }
    };
}
sym_binop!(Add, add, +);
sym_binop!(Sub, sub, -);

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, a: f64) -> SymMatrix {
        self.scale(a)
    }
}

impl Mul<f64> for SymMatrix {
    type Output = SymMatrix;
    fn mul(self, a: f64) -> SymMatrix {
        SymMatrix { m: self.m * a }
    }
}

impl Neg for &SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix { m: -&self.m }
    }
}

impl Neg for SymMatrix {
    type Output = SymMatrix;
    fn neg(self) -> SymMatrix {
        SymMatrix { m: -self.m }
    }
}

/// Eigenvalues in non-increasing order with an orthonormal basis whose
/// columns match. Each column has its first non-negligible entry positive.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub basis: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max_abs_value(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn reconstruct(&self) -> SymMatrix {
        SymMatrix::from_spectral(&self.basis, &self.values)
    }

    /// Spectral function `Q diag(f(lambda)) Q^T`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let v: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        SymMatrix::from_spectral(&self.basis, &v)
    }

    pub fn columns(&self, idx: &[usize]) -> DMatrix<f64> {
        select_columns(&self.basis, idx)
    }

    /// `Q^T H Q`.
    pub fn to_basis(&self, h: &SymMatrix) -> DMatrix<f64> {
        self.basis.transpose() * h.as_matrix() * &self.basis
    }

    /// `Q Hhat Q^T`.
    pub fn from_basis(&self, hhat: &DMatrix<f64>) -> SymMatrix {
        SymMatrix::symmetrize(&self.basis * hhat * self.basis.transpose())
    }

    /// Default absolute tolerance for sign decisions on this spectrum.
    pub fn sign_tol(&self) -> f64 {
        DEFAULT_REL_TOL * (1.0 + self.max_abs_value())
    }

    /// Absolute tolerance for kink decisions on this spectrum.
    pub fn kink_tol(&self) -> f64 {
        KINK_REL_TOL * (1.0 + self.max_abs_value())
    }
}

/// Symmetric eigendecomposition with descending eigenvalues.
pub fn eig_sym(m: &SymMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    if m.as_matrix().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("eigendecomposition of a non-finite matrix"));
    }
    if n == 0 {
        return Ok(EigenDecomposition { values: Vec::new(), basis: DMatrix::zeros(0, 0) });
    }
    let se = m.as_matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].total_cmp(&se.eigenvalues[a]));
    let mut basis = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (j, &k) in order.iter().enumerate() {
        values.push(se.eigenvalues[k]);
        let mut col = se.eigenvectors.column(k).clone_owned();
        let nrm = col.norm();
        if nrm > 0.0 {
            col /= nrm;
        }
        if let Some(first) = col.iter().find(|v| v.abs() > 1e-10) {
            if *first < 0.0 {
                col.neg_mut();
            }
        }
        basis.set_column(j, &col);
    }
    Ok(EigenDecomposition { values, basis })
}

/// Eigenvalues only (descending) of a symmetric `DMatrix`.
pub fn eigenvalues_desc(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut v: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Smallest eigenvalue of a symmetric `DMatrix`; `+inf` for the empty matrix.
pub fn lambda_min(m: &DMatrix<f64>) -> f64 {
    eigenvalues_desc(m).last().copied().unwrap_or(f64::INFINITY)
}

/// Largest eigenvalue of a symmetric `DMatrix`; `-inf` for the empty matrix.
pub fn lambda_max(m: &DMatrix<f64>) -> f64 {
    eigenvalues_desc(m).first().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Positive / zero / negative eigenvalue index sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SignPartition {
    pub alpha: Vec<usize>,
    pub beta: Vec<usize>,
    pub gamma: Vec<usize>,
}

pub fn partition_by_sign(eig: &EigenDecomposition, tol: f64) -> SignPartition {
    let mut p = SignPartition::default();
    for (i, &l) in eig.values.iter().enumerate() {
        if l > tol {
            p.alpha.push(i);
        } else if l < -tol {
            p.gamma.push(i);
        } else {
            p.beta.push(i);
        }
    }
    p
}

/// Consecutive runs of (numerically) equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DistinctBlocks {
    /// Block representatives (mean of the block), descending.
    pub values: Vec<f64>,
    pub blocks: Vec<Vec<usize>>,
    /// Index into `blocks` of the block representing zero, if any.
    pub zero_block: Option<usize>,
}

impl DistinctBlocks {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Position where the zero block sits or would be inserted: blocks with
    /// index below it are positive, blocks above it are negative.
    pub fn split_index(&self) -> usize {
        match self.zero_block {
            Some(s) => s,
            None => self.values.iter().take_while(|v| **v > 0.0).count(),
        }
    }
}

/// Groups eigenvalues whose neighbours differ by at most
/// `group_tol * (1 + |lambda|)`. Eigenvalues within `group_tol * (1 + max|lambda|)`
/// of zero always form their own zero block.
pub fn group_distinct(eig: &EigenDecomposition, group_tol: f64) -> DistinctBlocks {
    let ztol = group_tol * (1.0 + eig.max_abs_value());
    let mut values = Vec::new();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut zero_block = None;
    let mut i = 0;
    let n = eig.dim();
    while i < n {
        let l = eig.values[i];
        let mut blk = alloc::vec![i];
        if l.abs() <= ztol {
            let mut j = i + 1;
            while j < n && eig.values[j].abs() <= ztol {
                blk.push(j);
                j += 1;
            }
            zero_block = Some(blocks.len());
            i = j;
        } else {
            let mut j = i + 1;
            while j < n {
                let prev = eig.values[j - 1];
                let cur = eig.values[j];
                if cur.abs() <= ztol || (prev - cur) > group_tol * (1.0 + prev.abs()) {
                    break;
                }
                blk.push(j);
                j += 1;
            }
            i = j;
        }
        let mean = blk.iter().map(|&k| eig.values[k]).sum::<f64>() / blk.len() as f64;
        values.push(if zero_block == Some(blocks.len()) { 0.0 } else { mean });
        blocks.push(blk);
    }
    DistinctBlocks { values, blocks, zero_block }
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix, dropping eigenvalues
/// with magnitude at or below `cutoff`.
pub fn pinv_sym(m: &SymMatrix, cutoff: f64) -> Result<SymMatrix> {
    let e = eig_sym(m)?;
    Ok(e.map(|l| if l.abs() > cutoff { 1.0 / l } else { 0.0 }))
}

/// Symmetric vectorisation: stacks the upper triangle column by column with
/// off-diagonal entries scaled by sqrt(2), so `svec(A).svec(B) = <A, B>`.
pub fn svec(m: &SymMatrix) -> DVector<f64> {
    let n = m.dim();
    let mut out = DVector::zeros(n * (n + 1) / 2);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            out[k] = if i == j { m.get(i, i) } else { core::f64::consts::SQRT_2 * m.get(i, j) };
            k += 1;
        }
    }
    out
}

pub fn smat(v: &DVector<f64>) -> Result<SymMatrix> {
    let len = v.len();
    let n = libm::round((libm::sqrt(8.0 * len as f64 + 1.0) - 1.0) / 2.0) as usize;
    if n * (n + 1) / 2 != len {
        return Err(Error::invalid("svec length is not a triangular number"));
    }
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        for i in 0..=j {
            if i == j {
                m[(i, i)] = v[k];
            } else {
                let val = v[k] / core::f64::consts::SQRT_2;
                m[(i, j)] = val;
                m[(j, i)] = val;
            }
            k += 1;
        }
    }
    Ok(SymMatrix { m })
}

/// Column-major vectorisation of the sub-block `M[rows, cols]`.
pub fn vec_block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DVector<f64> {
    let mut out = DVector::zeros(rows.len() * cols.len());
    let mut k = 0;
    for &j in cols {
        for &i in rows {
            out[k] = m[(i, j)];
            k += 1;
        }
    }
    out
}

/// Symmetric vectorisation of the principal sub-block `M[idx, idx]`.
pub fn svec_block(m: &DMatrix<f64>, idx: &[usize]) -> DVector<f64> {
    svec(&SymMatrix::symmetrize(submatrix(m, idx, idx)))
}

pub fn select_columns(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), idx.len());
    for (k, &j) in idx.iter().enumerate() {
        out.set_column(k, &m.column(j));
    }
    out
}

pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Choice of the free block in a generalised Jacobian element.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BlockChoice {
    #[default]
    Zero,
    Identity,
    /// Symmetric matrix with entries in `[0, 1]`, sized to the free block.
    Given(DMatrix<f64>),
}

impl BlockChoice {
    /// Entry `(i, j)` of the free block multiplier (local indices).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self {
            BlockChoice::Zero => 0.0,
            BlockChoice::Identity => 1.0,
            BlockChoice::Given(w) => w[(i, j)],
        }
    }

    pub fn validate(&self, size: usize) -> Result<()> {
        if let BlockChoice::Given(w) = self {
            if w.nrows() != size || w.ncols() != size {
                return Err(Error::invalid("block choice has the wrong size"));
            }
            for i in 0..size {
                for j in 0..size {
                    let v = w[(i, j)];
                    if !(0.0..=1.0).contains(&v) || (v - w[(j, i)]).abs() > 1e-12 {
                        return Err(Error::invalid("block choice must be symmetric with entries in [0,1]"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Linear operator `H -> Q (Omega o Q^T H Q) Q^T` on symmetric matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    pub basis: DMatrix<f64>,
    pub multipliers: DMatrix<f64>,
}

impl SpectralOperator {
    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn apply(&self, h: &SymMatrix) -> SymMatrix {
        let hhat = self.basis.transpose() * h.as_matrix() * &self.basis;
        let prod = hhat.component_mul(&self.multipliers);
        SymMatrix::symmetrize(&self.basis * prod * self.basis.transpose())
    }

    /// Matrix of the operator in `svec` coordinates.
    pub fn svec_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let d = n * (n + 1) / 2;
        let mut out = DMatrix::zeros(d, d);
        for k in 0..d {
            let mut e = DVector::zeros(d);
            e[k] = 1.0;
            let col = svec(&self.apply(&smat(&e).expect("triangular length")));
            out.set_column(k, &col);
        }
        out
    }
}
