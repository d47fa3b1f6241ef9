use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{Dims, ProblemOracle};
use crate::spectral::SymMatrix;
use crate::{Error, Result};

/// Scalar quadratic `c0 + b^T x + x^T H x / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    pub c0: f64,
    pub b: DVector<f64>,
    pub h: DMatrix<f64>,
}

impl QuadraticForm {
    pub fn new(c0: f64, b: DVector<f64>, h: DMatrix<f64>) -> Result<Self> {
        let n = b.len();
        if h.nrows() != n || h.ncols() != n {
            return Err(Error::invalid("quadratic form: Hessian shape does not match gradient length"));
        }
        if !c0.is_finite() || b.iter().chain(h.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("quadratic form: non-finite coefficient"));
        }
        if (&h - h.transpose()).amax() > 1e-12 * (1.0 + h.amax()) {
            return Err(Error::invalid("quadratic form: Hessian is not symmetric"));
        }
        let h = (&h + h.transpose()) * 0.5;
        Ok(Self { c0, b, h })
    }

    pub fn zero(n: usize) -> Self {
        Self { c0: 0.0, b: DVector::zeros(n), h: DMatrix::zeros(n, n) }
    }

    pub fn affine(c0: f64, b: DVector<f64>) -> Self {
        let n = b.len();
        Self { c0, b, h: DMatrix::zeros(n, n) }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        self.c0 + self.b.dot(x) + 0.5 * x.dot(&(&self.h * x))
    }

    pub fn grad(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.b + &self.h * x
    }
}

/// `x -> A0 + sum_i x_i A_i + 1/2 sum_ij x_i x_j A_ij` into `S^k`.
/// `quadratic` is stored row-major as `n * n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMatrixMap {
    pub a0: SymMatrix,
    pub linear: Vec<SymMatrix>,
    pub quadratic: Vec<SymMatrix>,
}

impl QuadraticMatrixMap {
    pub fn new(a0: SymMatrix, linear: Vec<SymMatrix>, quadratic: Vec<SymMatrix>) -> Result<Self> {
        let k = a0.dim();
        let n = linear.len();
        if linear.iter().chain(quadratic.iter()).any(|a| a.dim() != k) {
            return Err(Error::invalid("matrix map: coefficient sizes differ"));
        }
        if quadratic.len() != n * n && !quadratic.is_empty() {
            return Err(Error::invalid("matrix map: expected n*n quadratic coefficients"));
        }
        let quadratic = if quadratic.is_empty() { alloc::vec![SymMatrix::zeros(k); n * n] } else { quadratic };
        for i in 0..n {
            for j in 0..i {
                let d = (&quadratic[i * n + j] - &quadratic[j * n + i]).max_abs();
                if d > 1e-12 * (1.0 + quadratic[i * n + j].max_abs()) {
                    return Err(Error::invalid("matrix map: quadratic coefficients are not symmetric in (i, j)"));
                }
            }
        }
        Ok(Self { a0, linear, quadratic })
    }

    pub fn zero(n: usize, k: usize) -> Self {
        Self {
            a0: SymMatrix::zeros(k),
            linear: alloc::vec![SymMatrix::zeros(k); n],
            quadratic: alloc::vec![SymMatrix::zeros(k); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.linear.len()
    }

    pub fn k(&self) -> usize {
        self.a0.dim()
    }

    pub fn value(&self, x: &DVector<f64>) -> SymMatrix {
        let n = self.n();
        let mut out = self.a0.as_matrix().clone();
        for i in 0..n {
            out += self.linear[i].as_matrix() * x[i];
            for j in 0..n {
                out += self.quadratic[i * n + j].as_matrix() * (0.5 * x[i] * x[j]);
            }
        }
        SymMatrix::symmetrize(out)
    }

    /// Partial derivatives `dM/dx_l = A_l + sum_j x_j A_lj`.
    pub fn partials(&self, x: &DVector<f64>) -> Vec<SymMatrix> {
        let n = self.n();
        (0..n)
            .map(|l| {
                let mut out = self.linear[l].as_matrix().clone();
                for j in 0..n {
                    out += self.quadratic[l * n + j].as_matrix() * x[j];
                }
                SymMatrix::symmetrize(out)
            })
            .collect()
    }

    /// `[<Y, A_ij>]_ij`.
    pub fn curvature(&self, y: &SymMatrix) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.quadratic[i * n + j].inner(y))
    }
}

/// Problem with quadratic `f`, `F`, `h_i` and `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticProblem {
    pub f: QuadraticForm,
    pub big_f: QuadraticMatrixMap,
    pub h: Vec<QuadraticForm>,
    pub g: QuadraticMatrixMap,
}

impl QuadraticProblem {
    pub fn new(f: QuadraticForm, big_f: QuadraticMatrixMap, h: Vec<QuadraticForm>, g: QuadraticMatrixMap) -> Result<Self> {
        let n = f.b.len();
        if n == 0 {
            return Err(Error::invalid("problem needs at least one variable"));
        }
        if big_f.n() != n || g.n() != n || h.iter().any(|r| r.b.len() != n) {
            return Err(Error::invalid("problem components disagree on the number of variables"));
        }
        Ok(Self { f, big_f, h, g })
    }
}

impl ProblemOracle for QuadraticProblem {
    fn dims(&self) -> Dims {
        Dims { n: self.f.b.len(), q: self.big_f.k(), m: self.h.len(), p: self.g.k() }
    }

    fn f(&self, x: &DVector<f64>) -> f64 {
        self.f.value(x)
    }

    fn grad_f(&self, x: &DVector<f64>) -> DVector<f64> {
        self.f.grad(x)
    }

    fn hess_f(&self, _x: &DVector<f64>) -> DMatrix<f64> {
        self.f.h.clone()
    }

    fn big_f(&self, x: &DVector<f64>) -> SymMatrix {
        self.big_f.value(x)
    }

    fn big_f_partials(&self, x: &DVector<f64>) -> Vec<SymMatrix> {
        self.big_f.partials(x)
    }

    fn big_f_curvature(&self, _x: &DVector<f64>, y: &SymMatrix) -> DMatrix<f64> {
        self.big_f.curvature(y)
    }

    fn h(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.h.len(), self.h.iter().map(|r| r.value(x)))
    }

    fn h_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.f.b.len();
        let mut j = DMatrix::zeros(self.h.len(), n);
        for (i, r) in self.h.iter().enumerate() {
            j.set_row(i, &r.grad(x).transpose());
        }
        j
    }

    fn h_curvature(&self, _x: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64> {
        let n = self.f.b.len();
        let mut out = DMatrix::zeros(n, n);
        for (r, m) in self.h.iter().zip(mu.iter()) {
            out += &r.h * *m;
        }
        out
    }

    fn g(&self, x: &DVector<f64>) -> SymMatrix {
        self.g.value(x)
    }

    fn g_partials(&self, x: &DVector<f64>) -> Vec<SymMatrix> {
        self.g.partials(x)
    }

    fn g_curvature(&self, _x: &DVector<f64>, gamma: &SymMatrix) -> DMatrix<f64> {
        self.g.curvature(gamma)
    }
}
