//! Problem oracles, the Lagrangian and augmented Lagrangian, KKT residuals,
//! multiplier maps, Newton matrix elements and the local dual function.

mod quadratic;

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

pub use quadratic::{QuadraticForm, QuadraticMatrixMap, QuadraticProblem};

use crate::alm::{inner_minimize, InnerConfig, InnerSolveFailure};
use crate::nuclear::{grad_moreau_env, moreau_env, prox_bsub_element_at, prox_nuclear, KinkChoices};
use crate::psd_cone::{proj_bsub_element, project_nsd, project_psd};
use crate::spectral::{lambda_min, BlockChoice, SymMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub q: usize,
    pub m: usize,
    pub p: usize,
}

/// Evaluation oracle for `f`, `F`, `h`, `g` and their derivatives.
///
/// Derivatives of matrix-valued maps are given as the `n` partial derivatives
/// `dM/dx_l`, so `DM(x) d = sum_l d_l dM/dx_l` and `DM(x)^* Y = (<dM/dx_l, Y>)_l`.
/// Second derivatives are only needed contracted with a multiplier.
pub trait ProblemOracle {
    fn dims(&self) -> Dims;
    fn f(&self, x: &DVector<f64>) -> f64;
    fn grad_f(&self, x: &DVector<f64>) -> DVector<f64>;
    fn hess_f(&self, x: &DVector<f64>) -> DMatrix<f64>;
    fn big_f(&self, x: &DVector<f64>) -> SymMatrix;
    fn big_f_partials(&self, x: &DVector<f64>) -> Vec<SymMatrix>;
    /// `[<Y, d^2 F / dx_i dx_j>]_ij`.
    fn big_f_curvature(&self, x: &DVector<f64>, y: &SymMatrix) -> DMatrix<f64>;
    fn h(&self, x: &DVector<f64>) -> DVector<f64>;
    fn h_jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;
    /// `sum_i mu_i grad^2 h_i`.
    fn h_curvature(&self, x: &DVector<f64>, mu: &DVector<f64>) -> DMatrix<f64>;
    fn g(&self, x: &DVector<f64>) -> SymMatrix;
    fn g_partials(&self, x: &DVector<f64>) -> Vec<SymMatrix>;
    fn g_curvature(&self, x: &DVector<f64>, gamma: &SymMatrix) -> DMatrix<f64>;
}

/// `sum_l d_l J_l`, sized `k x k`.
pub fn apply_partials(partials: &[SymMatrix], d: &DVector<f64>, k: usize) -> SymMatrix {
    let mut out = DMatrix::zeros(k, k);
    for (j, dl) in partials.iter().zip(d.iter()) {
        out += j.as_matrix() * *dl;
    }
    SymMatrix::symmetrize(out)
}

/// `(<J_l, Y>)_l`.
pub fn adjoint_partials(partials: &[SymMatrix], y: &SymMatrix) -> DVector<f64> {
    DVector::from_iterator(partials.len(), partials.iter().map(|j| j.inner(y)))
}

/// Multipliers `(Y, mu, Gamma)` for the nuclear-norm term, the equalities and the PSD constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTriple {
    pub y: SymMatrix,
    pub mu: DVector<f64>,
    pub gamma: SymMatrix,
}

impl MultiplierTriple {
    pub fn zeros(d: Dims) -> Self {
        Self { y: SymMatrix::zeros(d.q), mu: DVector::zeros(d.m), gamma: SymMatrix::zeros(d.p) }
    }

    pub fn check_dims(&self, d: Dims) -> Result<()> {
        if self.y.dim() != d.q || self.mu.len() != d.m || self.gamma.dim() != d.p {
            return Err(Error::invalid("multiplier dimensions do not match the problem"));
        }
        Ok(())
    }

    pub fn norm_sq(&self) -> f64 {
        self.y.norm_sq() + self.mu.norm_squared() + self.gamma.norm_sq()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { y: &self.y - &other.y, mu: &self.mu - &other.mu, gamma: &self.gamma - &other.gamma }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { y: &self.y + &other.y, mu: &self.mu + &other.mu, gamma: &self.gamma + &other.gamma }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { y: self.y.scale(a), mu: &self.mu * a, gamma: self.gamma.scale(a) }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.y.inner(&other.y) + self.mu.dot(&other.mu) + self.gamma.inner(&other.gamma)
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }
}

/// KKT residual components; `total` is their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResidual {
    pub stationarity: f64,
    /// `||F(x) - prox_1(F(x) + Y)||`, zero exactly when `Y` is a subgradient at `F(x)`.
    pub subgradient: f64,
    pub feasibility_h: f64,
    pub feasibility_g: f64,
    pub dual_feasibility: f64,
    pub complementarity: f64,
}

impl KktResidual {
    pub fn total(&self) -> f64 {
        self.stationarity
            .max(self.subgradient)
            .max(self.feasibility_h)
            .max(self.feasibility_g)
            .max(self.dual_feasibility)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KktPoint {
    pub x: DVector<f64>,
    pub multipliers: MultiplierTriple,
    pub residual: KktResidual,
}

impl KktPoint {
    pub fn evaluate<P: ProblemOracle + ?Sized>(p: &P, x: DVector<f64>, multipliers: MultiplierTriple) -> Result<Self> {
        let residual = kkt_residual(p, &x, &multipliers)?;
        Ok(Self { x, multipliers, residual })
    }
}

fn check_inputs<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple) -> Result<Dims> {
    let d = p.dims();
    if x.len() != d.n {
        return Err(Error::invalid("primal vector has the wrong length"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("primal vector has non-finite entries"));
    }
    y.check_dims(d)?;
    Ok(d)
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::invalid("penalty parameter must be positive and finite"));
    }
    Ok(())
}

/// `f + <Y, F> + <mu, h> - <Gamma, g>`.
pub fn lagrangian<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple) -> Result<f64> {
    check_inputs(p, x, y)?;
    Ok(p.f(x) + y.y.inner(&p.big_f(x)) + y.mu.dot(&p.h(x)) - y.gamma.inner(&p.g(x)))
}

pub fn grad_x_lagrangian<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple) -> Result<DVector<f64>> {
    check_inputs(p, x, y)?;
    Ok(p.grad_f(x) + adjoint_partials(&p.big_f_partials(x), &y.y) + p.h_jacobian(x).transpose() * &y.mu
        - adjoint_partials(&p.g_partials(x), &y.gamma))
}

pub fn hess_xx_lagrangian<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple) -> Result<DMatrix<f64>> {
    check_inputs(p, x, y)?;
    let h = p.hess_f(x) + p.big_f_curvature(x, &y.y) + p.h_curvature(x, &y.mu) - p.g_curvature(x, &y.gamma);
    Ok((&h + h.transpose()) * 0.5)
}

/// Value of the augmented Lagrangian `L_c(x, Y, mu, Gamma)`.
pub fn aug_lagrangian_value<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple, c: f64) -> Result<f64> {
    check_c(c)?;
    let d = check_inputs(p, x, y)?;
    let mut v = p.f(x);
    if d.q > 0 {
        let z = p.big_f(x) + y.y.scale(1.0 / c);
        v += moreau_env(&z, 1.0 / c)? - y.y.norm_sq() / (2.0 * c);
    }
    let h = p.h(x);
    v += y.mu.dot(&h) + 0.5 * c * h.norm_squared();
    if d.p > 0 {
        let (pg, _) = project_psd(&(&y.gamma - &p.g(x).scale(c)))?;
        v += (pg.norm_sq() - y.gamma.norm_sq()) / (2.0 * c);
    }
    Ok(v)
}

/// `(Y+, mu+, Gamma+) = (grad e_{1/c}(F + Y/c), mu + c h, Pi_+(Gamma - c g))`.
pub fn multiplier_maps<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple, c: f64) -> Result<MultiplierTriple> {
    check_c(c)?;
    let d = check_inputs(p, x, y)?;
    let ynew = if d.q > 0 {
        grad_moreau_env(&(p.big_f(x) + y.y.scale(1.0 / c)), 1.0 / c)?
    } else {
        SymMatrix::zeros(0)
    };
    let gnew = if d.p > 0 { project_psd(&(&y.gamma - &p.g(x).scale(c)))?.0 } else { SymMatrix::zeros(0) };
    Ok(MultiplierTriple { y: ynew, mu: &y.mu + p.h(x) * c, gamma: gnew })
}

pub fn aug_lagrangian_grad<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple, c: f64) -> Result<DVector<f64>> {
    let plus = multiplier_maps(p, x, y, c)?;
    grad_x_lagrangian(p, x, &plus)
}

/// Choices fixing one element of the generalised Hessian of `L_c`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NewtonChoices {
    pub prox: KinkChoices,
    pub psd: BlockChoice,
}

/// `grad^2 L(x, y+) + DF^* W1 DF + c Jh^T Jh + c Dg^* W2 Dg`.
pub fn newton_matrix_element<P: ProblemOracle + ?Sized>(
    p: &P,
    x: &DVector<f64>,
    y: &MultiplierTriple,
    c: f64,
    choices: &NewtonChoices,
) -> Result<DMatrix<f64>> {
    check_c(c)?;
    let d = check_inputs(p, x, y)?;
    let plus = multiplier_maps(p, x, y, c)?;
    let mut a = hess_xx_lagrangian(p, x, &plus)?;
    if d.q > 0 {
        let z = p.big_f(x) + y.y.scale(1.0 / c);
        let w1 = prox_bsub_element_at(&z, 1.0 / c, &choices.prox)?.envelope_element();
        add_sandwich(&mut a, &p.big_f_partials(x), |h| w1.apply(h), 1.0);
    }
    if d.m > 0 {
        let jh = p.h_jacobian(x);
        a += jh.transpose() * jh * c;
    }
    if d.p > 0 {
        let m = &y.gamma - &p.g(x).scale(c);
        let w2 = proj_bsub_element(&m, &choices.psd)?;
        add_sandwich(&mut a, &p.g_partials(x), |h| w2.apply(h), c);
    }
    Ok((&a + a.transpose()) * 0.5)
}

/// `a_kl += scale * <J_k, W(J_l)>`.
pub(crate) fn add_sandwich(a: &mut DMatrix<f64>, partials: &[SymMatrix], w: impl Fn(&SymMatrix) -> SymMatrix, scale: f64) {
    let images: Vec<SymMatrix> = partials.iter().map(&w).collect();
    for (k, jk) in partials.iter().enumerate() {
        for (l, wl) in images.iter().enumerate() {
            a[(k, l)] += scale * jk.inner(wl);
        }
    }
}

pub fn kkt_residual<P: ProblemOracle + ?Sized>(p: &P, x: &DVector<f64>, y: &MultiplierTriple) -> Result<KktResidual> {
    let d = check_inputs(p, x, y)?;
    let mut r = KktResidual { stationarity: grad_x_lagrangian(p, x, y)?.norm(), ..Default::default() };
    if d.q > 0 {
        let fx = p.big_f(x);
        r.subgradient = (&fx - &prox_nuclear(&(&fx + &y.y), 1.0)?).norm();
    }
    r.feasibility_h = p.h(x).norm();
    if d.p > 0 {
        let g = p.g(x);
        r.feasibility_g = project_nsd(&g)?.norm();
        r.dual_feasibility = (-lambda_min(y.gamma.as_matrix())).max(0.0);
        r.complementarity = g.inner(&y.gamma).abs();
    }
    Ok(r)
}

/// Value and gradient of the local dual function `theta_c(y) = min_x L_c(x, y)`,
/// minimising from `x0`. Also returns the inner minimiser.
pub fn dual_value_and_grad<P: ProblemOracle + ?Sized>(
    p: &P,
    y: &MultiplierTriple,
    c: f64,
    x0: &DVector<f64>,
    cfg: &InnerConfig,
) -> core::result::Result<(f64, MultiplierTriple, DVector<f64>), DualError> {
    let (x, _) = inner_minimize(p, y, c, x0, cfg, cfg.grad_tol)?;
    let value = aug_lagrangian_value(p, &x, y, c)?;
    let plus = multiplier_maps(p, &x, y, c)?;
    let grad = plus.sub(y).scale(1.0 / c);
    Ok((value, grad, x))
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DualError {
    #[error(transparent)]
    Inner(#[from] InnerSolveFailure),
    #[error(transparent)]
    Core(#[from] Error),
}
