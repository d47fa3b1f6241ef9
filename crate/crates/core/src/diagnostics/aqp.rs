use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{null_space, svd_full, ReferenceStructure, DEFAULT_RANK_TOL};
use crate::nuclear::SubgradientPartition;
use crate::problem::{NewtonChoices, ProblemOracle};
use crate::spectral::{svec_block, vec_block, BlockChoice, EigenDecomposition, SignPartition};
use crate::{Error, Result};

/// Row counts of the blocks of `A(Q, P)`, in stacking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AqpRows {
    pub jh: usize,
    pub bu_bu: usize,
    pub bu_bs: usize,
    pub bu_bl: usize,
    pub bs_bs: usize,
    pub bs_bl: usize,
    pub bl_bl: usize,
    pub alpha_alpha: usize,
    pub beta_beta: usize,
    pub alpha_beta: usize,
}

impl AqpRows {
    fn new(m: usize, bu: usize, bs: usize, bl: usize, alpha: usize, beta: usize) -> Self {
        let tri = |k: usize| k * (k + 1) / 2;
        Self {
            jh: m,
            bu_bu: tri(bu),
            bu_bs: bu * bs,
            bu_bl: bu * bl,
            bs_bs: tri(bs),
            bs_bl: bs * bl,
            bl_bl: tri(bl),
            alpha_alpha: tri(alpha),
            beta_beta: tri(beta),
            alpha_beta: alpha * beta,
        }
    }

    /// Rows coming from `h` and `F`.
    pub fn n1(&self) -> usize {
        self.jh + self.bu_bu + self.bu_bs + self.bu_bl + self.bs_bs + self.bs_bl + self.bl_bl
    }

    pub fn n2(&self) -> usize {
        self.n1() + self.alpha_alpha + self.beta_beta + self.alpha_beta
    }
}

/// `A(Q, P)`: `Jh` over the `b`-blocks of `DF` in the adapted basis of
/// `F(xbar)` over the negated `(alpha, beta)` blocks of `Dg` in the eigenbasis
/// of `Gammabar - g(xbar)`. Diagonal blocks use `svec`, off-diagonal blocks `vec`.
#[derive(Debug, Clone, PartialEq)]
pub struct AqpMatrix {
    pub matrix: DMatrix<f64>,
    pub rows: AqpRows,
}

/// Stacks `vec` (or `svec` when `sym`) of `M_l[r, c]` as column `l`.
pub(crate) fn block_rows(mats: &[DMatrix<f64>], r: &[usize], c: &[usize], sym: bool) -> DMatrix<f64> {
    let len = if sym { r.len() * (r.len() + 1) / 2 } else { r.len() * c.len() };
    let mut out = DMatrix::zeros(len, mats.len());
    for (l, m) in mats.iter().enumerate() {
        let col: DVector<f64> = if sym { svec_block(m, r) } else { vec_block(m, r, c) };
        out.set_column(l, &col);
    }
    out
}

pub(crate) fn vstack(parts: &[DMatrix<f64>], n: usize) -> DMatrix<f64> {
    let rows: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = DMatrix::zeros(rows, n);
    let mut r = 0;
    for p in parts {
        out.view_mut((r, 0), (p.nrows(), n)).copy_from(p);
        r += p.nrows();
    }
    out
}

fn assemble(jh: &DMatrix<f64>, fq: &[DMatrix<f64>], gp: &[DMatrix<f64>], sp: &SubgradientPartition, psd: &SignPartition) -> AqpMatrix {
    let n = jh.ncols();
    let (bu, bs, bl) = (&sp.b_upper, &sp.b_strict, &sp.b_lower);
    let (al, be) = (&psd.alpha, &psd.beta);
    let parts = [
        jh.clone(),
        block_rows(fq, bu, bu, true),
        block_rows(fq, bu, bs, false),
        block_rows(fq, bu, bl, false),
        block_rows(fq, bs, bs, true),
        block_rows(fq, bs, bl, false),
        block_rows(fq, bl, bl, true),
        -block_rows(gp, al, al, true),
        -block_rows(gp, be, be, true),
        -block_rows(gp, al, be, false),
    ];
    AqpMatrix {
        matrix: vstack(&parts, n),
        rows: AqpRows::new(jh.nrows(), bu.len(), bs.len(), bl.len(), al.len(), be.len()),
    }
}

/// Builds `A(Q, P)` at `x` from a subgradient partition of `(F(x), Ybar)` and
/// the eigenbasis and sign partition of `Gammabar - g(x)`.
pub fn build_aqp<P: ProblemOracle + ?Sized>(
    p: &P,
    x: &DVector<f64>,
    nuclear: &SubgradientPartition,
    psd_eig: &EigenDecomposition,
    psd: &SignPartition,
) -> Result<AqpMatrix> {
    let d = p.dims();
    if x.len() != d.n || nuclear.basis.nrows() != d.q || nuclear.basis.ncols() != d.q || psd_eig.dim() != d.p {
        return Err(Error::invalid("partition dimensions do not match the problem"));
    }
    if psd.alpha.len() + psd.beta.len() + psd.gamma.len() != d.p
        || nuclear.a.len() + nuclear.b.len() + nuclear.c.len() != d.q
        || nuclear.b_upper.len() + nuclear.b_strict.len() + nuclear.b_lower.len() != nuclear.b.len()
    {
        return Err(Error::invalid("partition index sets do not cover the spectrum"));
    }
    let q = &nuclear.basis;
    let fq: Vec<DMatrix<f64>> = p.big_f_partials(x).iter().map(|j| q.transpose() * j.as_matrix() * q).collect();
    let pb = &psd_eig.basis;
    let gp: Vec<DMatrix<f64>> = p.g_partials(x).iter().map(|j| pb.transpose() * j.as_matrix() * pb).collect();
    Ok(assemble(&p.h_jacobian(x), &fq, &gp, nuclear, psd))
}

impl AqpMatrix {
    pub fn from_structure(s: &ReferenceStructure) -> Self {
        assemble(&s.jh, &s.df_adapted(), &s.dg_adapted(), &s.nuclear, &s.psd)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NondegeneracyReport {
    pub holds: bool,
    /// Smallest of the `n2` singular values; zero when `n2 > n`, `None` when `n2 = 0`.
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
    pub rows: usize,
    pub cols: usize,
}

/// Full row rank test of `A(Q, P)`: holds iff `sigma_min > rank_tol * sigma_max`.
pub fn nondegeneracy_check(s: &ReferenceStructure, rank_tol: f64) -> NondegeneracyReport {
    let a = AqpMatrix::from_structure(s);
    report(&a.matrix, rank_tol)
}

pub(crate) fn report(a: &DMatrix<f64>, rank_tol: f64) -> NondegeneracyReport {
    let (rows, cols) = a.shape();
    if rows == 0 {
        return NondegeneracyReport { holds: true, sigma_min: None, sigma_max: None, rows, cols };
    }
    let (values, _) = svd_full(a);
    let smax = values.first().copied().unwrap_or(0.0);
    let smin = if rows > cols { 0.0 } else { values.last().copied().unwrap_or(0.0) };
    NondegeneracyReport { holds: smax > 0.0 && smin > rank_tol * smax, sigma_min: Some(smin), sigma_max: Some(smax), rows, cols }
}

/// Stacked linear system whose null space is `app(Ybar, mubar, Gammabar)`.
pub(crate) fn app_system(s: &ReferenceStructure) -> DMatrix<f64> {
    let fq = s.df_adapted();
    let gp = s.dg_adapted();
    let sp = &s.nuclear;
    let parts = [
        s.jh.clone(),
        block_rows(&fq, &sp.b_strict, &sp.b, false),
        block_rows(&fq, &sp.b_upper, &sp.b_lower, false),
        block_rows(&gp, &s.psd.alpha, &s.psd.alpha, false),
        block_rows(&gp, &s.psd.alpha, &s.psd.beta, false),
    ];
    vstack(&parts, s.n())
}

/// Extra equations cutting the lineality space of the critical cone out of `app`.
pub(crate) fn lineality_system(s: &ReferenceStructure) -> DMatrix<f64> {
    let fq = s.df_adapted();
    let gp = s.dg_adapted();
    let sp = &s.nuclear;
    let parts = [
        app_system(s),
        block_rows(&fq, &sp.b_upper, &sp.b_upper, false),
        block_rows(&fq, &sp.b_lower, &sp.b_lower, false),
        block_rows(&gp, &s.psd.beta, &s.psd.beta, false),
    ];
    vstack(&parts, s.n())
}

/// Orthonormal basis (columns) of `app(Ybar, mubar, Gammabar)`, the null space of
/// `Jh`, `Q_bS^T DF Q_b`, `Q_bU^T DF Q_bL`, `P_alpha^T Dg P_alpha` and `P_alpha^T Dg P_beta`.
pub fn app_cone_basis(s: &ReferenceStructure) -> DMatrix<f64> {
    null_space(&app_system(s), s.n(), DEFAULT_RANK_TOL)
}

fn free_block_value(choice: &BlockChoice, what: &str) -> Result<f64> {
    match choice {
        BlockChoice::Zero => Ok(0.0),
        BlockChoice::Identity => Ok(1.0),
        BlockChoice::Given(_) => Err(Error::invalid(alloc::format!("{what}: only Zero or Identity block choices are supported"))),
    }
}

/// `Bt D B` for `B` = `block_rows(..)` and `D = diag(weights)`.
fn weighted_gram(b: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let mut wb = b.clone();
    for (i, w) in weights.iter().enumerate() {
        wb.row_mut(i).scale_mut(*w);
    }
    b.transpose() * wb
}

/// `grad^2 L + c' At D_c A + c (sum of the coupling terms)`: the Newton matrix
/// at the reference point written block by block in the adapted bases. With
/// `c' = c` this is the generalised Hessian element selected by `choices`.
pub fn b_form(s: &ReferenceStructure, c_prime: f64, c: f64, choices: &NewtonChoices) -> Result<DMatrix<f64>> {
    if !(c > 0.0) || !(c_prime >= 0.0) {
        return Err(Error::invalid("penalty parameters must be positive"));
    }
    let upper = 1.0 - free_block_value(&choices.prox.upper, "upper kink")?;
    let lower = 1.0 - free_block_value(&choices.prox.lower, "lower kink")?;
    let beta = free_block_value(&choices.psd, "psd zero block")?;
    let n = s.n();
    let fq = s.df_adapted();
    let gp = s.dg_adapted();
    let sp = &s.nuclear;
    let lam = &sp.values;
    let w = &sp.w;
    let mu = &s.psd_eig.values;
    let tau = 1.0 / c;
    let (a, bu, bs, bl, cc) = (&sp.a, &sp.b_upper, &sp.b_strict, &sp.b_lower, &sp.c);
    let (al, be, ga) = (&s.psd.alpha, &s.psd.beta, &s.psd.gamma);

    let mut ad = &s.jh.transpose() * &s.jh;
    let sym_const = |idx: &[usize], v: f64| alloc::vec![v; idx.len() * (idx.len() + 1) / 2];
    let offd_const = |r: &[usize], cols: &[usize], v: f64| alloc::vec![v; r.len() * cols.len()];
    ad += weighted_gram(&block_rows(&fq, bu, bu, true), &sym_const(bu, upper));
    ad += weighted_gram(&block_rows(&fq, bu, bs, false), &offd_const(bu, bs, 2.0));
    ad += weighted_gram(&block_rows(&fq, bu, bl, false), &offd_const(bu, bl, 2.0));
    ad += weighted_gram(&block_rows(&fq, bs, bs, true), &sym_const(bs, 1.0));
    ad += weighted_gram(&block_rows(&fq, bs, bl, false), &offd_const(bs, bl, 2.0));
    ad += weighted_gram(&block_rows(&fq, bl, bl, true), &sym_const(bl, lower));
    ad += weighted_gram(&block_rows(&gp, al, al, true), &sym_const(al, 1.0));
    ad += weighted_gram(&block_rows(&gp, be, be, true), &sym_const(be, beta));
    ad += weighted_gram(&block_rows(&gp, al, be, false), &offd_const(al, be, 2.0));

    // Weights follow the column-major order of `vec_block`.
    let table = |r: &[usize], cols: &[usize], f: &dyn Fn(usize, usize) -> f64| {
        let mut v = Vec::with_capacity(r.len() * cols.len());
        for &j in cols {
            for &i in r {
                v.push(2.0 * f(i, j));
            }
        }
        v
    };
    let mut rest = DMatrix::zeros(n, n);
    rest += weighted_gram(
        &block_rows(&fq, a, bs, false),
        &table(a, bs, &|i, j| tau * (1.0 - w[j]) / (lam[i] + tau * (1.0 - w[j]))),
    );
    rest += weighted_gram(&block_rows(&fq, a, bl, false), &table(a, bl, &|i, _| 2.0 * tau / (lam[i] + 2.0 * tau)));
    rest += weighted_gram(
        &block_rows(&fq, a, cc, false),
        &table(a, cc, &|i, j| 2.0 * tau / (lam[i] - lam[j] + 2.0 * tau)),
    );
    rest += weighted_gram(&block_rows(&fq, cc, bu, false), &table(cc, bu, &|i, _| 2.0 * tau / (-lam[i] + 2.0 * tau)));
    rest += weighted_gram(
        &block_rows(&fq, cc, bs, false),
        &table(cc, bs, &|i, j| tau * (w[j] + 1.0) / (tau * (w[j] + 1.0) - lam[i])),
    );
    rest += weighted_gram(&block_rows(&gp, al, ga, false), &table(al, ga, &|i, j| mu[i] / (mu[i] - c * mu[j])));

    let out = &s.hess_l + ad * c_prime + rest * c;
    Ok((&out + out.transpose()) * 0.5)
}
