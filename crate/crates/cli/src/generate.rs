//! Synthetic instances with a KKT point at `x = 0` by construction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sdnop_core::diagnostics::{
    app_cone_basis, nondegeneracy_check, second_order_matrix, strong_sosc_check, ReferenceStructure, DEFAULT_RANK_TOL,
};
use sdnop_core::problem::{
    adjoint_partials, kkt_residual, MultiplierTriple, QuadraticForm, QuadraticMatrixMap, QuadraticProblem,
};
use sdnop_core::SymMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Nondegenerate with the strong second order condition.
    Nondegen,
    /// `A(Q, P)` loses row rank.
    Degen,
    /// Negative curvature on the `app` subspace.
    Saddle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSpec {
    pub n: usize,
    pub q: usize,
    pub m: usize,
    pub p: usize,
    pub profile: Profile,
    pub seed: u64,
}

/// Generator knobs. `margin` is the curvature `q(d) = margin |d|^2` built into `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub margin: f64,
    pub quadratic_scale: f64,
    pub max_attempts: usize,
    pub sigma_min: f64,
    pub sosc_min: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { margin: 2.0, quadratic_scale: 0.1, max_attempts: 20, sigma_min: 1e-6, sosc_min: 1e-6 }
    }
}

/// Block sizes: `(a, b, c)` for `F(0)` and `(alpha, gamma)` for `g(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Blocks {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub alpha: usize,
    pub gamma: usize,
}

impl Blocks {
    pub fn for_dims(q: usize, p: usize) -> Self {
        let b = if q == 0 { 0 } else { (q / 3).max(1) };
        let a = (q - b).div_ceil(2);
        let alpha = p.div_ceil(2);
        Blocks { a, b, c: q - b - a, alpha, gamma: p - alpha }
    }

    /// Number of rows of `A(Q, P)`.
    pub fn n2(&self, m: usize) -> usize {
        m + self.b * (self.b + 1) / 2 + self.alpha * (self.alpha + 1) / 2
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    pub problem: QuadraticProblem,
    pub multipliers: MultiplierTriple,
    pub attempts: usize,
}

fn orthogonal(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

fn sym(k: usize, scale: f64, rng: &mut ChaCha8Rng) -> SymMatrix {
    let mut m = DMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            let v = rng.random_range(-scale..scale);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    SymMatrix::symmetrize(m)
}

fn matrix_map(n: usize, a0: SymMatrix, quad: f64, rng: &mut ChaCha8Rng) -> QuadraticMatrixMap {
    let k = a0.dim();
    let linear = (0..n).map(|_| sym(k, 1.0, rng)).collect();
    let mut quadratic = vec![SymMatrix::zeros(k); n * n];
    for i in 0..n {
        for j in 0..=i {
            let a = sym(k, quad, rng);
            quadratic[j * n + i] = a.clone();
            quadratic[i * n + j] = a;
        }
    }
    QuadraticMatrixMap { a0, linear, quadratic }
}

/// Removes the `idx x idx` block of every partial in the basis `basis`.
fn zero_block(map: &mut QuadraticMatrixMap, basis: &DMatrix<f64>, idx: &[usize]) {
    let cols = DMatrix::from_fn(basis.nrows(), idx.len(), |i, j| basis[(i, idx[j])]);
    let proj = &cols * cols.transpose();
    for a in map.linear.iter_mut() {
        let block = &proj * a.as_matrix() * &proj;
        *a = SymMatrix::symmetrize(a.as_matrix() - block);
    }
}

fn check_dims(spec: &GenerateSpec) -> Result<Blocks> {
    if spec.n == 0 {
        return Err(CliError::input("generate: n must be positive"));
    }
    let blocks = Blocks::for_dims(spec.q, spec.p);
    let n2 = blocks.n2(spec.m);
    if spec.profile != Profile::Degen && spec.n <= n2 {
        return Err(CliError::input(format!(
            "generate: profile {:?} needs n > n2 = m + b(b+1)/2 + alpha(alpha+1)/2 = {n2} (b = {}, alpha = {}), got n = {}",
            spec.profile, blocks.b, blocks.alpha, spec.n
        )));
    }
    Ok(blocks)
}

fn attempt(spec: &GenerateSpec, blocks: Blocks, cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Generated> {
    let GenerateSpec { n, q, m, p, profile, .. } = *spec;

    let qb = orthogonal(q, rng);
    let mut f_spec = Vec::with_capacity(q);
    let mut y_spec = Vec::with_capacity(q);
    for _ in 0..blocks.a {
        f_spec.push(rng.random_range(1.0..2.0));
        y_spec.push(1.0);
    }
    for _ in 0..blocks.b {
        f_spec.push(0.0);
        y_spec.push(rng.random_range(-0.8..0.8));
    }
    for _ in 0..blocks.c {
        f_spec.push(-rng.random_range(1.0..2.0));
        y_spec.push(-1.0);
    }
    let f0 = SymMatrix::from_spectral(&qb, &f_spec);
    let ybar = SymMatrix::from_spectral(&qb, &y_spec);

    let pb = orthogonal(p, rng);
    let mut g_spec = Vec::with_capacity(p);
    let mut gamma_spec = Vec::with_capacity(p);
    for _ in 0..blocks.alpha {
        g_spec.push(0.0);
        gamma_spec.push(rng.random_range(0.5..1.5));
    }
    for _ in 0..blocks.gamma {
        g_spec.push(rng.random_range(1.0..2.0));
        gamma_spec.push(0.0);
    }
    let g0 = SymMatrix::from_spectral(&pb, &g_spec);
    let gamma = SymMatrix::from_spectral(&pb, &gamma_spec);
    let mu = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));

    let quad = cfg.quadratic_scale;
    let mut big_f = matrix_map(n, f0, quad, rng);
    let mut g = matrix_map(n, g0, quad, rng);
    let mut h: Vec<QuadraticForm> = (0..m)
        .map(|_| {
            let b = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
            let hh = sym(n, quad, rng).into_matrix();
            QuadraticForm { c0: 0.0, b, h: hh }
        })
        .collect();

    if profile == Profile::Degen {
        if m > 0 {
            h[0].b.fill(0.0);
        } else if blocks.b > 0 {
            zero_block(&mut big_f, &qb, &(blocks.a..blocks.a + blocks.b).collect::<Vec<_>>());
        } else if blocks.alpha > 0 {
            zero_block(&mut g, &pb, &(0..blocks.alpha).collect::<Vec<_>>());
        } else {
            return Err(CliError::input("generate: degen profile needs m > 0, a zero block in F(0) or an active block in g(0)"));
        }
    }

    let jh = DMatrix::from_fn(m, n, |i, j| h[i].b[j]);
    let grad = -adjoint_partials(&big_f.linear, &ybar) - jh.transpose() * &mu + adjoint_partials(&g.linear, &gamma);
    let multipliers = MultiplierTriple { y: ybar, mu, gamma };
    let mut problem = QuadraticProblem::new(QuadraticForm::affine(0.0, grad), big_f, h, g)?;

    let x = DVector::zeros(n);
    let s = ReferenceStructure::new(&problem, &x, &multipliers, 1e-10)?;
    let base = second_order_matrix(&s)?;
    let mut hf = DMatrix::identity(n, n) * cfg.margin - base;
    if profile == Profile::Saddle {
        let app = app_cone_basis(&s);
        if app.ncols() == 0 {
            return Err(CliError::input("generate: saddle profile needs a nontrivial app subspace"));
        }
        let v = app.column(0);
        hf -= v * v.transpose() * (2.0 * (cfg.margin + 1.0));
    }
    problem.f.h = (&hf + hf.transpose()) * 0.5;
    Ok(Generated { problem, multipliers, attempts: 0 })
}

/// Verdicts of the checks that the profile promises.
fn verify(g: &Generated, profile: Profile, cfg: &GeneratorConfig) -> Result<bool> {
    let x = DVector::zeros(g.problem.f.b.len());
    let residual = kkt_residual(&g.problem, &x, &g.multipliers)?.total();
    if !(residual <= 1e-12) {
        return Ok(false);
    }
    let s = ReferenceStructure::new(&g.problem, &x, &g.multipliers, 1e-12)?;
    let nd = nondegeneracy_check(&s, DEFAULT_RANK_TOL);
    Ok(match profile {
        Profile::Nondegen => {
            nd.holds && nd.sigma_min.is_none_or(|v| v > cfg.sigma_min) && strong_sosc_check(&s, cfg.sosc_min)?.holds
        }
        Profile::Degen => !nd.holds,
        Profile::Saddle => nd.holds && !strong_sosc_check(&s, 0.0)?.holds,
    })
}

/// Draws instances from `spec.seed` until one passes the profile's checks.
pub fn generate(spec: &GenerateSpec, cfg: &GeneratorConfig) -> Result<Generated> {
    let blocks = check_dims(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for k in 1..=cfg.max_attempts.max(1) {
        let mut g = attempt(spec, blocks, cfg, &mut rng)?;
        if verify(&g, spec.profile, cfg)? {
            g.attempts = k;
            return Ok(g);
        }
        log::info!("generate: attempt {k} rejected");
    }
    Err(CliError::input(format!(
        "generate: no instance passed the {:?} checks in {} attempts",
        spec.profile, cfg.max_attempts
    )))
}
