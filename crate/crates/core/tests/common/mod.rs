#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdnop_core::SymMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

pub fn sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::symmetrize(DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)))
}

pub fn unit_sym(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let h = sym(n, rng);
    let s = h.norm();
    h.scale(1.0 / s)
}

/// Eigenvalues on the lattice `{-3, -2.5, ..., 3}` so distinct values are
/// at least 0.5 apart; zeros and repeats show up often.
pub fn lattice_spectrum(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| 0.5 * rng.random_range(-6..=6) as f64).collect()
}

pub fn with_spectrum(values: &[f64], rng: &mut ChaCha8Rng) -> SymMatrix {
    let q = orthogonal(values.len(), rng);
    SymMatrix::from_spectral(&q, values)
}

pub fn vector(n: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// Random point `X` with the spectrum given and a subgradient `Y` of the
/// nuclear norm at `X` whose zero-block weights are drawn from `weights`.
pub fn subgradient_pair(values: &[f64], weights: &[f64], rng: &mut ChaCha8Rng) -> (SymMatrix, SymMatrix) {
    let q = orthogonal(values.len(), rng);
    let mut k = 0;
    let y: Vec<f64> = values
        .iter()
        .map(|&v| {
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                let w = weights[k % weights.len()];
                k += 1;
                w
            }
        })
        .collect();
    (SymMatrix::from_spectral(&q, values), SymMatrix::from_spectral(&q, &y))
}
