#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdnop_core::SymMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn orthogonal(n: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0)).qr().q()
}

pub fn sym(n: usize, r: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::symmetrize(DMatrix::from_fn(n, n, |_, _| r.random_range(-1.0..1.0)))
}

pub fn unit_sym(n: usize, r: &mut ChaCha8Rng) -> SymMatrix {
    let h = sym(n, r);
    let s = h.norm();
    h.scale(1.0 / s)
}

pub fn vector(n: usize, r: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| r.random_range(-1.0..1.0))
}

/// Half-integer eigenvalues in `[-3, 3]`; zeros and repeats are common.
pub fn lattice_spectrum(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| 0.5 * r.random_range(-6..=6) as f64).collect()
}

pub fn with_spectrum(values: &[f64], r: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::from_spectral(&orthogonal(values.len(), r), values)
}

/// `X` with the given spectrum and `Y` in the subdifferential of the nuclear
/// norm at `X`, cycling through `weights` on the zero eigenvalues.
pub fn subgradient_pair(values: &[f64], weights: &[f64], r: &mut ChaCha8Rng) -> (SymMatrix, SymMatrix) {
    let q = orthogonal(values.len(), r);
    let mut k = 0;
    let y: Vec<f64> = values
        .iter()
        .map(|&v| {
            if v != 0.0 {
                v.signum()
            } else {
                k += 1;
                weights[(k - 1) % weights.len()]
            }
        })
        .collect();
    (SymMatrix::from_spectral(&q, values), SymMatrix::from_spectral(&q, &y))
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_sdnop")
}

pub fn examples_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn sdnop(args: &[&str]) -> Output {
    Command::new(bin()).args(args).env("SDNOP_LOG", "error").output().expect("failed to run sdnop")
}
