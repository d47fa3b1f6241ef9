mod common;

use common::*;
use rand::Rng;
use sdnop_core::nuclear::{
    critical_cone_theta_contains, critical_cone_theta_contains_trace_form, project_critical_cone_theta,
    psi_conjugate_critical, psi_conjugate_full, psi_conjugate_full_with, psi_conjugate_reduced,
    psi_conjugate_zero_block, theta_second_dir_deriv, OffDomain,
};
use sdnop_core::spectral::pinv_sym;
use sdnop_core::SymMatrix;

fn weight(r: &mut rand_chacha::ChaCha8Rng) -> f64 {
    match r.random_range(0..4) {
        0 => 1.0,
        1 => -1.0,
        _ => r.random_range(-0.9..0.9),
    }
}

fn random_case(r: &mut rand_chacha::ChaCha8Rng, n: usize) -> (SymMatrix, SymMatrix, SymMatrix) {
    let spec = lattice_spectrum(n, r);
    let weights: Vec<f64> = (0..n).map(|_| weight(r)).collect();
    let (x, y) = subgradient_pair(&spec, &weights, r);
    let h = project_critical_cone_theta(&x, &y, &sym(n, r).scale(2.0)).unwrap();
    (x, y, h)
}

#[test]
fn all_forms_agree_on_the_critical_cone() {
    let mut r = rng(31);
    for _ in 0..300 {
        let n = r.random_range(2..7);
        let (x, y, h) = random_case(&mut r, n);
        assert!(critical_cone_theta_contains(&x, &y, &h, 1e-9).unwrap());
        assert!(critical_cone_theta_contains_trace_form(&x, &y, &h, 1e-9).unwrap());
        let full = psi_conjugate_full(&x, &h, &y).unwrap();
        let crit = psi_conjugate_critical(&x, &h, &y).unwrap();
        let zb = psi_conjugate_zero_block(&x, &h, &y).unwrap();
        let red = psi_conjugate_reduced(&x, &h, &y).unwrap();
        let scale = 1.0 + full.abs();
        assert!((full - crit).abs() < 1e-8 * scale, "{full} {crit}");
        assert!((full - zb).abs() < 1e-8 * scale, "{full} {zb}");
        assert!((full - red).abs() < 1e-8 * scale, "{full} {red}");
    }
}

#[test]
fn off_domain_argument_is_reported() {
    let x = SymMatrix::from_diagonal(&[1.0, 0.0]);
    let y = SymMatrix::from_diagonal(&[1.0, 0.5]);
    // Couples the strict zero block with itself: outside the critical cone.
    let h = SymMatrix::from_diagonal(&[0.0, 1.0]);
    assert!(!critical_cone_theta_contains(&x, &y, &h, 1e-9).unwrap());
    assert!(psi_conjugate_full(&x, &h, &y).is_err());
    assert_eq!(psi_conjugate_full_with(&x, &h, &y, OffDomain::LiteralZero).unwrap(), 0.0);
}

/// `sup_W <Y, W> - theta''(X; H, W)` over random samples, compared with the
/// closed form. The supremum is attained at `W* = 2 H X^+ H`; a sample at
/// distance `d` from it loses at most `L d` with `L = ||Y|| + sqrt(n)`.
fn grid_check(x: &SymMatrix, y: &SymMatrix, h: &SymMatrix, r: &mut rand_chacha::ChaCha8Rng) {
    let n = x.dim();
    let psi = psi_conjugate_full(x, h, y).unwrap();
    let e = sdnop_core::spectral::eig_sym(x).unwrap();
    let xp = pinv_sym(x, e.sign_tol()).unwrap();
    let wstar = SymMatrix::symmetrize(h.as_matrix() * xp.as_matrix() * h.as_matrix() * 2.0);
    let lip = y.norm() + (n as f64).sqrt();
    let mut best = f64::NEG_INFINITY;
    let mut nearest = f64::INFINITY;
    for k in 0..10_000 {
        let radius = if k % 2 == 0 { 2.0 } else { 0.05 };
        let center = if k % 2 == 0 { SymMatrix::zeros(n) } else { wstar.clone() };
        let w = &center + &sym(n, r).scale(radius);
        let v = y.inner(&w) - theta_second_dir_deriv(x, h, &w).unwrap();
        best = best.max(v);
        nearest = nearest.min((&w - &wstar).norm());
    }
    assert!(best <= psi + 1e-9 * (1.0 + psi.abs()), "grid {best} above closed form {psi}");
    assert!(best >= psi - lip * nearest - 1e-9, "grid {best} too far below {psi} (resolution {})", lip * nearest);
    let at_star = y.inner(&wstar) - theta_second_dir_deriv(x, h, &wstar).unwrap();
    assert!((at_star - psi).abs() < 1e-9 * (1.0 + psi.abs()));
}

#[test]
fn conjugate_matches_sampled_supremum_2x2() {
    let mut r = rng(32);
    let cases = [
        (vec![1.0, 0.0], vec![0.5]),
        (vec![0.0, 0.0], vec![1.0, -0.3]),
        (vec![2.0, -1.0], vec![0.0]),
        (vec![-1.0, 0.0], vec![-1.0]),
    ];
    for (spec, w) in cases {
        let (x, y) = subgradient_pair(&spec, &w, &mut r);
        let h = project_critical_cone_theta(&x, &y, &sym(2, &mut r)).unwrap();
        grid_check(&x, &y, &h, &mut r);
    }
}

#[test]
fn conjugate_matches_sampled_supremum_3x3() {
    let mut r = rng(33);
    let cases = [
        (vec![1.5, 0.0, -1.0], vec![0.2]),
        (vec![1.0, 0.0, 0.0], vec![1.0, 0.4]),
        (vec![2.0, 2.0, -1.0], vec![0.0]),
        (vec![0.0, 0.0, -2.0], vec![-1.0, 0.6]),
    ];
    for (spec, w) in cases {
        let (x, y) = subgradient_pair(&spec, &w, &mut r);
        let h = project_critical_cone_theta(&x, &y, &sym(3, &mut r)).unwrap();
        grid_check(&x, &y, &h, &mut r);
    }
}
