mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use sdnop_core::nuclear::{
    grad_env_bsub_element, grad_moreau_env, moreau_env, moreau_env_with, nuclear_norm, prox_bsub_element,
    prox_bsub_element_at, prox_dir_deriv, prox_nuclear, prox_nuclear_with, subdiff_contains, KinkChoices,
    MoreauConvention,
};
use sdnop_core::spectral::eig_sym;
use sdnop_core::{BlockChoice, SymMatrix};

fn kink_choices() -> Vec<KinkChoices> {
    let b = [BlockChoice::Zero, BlockChoice::Identity];
    let mut out = vec![];
    for u in &b {
        for l in &b {
            out.push(KinkChoices { upper: u.clone(), lower: l.clone() });
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn prox_satisfies_optimality(seed in any::<u64>(), n in 1usize..7, tau in 0.05f64..2.0) {
        let mut r = rng(seed);
        let z = sym(n, &mut r).scale(3.0);
        let p = prox_nuclear(&z, tau).unwrap();
        let y = (&z - &p).scale(1.0 / tau);
        prop_assert!(subdiff_contains(&p, &y, 1e-8).unwrap());
    }

    #[test]
    fn prox_is_firmly_nonexpansive(seed in any::<u64>(), n in 1usize..6, tau in 0.05f64..2.0) {
        let mut r = rng(seed);
        let (a, b) = (sym(n, &mut r).scale(2.0), sym(n, &mut r).scale(2.0));
        let d = &prox_nuclear(&a, tau).unwrap() - &prox_nuclear(&b, tau).unwrap();
        prop_assert!(d.norm_sq() <= d.inner(&(&a - &b)) + 1e-12);
    }

    #[test]
    fn fixed_point_identity(seed in any::<u64>(), n in 2usize..7, tau in 0.05f64..2.0, w in -1.0f64..1.0) {
        let mut r = rng(seed);
        let (x, y) = subgradient_pair(&lattice_spectrum(n, &mut r), &[w, -w * 0.5], &mut r);
        let p = prox_nuclear(&(&x + &y.scale(tau)), tau).unwrap();
        prop_assert!((&p - &x).max_abs() <= 1e-10);
    }

    #[test]
    fn envelope_and_prox_jacobians_sum_to_identity(seed in any::<u64>(), n in 2usize..6, tau in 0.1f64..2.0) {
        let mut r = rng(seed);
        let (x, y) = subgradient_pair(&lattice_spectrum(n, &mut r), &[1.0, -1.0, 0.3], &mut r);
        for ch in kink_choices() {
            let v = prox_bsub_element(&x, &y, tau, &ch).unwrap();
            let w = grad_env_bsub_element(&x, &y, tau, &ch).unwrap();
            let h = sym(n, &mut r);
            let sum = &w.apply(&h).scale(tau) + &v.apply(&h);
            prop_assert!((&sum - &h).max_abs() < 1e-12);
        }
    }

    #[test]
    fn prox_elements_are_projector_like(seed in any::<u64>(), n in 2usize..6, tau in 0.1f64..2.0) {
        let mut r = rng(seed);
        let (x, y) = subgradient_pair(&lattice_spectrum(n, &mut r), &[1.0, -1.0, 0.0], &mut r);
        for ch in kink_choices() {
            let v = prox_bsub_element(&x, &y, tau, &ch).unwrap();
            let m = v.op.svec_matrix();
            prop_assert!((&m - m.transpose()).amax() < 1e-10);
            let d = sym(n, &mut r);
            let vd = v.apply(&d);
            prop_assert!(d.inner(&vd) >= -1e-10);
            prop_assert!(vd.inner(&(&d - &vd)) >= -1e-10);
        }
    }
}

/// Smallest distance from an eigenvalue of `z` to the kinks `+-tau`.
fn kink_gap(z: &SymMatrix, tau: f64) -> f64 {
    let e = eig_sym(z).unwrap();
    e.values.iter().map(|v| (v.abs() - tau).abs()).fold(f64::INFINITY, f64::min)
}

#[test]
fn envelope_gradient_matches_central_differences() {
    let mut r = rng(11);
    let mut checked = 0;
    while checked < 200 {
        let n = r.random_range(2..6);
        let tau = r.random_range(0.1..1.5);
        let z = sym(n, &mut r).scale(3.0);
        if kink_gap(&z, tau) < 1e-2 {
            continue;
        }
        let h = unit_sym(n, &mut r);
        let eps = 1e-6;
        let fd = (moreau_env(&(&z + &h.scale(eps)), tau).unwrap() - moreau_env(&(&z - &h.scale(eps)), tau).unwrap())
            / (2.0 * eps);
        let g = grad_moreau_env(&z, tau).unwrap().inner(&h);
        assert!((fd - g).abs() <= 1e-6 * (1.0 + g.abs()), "fd {fd} vs {g}");
        // The Jacobian element is the derivative of the prox away from the kinks.
        let v = prox_bsub_element_at(&z, tau, &KinkChoices::default()).unwrap().apply(&h);
        let fd_p = (&prox_nuclear(&(&z + &h.scale(eps)), tau).unwrap() - &prox_nuclear(&(&z - &h.scale(eps)), tau).unwrap())
            .scale(0.5 / eps);
        assert!((&fd_p - &v).max_abs() < 1e-6);
        checked += 1;
    }
}

#[test]
fn envelope_value_by_definition() {
    let mut r = rng(12);
    for _ in 0..100 {
        let z = sym(4, &mut r).scale(2.0);
        let tau = r.random_range(0.1..2.0);
        let p = prox_nuclear(&z, tau).unwrap();
        let direct = nuclear_norm(&p).unwrap() + (&p - &z).norm_sq() / (2.0 * tau);
        assert!((moreau_env(&z, tau).unwrap() - direct).abs() < 1e-12);
        // No random perturbation of the prox does better.
        for _ in 0..5 {
            let q = &p + &sym(4, &mut r).scale(0.1);
            assert!(nuclear_norm(&q).unwrap() + (&q - &z).norm_sq() / (2.0 * tau) >= direct - 1e-12);
        }
    }
}

#[test]
fn literal_convention_is_half_parameter() {
    let mut r = rng(13);
    let z = sym(3, &mut r).scale(2.0);
    let a = prox_nuclear_with(&z, 0.8, MoreauConvention::Literal).unwrap();
    assert!((&a - &prox_nuclear(&z, 0.4).unwrap()).max_abs() < 1e-14);
    let v = moreau_env_with(&z, 0.8, MoreauConvention::Literal).unwrap();
    assert!((v - moreau_env(&z, 0.4).unwrap()).abs() < 1e-14);
}

#[test]
fn prox_dir_deriv_matches_one_sided_difference_at_kinks() {
    let mut r = rng(14);
    for _ in 0..100 {
        let tau = 0.5;
        // Eigenvalues exactly at +tau, -tau and 0.
        let z = with_spectrum(&[1.5, 0.5, 0.5, 0.0, -0.5], &mut r);
        let h = unit_sym(5, &mut r);
        let t = 1e-7;
        let fd = (&prox_nuclear(&(&z + &h.scale(t)), tau).unwrap() - &prox_nuclear(&z, tau).unwrap()).scale(1.0 / t);
        let dd = prox_dir_deriv(&z, tau, &h).unwrap();
        assert!((&fd - &dd).norm() < 1e-5);
    }
}

#[test]
fn kink_choices_pick_different_elements() {
    let tau = 1.0;
    let z = SymMatrix::from_diagonal(&[1.0, 3.0]);
    let h = SymMatrix::from_diagonal(&[1.0, 0.0]);
    let zero = prox_bsub_element_at(&z, tau, &KinkChoices::default()).unwrap().apply(&h);
    let one = prox_bsub_element_at(&z, tau, &KinkChoices::identity()).unwrap().apply(&h);
    assert_eq!(zero.get(0, 0), 0.0);
    assert_eq!(one.get(0, 0), 1.0);
    let given = KinkChoices { upper: BlockChoice::Given(DMatrix::from_element(1, 1, 0.25)), lower: BlockChoice::Zero };
    assert_eq!(prox_bsub_element_at(&z, tau, &given).unwrap().apply(&h).get(0, 0), 0.25);
}
