mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use sdnop_core::psd_cone::{
    critical_contains, lineality_contains, proj_bsub_element, proj_dir_deriv, project_nsd, project_psd,
    tangent_contains,
};
use sdnop_core::spectral::{eig_sym, lambda_min, svec};
use sdnop_core::{BlockChoice, SymMatrix};

fn choices(beta: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<BlockChoice> {
    let mut w = DMatrix::from_fn(beta, beta, |_, _| rng.random_range(0.0..1.0));
    w = (&w + w.transpose()) * 0.5;
    vec![BlockChoice::Zero, BlockChoice::Identity, BlockChoice::Given(w)]
}

fn beta_size(m: &SymMatrix) -> usize {
    let e = eig_sym(m).unwrap();
    let t = e.kink_tol();
    e.values.iter().filter(|v| v.abs() <= t).count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn moreau_decomposition(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let m = sym(n, &mut r);
        let (p, _) = project_psd(&m).unwrap();
        let q = project_nsd(&m).unwrap();
        prop_assert!((&(&p + &q) - &m).max_abs() < 1e-12);
        prop_assert!(p.inner(&q).abs() < 1e-12);
        prop_assert!(lambda_min(p.as_matrix()) > -1e-12);
    }

    #[test]
    fn projection_is_nonexpansive(seed in any::<u64>(), n in 1usize..7) {
        let mut r = rng(seed);
        let (a, b) = (sym(n, &mut r), sym(n, &mut r));
        let (pa, _) = project_psd(&a).unwrap();
        let (pb, _) = project_psd(&b).unwrap();
        prop_assert!((&pa - &pb).norm() <= (&a - &b).norm() + 1e-12);
    }

    #[test]
    fn bsub_elements_are_projector_like(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let m = with_spectrum(&lattice_spectrum(n, &mut r), &mut r);
        for choice in choices(beta_size(&m), &mut r) {
            let v = proj_bsub_element(&m, &choice).unwrap();
            let mat = v.op.svec_matrix();
            prop_assert!((&mat - mat.transpose()).amax() < 1e-10);
            for _ in 0..3 {
                let d = sym(n, &mut r);
                let vd = v.apply(&d);
                prop_assert!(d.inner(&vd) >= -1e-10);
                prop_assert!(vd.inner(&(&d - &vd)) >= -1e-10);
            }
        }
    }

    #[test]
    fn dir_deriv_matches_one_sided_difference(seed in any::<u64>(), n in 2usize..8) {
        let mut r = rng(seed);
        let m = with_spectrum(&lattice_spectrum(n, &mut r), &mut r);
        let h = unit_sym(n, &mut r);
        let t = 1e-6;
        let (p0, _) = project_psd(&m).unwrap();
        let (pt, _) = project_psd(&(&m + &h.scale(t))).unwrap();
        let fd = (&pt - &p0).scale(1.0 / t);
        let dd = proj_dir_deriv(&m, &h).unwrap();
        prop_assert!((&fd - &dd).norm() <= 10.0 * t, "error {}", (&fd - &dd).norm());
    }

    #[test]
    fn dir_deriv_is_positively_homogeneous(seed in any::<u64>(), n in 2usize..6, s in 0.1f64..10.0) {
        let mut r = rng(seed);
        let m = with_spectrum(&lattice_spectrum(n, &mut r), &mut r);
        let h = sym(n, &mut r);
        let a = proj_dir_deriv(&m, &h.scale(s)).unwrap();
        let b = proj_dir_deriv(&m, &h).unwrap().scale(s);
        prop_assert!((&a - &b).max_abs() < 1e-10 * (1.0 + s));
    }
}

#[test]
fn smooth_point_elements_agree_with_derivative() {
    let mut r = rng(3);
    for _ in 0..50 {
        let m = with_spectrum(&[2.0, 0.5, -1.0, -1.5], &mut r);
        let h = sym(4, &mut r);
        let v = proj_bsub_element(&m, &BlockChoice::Zero).unwrap().apply(&h);
        assert!((&v - &proj_dir_deriv(&m, &h).unwrap()).max_abs() < 1e-12);
    }
}

#[test]
fn cones_at_a_rank_one_point() {
    let mut r = rng(4);
    let q = orthogonal(3, &mut r);
    let m = SymMatrix::from_spectral(&q, &[1.0, 0.0, -2.0]);
    let (mp, _) = project_psd(&m).unwrap();
    let e = |a: &[f64]| SymMatrix::from_spectral(&q, a);
    assert!(tangent_contains(&mp, &e(&[-5.0, 1.0, 2.0]), 1e-10).unwrap());
    assert!(!tangent_contains(&mp, &e(&[0.0, -1.0, 0.0]), 1e-10).unwrap());
    assert!(lineality_contains(&mp, &e(&[-5.0, 0.0, 0.0]), 1e-10).unwrap());
    assert!(!lineality_contains(&mp, &e(&[0.0, 1.0, 0.0]), 1e-10).unwrap());
    // Critical cone at M: T(Pi(M)) intersected with the orthogonal complement of Pi(M) - M.
    assert!(critical_contains(&m, &e(&[3.0, 1.0, 0.0]), 1e-10).unwrap());
    assert!(!critical_contains(&m, &e(&[3.0, 1.0, 1.0]), 1e-10).unwrap());
    assert!(!critical_contains(&m, &e(&[3.0, -1.0, 0.0]), 1e-10).unwrap());
}

#[test]
fn svec_matrix_is_identity_for_pd_input() {
    let mut r = rng(5);
    let m = with_spectrum(&[1.0, 2.0, 3.0], &mut r);
    let v = proj_bsub_element(&m, &BlockChoice::Zero).unwrap();
    let a = v.op.svec_matrix();
    assert!((a - DMatrix::identity(6, 6)).amax() < 1e-12);
    let h = sym(3, &mut r);
    assert!((svec(&v.apply(&h)) - svec(&h)).amax() < 1e-12);
}
