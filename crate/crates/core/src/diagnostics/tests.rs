use super::*;
use crate::nuclear::KinkChoices;
use crate::problem::{
    adjoint_partials, newton_matrix_element, KktPoint, NewtonChoices, QuadraticForm, QuadraticMatrixMap,
    QuadraticProblem,
};
use crate::spectral::{svec, BlockChoice};
use alloc::vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rand_sym(k: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    SymMatrix::symmetrize(DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0)))
}

/// Linear `F`, `g`, affine `h`, quadratic `f`, KKT at `x = 0` by choice of `grad f(0)`.
fn kkt_instance(
    n: usize,
    f0: SymMatrix,
    y: SymMatrix,
    g0: SymMatrix,
    gamma: SymMatrix,
    jh: DMatrix<f64>,
    mu: DVector<f64>,
    hess: DMatrix<f64>,
    seed: u64,
) -> (QuadraticProblem, MultiplierTriple) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fl: Vec<SymMatrix> = (0..n).map(|_| rand_sym(f0.dim(), &mut rng)).collect();
    let gl: Vec<SymMatrix> = (0..n).map(|_| rand_sym(g0.dim(), &mut rng)).collect();
    let grad = -adjoint_partials(&fl, &y) - jh.transpose() * &mu + adjoint_partials(&gl, &gamma);
    let f = QuadraticForm::new(0.0, grad, hess).unwrap();
    let big_f = QuadraticMatrixMap::new(f0, fl, vec![]).unwrap();
    let g = QuadraticMatrixMap::new(g0, gl, vec![]).unwrap();
    let h = (0..jh.nrows()).map(|i| QuadraticForm::affine(0.0, jh.row(i).transpose())).collect();
    (QuadraticProblem::new(f, big_f, h, g).unwrap(), MultiplierTriple { y, mu, gamma })
}

/// `q = 3`: `F(0) = diag(2, 0, -1)`, `w = 0.5` on the zero block. `p = 3`:
/// `Gamma = diag(1, 0, 0)`, `g(0) = diag(0, 0, 1)`. `m = 1`.
fn standard(n: usize, seed: u64) -> (QuadraticProblem, MultiplierTriple) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    let jh = DMatrix::from_fn(1, n, |_, _| rng.random_range(-1.0..1.0));
    kkt_instance(
        n,
        SymMatrix::from_diagonal(&[2.0, 0.0, -1.0]),
        SymMatrix::from_diagonal(&[1.0, 0.5, -1.0]),
        SymMatrix::from_diagonal(&[0.0, 0.0, 1.0]),
        SymMatrix::from_diagonal(&[1.0, 0.0, 0.0]),
        jh,
        DVector::from_vec(vec![0.3]),
        DMatrix::identity(n, n) * 2.0,
        seed,
    )
}

fn structure(p: &QuadraticProblem, y: &MultiplierTriple) -> ReferenceStructure {
    ReferenceStructure::new(p, &DVector::zeros(p.dims().n), y, 1e-12).unwrap()
}

#[test]
fn constant_maps_give_zero_aqp() {
    let n = 4;
    let (mut p, y) = standard(n, 1);
    p.big_f = QuadraticMatrixMap::zero(n, 3);
    p.big_f.a0 = SymMatrix::from_diagonal(&[2.0, 0.0, -1.0]);
    p.g = QuadraticMatrixMap::zero(n, 3);
    p.g.a0 = SymMatrix::from_diagonal(&[0.0, 0.0, 1.0]);
    p.h = vec![QuadraticForm::zero(n)];
    let s = ReferenceStructure::new(&p, &DVector::zeros(n), &y, 1e3).unwrap();
    let a = AqpMatrix::from_structure(&s);
    assert_eq!(a.matrix.shape(), (5, n));
    assert_eq!(a.matrix.amax(), 0.0);
}

#[test]
fn row_count_matches_formula() {
    let (p, y) = standard(7, 2);
    let s = structure(&p, &y);
    let a = AqpMatrix::from_structure(&s);
    let (m, b, ab) = (1, 1, 2);
    assert_eq!(a.rows.n1(), m + b * (b + 1) / 2);
    assert_eq!(a.rows.n2(), m + b * (b + 1) / 2 + ab * (ab + 1) / 2);
    assert_eq!(a.matrix.nrows(), a.rows.n2());
    let direct = build_aqp(&p, &s.x, &s.nuclear, &s.psd_eig, &s.psd).unwrap();
    assert_eq!(direct, a);
}

#[test]
fn alpha_rows_reproduce_svec_of_dg() {
    // p = 2, g(x) = x_0 E_00 + x_1 E_11 + x_2 (E_01 + E_10), Gamma = I so alpha = {0, 1}.
    let n = 3;
    let dg = vec![
        SymMatrix::from_diagonal(&[1.0, 0.0]),
        SymMatrix::from_diagonal(&[0.0, 1.0]),
        SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap(),
    ];
    let grad = adjoint_partials(&dg, &SymMatrix::identity(2));
    let p = QuadraticProblem::new(
        QuadraticForm::new(0.0, grad, DMatrix::identity(n, n)).unwrap(),
        QuadraticMatrixMap::zero(n, 0),
        vec![],
        QuadraticMatrixMap::new(SymMatrix::zeros(2), dg.clone(), vec![]).unwrap(),
    )
    .unwrap();
    let y = MultiplierTriple { y: SymMatrix::zeros(0), mu: DVector::zeros(0), gamma: SymMatrix::identity(2) };
    let s = structure(&p, &y);
    assert_eq!(s.psd.alpha.len(), 2);
    let a = AqpMatrix::from_structure(&s);
    let pb = &s.psd_eig.basis;
    for (l, d) in dg.iter().enumerate() {
        let expect = -svec(&d.congruence(pb));
        assert!((a.matrix.column(l) - expect).amax() < 1e-14);
    }
    assert!(nondegeneracy_check(&s, DEFAULT_RANK_TOL).holds);
}

#[test]
fn nondegeneracy_on_standard_instance() {
    let (p, y) = standard(6, 3);
    let r = nondegeneracy_check(&structure(&p, &y), DEFAULT_RANK_TOL);
    assert!(r.holds);
    assert!(r.sigma_min.unwrap() > 1e-6);
    assert_eq!(r.rows, 5);
}

#[test]
fn duplicated_equality_is_degenerate() {
    let n = 6;
    let (mut p, mut y) = standard(n, 4);
    p.h.push(p.h[0].clone());
    y.mu = DVector::from_vec(vec![0.15, 0.15]);
    let r = nondegeneracy_check(&structure(&p, &y), DEFAULT_RANK_TOL);
    assert!(!r.holds);
}

#[test]
fn empty_index_sets_hold_vacuously() {
    let n = 3;
    let p = QuadraticProblem::new(
        QuadraticForm::new(0.0, DVector::zeros(n), DMatrix::identity(n, n)).unwrap(),
        QuadraticMatrixMap::zero(n, 0),
        vec![],
        QuadraticMatrixMap::zero(n, 0),
    )
    .unwrap();
    let y = MultiplierTriple::zeros(p.dims());
    let s = structure(&p, &y);
    let r = nondegeneracy_check(&s, DEFAULT_RANK_TOL);
    assert!(r.holds && r.sigma_min.is_none() && r.rows == 0);
    assert_eq!(app_cone_basis(&s), DMatrix::identity(n, n));
}

#[test]
fn too_many_rows_fail() {
    let (p, y) = standard(4, 5);
    let r = nondegeneracy_check(&structure(&p, &y), DEFAULT_RANK_TOL);
    assert_eq!(r.rows, 5);
    assert!(!r.holds);
    assert_eq!(r.sigma_min, Some(0.0));
}

#[test]
fn full_rank_jacobian_leaves_empty_app() {
    let n = 3;
    let jh = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 3.0]);
    let p = QuadraticProblem::new(
        QuadraticForm::new(0.0, DVector::zeros(n), DMatrix::identity(n, n)).unwrap(),
        QuadraticMatrixMap::zero(n, 0),
        (0..3).map(|i| QuadraticForm::affine(0.0, jh.row(i).transpose())).collect(),
        QuadraticMatrixMap::zero(n, 0),
    )
    .unwrap();
    let s = structure(&p, &MultiplierTriple::zeros(p.dims()));
    assert_eq!(app_cone_basis(&s).ncols(), 0);
    let r = strong_sosc_check(&s, 1e-8).unwrap();
    assert!(r.holds && r.min_value == f64::INFINITY);
    assert!(second_order_necessary_check(&s, 10, 0, 1e-10).unwrap().holds);
}

#[test]
fn app_basis_satisfies_block_conditions() {
    let (p, y) = standard(8, 6);
    let s = structure(&p, &y);
    let basis = app_cone_basis(&s);
    assert!(basis.ncols() > 0);
    assert!((basis.transpose() * &basis - DMatrix::identity(basis.ncols(), basis.ncols())).amax() < 1e-12);
    let sp = &s.nuclear;
    for d in basis.column_iter() {
        let d = d.into_owned();
        assert!((&s.jh * &d).amax() < 1e-9);
        let fd = crate::problem::apply_partials(&s.df, &d, 3).congruence(&sp.basis).into_matrix();
        for &i in &sp.b_strict {
            for &j in &sp.b {
                assert!(fd[(i, j)].abs() < 1e-9);
            }
        }
        let gd = crate::problem::apply_partials(&s.dg, &d, 3).congruence(&s.psd_eig.basis).into_matrix();
        for &i in &s.psd.alpha {
            for &j in s.psd.alpha.iter().chain(s.psd.beta.iter()) {
                assert!(gd[(i, j)].abs() < 1e-9);
            }
        }
    }
}

#[test]
fn sigma_term_worked_case() {
    // g(x) = diag(0, 1) + x (E_01 + E_10), Gamma = diag(1, 0), d = 1.
    let p = QuadraticProblem::new(
        QuadraticForm::zero(1),
        QuadraticMatrixMap::zero(1, 0),
        vec![],
        QuadraticMatrixMap::new(
            SymMatrix::from_diagonal(&[0.0, 1.0]),
            vec![SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()],
            vec![],
        )
        .unwrap(),
    )
    .unwrap();
    let x = DVector::zeros(1);
    let d = DVector::from_vec(vec![1.0]);
    let gamma = SymMatrix::from_diagonal(&[1.0, 0.0]);
    assert!((sigma_term_psd(&p, &x, &gamma, &d).unwrap() - 2.0).abs() < 1e-14);
    assert_eq!(sigma_term_psd(&p, &x, &SymMatrix::zeros(2), &d).unwrap(), 0.0);
}

fn equality_only(sign: f64) -> (QuadraticProblem, MultiplierTriple) {
    let n = 4;
    let p = QuadraticProblem::new(
        QuadraticForm::new(0.0, DVector::zeros(n), DMatrix::identity(n, n) * sign).unwrap(),
        QuadraticMatrixMap::zero(n, 0),
        vec![QuadraticForm::affine(0.0, DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]))],
        QuadraticMatrixMap::zero(n, 0),
    )
    .unwrap();
    let y = MultiplierTriple::zeros(p.dims());
    (p, y)
}

#[test]
fn sosc_identity_on_app() {
    let (p, y) = equality_only(1.0);
    let r = strong_sosc_check(&structure(&p, &y), 1e-8).unwrap();
    assert!(r.holds);
    assert_eq!(r.app_dim, 3);
    assert!((r.min_value - 1.0).abs() < 1e-12);
    let (p, y) = equality_only(-1.0);
    let s = structure(&p, &y);
    let r = strong_sosc_check(&s, 1e-8).unwrap();
    assert!(!r.holds);
    assert!((r.min_value + 1.0).abs() < 1e-12);
    let nec = second_order_necessary_check(&s, 20, 1, 1e-10).unwrap();
    assert!(!nec.holds && nec.tested > 0);
}

#[test]
fn reduced_form_is_symmetric_and_matches_full_matrix() {
    let (p, y) = standard(8, 7);
    let s = structure(&p, &y);
    let r = strong_sosc_check(&s, 0.0).unwrap();
    assert!((&r.reduced - r.reduced.transpose()).amax() < 1e-10);
    let basis = app_cone_basis(&s);
    let full = second_order_matrix(&s).unwrap();
    assert!((basis.transpose() * full * &basis - &r.reduced).amax() < 1e-9);
}

#[test]
fn necessary_check_passes_at_minimiser() {
    let (p, y) = standard(8, 8);
    let s = structure(&p, &y);
    let full = second_order_matrix(&s).unwrap();
    // Shift the Hessian of f so that q is the identity.
    let mut p2 = p.clone();
    p2.f.h = &p.f.h - &full + DMatrix::identity(8, 8);
    let s2 = structure(&p2, &y);
    let r = strong_sosc_check(&s2, 1e-8).unwrap();
    assert!((r.min_value - 1.0).abs() < 1e-9);
    let nec = second_order_necessary_check(&s2, 200, 3, 1e-10).unwrap();
    assert!(nec.holds && nec.tested >= 200);
}

#[test]
fn unique_multiplier_recovery_under_nondegeneracy() {
    // Solve grad f + DF^* Y + Jh^T mu - Dg^* Gamma = 0 for Y = Q diag(I, Y_b, -I) Q^T
    // and Gamma supported on the alpha-beta block; the unknowns are exactly n2.
    let (p, y) = standard(6, 9);
    let s = structure(&p, &y);
    assert!(nondegeneracy_check(&s, DEFAULT_RANK_TOL).holds);
    let n = 6;
    let q = &s.nuclear.basis;
    let pb = &s.psd_eig.basis;
    let qa = q.column(0).into_owned();
    let qb = q.column(1).into_owned();
    let qc = q.column(2).into_owned();
    let fixed = SymMatrix::symmetrize(&qa * qa.transpose() - &qc * qc.transpose());
    let rhs = -(p.f.grad(&s.x) + adjoint_partials(&s.df, &fixed));
    let yb = SymMatrix::symmetrize(&qb * qb.transpose());
    let ab = [0usize, 1usize];
    let mut unknowns: Vec<SymMatrix> = vec![];
    for (k, &i) in ab.iter().enumerate() {
        for &j in &ab[..=k] {
            let (u, v) = (pb.column(i).into_owned(), pb.column(j).into_owned());
            unknowns.push(SymMatrix::symmetrize(&u * v.transpose() + &v * u.transpose()));
        }
    }
    let mut sys = DMatrix::zeros(n, 2 + unknowns.len());
    sys.set_column(0, &s.jh.row(0).transpose());
    sys.set_column(1, &adjoint_partials(&s.df, &yb));
    for (k, e) in unknowns.iter().enumerate() {
        sys.set_column(2 + k, &-adjoint_partials(&s.dg, e));
    }
    let sol = sys.clone().svd(true, true).solve(&rhs, 1e-14).unwrap();
    assert!((&sys * &sol - &rhs).amax() < 1e-10);
    assert!((sol[0] - 0.3).abs() < 1e-8);
    assert!((sol[1] - 0.5).abs() < 1e-8);
    let mut gamma = DMatrix::zeros(3, 3);
    for (k, e) in unknowns.iter().enumerate() {
        gamma += e.as_matrix() * sol[2 + k];
    }
    assert!((gamma - y.gamma.as_matrix()).amax() < 1e-8);
    let rank = sys.svd(false, false).singular_values.iter().filter(|v| **v > 1e-10).count();
    assert_eq!(rank, 2 + unknowns.len());
}

#[test]
fn newton_matrix_matches_block_expansion() {
    let (p, y) = standard(6, 10);
    let s = structure(&p, &y);
    let x = DVector::zeros(6);
    let opts = [BlockChoice::Zero, BlockChoice::Identity];
    for c in [0.5, 10.0, 1e3] {
        for u in &opts {
            for ps in &opts {
                let ch = NewtonChoices { prox: KinkChoices { upper: u.clone(), lower: u.clone() }, psd: ps.clone() };
                let direct = newton_matrix_element(&p, &x, &y, c, &ch).unwrap();
                let blocks = b_form(&s, c, c, &ch).unwrap();
                assert!((&direct - &blocks).amax() < 1e-9 * (1.0 + direct.amax()), "c = {c}");
            }
        }
    }
}

#[test]
fn newton_matrix_matches_expansion_with_kinks() {
    // F(0) = diag(1, 0, 0, -2) with w = (1, -1) on the zero block: b_U and b_L both present.
    let n = 9;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let o = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0)).qr().q();
    let f0 = SymMatrix::from_spectral(&o, &[1.0, 0.0, 0.0, -2.0]);
    let y = SymMatrix::from_spectral(&o, &[1.0, 1.0, -1.0, -1.0]);
    let (p, mult) = kkt_instance(
        n,
        f0,
        y,
        SymMatrix::from_diagonal(&[0.0, 2.0]),
        SymMatrix::from_diagonal(&[0.0, 0.0]),
        DMatrix::zeros(0, n),
        DVector::zeros(0),
        DMatrix::identity(n, n),
        12,
    );
    let s = structure(&p, &mult);
    assert_eq!((s.nuclear.b_upper.len(), s.nuclear.b_lower.len()), (1, 1));
    let x = DVector::zeros(n);
    for u in [BlockChoice::Zero, BlockChoice::Identity] {
        for l in [BlockChoice::Zero, BlockChoice::Identity] {
            let ch = NewtonChoices { prox: KinkChoices { upper: u.clone(), lower: l.clone() }, psd: BlockChoice::Identity };
            let direct = newton_matrix_element(&p, &x, &mult, 7.0, &ch).unwrap();
            let blocks = b_form(&s, 7.0, 7.0, &ch).unwrap();
            assert!((&direct - &blocks).amax() < 1e-9 * (1.0 + direct.amax()));
        }
    }
    let given = NewtonChoices { psd: BlockChoice::Given(DMatrix::zeros(1, 1)), ..Default::default() };
    assert!(b_form(&s, 1.0, 1.0, &given).is_err());
}

#[test]
fn nu_bar_one_example() {
    let (p, y) = standard(6, 13);
    let s = structure(&p, &y);
    let k = rate_constants(&s, &RateConstantsConfig::default()).unwrap();
    let (lo, hi) = k.nu.a_bs.unwrap();
    assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.25).abs() < 1e-12);
    assert!(k.nu.a_bl.is_none() && k.nu.c_bu.is_none());
    assert!((k.nu.a_c.unwrap().1 - 2.0 / 3.0).abs() < 1e-12);
    assert!((k.nu.c_bs.unwrap().1 - 1.5).abs() < 1e-12);
    // Gamma - g = diag(1, 0, -1).
    assert!((k.nu.alpha_gamma.unwrap().1 - 1.0).abs() < 1e-12);
    assert_eq!(k.nu_upper0, Some(1.5));
    assert_eq!(k.nu_lower0, Some(0.25));
}

#[test]
fn constants_are_positive_and_ordered() {
    let (p, y) = standard(6, 14);
    let s = structure(&p, &y);
    let k = rate_constants(&s, &RateConstantsConfig::default()).unwrap();
    let e = k.eta.unwrap();
    assert!(e.eta_lower > 0.0 && e.eta_upper >= e.eta_lower);
    assert!(k.c_bar.unwrap() >= (2.0 + core::f64::consts::SQRT_2) * e.c0);
    assert!(k.rho0.unwrap() > 0.0);
    assert_eq!(k.rho1.unwrap(), 2.0 * k.rho0.unwrap());
    assert!(k.sigma_lower <= 1.0 && k.sigma_upper >= 1.0);
    assert!(!k.spectrum_multiplicity);
}

#[test]
fn rotations_inside_repeated_groups_keep_sigma() {
    // Repeated positive eigenvalue of F(0) and of Gamma - g.
    let n = 8;
    let (p, y) = kkt_instance(
        n,
        SymMatrix::from_diagonal(&[2.0, 2.0, 0.0, -1.0]),
        SymMatrix::from_diagonal(&[1.0, 1.0, 0.2, -1.0]),
        SymMatrix::from_diagonal(&[0.0, 0.0, 3.0]),
        SymMatrix::from_diagonal(&[1.0, 1.0, 0.0]),
        DMatrix::zeros(0, n),
        DVector::zeros(0),
        DMatrix::identity(n, n),
        15,
    );
    let s = structure(&p, &y);
    let fixed = rate_constants(&s, &RateConstantsConfig { rotation_samples: 0, ..Default::default() }).unwrap();
    let sampled = rate_constants(&s, &RateConstantsConfig::default()).unwrap();
    assert!(sampled.spectrum_multiplicity);
    assert!((fixed.sigma_lower - sampled.sigma_lower).abs() < 1e-9 * fixed.sigma_lower);
    assert!((fixed.sigma_upper - sampled.sigma_upper).abs() < 1e-9 * fixed.sigma_upper);
}

#[test]
fn kappa_plug_in() {
    assert!((kappa0(1.0, 1.0, 1.0, 1.0) - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-15);
    assert_eq!(c_bar(1.0, 1.0, 1.0, 1.0, 1.0), 2.0 + core::f64::consts::SQRT_2);
}

#[test]
fn rank_deficient_aqp_is_a_degenerate_spectrum() {
    let (p, y) = standard(4, 16);
    let s = structure(&p, &y);
    assert!(matches!(rate_constants(&s, &RateConstantsConfig::default()), Err(Error::DegenerateSpectrum(_))));
}

#[test]
fn not_a_kkt_point_is_rejected() {
    let (p, mut y) = standard(6, 17);
    y.mu[0] += 1.0;
    assert!(matches!(
        ReferenceStructure::new(&p, &DVector::zeros(6), &y, 1e-8),
        Err(Error::NotAKktPoint { .. })
    ));
}

#[test]
fn perturbation_is_unit_and_deterministic() {
    let d = crate::problem::Dims { n: 3, q: 3, m: 2, p: 2 };
    let a = unit_perturbation(d, 5);
    assert!((a.norm() - 1.0).abs() < 1e-15);
    assert_eq!(a, unit_perturbation(d, 5));
    assert_ne!(a, unit_perturbation(d, 6));
}

fn point(c: f64, r: Option<f64>, converged: bool) -> RatePoint {
    RatePoint { c, iterations: 3, ratios: r.into_iter().collect(), median_ratio: r, converged, predicted_ratio: None }
}

#[test]
fn fit_recovers_exact_power_law() {
    let pts: Vec<RatePoint> = [10.0, 100.0, 1000.0].iter().map(|&c| point(c, Some(3.0 / c), true)).collect();
    let fit = fit_rate(pts, true);
    assert!((fit.slope.unwrap() + 1.0).abs() < 1e-12);
    assert!((fit.r2.unwrap() - 1.0).abs() < 1e-12);
    assert!((fit.rho2_proxy.unwrap() - 3.0).abs() < 1e-12);
    assert!((fit.points[1].predicted_ratio.unwrap() - 0.03).abs() < 1e-14);
    assert!(fit.flags.is_empty());
}

#[test]
fn fit_single_point_has_no_slope() {
    let fit = fit_rate(vec![point(10.0, Some(0.1), true), point(100.0, None, false)], false);
    assert!(fit.slope.is_none() && fit.intercept.is_none());
    assert!(fit.flags.contains(&RateFlag::AssumptionsUnverified));
    assert!(fit.flags.contains(&RateFlag::Nonconvergent));
    assert!(fit.flags.contains(&RateFlag::InsufficientPoints));
}

#[test]
fn sweep_on_standard_instance_contracts_like_one_over_c() {
    let (mut p, y) = standard(8, 18);
    let s = structure(&p, &y);
    let full = second_order_matrix(&s).unwrap();
    p.f.h = &p.f.h - &full + DMatrix::identity(8, 8);
    let reference = KktPoint::evaluate(&p, DVector::zeros(8), y).unwrap();
    let fit = rate_sweep(&p, &reference, &RateSweepConfig::default()).unwrap();
    assert!(fit.points.iter().all(|pt| pt.converged), "{fit:?}");
    let slope = fit.slope.unwrap();
    assert!((-1.25..=-0.8).contains(&slope), "slope {slope}, {fit:?}");
    assert!(!fit.flags.contains(&RateFlag::AssumptionsUnverified));
}

#[test]
fn sweep_rejects_bad_grid() {
    let (p, y) = standard(6, 19);
    let reference = KktPoint::evaluate(&p, DVector::zeros(6), y).unwrap();
    let cfg = RateSweepConfig { grid: vec![10.0, 10.0], ..Default::default() };
    assert!(rate_sweep(&p, &reference, &cfg).is_err());
}
