//! Family, builder and check wired together through the public API.

use dba::algebra::{DifferenceOperator, LatticeFunction, LatticeWindow, MultiIndex, PoleSet};
use dba::builders::{build_collocation, build_genus1_pair, build_schur_pair, CollocationConfig, SupportTemplate};
use dba::families::{make_genus1_basis, make_omega_basis, make_schur_basis, sample_spectral_points, AbelianDBAParams, BasisFamily, DuplicatedRow, OmegaParams, SpectralFunction, Which};
use dba::scalar::{Rat, Scalar, C64};
use dba::verify::{check_commutator, check_eigen, check_freeness, corrupt_coefficient};
use rand::SeedableRng;

#[test]
fn genus1_pair_satisfies_eigen_relations_and_detects_corruption() {
    let p = AbelianDBAParams::genus1_default();
    let (l1, l2, _) = build_genus1_pair(&p).unwrap();
    let fam = make_genus1_basis(p).unwrap();
    let pts = sample_spectral_points(&fam, 50, 3, 1e-3).unwrap();
    let w = LatticeWindow::cube(1, -4, 4);
    for (op, which) in [(&l1, Which::Lambda), (&l2, Which::Mu)] {
        let out = check_eigen("eigen", op, &fam, &fam.eigenvalue(which), &w, &pts, 1e-9).unwrap();
        assert!(out.checks[0].pass, "{:?}", out.checks[0]);
    }
    let bad = corrupt_coefficient(&l1, &MultiIndex::from([1]), C64::new(1e-3, 0.0));
    let out = check_eigen("eigen", &bad, &fam, &fam.eigenvalue(Which::Lambda), &w, &pts, 1e-9).unwrap();
    let r = out.checks[0].max_residual;
    assert!(!out.checks[0].pass && r > 1e-4 && r < 1e-2, "residual {r}");
    let c = check_commutator("c", &l1, &l2, &w, 3, 1e-6, 1).unwrap();
    assert!(c.checks.iter().all(|c| c.pass));
}

#[test]
fn collocation_of_the_unit_eigenvalue_is_the_identity() {
    let fam = make_genus1_basis(AbelianDBAParams::genus1_default()).unwrap();
    let w = LatticeWindow::cube(1, -2, 2);
    let one = SpectralFunction::constant(C64::new(1.0, 0.0));
    let t = vec![vec![SupportTemplate::simplex(1, 2)]];
    let c = build_collocation(&fam, &one, &t, &w.dilate(&MultiIndex::simplex(1, 2)), &CollocationConfig::default()).unwrap();
    for n in w.points() {
        for (k, f) in c.op.terms() {
            let v = f.eval(&n).unwrap().get(0, 0).clone();
            let want = if k.l1() == 0 { 1.0 } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-9, "n={n:?} k={k:?} v={v}");
        }
    }
}

#[test]
fn schur_collocation_is_exact_and_commutes() {
    let w = LatticeWindow::cube(2, 0, 3);
    let pair = build_schur_pair(&w, &CollocationConfig::default()).unwrap();
    let fam = make_schur_basis::<Rat>();
    let pts = sample_spectral_points(&fam, 3, 9, 0.0).unwrap();
    for (op, which) in [(&pair.colloc_lambda.op, Which::Lambda), (&pair.colloc_mu.op, Which::Mu)] {
        let out = check_eigen("eigen", op, &fam, &fam.eigenvalue(which), &w, &pts, 0.0).unwrap();
        assert_eq!(out.checks[0].exact_zero, Some(true));
    }
    let c = check_commutator("c", &pair.colloc_lambda.op, &pair.colloc_mu.op, &w, 2, 0.0, 4).unwrap();
    assert!(c.checks.iter().all(|c| c.exact_zero == Some(true)));
}

#[test]
fn omega_gluing_identities_hold_exactly() {
    let fam = make_omega_basis::<Rat>(OmegaParams::standard()).unwrap();
    let lam = [fam.eigenvalue(Which::Lambda), fam.eigenvalue(Which::Mu)];
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut tested = 0;
    while tested < 20 {
        let (t1, t2) = (Rat::random(&mut rng, 4.0), Rat::random(&mut rng, 4.0));
        let left = [Rat::one(), Rat::zero(), t1.clone(), t2.clone()];
        let right = [t1, t2, Rat::zero(), Rat::one()];
        let Ok(a) = lam[0].eval(&left) else { continue };
        assert_eq!(a, lam[0].eval(&right).unwrap());
        assert_eq!(lam[1].eval(&left).unwrap(), lam[1].eval(&right).unwrap());
        for j in 0..2 {
            for n in [[0, 0], [1, 1], [2, 3]] {
                assert_eq!(fam.eval(j, &n, &left).unwrap(), fam.eval(j, &n, &right).unwrap());
            }
        }
        tested += 1;
    }
}

#[test]
fn negative_controls_fail() {
    let w = LatticeWindow::cube(2, -2, 2);
    let t1 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 0));
    let n1 = DifferenceOperator::monomial(LatticeFunction::scalar(2, PoleSet::Empty, |n| Some(Rat::from_i64(n[0]))), MultiIndex::zero(2));
    let c = check_commutator("c", &t1, &n1, &w, 2, 0.0, 0).unwrap();
    assert!(c.checks.iter().all(|c| !c.pass));

    let fam = make_genus1_basis(AbelianDBAParams::genus1_default()).unwrap();
    let dup = DuplicatedRow { inner: &fam, copy_of: 0 };
    let f = check_freeness("f", &dup, 2, 1e-8, 1, 1e-3).unwrap();
    assert!(f.checks.iter().all(|c| !c.pass && c.max_residual < 1e-12));
    let f = check_freeness("f", &fam, 2, 1e-8, 1, 1e-3).unwrap();
    assert!(f.checks.iter().all(|c| c.pass));
}

#[test]
fn sampling_is_deterministic_and_respects_the_floor() {
    let fam = make_genus1_basis(AbelianDBAParams::genus1_default()).unwrap();
    let a = sample_spectral_points(&fam, 50, 11, 1e-3).unwrap();
    assert_eq!(a, sample_spectral_points(&fam, 50, 11, 1e-3).unwrap());
    assert_eq!(a.len(), 50);
    assert!(a.iter().all(|p| fam.admissible(p, 1e-3)));
}
