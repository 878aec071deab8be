//! Ring laws of the skew operator algebra over exact rationals.

use std::collections::BTreeMap;

use proptest::prelude::*;

use dba::algebra::{DifferenceOperator, LatticeFunction, LatticeWindow, MultiIndex, PoleSet};
use dba::matrix::Mat;
use dba::scalar::{Rat, Scalar};
use dba::verify::probe_function;

const W: (i64, i64) = (-2, 2);

/// Tabulated 2x2 coefficient on a window wide enough for two compositions.
fn coefficient(vals: &[i64]) -> LatticeFunction<Rat> {
    let table_window = LatticeWindow::cube(2, -6, 6);
    let table: BTreeMap<Vec<i64>, Mat<Rat>> = table_window
        .points()
        .into_iter()
        .enumerate()
        .map(|(i, n)| {
            let v = |o: usize| Rat::from_i64(vals[(i * 4 + o) % vals.len()]);
            (n, Mat::from_rows(vec![vec![v(0), v(1)], vec![v(2), v(3)]]))
        })
        .collect();
    LatticeFunction::from_table(2, (2, 2), table_window, table)
}

fn op_strategy() -> impl Strategy<Value = DifferenceOperator<Rat>> {
    let term = ((-1i64..=1, -1i64..=1), prop::collection::vec(-3i64..=3, 7..13));
    prop::collection::vec(term, 1..=3).prop_map(|terms| {
        let mut d = DifferenceOperator::zero(2, 2, 2);
        for ((a, b), vals) in terms {
            d.add_term(MultiIndex::from([a, b]), coefficient(&vals)).unwrap();
        }
        d
    })
}

fn window() -> LatticeWindow {
    LatticeWindow::cube(2, W.0, W.1)
}

fn zero_on_window(d: &DifferenceOperator<Rat>) -> bool {
    let z = d.is_zero_on_window(&window(), 0.0).unwrap();
    z.zero && z.skipped.is_empty()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn composition_is_associative(a in op_strategy(), b in op_strategy(), c in op_strategy()) {
        let l = a.compose(&b).unwrap().compose(&c).unwrap();
        let r = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(zero_on_window(&l.sub(&r).unwrap()));
    }

    #[test]
    fn composition_distributes_over_addition(a in op_strategy(), b in op_strategy(), c in op_strategy()) {
        let l = a.compose(&b.add(&c).unwrap()).unwrap();
        let r = a.compose(&b).unwrap().add(&a.compose(&c).unwrap()).unwrap();
        prop_assert!(zero_on_window(&l.sub(&r).unwrap()));
    }

    #[test]
    fn application_respects_composition(a in op_strategy(), b in op_strategy(), seed in 0u64..1000) {
        let ab = a.compose(&b).unwrap();
        let psi = probe_function::<Rat>(seed, 0, 2);
        for n in window().points() {
            let lhs = ab.apply_at(&psi, &n).unwrap();
            let rhs = a.apply_at(&|m: &[i64]| b.apply_at(&psi, m), &n).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn identity_is_neutral_and_self_commutator_vanishes(a in op_strategy()) {
        let id = DifferenceOperator::<Rat>::identity(2, 2);
        prop_assert!(zero_on_window(&a.compose(&id).unwrap().sub(&a).unwrap()));
        prop_assert!(zero_on_window(&id.compose(&a).unwrap().sub(&a).unwrap()));
        prop_assert!(zero_on_window(&a.commutator(&a).unwrap()));
    }

    #[test]
    fn shift_past_multiplication(c0 in -5i64..5, c1 in -5i64..5, c2 in -5i64..5) {
        // f(n) = c0 + c1 n1 + c2 n1 n2, [T1, f] = (f(n + e1) - f(n)) T1
        let f = move |n: &[i64]| Rat::from_i64(c0 + c1 * n[0] + c2 * n[0] * n[1]);
        let t1 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 0));
        let mf = DifferenceOperator::monomial(LatticeFunction::scalar(2, PoleSet::Empty, move |n| Some(f(n))), MultiIndex::zero(2));
        let diff = LatticeFunction::scalar(2, PoleSet::Empty, move |n| Some(f(&[n[0] + 1, n[1]]) - f(n)));
        let expected = DifferenceOperator::monomial(diff, MultiIndex::unit(2, 0));
        prop_assert!(zero_on_window(&t1.commutator(&mf).unwrap().sub(&expected).unwrap()));
    }
}

#[test]
fn constant_shifts_commute_and_small_operators_are_nonzero() {
    let t1 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 0));
    let t2 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 1));
    assert!(zero_on_window(&t1.commutator(&t2).unwrap()));
    let small = DifferenceOperator::<dba::scalar::C64>::shift(MultiIndex::unit(2, 0)).scale(dba::scalar::C64::new(1e-3, 0.0));
    let z = small.is_zero_on_window(&window(), 1e-6).unwrap();
    assert!(!z.zero);
    assert!((z.max_residual - 1e-3).abs() < 1e-15);
}
