//! Rational (Schur) limit: the displayed coefficient formulas of L(lambda)
//! and L(mu), transcribed literally, next to the exact collocation operators
//! that serve as their reference.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use super::collocation::{build_collocation, Collocated};
use super::{graded_templates, CollocationConfig};
use crate::algebra::{DifferenceOperator, LatticeFunction, LatticeWindow, MultiIndex, PoleSet};
use crate::error::{Error, Result};
use crate::families::{make_schur_basis, Which};
use crate::matrix::Mat;
use crate::scalar::{Rat, Scalar};

/// Position of a displayed coefficient inside the 2 x 2 operator.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PrintedSlot {
    pub name: &'static str,
    pub row: usize,
    pub col: usize,
    pub shift: [i64; 2],
}

const fn slot(name: &'static str, row: usize, col: usize, shift: [i64; 2]) -> PrintedSlot {
    PrintedSlot { name, row, col, shift }
}

pub const LAMBDA_SLOTS: [PrintedSlot; 13] = [
    slot("v20", 0, 0, [2, 0]),
    slot("v11", 0, 0, [1, 1]),
    slot("v1", 0, 0, [1, 0]),
    slot("u1", 0, 1, [1, 0]),
    slot("q30", 1, 0, [3, 0]),
    slot("q21", 1, 0, [2, 1]),
    slot("q12", 1, 0, [1, 2]),
    slot("q20", 1, 0, [2, 0]),
    slot("q11", 1, 0, [1, 1]),
    slot("q1", 1, 0, [1, 0]),
    slot("p20", 1, 1, [2, 0]),
    slot("p11", 1, 1, [1, 1]),
    slot("p1", 1, 1, [1, 0]),
];

pub const MU_SLOTS: [PrintedSlot; 13] = [
    slot("f11", 0, 0, [1, 1]),
    slot("f02", 0, 0, [0, 2]),
    slot("f2", 0, 0, [0, 1]),
    slot("g2", 0, 1, [0, 1]),
    slot("r21", 1, 0, [2, 1]),
    slot("r12", 1, 0, [1, 2]),
    slot("r03", 1, 0, [0, 3]),
    slot("r11", 1, 0, [1, 1]),
    slot("r02", 1, 0, [0, 2]),
    slot("r2", 1, 0, [0, 1]),
    slot("j11", 1, 1, [1, 1]),
    slot("j02", 1, 1, [0, 2]),
    slot("j2", 1, 1, [0, 1]),
];

fn q(v: i64) -> Rat {
    Rat::from_i64(v)
}

fn dv(a: Rat, b: Rat) -> Option<Rat> {
    (!Scalar::is_zero(&b)).then(|| a / b)
}

struct LambdaPrinted {
    u1: Rat,
    v20: Rat,
    v11: Rat,
    v1: Rat,
    p1: Rat,
    q12: Rat,
    p11: Rat,
    p20: Rat,
    q30: Rat,
    q21: Rat,
}

fn lambda_printed(n: &[i64]) -> Option<LambdaPrinted> {
    let (a, b) = (q(n[0]), q(n[1]));
    let a2 = a.clone() * a.clone();
    let a3 = a2.clone() * a.clone();
    let a4 = a3.clone() * a.clone();
    let a5 = a4.clone() * a.clone();
    let a6 = a5.clone() * a.clone();
    let b2 = b.clone() * b.clone();

    let u1 = dv(
        -q(2) * a2.clone() * (a.clone() + q(1)) * (a.clone() + q(2)) * (a.clone() * (a.clone() + q(3)) + q(5))
            + q(6) * b.clone() * (q(2) * a.clone() * (a.clone() + q(1)) * (a.clone() + q(2)) - q(3))
            - q(18) * b2.clone(),
        (a.clone() + q(2)) * (q(6) * b.clone() + a.clone() * (a.clone() * (a.clone() + q(6)) + q(13)) + q(14)),
    )?;
    let v20 = -u1.clone() - dv(a.clone(), a.clone() + q(2))?;
    let v11 = dv(
        (a.clone() + q(2)) * (q(2) * a.clone() * (a.clone() + q(1)) - u1.clone() * (a.clone() + q(3))) - q(6) * b.clone(),
        q(3) * (a.clone() + q(2)) * (a.clone() + q(1)),
    )?;
    let v1 = q(2) - v11.clone() - dv(q(2), a.clone() + q(2))?;

    let d = a3.clone() + q(6) * a2.clone() + q(13) * a.clone() + q(6) * b.clone() + q(14);
    let pd = q(3) * (a.clone() + q(2)) * d;
    let p1 = dv(
        q(2) * (a6.clone() + q(9) * a5.clone() + q(37) * a4.clone() + q(48) + a2.clone() * (q(106) - q(27) * b.clone())),
        pd.clone(),
    )? + dv(
        q(2) * (a.clone() * (q(88) - q(21) * b.clone()) + a3.clone() * (q(83) - q(6) * b.clone()) + q(21) * b.clone() + q(9) * b2.clone()),
        pd,
    )?;
    // denominator as displayed
    let qd = q(9) * (a.clone() + q(2)) * (a3.clone() + q(6) * a2.clone() + q(13) * a.clone() + q(20));
    let q12 = dv(
        q(2) * (q(46) + q(61) * a4.clone() + q(12) * a5.clone() + a6.clone() + a.clone() * (q(161) - q(66) * b.clone())),
        qd.clone(),
    )? + dv(
        q(2) * (a3.clone() * (q(163) - q(6) * b.clone()) - q(21) * b.clone() + q(9) * b2.clone()
            - q(4) * a2.clone() * (q(9) * b.clone() - q(58))),
        qd,
    )?;
    let p11 = dv(
        q(2) * (q(5) + a.clone() * (q(11) + a.clone() * (a.clone() + q(6))) - q(3) * b.clone())
            - q(9) * (a.clone() + q(1)) * (a.clone() + q(2)) * q12.clone(),
        q(3) * (a.clone() + q(2)) * (a.clone() + q(3)),
    )?;
    let e = (a.clone() + q(3)) * (a3.clone() + q(9) * a2.clone() + q(28) * a.clone() + q(6) * b.clone() + q(34));
    let p20 = dv(
        -q(2) * a6 - q(24) * a5 - q(123) * a4 + q(12) * a3 * (b.clone() - q(28)),
        e.clone(),
    )? + dv(
        a2 * (q(72) * b.clone() - q(501)) + q(6) * a.clone() * (q(21) * b.clone() - q(64))
            - q(18) * (b2 - q(2) * b.clone() + q(7)),
        e,
    )?;
    let q30 = dv(q(2), a.clone() + q(3))? - p20.clone() - q(1);
    let a3p = (a.clone() + q(3)) * (a.clone() + q(3)) * (a.clone() + q(3));
    let q21 = dv(
        q(9) * (a.clone() * (a.clone() * (a.clone() + q(3)) + q(3)) - q(3) * b.clone() - q(5)) * q12.clone()
            + (a3p - q(3) * b.clone()) * q30.clone(),
        q(3) * (q(5) + a.clone() * (a.clone() * (a.clone() + q(6)) + q(12)) - q(3) * b),
    )?;
    Some(LambdaPrinted { u1, v20, v11, v1, p1, q12, p11, p20, q30, q21 })
}

/// The displayed q1 after substituting p11 for the undefined p12.
pub fn printed_q1_with_p11(n: &[i64]) -> Option<Rat> {
    let l = lambda_printed(n)?;
    let a = q(n[0]);
    dv(
        q(3) * l.p11.clone() + q(3) * l.p1.clone() - q(4) + a.clone() * (l.p11 + l.p1 - q(2)),
        q(3) * (a + q(1)),
    )
    .map(|v| v + l.q12)
}

/// Displayed lambda coefficients in `LAMBDA_SLOTS` order; q1 (and q11, q20
/// that depend on it) use the supplied value.
pub fn printed_lambda_values(n: &[i64], q1: Option<&Rat>) -> Vec<Option<Rat>> {
    let Some(l) = lambda_printed(n) else {
        return vec![None; LAMBDA_SLOTS.len()];
    };
    let a = q(n[0]);
    let q11 = q1.map(|q1| -q1.clone() - l.q12.clone());
    let q20 = q1.and_then(|q1| {
        dv(q(3) * (a.clone() + q(1)) * (l.q12.clone() - q1.clone()), a.clone() + q(3)).map(|v| v - l.q21.clone())
    });
    vec![
        Some(l.v20),
        Some(l.v11),
        Some(l.v1),
        Some(l.u1),
        Some(l.q30),
        Some(l.q21),
        Some(l.q12),
        q20,
        q11,
        q1.cloned(),
        Some(l.p20),
        Some(l.p11),
        Some(l.p1),
    ]
}

/// Displayed mu coefficients in `MU_SLOTS` order. Row 1 and row 2 have
/// separate denominators, so a pole in one leaves the other defined.
pub fn printed_mu_values(n: &[i64]) -> Vec<Option<Rat>> {
    let mut out = mu_row1(n).map(|r| r.into_iter().map(Some).collect()).unwrap_or_else(|| vec![None; 4]);
    out.extend(mu_row2(n).map(|r| r.into_iter().map(Some).collect()).unwrap_or_else(|| vec![None; 9]));
    out
}

fn mu_row1(n: &[i64]) -> Option<Vec<Rat>> {
    let (a, b) = (q(n[0]), q(n[1]));
    let f11 = dv(q(18) * a.clone(), a.clone() * (a.clone() * (a.clone() + q(3)) + q(4)) + q(6) * (b + q(2)))?;
    let f02 = dv(f11.clone() * (a.clone() + q(2)), q(3) * a)? - q(1);
    let f2 = q(1) - f02.clone();
    let g2 = -f11.clone();
    Some(vec![f11, f02, f2, g2])
}

fn mu_row2(n: &[i64]) -> Option<Vec<Rat>> {
    let (a, b) = (q(n[0]), q(n[1]));
    let a2 = a.clone() * a.clone();
    let a3 = a2.clone() * a.clone();
    let r21 = dv(
        q(18) * (a.clone() + q(1)),
        a3.clone() + q(6) * a2.clone() + q(13) * a.clone() + q(20) + q(6) * b.clone(),
    )?;
    let g = a3.clone() + q(3) * a2.clone() + q(4) * a.clone() + q(6) * (b.clone() + q(2));
    let r03 = dv(q(2) * (a.clone() + q(2)), g.clone())?;
    let r12 = dv(
        q(9) * a.clone() * r03.clone() + q(9) * a2.clone() * r03.clone() + q(6) * r21.clone() + q(5) * a.clone() * r21.clone()
            + a2.clone() * r21.clone(),
        q(3) * a2.clone() + q(9) * a.clone() + q(6),
    )?;
    let r11 = dv(
        -a3.clone() * r12.clone() - q(6) * (b.clone() + q(2)) * r12.clone()
            + a2.clone() * (q(9) * r03.clone() - q(6) * r12.clone() + r21.clone())
            + a.clone() * (q(3) * r21.clone() - q(9) * r03.clone() - q(7) * r12.clone()),
        g.clone(),
    )?;
    let r02 = dv(
        -q(2) * (a3 + q(3) * a2 + q(4) * a.clone() + q(15) + q(6) * b) * r03.clone(),
        g,
    )?;
    let r2 = -r02.clone() - r03.clone();
    let j11 = -r21.clone();
    let j02 = -dv(q(2) + a.clone() + q(3) * a.clone() * r03.clone(), a.clone() + q(2))?;
    let j2 = dv(
        a.clone() + q(2) - j02.clone() * (a.clone() + q(2)) - q(3) * a.clone() * r02.clone() - q(6) * a.clone() * r03.clone(),
        a + q(2),
    )?;
    Some(vec![r21, r12, r03, r11, r02, r2, j11, j02, j2])
}

/// Printed operators, exact collocation operators and the window they share.
#[derive(Debug, Clone)]
pub struct SchurPair {
    pub lambda: DifferenceOperator<Rat>,
    pub mu: DifferenceOperator<Rat>,
    pub colloc_lambda: Collocated<Rat>,
    pub colloc_mu: Collocated<Rat>,
    pub window: LatticeWindow,
}

fn printed_operator(
    slots: &'static [PrintedSlot],
    values: Arc<dyn Fn(&[i64]) -> Vec<Option<Rat>> + Send + Sync>,
) -> Result<DifferenceOperator<Rat>> {
    let mut shifts: Vec<[i64; 2]> = slots.iter().map(|s| s.shift).collect();
    shifts.sort();
    shifts.dedup();
    let mut op = DifferenceOperator::zero(2, 2, 2);
    for k in shifts {
        let members: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].shift == k).collect();
        let (v, probe, m2) = (values.clone(), values.clone(), members.clone());
        let poles = PoleSet::zeros(move |n| {
            let vals = probe(n);
            m2.iter().any(|&i| vals[i].is_none())
        });
        let f = LatticeFunction::new(2, (2, 2), poles, move |n| {
            let vals = v(n);
            let mut m = Mat::zeros(2, 2);
            for &i in &members {
                m.set(slots[i].row, slots[i].col, vals[i].clone()?);
            }
            Some(m)
        });
        op.add_term(MultiIndex::from(k), f)?;
    }
    Ok(op)
}

/// Builds both pairs on `window`. Collocation runs on the window dilated by
/// the widest template, so compositions stay inside the tabulated region.
pub fn build_schur_pair(window: &LatticeWindow, cfg: &CollocationConfig) -> Result<SchurPair> {
    if window.g() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: window.g() });
    }
    let fam = make_schur_basis::<Rat>();
    let templates = graded_templates(2, &[1, 2], 2);
    let dilated = window.dilate(&MultiIndex::simplex(2, 3));
    let colloc_lambda = build_collocation(&fam, &fam.eigenvalue(Which::Lambda), &templates, &dilated, cfg)?;
    let colloc_mu = build_collocation(&fam, &fam.eigenvalue(Which::Mu), &templates, &dilated, cfg)?;

    let q1_fn = colloc_lambda
        .op
        .coefficient(&MultiIndex::from([1, 0]))
        .ok_or_else(|| Error::InvalidParams("collocation lacks the (1,0) shift".into()))?
        .entry(1, 0);
    let lambda = printed_operator(
        &LAMBDA_SLOTS,
        Arc::new(move |n: &[i64]| {
            let q1 = q1_fn.eval(n).ok().map(|m| m.get(0, 0).clone());
            printed_lambda_values(n, q1.as_ref())
        }),
    )?;
    let mu = printed_operator(&MU_SLOTS, Arc::new(|n: &[i64]| printed_mu_values(n)))?;
    Ok(SchurPair { lambda, mu, colloc_lambda, colloc_mu, window: window.clone() })
}

#[derive(Debug, Clone, Serialize)]
pub struct Mismatch {
    pub n: Vec<i64>,
    pub printed: String,
    pub collocated: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientComparison {
    pub operator: &'static str,
    #[serde(flatten)]
    pub slot: PrintedSlot,
    pub matched: usize,
    pub mismatched: usize,
    pub poles: usize,
    pub first_mismatch: Option<Mismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Q1Report {
    pub undefined_symbol: &'static str,
    pub substitution: &'static str,
    pub matched: usize,
    pub mismatched: usize,
    pub samples: Vec<Mismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchurComparison {
    pub coefficients: Vec<CoefficientComparison>,
    /// Collocated coefficients outside every printed slot that are nonzero.
    pub unexpected_nonzero: usize,
    pub q1: Q1Report,
}

impl SchurComparison {
    pub fn get(&self, operator: &str, name: &str) -> Option<&CoefficientComparison> {
        self.coefficients.iter().find(|c| c.operator == operator && c.slot.name == name)
    }
}

fn collocated_at(c: &Collocated<Rat>, n: &[i64]) -> Result<BTreeMap<(usize, usize, [i64; 2]), Rat>> {
    let mut out = BTreeMap::new();
    for (k, f) in c.op.terms() {
        let m = f.eval(n)?;
        for i in 0..2 {
            for j in 0..2 {
                out.insert((i, j, [k.0[0], k.0[1]]), m.get(i, j).clone());
            }
        }
    }
    Ok(out)
}

/// Compares every displayed coefficient with collocation at each n of the
/// pair's window. q1 is taken from collocation, so the q1 slot is reported
/// through its p12 := p11 reading instead.
pub fn compare_schur_printed(pair: &SchurPair) -> Result<SchurComparison> {
    let mut coefficients: Vec<CoefficientComparison> = LAMBDA_SLOTS
        .iter()
        .map(|s| ("lambda", *s))
        .chain(MU_SLOTS.iter().map(|s| ("mu", *s)))
        .map(|(operator, slot)| CoefficientComparison { operator, slot, matched: 0, mismatched: 0, poles: 0, first_mismatch: None })
        .collect();
    let mut unexpected = 0;
    let mut q1 = Q1Report { undefined_symbol: "p12", substitution: "p12 := p11", matched: 0, mismatched: 0, samples: vec![] };
    for n in pair.window.points() {
        let cl = collocated_at(&pair.colloc_lambda, &n)?;
        let cm = collocated_at(&pair.colloc_mu, &n)?;
        let colloc_q1 = cl[&(1, 0, [1, 0])].clone();
        let lv = printed_lambda_values(&n, Some(&colloc_q1));
        let mv = printed_mu_values(&n);
        for (c, printed) in coefficients.iter_mut().zip(lv.into_iter().chain(mv)) {
            let table = if c.operator == "lambda" { &cl } else { &cm };
            let got = &table[&(c.slot.row, c.slot.col, c.slot.shift)];
            match printed {
                None => c.poles += 1,
                Some(v) if &v == got => c.matched += 1,
                Some(v) => {
                    c.mismatched += 1;
                    if c.first_mismatch.is_none() {
                        c.first_mismatch = Some(Mismatch { n: n.clone(), printed: v.exact_string(), collocated: got.exact_string() });
                    }
                }
            }
        }
        for (slots, table) in [(&LAMBDA_SLOTS, &cl), (&MU_SLOTS, &cm)] {
            unexpected += table
                .iter()
                .filter(|((i, j, k), v)| !Scalar::is_zero(*v) && !slots.iter().any(|s| s.row == *i && s.col == *j && s.shift == *k))
                .count();
        }
        if let Some(p) = printed_q1_with_p11(&n) {
            if p == colloc_q1 {
                q1.matched += 1;
            } else {
                q1.mismatched += 1;
            }
            if q1.samples.len() < 4 {
                q1.samples.push(Mismatch { n: n.clone(), printed: p.exact_string(), collocated: colloc_q1.exact_string() });
            }
        }
    }
    Ok(SchurComparison { coefficients, unexpected_nonzero: unexpected, q1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, qq: i64) -> Rat {
        Rat::from_ratio(p, qq)
    }

    #[test]
    fn mu_row1_closed_values() {
        let v = printed_mu_values(&[1, 0]);
        assert_eq!(v[0], Some(r(9, 10)));
        assert_eq!(v[1], Some(r(-1, 10)));
        assert_eq!(v[2], Some(r(11, 10)));
        assert_eq!(v[3], Some(r(-9, 10)));
    }

    #[test]
    fn g2_is_minus_f11() {
        for a in -3..6 {
            for b in -3..6 {
                let v = printed_mu_values(&[a, b]);
                if let (Some(f), Some(g)) = (&v[0], &v[3]) {
                    assert_eq!(g, &-f.clone());
                }
            }
        }
    }

    #[test]
    fn f02_has_pole_at_n1_zero() {
        let v = printed_mu_values(&[0, 2]);
        assert!(v[1].is_none());
        assert!(v[4].is_some(), "row 2 is independent of the row-1 pole");
    }

    #[test]
    fn printed_against_collocation_small_window() {
        let pair = build_schur_pair(&LatticeWindow::cube(2, 0, 2), &CollocationConfig::default()).unwrap();
        let cmp = compare_schur_printed(&pair).unwrap();
        for name in ["v20", "v11", "v1", "u1", "q30", "p20", "p1"] {
            let c = cmp.get("lambda", name).unwrap();
            assert_eq!(c.mismatched, 0, "{name}: {:?}", c.first_mismatch);
        }
        // the displayed q12 denominator lacks +6 n2: agrees only on n2 = 0
        let q12 = cmp.get("lambda", "q12").unwrap();
        assert_eq!(q12.matched, 3);
        assert_eq!(q12.mismatched, 6);
        for name in ["f11", "f02", "f2", "g2", "r21", "j11"] {
            let c = cmp.get("mu", name).unwrap();
            assert_eq!(c.mismatched, 0, "{name}: {:?}", c.first_mismatch);
        }
        assert!(cmp.get("mu", "r03").unwrap().matched == 0);
        assert_eq!(cmp.q1.mismatched, 0);
        assert_eq!(cmp.q1.matched, 9);
        assert_eq!(cmp.unexpected_nonzero, 0);
    }
}
