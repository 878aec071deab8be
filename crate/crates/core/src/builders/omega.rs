//! Displayed operators D(lambda_1), D(lambda_2) for the rational variety
//! glued from two planes, transcribed literally with s = (-1)^{n2} and
//! powers of 2 evaluated exactly.

use std::sync::Arc;

use crate::algebra::{DifferenceOperator, LatticeFunction, MultiIndex, PoleSet};
use crate::error::{Error, Result};
use crate::families::OmegaParams;
use crate::matrix::Mat;
use crate::scalar::{Rat, Scalar};

/// (row, col, shift, value) for every displayed entry.
type Entries = Vec<(usize, usize, [i64; 2], Rat)>;

fn q(v: i64) -> Rat {
    Rat::from_i64(v)
}

fn half(v: Rat) -> Rat {
    v / q(2)
}

fn dv(a: Rat, b: Rat) -> Option<Rat> {
    (!Scalar::is_zero(&b)).then(|| a / b)
}

struct Powers {
    s: Rat,
    p2: Rat,
    p4: Rat,
    p8: Rat,
}

fn powers(n: &[i64]) -> Powers {
    let pw = |b: i64| q(b).powi(n[0]).expect("nonzero base");
    Powers { s: if n[1].rem_euclid(2) == 0 { q(1) } else { q(-1) }, p2: pw(2), p4: pw(4), p8: pw(8) }
}

pub fn printed_lambda1(n: &[i64]) -> Option<Entries> {
    let Powers { s, p2, p4, .. } = powers(n);
    let sp2 = s.clone() * p2.clone();
    let den = q(-1) + q(4) * p4.clone();
    let mid = q(-2) + sp2.clone() + q(6) * p4.clone();
    let b1 = dv(q(3), den.clone())?;
    let a2 = q(-1) + mid.clone() * b1.clone();
    let a = q(-4) - a2.clone() - b1.clone();
    let b2 = dv(q(3) * (q(-1) + q(2) * sp2.clone()), (q(1) + sp2.clone()) * den.clone())?;
    let b = -q(4) * b1.clone() - b2.clone();
    let d1 = dv(q(-1) + p4, den)?;
    let c2 = half(q(1) - sp2.clone()) + mid * d1.clone();
    let c = q(1) - c2.clone() - d1.clone();
    let d2 = dv((q(-1) + q(2) * sp2.clone()) * d1.clone(), q(1) + sp2)?;
    let d = -q(4) * d1.clone() - d2.clone();
    Some(vec![
        (0, 0, [1, 0], q(1)),
        (0, 0, [0, 1], a2),
        (0, 0, [0, 0], a),
        (0, 1, [1, 0], b1),
        (0, 1, [0, 1], b2),
        (0, 1, [0, 0], b),
        (1, 0, [0, 1], c2),
        (1, 0, [0, 0], c),
        (1, 1, [1, 0], d1),
        (1, 1, [0, 1], d2),
        (1, 1, [0, 0], d),
    ])
}

pub fn printed_lambda2(n: &[i64]) -> Option<Entries> {
    let Powers { s, p2, p4, p8 } = powers(n);
    let sp2 = s.clone() * p2;
    let sp8 = s * p8;
    let den4 = q(-1) + q(4) * p4.clone();
    let b12 = dv(q(3), q(2) * den4.clone())?;
    let b2p = dv(q(3), q(-1) + p4.clone())?;
    let a22 = half(
        q(1) - q(4) * (q(1) + q(2) * sp8.clone() - q(3) * p4.clone()) * b12.clone() + sp2.clone() * b2p.clone()
            - sp8 * b2p.clone(),
    );
    let a2p = q(2) - q(2) * a22.clone() - b12.clone() - q(2) * sp2.clone() * b12.clone();
    let ap = -a2p.clone() - a22.clone();
    let b22 = half(-q(4) * (q(1) + q(2) * sp2.clone()) * b12.clone() - (q(1) + sp2.clone()) * b2p.clone());
    let b1p = -b12.clone();
    let bp = -b2p.clone() - b22.clone();
    let d12 = dv(q(-1) + p4.clone(), q(2) * den4)?;
    let d1p = -d12.clone();
    let d22 = half(-q(4) * (q(1) + q(2) * sp2.clone()) * d12.clone() - (q(1) + sp2.clone()));
    let dp = q(-1) - d22.clone();
    let c22 = -(q(-1) + sp2.clone())
        * (q(-1) + (q(-8) - q(8) * sp2.clone() + q(16) * p4) * d12.clone() + q(2) * sp2.clone() * (q(1) + sp2.clone()))
        / q(4);
    let c2p = -half(q(1)) - q(2) * c22.clone() - (q(1) + q(2) * sp2) * d12.clone();
    let cp = -c2p.clone() - c22.clone();
    Some(vec![
        (0, 0, [1, 1], -half(q(1))),
        (0, 0, [0, 2], a22),
        (0, 0, [1, 0], half(q(1))),
        (0, 0, [0, 1], a2p),
        (0, 0, [0, 0], ap),
        (0, 1, [1, 1], b12),
        (0, 1, [0, 2], b22),
        (0, 1, [1, 0], b1p),
        (0, 1, [0, 1], b2p),
        (0, 1, [0, 0], bp),
        (1, 0, [0, 2], c22),
        (1, 0, [0, 1], c2p),
        (1, 0, [0, 0], cp),
        (1, 1, [1, 1], d12),
        (1, 1, [0, 2], d22),
        (1, 1, [1, 0], d1p),
        (1, 1, [0, 1], q(1)),
        (1, 1, [0, 0], dp),
    ])
}

fn to_operator(entries: fn(&[i64]) -> Option<Entries>) -> Result<DifferenceOperator<Rat>> {
    let reference = entries(&[1, 0]).ok_or_else(|| Error::InvalidParams("printed operator undefined at (1,0)".into()))?;
    let mut shifts: Vec<[i64; 2]> = reference.iter().map(|e| e.2).collect();
    shifts.sort();
    shifts.dedup();
    let mut op = DifferenceOperator::zero(2, 2, 2);
    let f = Arc::new(entries);
    for k in shifts {
        let (v, probe) = (f.clone(), f.clone());
        let poles = PoleSet::zeros(move |n| probe(n).is_none());
        let c = LatticeFunction::new(2, (2, 2), poles, move |n| {
            let mut m = Mat::zeros(2, 2);
            for (i, j, s, val) in v(n)? {
                if s == k {
                    m.set(i, j, val);
                }
            }
            Some(m)
        });
        op.add_term(MultiIndex::from(k), c)?;
    }
    Ok(op)
}

/// The two displayed operators; defined for the concrete data only.
pub fn build_omega_pair(p: &OmegaParams<Rat>) -> Result<(DifferenceOperator<Rat>, DifferenceOperator<Rat>)> {
    if *p != OmegaParams::standard() {
        return Err(Error::InvalidParams("the displayed operators exist only for the standard Omega data".into()));
    }
    Ok((to_operator(printed_lambda1)?, to_operator(printed_lambda2)?))
}
