//! Fraction-free (Bareiss) elimination over the integers.
//!
//! Rational rows are first cleared of denominators, so every intermediate
//! value is an integer minor and the only divisions are exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::Solve;
use crate::matrix::Mat;
use crate::scalar::Rat;

/// Row echelon form of an integer matrix plus pivot columns.
struct Echelon {
    m: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

fn integer_rows(a: &Mat<Rat>, b: Option<&[Rat]>) -> Vec<Vec<BigInt>> {
    (0..a.rows)
        .map(|i| {
            let mut row: Vec<&Rat> = a.row(i).iter().collect();
            if let Some(b) = b {
                row.push(&b[i]);
            }
            let l = row.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
            row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
        })
        .collect()
}

/// Eliminates over the first `ncols` columns; any trailing columns ride along.
fn bareiss(mut m: Vec<Vec<BigInt>>, ncols: usize) -> Echelon {
    let rows = m.len();
    let width = m.first().map_or(0, |r| r.len());
    let mut prev = BigInt::one();
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..ncols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                // still needs the prev-scaling to stay a minor
                for j in c + 1..width {
                    let v = &m[r][c] * &m[i][j];
                    m[i][j] = v / &prev;
                }
                continue;
            }
            for j in c + 1..width {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    Echelon { m, pivots }
}

pub fn rank(a: &Mat<Rat>) -> usize {
    bareiss(integer_rows(a, None), a.cols).pivots.len()
}

/// Back substitution over the echelon rows; `rhs` gives the value column
/// (None solves the homogeneous system with `free` set to 1).
fn back_substitute(e: &Echelon, ncols: usize, rhs_col: Option<usize>, free: Option<usize>) -> Vec<Rat> {
    let mut x = vec![Rat::zero(); ncols];
    if let Some(f) = free {
        x[f] = Rat::one();
    }
    for (k, &c) in e.pivots.iter().enumerate().rev() {
        let row = &e.m[k];
        let mut acc = match rhs_col {
            Some(j) => Rat::from_integer(row[j].clone()),
            None => Rat::zero(),
        };
        for j in c + 1..ncols {
            if !row[j].is_zero() && !x[j].is_zero() {
                acc -= Rat::from_integer(row[j].clone()) * &x[j];
            }
        }
        x[c] = acc / Rat::from_integer(row[c].clone());
    }
    x
}

/// Exact solve; consistent overdetermined systems are handled, free
/// variables are set to zero.
pub fn solve(a: &Mat<Rat>, b: &[Rat]) -> Solve<Rat> {
    assert_eq!(a.rows, b.len(), "rhs length");
    let e = bareiss(integer_rows(a, Some(b)), a.cols);
    let rank = e.pivots.len();
    let consistent = e.m[rank..].iter().all(|row| row[a.cols].is_zero());
    let x = back_substitute(&e, a.cols, Some(a.cols), None);
    Solve {
        x,
        rank,
        unknowns: a.cols,
        residual: if consistent { 0.0 } else { 1.0 },
        sv_ratio: if rank == a.cols { 1.0 } else { 0.0 },
        consistent,
    }
}

/// Basis of the right nullspace, one vector per free column.
pub fn nullspace(a: &Mat<Rat>) -> Vec<Vec<Rat>> {
    let e = bareiss(integer_rows(a, None), a.cols);
    (0..a.cols)
        .filter(|c| !e.pivots.contains(c))
        .map(|f| back_substitute(&e, a.cols, None, Some(f)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;

    fn q(p: i64, d: i64) -> Rat {
        Rat::from_ratio(p, d)
    }

    #[test]
    fn solves_overdetermined_consistent() {
        // x + y = 3/2, x - y = 1/2, 2x = 2
        let a = Mat::from_rows(vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(-1, 1)], vec![q(2, 1), q(0, 1)]]);
        let s = solve(&a, &[q(3, 2), q(1, 2), q(2, 1)]);
        assert!(s.consistent && s.full_rank());
        assert_eq!(s.x, vec![q(1, 1), q(1, 2)]);
    }

    #[test]
    fn detects_inconsistency() {
        let a = Mat::from_rows(vec![vec![q(1, 1)], vec![q(2, 1)]]);
        let s = solve(&a, &[q(1, 1), q(3, 1)]);
        assert!(!s.consistent);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = Mat::from_rows(vec![vec![q(1, 2), q(1, 3), q(1, 1)], vec![q(1, 1), q(2, 3), q(2, 1)]]);
        assert_eq!(rank(&a), 1);
        let ns = nullspace(&a);
        assert_eq!(ns.len(), 2);
        for v in ns {
            for i in 0..2 {
                let dot = (0..3).fold(<Rat as num_traits::Zero>::zero(), |acc, j| acc + a.get(i, j).clone() * v[j].clone());
                assert!(Scalar::is_zero(&dot));
            }
        }
    }

    #[test]
    fn pivot_skipping_keeps_division_exact() {
        // first column zero below the pivot row forces the zero-entry branch
        let a = Mat::from_rows(vec![
            vec![q(0, 1), q(2, 1), q(1, 1)],
            vec![q(0, 1), q(4, 1), q(3, 1)],
            vec![q(5, 1), q(1, 1), q(7, 1)],
        ]);
        let b = vec![q(1, 1), q(2, 1), q(3, 1)];
        let s = solve(&a, &b);
        assert!(s.full_rank() && s.consistent);
        for i in 0..3 {
            let lhs = (0..3).fold(<Rat as num_traits::Zero>::zero(), |acc, j| acc + a.get(i, j).clone() * s.x[j].clone());
            assert_eq!(lhs, b[i]);
        }
    }
}
