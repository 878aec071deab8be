//! Coefficient tables: one row per (n, shift, entry).

use std::io::Write;

use super::lattice::LatticeWindow;
use super::operator::DifferenceOperator;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Writes `n1..ng, k1..kg, row, col, a, b` where (a, b) is (re, im) with 17
/// significant digits for floats, or (numerator, denominator) for rationals.
/// Returns the pole points that were skipped.
pub fn write_coefficients<S: Scalar, W: Write>(
    op: &DifferenceOperator<S>,
    window: &LatticeWindow,
    out: W,
) -> Result<Vec<Vec<i64>>> {
    let g = op.g();
    let io = |e: csv::Error| Error::InvalidParams(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=g).map(|i| format!("n{i}")).collect();
    header.extend((1..=g).map(|i| format!("k{i}")));
    header.extend(["row", "col"].map(String::from));
    if S::is_exact() {
        header.extend(["numerator", "denominator"].map(String::from));
    } else {
        header.extend(["re", "im"].map(String::from));
    }
    w.write_record(&header).map_err(io)?;
    let mut skipped = Vec::new();
    for n in window.points() {
        for (k, c) in op.terms() {
            let v = match c.eval(&n) {
                Ok(v) => v,
                Err(_) => {
                    if skipped.last() != Some(&n) {
                        skipped.push(n.clone());
                    }
                    continue;
                }
            };
            for i in 0..v.rows {
                for j in 0..v.cols {
                    let mut rec: Vec<String> = n.iter().chain(&k.0).map(|x| x.to_string()).collect();
                    rec.push(i.to_string());
                    rec.push(j.to_string());
                    let s = v.get(i, j).exact_string();
                    if S::is_exact() {
                        let (p, q) = s.split_once('/').unwrap_or((&s, "1"));
                        rec.push(p.to_string());
                        rec.push(q.to_string());
                    } else {
                        let z = v.get(i, j).to_complex();
                        rec.push(format!("{:.16e}", z.re));
                        rec.push(format!("{:.16e}", z.im));
                    }
                    w.write_record(&rec).map_err(io)?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::InvalidParams(format!("csv: {e}")))?;
    Ok(skipped)
}
