//! Complex least squares via SVD with row and column equilibration.

use nalgebra::DMatrix;

use super::Solve;
use crate::matrix::Mat;
use crate::scalar::C64;

fn to_dmatrix(a: &Mat<C64>) -> DMatrix<C64> {
    DMatrix::from_row_slice(a.rows, a.cols, &a.data)
}

pub fn singular_values(a: &Mat<C64>) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return vec![];
    }
    let sv = to_dmatrix(a).singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    // a wide matrix has cols - rows structural zeros
    v.resize(a.cols.max(v.len()), 0.0);
    v
}

pub fn max_sv(a: &Mat<C64>) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// sigma_min / sigma_max over the column space.
pub fn sv_ratio(a: &Mat<C64>) -> f64 {
    let sv = singular_values(a);
    let mx = sv.iter().copied().fold(0.0, f64::max);
    let mn = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if mx == 0.0 {
        0.0
    } else {
        mn / mx
    }
}

/// Least squares. Each equation is scaled to unit max-norm (including its
/// right-hand side) and each unknown to unit column norm before the SVD;
/// rank counts singular values above `rank_tol * sigma_max`.
pub fn lstsq(a: &Mat<C64>, b: &[C64], rank_tol: f64) -> Solve<C64> {
    assert_eq!(a.rows, b.len(), "rhs length");
    let (m, k) = (a.rows, a.cols);
    let mut an = a.clone();
    let mut bn = b.to_vec();
    for i in 0..m {
        let s = an.row(i).iter().chain(std::iter::once(&bn[i])).map(|v| v.norm()).fold(0.0, f64::max);
        if s > 0.0 {
            for j in 0..k {
                let v = *an.get(i, j) / s;
                an.set(i, j, v);
            }
            bn[i] /= s;
        }
    }
    let mut colscale = vec![1.0; k];
    for (j, cs) in colscale.iter_mut().enumerate() {
        let nrm = (0..m).map(|i| an.get(i, j).norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            *cs = nrm;
            for i in 0..m {
                let v = *an.get(i, j) / nrm;
                an.set(i, j, v);
            }
        }
    }
    let am = to_dmatrix(&an);
    let svd = am.clone().svd(true, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > rank_tol * smax).count();
    let smin = if m < k { 0.0 } else { sv.iter().copied().fold(f64::INFINITY, f64::min) };
    let bvec = nalgebra::DVector::from_vec(bn.clone());
    let y = svd
        .solve(&bvec, rank_tol * smax)
        .unwrap_or_else(|_| nalgebra::DVector::zeros(k));
    let r = &am * &y - &bvec;
    let bnorm = bvec.norm();
    let residual = if bnorm > 0.0 { r.norm() / bnorm } else { r.norm() };
    let x: Vec<C64> = y.iter().zip(&colscale).map(|(v, s)| *v / *s).collect();
    Solve {
        x,
        rank,
        unknowns: k,
        residual,
        sv_ratio: if smax > 0.0 { smin / smax } else { 0.0 },
        consistent: true,
    }
}

/// Orthonormal basis of the numerical nullspace.
pub fn nullspace(a: &Mat<C64>, rank_tol: f64) -> Vec<Vec<C64>> {
    let k = a.cols;
    // pad to at least square so V is complete
    let m = a.rows.max(k);
    let mut padded = DMatrix::<C64>::zeros(m, k);
    for i in 0..a.rows {
        for j in 0..k {
            padded[(i, j)] = *a.get(i, j);
        }
    }
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rank_tol * smax || smax == 0.0)
        .map(|(i, _)| (0..k).map(|j| vt[(i, j)].conj()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_solution_of_scaled_system() {
        let a = Mat::from_rows(vec![
            vec![C64::new(1e6, 0.0), C64::new(2e6, 1e6)],
            vec![C64::new(0.0, 1e-4), C64::new(1e-4, 0.0)],
            vec![C64::new(3.0, 0.0), C64::new(-1.0, 0.0)],
        ]);
        let x = [C64::new(0.5, -0.25), C64::new(-2.0, 1.0)];
        let b: Vec<C64> = (0..3).map(|i| a.get(i, 0) * x[0] + a.get(i, 1) * x[1]).collect();
        let s = lstsq(&a, &b, 1e-12);
        assert_eq!(s.rank, 2);
        assert!(s.residual < 1e-14);
        assert!((s.x[0] - x[0]).norm() < 1e-12 && (s.x[1] - x[1]).norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_duplicate_columns() {
        let a = Mat::from_rows(vec![vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)], vec![C64::new(2.0, 1.0), C64::new(2.0, 1.0)]]);
        let ns = nullspace(&a, 1e-10);
        assert_eq!(ns.len(), 1);
        assert!((ns[0][0] + ns[0][1]).norm() < 1e-12);
        assert!(sv_ratio(&a) < 1e-15);
    }
}
