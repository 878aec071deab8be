use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Exponent vector of a shift monomial T^k.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<i64>);

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl MultiIndex {
    pub fn zero(g: usize) -> Self {
        MultiIndex(vec![0; g])
    }

    pub fn unit(g: usize, i: usize) -> Self {
        let mut v = vec![0; g];
        v[i] = 1;
        MultiIndex(v)
    }

    pub fn g(&self) -> usize {
        self.0.len()
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn offset(&self, n: &[i64]) -> Vec<i64> {
        self.0.iter().zip(n).map(|(a, b)| a + b).collect()
    }

    pub fn l1(&self) -> i64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    /// All k >= 0 with |k|_1 <= d, in lexicographic order.
    pub fn simplex(g: usize, d: i64) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0i64; g];
        fn rec(i: usize, left: i64, cur: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
            if i == cur.len() {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in 0..=left {
                cur[i] = v;
                rec(i + 1, left - v, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, d, &mut cur, &mut out);
        out
    }

    /// All k with 0 <= k_i < d.
    pub fn cube(g: usize, d: i64) -> Vec<MultiIndex> {
        LatticeWindow::cube(g, 0, d - 1).points().into_iter().map(MultiIndex).collect()
    }
}

impl<const N: usize> From<[i64; N]> for MultiIndex {
    fn from(v: [i64; N]) -> Self {
        MultiIndex(v.to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeWindow {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl LatticeWindow {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(Error::EmptyWindow);
        }
        Ok(LatticeWindow { lo, hi })
    }

    pub fn cube(g: usize, lo: i64, hi: i64) -> Self {
        assert!(lo <= hi);
        LatticeWindow { lo: vec![lo; g], hi: vec![hi; g] }
    }

    pub fn g(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a + 1) as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        n.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Points in lexicographic order.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::with_capacity(self.len());
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut i = cur.len();
            loop {
                if i == 0 {
                    return out;
                }
                i -= 1;
                if cur[i] < self.hi[i] {
                    cur[i] += 1;
                    break;
                }
                cur[i] = self.lo[i];
            }
        }
    }

    /// Smallest window holding n + k for n in self and k in `shifts`.
    pub fn dilate(&self, shifts: &[MultiIndex]) -> LatticeWindow {
        let g = self.g();
        let mut lo = self.lo.clone();
        let mut hi = self.hi.clone();
        for i in 0..g {
            let mn = shifts.iter().map(|k| k.0[i]).min().unwrap_or(0).min(0);
            let mx = shifts.iter().map(|k| k.0[i]).max().unwrap_or(0).max(0);
            lo[i] += mn;
            hi[i] += mx;
        }
        LatticeWindow { lo, hi }
    }
}

/// Where a lattice function is undefined. Kept as data so composition can
/// track it and verification can route around it.
#[derive(Clone)]
pub enum PoleSet {
    Empty,
    Points(Arc<BTreeSet<Vec<i64>>>),
    /// Integer zeros of a printed denominator, described by a predicate.
    Zeros(Arc<dyn Fn(&[i64]) -> bool + Send + Sync>),
    /// Everything outside a window (tabulated functions).
    Outside(LatticeWindow),
    Union(Vec<PoleSet>),
    /// Pole set of n -> f(n + k).
    Shifted(Box<PoleSet>, Vec<i64>),
}

impl fmt::Debug for PoleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoleSet::Empty => write!(f, "Empty"),
            PoleSet::Points(p) => write!(f, "Points({})", p.len()),
            PoleSet::Zeros(_) => write!(f, "Zeros(..)"),
            PoleSet::Outside(w) => write!(f, "Outside({:?}..{:?})", w.lo, w.hi),
            PoleSet::Union(v) => f.debug_list().entries(v).finish(),
            PoleSet::Shifted(p, k) => write!(f, "Shifted({p:?}, {k:?})"),
        }
    }
}

impl PoleSet {
    pub fn zeros(pred: impl Fn(&[i64]) -> bool + Send + Sync + 'static) -> Self {
        PoleSet::Zeros(Arc::new(pred))
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        match self {
            PoleSet::Empty => false,
            PoleSet::Points(p) => p.contains(n),
            PoleSet::Zeros(pred) => pred(n),
            PoleSet::Outside(w) => !w.contains(n),
            PoleSet::Union(v) => v.iter().any(|p| p.contains(n)),
            PoleSet::Shifted(p, k) => {
                let m: Vec<i64> = n.iter().zip(k).map(|(a, b)| a + b).collect();
                p.contains(&m)
            }
        }
    }

    pub fn union(a: &PoleSet, b: &PoleSet) -> PoleSet {
        match (a, b) {
            (PoleSet::Empty, x) | (x, PoleSet::Empty) => x.clone(),
            _ => PoleSet::Union(vec![a.clone(), b.clone()]),
        }
    }

    pub fn shifted(&self, k: &[i64]) -> PoleSet {
        match self {
            PoleSet::Empty => PoleSet::Empty,
            _ if k.iter().all(|&v| v == 0) => self.clone(),
            _ => PoleSet::Shifted(Box::new(self.clone()), k.to_vec()),
        }
    }
}

type Evaluator<S> = Arc<dyn Fn(&[i64]) -> Option<Mat<S>> + Send + Sync>;

/// A coefficient: n -> (rows x cols) matrix, undefined on an explicit pole set.
#[derive(Clone)]
pub struct LatticeFunction<S> {
    g: usize,
    rows: usize,
    cols: usize,
    poles: PoleSet,
    eval: Evaluator<S>,
}

impl<S> fmt::Debug for LatticeFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LatticeFunction({}x{}, g={}, poles={:?})", self.rows, self.cols, self.g, self.poles)
    }
}

impl<S: Scalar> LatticeFunction<S> {
    /// `f` returning `None` off the pole set is still reported as a pole hit.
    pub fn new(
        g: usize,
        (rows, cols): (usize, usize),
        poles: PoleSet,
        f: impl Fn(&[i64]) -> Option<Mat<S>> + Send + Sync + 'static,
    ) -> Self {
        LatticeFunction { g, rows, cols, poles, eval: Arc::new(f) }
    }

    pub fn scalar(g: usize, poles: PoleSet, f: impl Fn(&[i64]) -> Option<S> + Send + Sync + 'static) -> Self {
        Self::new(g, (1, 1), poles, move |n| f(n).map(Mat::scalar))
    }

    pub fn constant(g: usize, m: Mat<S>) -> Self {
        let shape = m.shape();
        Self::new(g, shape, PoleSet::Empty, move |_| Some(m.clone()))
    }

    /// Tabulated values; points absent from `table` but inside `window` are poles.
    pub fn from_table(g: usize, shape: (usize, usize), window: LatticeWindow, table: BTreeMap<Vec<i64>, Mat<S>>) -> Self {
        let missing: BTreeSet<Vec<i64>> = window.points().into_iter().filter(|n| !table.contains_key(n)).collect();
        let poles = PoleSet::union(&PoleSet::Outside(window), &PoleSet::Points(Arc::new(missing)));
        let table = Arc::new(table);
        Self::new(g, shape, poles, move |n| table.get(n).cloned())
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn poles(&self) -> &PoleSet {
        &self.poles
    }

    pub fn eval(&self, n: &[i64]) -> Result<Mat<S>> {
        if n.len() != self.g {
            return Err(Error::DimensionMismatch { expected: self.g, got: n.len() });
        }
        if self.poles.contains(n) {
            return Err(Error::PoleHit(n.to_vec()));
        }
        let v = (self.eval)(n).ok_or_else(|| Error::PoleHit(n.to_vec()))?;
        debug_assert_eq!(v.shape(), self.shape());
        Ok(v)
    }

    /// n -> f(n + k).
    pub fn shifted(&self, k: &[i64]) -> Self {
        let inner = self.eval.clone();
        let k = k.to_vec();
        let kk = k.clone();
        Self::new(self.g, self.shape(), self.poles.shifted(&k), move |n| {
            let m: Vec<i64> = n.iter().zip(&kk).map(|(a, b)| a + b).collect();
            inner(&m)
        })
    }

    /// Pointwise n -> f(n) g(n + k), the coefficient produced by T^k f' . g'.
    pub fn mul_shifted(&self, other: &Self, k: &[i64]) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ArityMismatch(format!("{:?} * {:?}", self.shape(), other.shape())));
        }
        let o = other.shifted(k);
        let a = self.eval.clone();
        let b = o.eval.clone();
        Ok(Self::new(self.g, (self.rows, other.cols), PoleSet::union(&self.poles, &o.poles), move |n| {
            Some(a(n)?.mul(&b(n)?))
        }))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x.add(y))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, |x, y| x.sub(y))
    }

    fn combine(&self, other: &Self, op: fn(&Mat<S>, &Mat<S>) -> Mat<S>) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ArityMismatch(format!("{:?} vs {:?}", self.shape(), other.shape())));
        }
        let a = self.eval.clone();
        let b = other.eval.clone();
        Ok(Self::new(self.g, self.shape(), PoleSet::union(&self.poles, &other.poles), move |n| {
            Some(op(&a(n)?, &b(n)?))
        }))
    }

    pub fn scale(&self, s: S) -> Self {
        let a = self.eval.clone();
        Self::new(self.g, self.shape(), self.poles.clone(), move |n| Some(a(n)?.scale(&s)))
    }

    /// Memoizes the function on `window` (evaluated in parallel); pole
    /// points stay poles and everything outside becomes undefined.
    pub fn tabulate(&self, window: &LatticeWindow) -> Self {
        let pts = window.points();
        let vals: Vec<(Vec<i64>, Option<Mat<S>>)> = pts.into_par_iter().map(|n| {
            let v = self.eval(&n).ok();
            (n, v)
        }).collect();
        let table: BTreeMap<Vec<i64>, Mat<S>> = vals.into_iter().filter_map(|(n, v)| v.map(|v| (n, v))).collect();
        Self::from_table(self.g, self.shape(), window.clone(), table)
    }

    pub fn entry(&self, i: usize, j: usize) -> Self {
        let a = self.eval.clone();
        Self::new(self.g, (1, 1), self.poles.clone(), move |n| Some(Mat::scalar(a(n)?.get(i, j).clone())))
    }

    /// Post-composes the values with `f`; used for fault injection.
    pub fn map_values(&self, f: impl Fn(&[i64], Mat<S>) -> Mat<S> + Send + Sync + 'static) -> Self {
        let a = self.eval.clone();
        Self::new(self.g, self.shape(), self.poles.clone(), move |n| Some(f(n, a(n)?)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    #[test]
    fn window_points_and_dilation() {
        let w = LatticeWindow::cube(2, -1, 1);
        assert_eq!(w.points().len(), 9);
        assert_eq!(w.points()[0], vec![-1, -1]);
        let d = w.dilate(&[MultiIndex::from([2, 0]), MultiIndex::from([0, -1])]);
        assert_eq!(d.lo, vec![-1, -2]);
        assert_eq!(d.hi, vec![3, 1]);
        assert!(LatticeWindow::new(vec![1], vec![0]).is_err());
    }

    #[test]
    fn simplex_counts() {
        assert_eq!(MultiIndex::simplex(2, 2).len(), 6);
        assert_eq!(MultiIndex::simplex(2, 3).len(), 10);
        assert_eq!(MultiIndex::cube(2, 2).len(), 4);
    }

    #[test]
    fn pole_is_reported_not_evaluated() {
        let f = LatticeFunction::<Rat>::scalar(1, PoleSet::zeros(|n| n[0] == -2), |n| {
            Some(Rat::from_i64(1) / Rat::from_i64(n[0] + 2))
        });
        assert_eq!(f.eval(&[0]).unwrap(), Mat::scalar(Rat::from_ratio(1, 2)));
        assert_eq!(f.eval(&[-2]), Err(Error::PoleHit(vec![-2])));
        let s = f.shifted(&[1]);
        assert_eq!(s.eval(&[-3]), Err(Error::PoleHit(vec![-3])));
    }

    #[test]
    fn tabulated_function_rejects_outside() {
        let f = LatticeFunction::<Rat>::scalar(1, PoleSet::Empty, |n| Some(Rat::from_i64(n[0])));
        let t = f.tabulate(&LatticeWindow::cube(1, 0, 3));
        assert_eq!(t.eval(&[2]).unwrap(), Mat::scalar(Rat::from_i64(2)));
        assert!(t.eval(&[4]).is_err());
    }
}
