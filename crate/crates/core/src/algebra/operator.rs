//! Difference operators sum_k c_k(n) T^k with the skew product
//! T^a . f = f(. + a) . T^a.

use std::collections::BTreeMap;

use super::lattice::{LatticeFunction, LatticeWindow, MultiIndex};
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct DifferenceOperator<S> {
    g: usize,
    rows: usize,
    cols: usize,
    terms: BTreeMap<MultiIndex, LatticeFunction<S>>,
}

/// Values (D psi)(n) over a window.
pub type Table<S> = BTreeMap<Vec<i64>, Mat<S>>;

#[derive(Debug, Clone)]
pub struct ZeroCheck {
    pub zero: bool,
    pub max_residual: f64,
    pub checked: usize,
    pub skipped: Vec<(Vec<i64>, String)>,
}

impl<S: Scalar> DifferenceOperator<S> {
    pub fn zero(g: usize, rows: usize, cols: usize) -> Self {
        DifferenceOperator { g, rows, cols, terms: BTreeMap::new() }
    }

    pub fn identity(g: usize, n: usize) -> Self {
        Self::monomial(LatticeFunction::constant(g, Mat::identity(n)), MultiIndex::zero(g))
    }

    /// Scalar pure shift T^k.
    pub fn shift(k: MultiIndex) -> Self {
        let g = k.g();
        Self::monomial(LatticeFunction::constant(g, Mat::identity(1)), k)
    }

    pub fn monomial(c: LatticeFunction<S>, k: MultiIndex) -> Self {
        let (rows, cols) = c.shape();
        let mut terms = BTreeMap::new();
        terms.insert(k, c);
        DifferenceOperator { g: terms.keys().next().unwrap().g(), rows, cols, terms }
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &LatticeFunction<S>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, k: &MultiIndex) -> Option<&LatticeFunction<S>> {
        self.terms.get(k)
    }

    pub fn support(&self) -> Vec<MultiIndex> {
        self.terms.keys().cloned().collect()
    }

    /// Adds `c T^k`, merging with an existing term at the same shift.
    pub fn add_term(&mut self, k: MultiIndex, c: LatticeFunction<S>) -> Result<()> {
        if k.g() != self.g || c.g() != self.g {
            return Err(Error::DimensionMismatch { expected: self.g, got: k.g() });
        }
        if c.shape() != self.shape() {
            return Err(Error::ArityMismatch(format!("term {:?} in {:?} operator", c.shape(), self.shape())));
        }
        let merged = match self.terms.remove(&k) {
            Some(old) => old.add(&c)?,
            None => c,
        };
        self.terms.insert(k, merged);
        Ok(())
    }

    pub fn with_term(mut self, k: MultiIndex, c: LatticeFunction<S>) -> Result<Self> {
        self.add_term(k, c)?;
        Ok(self)
    }

    fn check_same(&self, o: &Self) -> Result<()> {
        if self.g != o.g {
            return Err(Error::DimensionMismatch { expected: self.g, got: o.g });
        }
        if self.shape() != o.shape() {
            return Err(Error::ArityMismatch(format!("{:?} vs {:?}", self.shape(), o.shape())));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.check_same(o)?;
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone())?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: S) -> Self {
        DifferenceOperator {
            g: self.g,
            rows: self.rows,
            cols: self.cols,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.scale(s.clone()))).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(-S::one()))
    }

    /// (A B) = sum over term pairs of (n -> f(n) g(n + a)) T^(a+b).
    pub fn compose(&self, o: &Self) -> Result<Self> {
        if self.g != o.g {
            return Err(Error::DimensionMismatch { expected: self.g, got: o.g });
        }
        if self.cols != o.rows {
            return Err(Error::ArityMismatch(format!("compose {:?} with {:?}", self.shape(), o.shape())));
        }
        let mut out = Self::zero(self.g, self.rows, o.cols);
        for (a, f) in &self.terms {
            for (b, gf) in &o.terms {
                out.add_term(a.add(b), f.mul_shifted(gf, &a.0)?)?;
            }
        }
        Ok(out)
    }

    /// Structurally zero terms are kept; judge with [`Self::is_zero_on_window`].
    pub fn commutator(&self, o: &Self) -> Result<Self> {
        if self.rows != self.cols || o.rows != o.cols {
            return Err(Error::ArityMismatch("commutator needs square operators".into()));
        }
        self.compose(o)?.sub(&o.compose(self)?)
    }

    /// (D psi)(n) = sum_k c_k(n) psi(n + k) for n in `window`. `psi` maps a
    /// lattice point to a (cols x m) block.
    pub fn apply(&self, psi: &(dyn Fn(&[i64]) -> Result<Mat<S>> + Sync), window: &LatticeWindow) -> Result<Table<S>> {
        if window.g() != self.g {
            return Err(Error::DimensionMismatch { expected: self.g, got: window.g() });
        }
        let mut out = Table::new();
        for n in window.points() {
            out.insert(n.clone(), self.apply_at(psi, &n)?);
        }
        Ok(out)
    }

    pub fn apply_at(&self, psi: &(dyn Fn(&[i64]) -> Result<Mat<S>> + Sync), n: &[i64]) -> Result<Mat<S>> {
        let mut acc: Option<Mat<S>> = None;
        for (k, c) in &self.terms {
            let v = psi(&k.offset(n))?;
            if v.rows != self.cols {
                return Err(Error::ArityMismatch(format!("operator {:?} on block {:?}", self.shape(), v.shape())));
            }
            let t = c.eval(n)?.mul(&v);
            acc = Some(match acc {
                Some(a) => a.add(&t),
                None => t,
            });
        }
        match acc {
            Some(a) => Ok(a),
            None => {
                let m = psi(n)?.cols;
                Ok(Mat::zeros(self.rows, m))
            }
        }
    }

    /// True iff every coefficient vanishes (|c| <= tol) at every non-pole
    /// point of the window; exact fields require tol = 0.
    pub fn is_zero_on_window(&self, window: &LatticeWindow, tol: f64) -> Result<ZeroCheck> {
        if window.is_empty() {
            return Err(Error::EmptyWindow);
        }
        if S::is_exact() && tol != 0.0 {
            return Err(Error::InexactTolerance(tol));
        }
        let mut max_residual = 0.0f64;
        let mut zero = true;
        let mut checked = 0;
        let mut skipped = Vec::new();
        for n in window.points() {
            let mut ok = true;
            let mut vals = Vec::with_capacity(self.terms.len());
            for c in self.terms.values() {
                match c.eval(&n) {
                    Ok(v) => vals.push(v),
                    Err(e) => {
                        skipped.push((n.clone(), e.to_string()));
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            checked += 1;
            for v in vals {
                let r = v.max_abs();
                max_residual = max_residual.max(r);
                if S::is_exact() {
                    zero &= v.is_zero();
                } else {
                    zero &= r <= tol;
                }
            }
        }
        Ok(ZeroCheck { zero, max_residual, checked, skipped })
    }

    /// Memoizes every coefficient on `window`.
    pub fn tabulate(&self, window: &LatticeWindow) -> Self {
        DifferenceOperator {
            g: self.g,
            rows: self.rows,
            cols: self.cols,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.tabulate(window))).collect(),
        }
    }

    /// Largest coefficient magnitude over the non-pole points of `window`.
    pub fn max_coefficient(&self, window: &LatticeWindow) -> f64 {
        let mut m = 0.0f64;
        for n in window.points() {
            for c in self.terms.values() {
                if let Ok(v) = c.eval(&n) {
                    m = m.max(v.max_abs());
                }
            }
        }
        m
    }

    /// Replaces the coefficient of T^k by `f(coefficient)`.
    pub fn map_term(&self, k: &MultiIndex, f: impl FnOnce(&LatticeFunction<S>) -> LatticeFunction<S>) -> Self {
        let mut out = self.clone();
        if let Some(c) = out.terms.get(k).map(f) {
            out.terms.insert(k.clone(), c);
        }
        out
    }

    /// Entry (i, j) as a scalar operator.
    pub fn entry(&self, i: usize, j: usize) -> Self {
        let mut out = Self::zero(self.g, 1, 1);
        for (k, c) in &self.terms {
            out.terms.insert(k.clone(), c.entry(i, j));
        }
        out
    }

    /// Assembles a block operator from scalar entries.
    pub fn from_entries(g: usize, entries: Vec<Vec<DifferenceOperator<S>>>) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        let mut out = Self::zero(g, rows, cols);
        let mut shifts: Vec<MultiIndex> = entries.iter().flatten().flat_map(|e| e.support()).collect();
        shifts.sort();
        shifts.dedup();
        for k in shifts {
            let mut cells: Vec<Vec<Option<LatticeFunction<S>>>> = Vec::new();
            for row in &entries {
                if row.len() != cols {
                    return Err(Error::ArityMismatch("ragged operator matrix".into()));
                }
                cells.push(row.iter().map(|e| e.coefficient(&k).cloned()).collect());
            }
            let mut poles = super::lattice::PoleSet::Empty;
            for c in cells.iter().flatten().flatten() {
                if c.shape() != (1, 1) {
                    return Err(Error::ArityMismatch("entries must be scalar".into()));
                }
                poles = super::lattice::PoleSet::union(&poles, c.poles());
            }
            let f = LatticeFunction::new(g, (rows, cols), poles, move |n| {
                let mut m = Mat::zeros(rows, cols);
                for (i, r) in cells.iter().enumerate() {
                    for (j, c) in r.iter().enumerate() {
                        if let Some(c) = c {
                            m.set(i, j, c.eval(n).ok()?.get(0, 0).clone());
                        }
                    }
                }
                Some(m)
            });
            out.terms.insert(k, f);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::lattice::PoleSet;
    use crate::scalar::Rat;

    fn q(v: i64) -> Rat {
        Rat::from_i64(v)
    }

    fn nfun() -> LatticeFunction<Rat> {
        LatticeFunction::scalar(2, PoleSet::Empty, |n| Some(q(n[0] * n[0] - 3 * n[1])))
    }

    #[test]
    fn pure_shift_and_multiplication() {
        let psi = |n: &[i64]| Ok(Mat::scalar(q(5 * n[0] + 7 * n[1])));
        let w = LatticeWindow::cube(2, -2, 2);
        let t1 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 0));
        for (n, v) in t1.apply(&psi, &w).unwrap() {
            assert_eq!(v, Mat::scalar(q(5 * (n[0] + 1) + 7 * n[1])));
        }
        let m = DifferenceOperator::monomial(nfun(), MultiIndex::zero(2));
        for (n, v) in m.apply(&psi, &w).unwrap() {
            assert_eq!(v, Mat::scalar(q((n[0] * n[0] - 3 * n[1]) * (5 * n[0] + 7 * n[1]))));
        }
    }

    #[test]
    fn skew_rule() {
        let t1 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 0));
        let ft1 = DifferenceOperator::monomial(nfun(), MultiIndex::unit(2, 0));
        let c = t1.compose(&ft1).unwrap();
        assert_eq!(c.support(), vec![MultiIndex::from([2, 0])]);
        let coef = c.coefficient(&MultiIndex::from([2, 0])).unwrap();
        for n in LatticeWindow::cube(2, -3, 3).points() {
            assert_eq!(coef.eval(&n).unwrap(), Mat::scalar(q((n[0] + 1) * (n[0] + 1) - 3 * n[1])));
        }
    }

    #[test]
    fn commutator_with_multiplication() {
        let t1 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 0));
        let f = DifferenceOperator::monomial(nfun(), MultiIndex::zero(2));
        let c = t1.commutator(&f).unwrap();
        let coef = c.coefficient(&MultiIndex::unit(2, 0)).unwrap();
        for n in LatticeWindow::cube(2, -3, 3).points() {
            // f(n + e1) - f(n) = 2 n1 + 1
            assert_eq!(coef.eval(&n).unwrap(), Mat::scalar(q(2 * n[0] + 1)));
        }
        let t2 = DifferenceOperator::<Rat>::shift(MultiIndex::unit(2, 1));
        let w = LatticeWindow::cube(2, -2, 2);
        assert!(t1.commutator(&t2).unwrap().is_zero_on_window(&w, 0.0).unwrap().zero);
        assert!(t1.commutator(&t1).unwrap().is_zero_on_window(&w, 0.0).unwrap().zero);
    }

    #[test]
    fn zero_check_tolerances() {
        let w = LatticeWindow::cube(1, 0, 3);
        let z = DifferenceOperator::<Rat>::zero(1, 1, 1);
        let r = z.is_zero_on_window(&w, 0.0).unwrap();
        assert!(r.zero && r.max_residual == 0.0);
        assert!(matches!(z.is_zero_on_window(&w, 1e-9), Err(Error::InexactTolerance(_))));
        let small = DifferenceOperator::<crate::scalar::C64>::shift(MultiIndex::unit(1, 0)).scale(crate::scalar::C64::new(1e-3, 0.0));
        let r = small.is_zero_on_window(&w, 1e-6).unwrap();
        assert!(!r.zero && (r.max_residual - 1e-3).abs() < 1e-15);
    }

    #[test]
    fn negative_shifts_compose() {
        let t = DifferenceOperator::<Rat>::shift(MultiIndex::from([1]));
        let ti = DifferenceOperator::<Rat>::shift(MultiIndex::from([-1]));
        let id = t.compose(&ti).unwrap();
        assert_eq!(id.support(), vec![MultiIndex::zero(1)]);
    }

    #[test]
    fn arity_is_checked() {
        let a = DifferenceOperator::<Rat>::identity(1, 2);
        let b = DifferenceOperator::<Rat>::identity(1, 3);
        assert!(matches!(a.compose(&b), Err(Error::ArityMismatch(_))));
    }
}
