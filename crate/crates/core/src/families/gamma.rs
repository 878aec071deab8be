//! The rational variety Gamma = CP1 x CP(g-1) with ([a1,b1], t) ~ ([a2,b2], P t).
//!
//! Points are P = (z1, z2, t_1, ..., t_g). An element of level k is
//! psi(n, P) = h(n, P) / f^k * prod (f_j / f)^{n_j}, h = sum h_{j,alpha}(n) z1^j z2^{k-j} t^alpha,
//! and the gluing condition reduces to the linear system
//! kappa_n h(n, a1, b1, t) = Lambda h(n, a2, b2, P t), kappa_n = prod (c_j/A)^{n_j} / A^k,
//! whose nullspace at each n gives the basis coefficients.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;

use super::{above_floor, BasisFamily, FamilyTag, Point, SpectralFunction, Which};
use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::{Scalar, C64};

/// sum_i (alpha_i z1 + beta_i z2) t_i.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm<S> {
    pub alpha: Vec<S>,
    pub beta: Vec<S>,
}

impl<S: Scalar> LinearForm<S> {
    pub fn eval(&self, z1: &S, z2: &S, t: &[S]) -> S {
        let mut acc = S::zero();
        for i in 0..t.len() {
            acc = acc + (self.alpha[i].clone() * z1.clone() + self.beta[i].clone() * z2.clone()) * t[i].clone();
        }
        acc
    }

    pub fn at(&self, p: &[S]) -> S {
        self.eval(&p[0], &p[1], &p[2..])
    }

    /// The form whose gluing factor is `k` for the given data: with
    /// (a1,b1) = (1,0), (a2,b2) = (0,1) and diagonal P this is alpha_i = k beta_i p_i.
    pub fn glued(beta: Vec<S>, k: &S, pdiag: &[S]) -> Self {
        let alpha = beta.iter().zip(pdiag).map(|(b, p)| k.clone() * b.clone() * p.clone()).collect();
        LinearForm { alpha, beta }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaParams<S> {
    pub a1: S,
    pub b1: S,
    pub a2: S,
    pub b2: S,
    pub p: Vec<Vec<S>>,
    pub a: S,
    pub c: Vec<S>,
    pub lambda: S,
    pub f: LinearForm<S>,
    pub fi: Vec<LinearForm<S>>,
    /// Numerators of the eigenvalue functions lambda = f'/f and mu = f''/f;
    /// each must glue with the same factor A as f.
    pub lam_num: LinearForm<S>,
    pub mu_num: LinearForm<S>,
}

impl<S: Scalar> GammaParams<S> {
    pub fn g(&self) -> usize {
        self.p.len()
    }

    /// g = 2, (a1,b1) = (1,0), (a2,b2) = (0,1), P = diag(2,3), A = 1, Lambda = 1, c = (2,-1).
    pub fn standard() -> Self {
        let i = S::from_i64;
        let pd = [i(2), i(3)];
        let a = S::one();
        let c = vec![i(2), i(-1)];
        GammaParams {
            a1: S::one(),
            b1: S::zero(),
            a2: S::zero(),
            b2: S::one(),
            p: vec![vec![i(2), i(0)], vec![i(0), i(3)]],
            f: LinearForm::glued(vec![i(1), i(1)], &a, &pd),
            fi: vec![LinearForm::glued(vec![i(1), i(2)], &c[0], &pd), LinearForm::glued(vec![i(3), i(1)], &c[1], &pd)],
            lam_num: LinearForm::glued(vec![i(1), i(-1)], &a, &pd),
            mu_num: LinearForm::glued(vec![i(2), i(1)], &a, &pd),
            a,
            c,
            lambda: S::one(),
        }
    }

    pub fn apply_p(&self, t: &[S]) -> Vec<S> {
        self.p
            .iter()
            .map(|row| row.iter().zip(t).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect()
    }

    pub fn validate(&self, trials: usize, seed: u64) -> Result<()> {
        use rand::SeedableRng;
        let g = self.g();
        if g == 0 || self.p.iter().any(|r| r.len() != g) {
            return Err(Error::NotSquare);
        }
        for (name, len) in [("c", self.c.len()), ("f_i", self.fi.len())] {
            if len != g {
                return Err(Error::InvalidParams(format!("{name} needs {g} entries, got {len}")));
            }
        }
        let forms = std::iter::once(&self.f).chain(&self.fi).chain([&self.lam_num, &self.mu_num]);
        if forms.clone().any(|f| f.alpha.len() != g || f.beta.len() != g) {
            return Err(Error::InvalidParams("linear form of wrong length".into()));
        }
        if (self.a1.is_zero() && self.b1.is_zero()) || (self.a2.is_zero() && self.b2.is_zero()) {
            return Err(Error::InvalidParams("(a_i, b_i) must be nonzero".into()));
        }
        if (self.a1.clone() * self.b2.clone() - self.a2.clone() * self.b1.clone()).is_zero() {
            return Err(Error::InvalidParams("[a1,b1] and [a2,b2] coincide".into()));
        }
        if self.a.is_zero() || self.lambda.is_zero() || self.c.iter().any(|v| v.is_zero()) {
            return Err(Error::InvalidParams("A, Lambda and c_i must be nonzero".into()));
        }
        self.check_spectrum()?;

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factors: Vec<(&str, &LinearForm<S>, &S)> = std::iter::once(("f", &self.f, &self.a))
            .chain(self.fi.iter().zip(&self.c).map(|(f, c)| ("f_i", f, c)))
            .chain([("lambda numerator", &self.lam_num, &self.a), ("mu numerator", &self.mu_num, &self.a)])
            .collect();
        for _ in 0..trials {
            let t: Vec<S> = (0..g).map(|_| S::random(&mut rng, 3.0)).collect();
            let pt = self.apply_p(&t);
            for (name, form, k) in &factors {
                let l = form.eval(&self.a1, &self.b1, &t);
                let r = (*k).clone() * form.eval(&self.a2, &self.b2, &pt);
                let diff = (l.clone() - r.clone()).magnitude();
                let ok = if S::is_exact() { diff == 0.0 } else { diff <= 1e-12 * l.magnitude().max(r.magnitude()).max(1.0) };
                if !ok {
                    return Err(Error::InvalidParams(format!("{name} violates its gluing identity")));
                }
            }
        }
        Ok(())
    }

    /// P nondegenerate with distinct eigenvalues and f(a1, b1, v_j) != 0 on
    /// every eigenvector. Done in floating point even for rational input.
    fn check_spectrum(&self) -> Result<()> {
        let g = self.g();
        let m = DMatrix::<C64>::from_fn(g, g, |i, j| self.p[i][j].to_complex());
        let scale = m.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let (_, t) = nalgebra::Schur::new(m.clone()).unpack();
        let eig: Vec<C64> = (0..g).map(|i| t[(i, i)]).collect();
        let tol = 1e-10 * scale;
        if eig.iter().any(|e| e.norm() <= tol) {
            return Err(Error::InvalidParams("P is degenerate".into()));
        }
        for i in 0..g {
            for j in 0..i {
                if (eig[i] - eig[j]).norm() <= 1e-8 * scale {
                    return Err(Error::InvalidParams("P has a repeated eigenvalue".into()));
                }
            }
        }
        let fa: Vec<C64> = self.f.alpha.iter().map(|v| v.to_complex()).collect();
        let fb: Vec<C64> = self.f.beta.iter().map(|v| v.to_complex()).collect();
        let (a1, b1) = (self.a1.to_complex(), self.b1.to_complex());
        for e in &eig {
            let shifted = Mat::from_rows((0..g).map(|i| (0..g).map(|j| m[(i, j)] - if i == j { *e } else { C64::new(0.0, 0.0) }).collect()).collect());
            let vs = crate::linalg::float::nullspace(&shifted, 1e-9);
            let v = vs.first().ok_or_else(|| Error::InvalidParams("eigenvector not found".into()))?;
            let val: C64 = (0..g).map(|i| (fa[i] * a1 + fb[i] * b1) * v[i]).sum();
            let size = (0..g).map(|i| (fa[i] * a1 + fb[i] * b1).norm()).fold(0.0, f64::max);
            if val.norm() <= 1e-10 * size.max(1e-300) {
                return Err(Error::InvalidParams("f(a1, b1, v) vanishes on an eigenvector of P".into()));
            }
        }
        Ok(())
    }
}

/// Polynomial in t keyed by exponent vectors.
type Poly<S> = BTreeMap<Vec<i64>, S>;

fn poly_mul<S: Scalar>(a: &Poly<S>, b: &Poly<S>) -> Poly<S> {
    let mut out: Poly<S> = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            let v = ca.clone() * cb.clone();
            let slot = out.entry(e).or_insert_with(S::zero);
            *slot = slot.clone() + v;
        }
    }
    out
}

/// Exponent vectors alpha in N^g with |alpha| = k, lexicographic.
fn monomials(g: usize, k: usize) -> Vec<MultiIndex> {
    MultiIndex::simplex(g, k as i64).into_iter().filter(|m| m.l1() == k as i64).collect()
}

pub struct GammaFamily<S> {
    pub params: GammaParams<S>,
    pub level: usize,
    monos: Vec<MultiIndex>,
    /// Rows: target monomial of the t-polynomial; columns: unknowns (j, alpha).
    left: Mat<S>,
    right: Mat<S>,
    dim: usize,
    cache: RwLock<HashMap<Vec<i64>, Arc<Vec<Vec<S>>>>>,
}

impl<S: Scalar> std::fmt::Debug for GammaFamily<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GammaFamily(g={}, k={}, dim={})", self.params.g(), self.level, self.dim)
    }
}

impl<S: Scalar> Clone for GammaFamily<S> {
    fn clone(&self) -> Self {
        GammaFamily {
            params: self.params.clone(),
            level: self.level,
            monos: self.monos.clone(),
            left: self.left.clone(),
            right: self.right.clone(),
            dim: self.dim,
            cache: RwLock::new(self.cache.read().map(|c| c.clone()).unwrap_or_default()),
        }
    }
}

fn binom(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Expected nullspace dimension g C(g+k-1, g).
pub fn expected_dimension(g: usize, k: usize) -> usize {
    g * binom(g + k - 1, g)
}

pub fn make_gamma_basis<S: Scalar>(p: GammaParams<S>, k: usize) -> Result<GammaFamily<S>> {
    if k == 0 {
        return Err(Error::InvalidParams("level k must be positive".into()));
    }
    p.validate(10, 11)?;
    let g = p.g();
    let monos = monomials(g, k);
    let m = monos.len();
    let unknowns = (k + 1) * m;
    let row_of: HashMap<Vec<i64>, usize> = monos.iter().enumerate().map(|(i, a)| (a.0.clone(), i)).collect();

    // t^alpha and (P t)^alpha expanded in the monomial basis.
    let linear: Vec<Poly<S>> = (0..g)
        .map(|i| (0..g).map(|l| (MultiIndex::unit(g, l).0, p.p[i][l].clone())).collect())
        .collect();
    let mut left = Mat::<S>::zeros(m, unknowns);
    let mut right = Mat::<S>::zeros(m, unknowns);
    for (ai, alpha) in monos.iter().enumerate() {
        let mut pt: Poly<S> = BTreeMap::from([(vec![0; g], S::one())]);
        for (i, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                pt = poly_mul(&pt, &linear[i]);
            }
        }
        for j in 0..=k {
            let col = j * m + ai;
            let w1 = p.a1.powi(j as i64).unwrap() * p.b1.powi((k - j) as i64).unwrap();
            let w2 = p.a2.powi(j as i64).unwrap() * p.b2.powi((k - j) as i64).unwrap();
            left.set(ai, col, w1);
            for (e, c) in &pt {
                let r = row_of[e];
                let cur = right.get(r, col).clone();
                right.set(r, col, cur + w2.clone() * c.clone());
            }
        }
    }
    let mut fam = GammaFamily { params: p, level: k, monos, left, right, dim: 0, cache: RwLock::new(HashMap::new()) };
    let expected = expected_dimension(g, k);
    let got = fam.coefficients(&vec![0; g])?.len();
    if got != expected {
        return Err(Error::UnexpectedNullspaceDimension { expected, got });
    }
    fam.dim = got;
    Ok(fam)
}

impl<S: Scalar> GammaFamily<S> {
    pub fn kappa(&self, n: &[i64]) -> Result<S> {
        let p = &self.params;
        let mut k = p.a.powi(-(self.level as i64)).ok_or(Error::SpectralPole)?;
        for (j, &nj) in n.iter().enumerate() {
            k = k * (p.c[j].clone() / p.a.clone()).powi(nj).ok_or(Error::SpectralPole)?;
        }
        Ok(k)
    }

    /// The linear system at n: kappa_n L - Lambda R.
    pub fn system(&self, n: &[i64]) -> Result<Mat<S>> {
        let kappa = self.kappa(n)?;
        Ok(self.left.scale(&kappa).sub(&self.right.scale(&self.params.lambda)))
    }

    /// Normalized nullspace vectors h_{j,alpha}(n), unknowns ordered (j, alpha)
    /// with j the power of z1.
    pub fn coefficients(&self, n: &[i64]) -> Result<Arc<Vec<Vec<S>>>> {
        if let Some(v) = self.cache.read().ok().and_then(|c| c.get(n).cloned()) {
            return Ok(v);
        }
        let sys = self.system(n)?;
        let mut vs = S::nullspace(&sys, 1e-10);
        for v in vs.iter_mut() {
            let (imax, _) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |(bi, bm), (i, x)| if x.magnitude() > bm * (1.0 + 1e-12) { (i, x.magnitude()) } else { (bi, bm) });
            let pivot = v[imax].clone();
            for x in v.iter_mut() {
                *x = x.clone() / pivot.clone();
            }
        }
        let vs = Arc::new(vs);
        if let Ok(mut c) = self.cache.write() {
            c.insert(n.to_vec(), vs.clone());
        }
        Ok(vs)
    }

    /// h(n, z1, z2, t) for basis element `j`.
    pub fn h(&self, j: usize, n: &[i64], z1: &S, z2: &S, t: &[S]) -> Result<S> {
        let vs = self.coefficients(n)?;
        let v = vs.get(j).ok_or_else(|| Error::InvalidParams(format!("basis index {j} out of range")))?;
        let m = self.monos.len();
        let k = self.level;
        let mut acc = S::zero();
        for jj in 0..=k {
            let zpart = z1.powi(jj as i64).unwrap() * z2.powi((k - jj) as i64).unwrap();
            for (ai, alpha) in self.monos.iter().enumerate() {
                let c = &v[jj * m + ai];
                if c.is_zero() {
                    continue;
                }
                let mut tp = S::one();
                for (i, &e) in alpha.0.iter().enumerate() {
                    tp = tp * t[i].powi(e).unwrap();
                }
                acc = acc + c.clone() * zpart.clone() * tp;
            }
        }
        Ok(acc)
    }

    fn forms(&self, p: &[S]) -> Result<(S, Vec<S>)> {
        let f = self.params.f.at(p);
        if f.is_zero() {
            return Err(Error::SpectralPole);
        }
        Ok((f, self.params.fi.iter().map(|fi| fi.at(p)).collect()))
    }

    fn value(&self, j: usize, n: &[i64], k: &[i64], p: &[S], f: &S, fi: &[S]) -> Result<S> {
        let mut v = self.h(j, n, &p[0], &p[1], &p[2..])? * f.powi(-(self.level as i64)).ok_or(Error::SpectralPole)?;
        for (i, &ki) in k.iter().enumerate() {
            v = v * (fi[i].clone() / f.clone()).powi(ki).ok_or(Error::SpectralPole)?;
        }
        Ok(v)
    }

    /// Residual of the gluing identity psi(n, a1, b1, t) - Lambda psi(n, a2, b2, P t).
    pub fn gluing_residual(&self, j: usize, n: &[i64], t: &[S]) -> Result<S> {
        let p = &self.params;
        let mut left = vec![p.a1.clone(), p.b1.clone()];
        left.extend_from_slice(t);
        let mut right = vec![p.a2.clone(), p.b2.clone()];
        right.extend(p.apply_p(t));
        Ok(self.eval(j, n, &left)? - p.lambda.clone() * self.eval(j, n, &right)?)
    }

    /// lambda = f'/f and mu = f''/f.
    pub fn eigenvalue(&self, which: Which) -> SpectralFunction<S> {
        let f = self.params.f.clone();
        let (name, num) = match which {
            Which::Lambda => ("lambda", self.params.lam_num.clone()),
            Which::Mu => ("mu", self.params.mu_num.clone()),
        };
        SpectralFunction::new(name, move |p: &[S]| {
            let d = f.at(p);
            if d.is_zero() {
                return Err(Error::SpectralPole);
            }
            Ok(num.at(p) / d)
        })
    }
}

impl<S: Scalar> BasisFamily<S> for GammaFamily<S> {
    fn tag(&self) -> FamilyTag {
        FamilyTag::GammaRational
    }
    fn rank(&self) -> usize {
        self.dim
    }
    fn g(&self) -> usize {
        self.params.g()
    }

    fn eval(&self, j: usize, n: &[i64], p: &[S]) -> Result<S> {
        let (f, fi) = self.forms(p)?;
        self.value(j, n, n, p, &f, &fi)
    }

    fn eval_scaled(&self, n: &[i64], items: &[(usize, MultiIndex)], p: &[S]) -> Result<Vec<S>> {
        let (f, fi) = self.forms(p)?;
        items.iter().map(|(j, k)| self.value(*j, &k.offset(n), &k.0, p, &f, &fi)).collect()
    }

    fn admissible(&self, p: &[S], floor: f64) -> bool {
        let (f, fi) = (self.params.f.at(p), self.params.fi.iter().map(|x| x.at(p)));
        above_floor(&f, floor) && fi.into_iter().all(|v| above_floor(&v, floor))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        (0..self.params.g() + 2).map(|_| S::random(rng, 3.0)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;
    use rand::SeedableRng;

    #[test]
    fn dimension_count_matches_formula() {
        // (k+1) C(g+k-1,k) unknowns minus C(g+k-1,k) equations
        for g in 1..5 {
            for k in 1..5 {
                let m = binom(g + k - 1, k);
                assert_eq!(k * m, expected_dimension(g, k), "g={g} k={k}");
            }
        }
    }

    #[test]
    fn genus2_level1_has_two_dimensional_nullspace() {
        let fam = make_gamma_basis(GammaParams::<Rat>::standard(), 1).unwrap();
        assert_eq!(fam.rank(), 2);
        let sys = fam.system(&[3, -2]).unwrap();
        assert_eq!(Rat::rank(&sys, 0.0), 2);
    }

    #[test]
    fn gluing_holds_exactly_on_random_t() {
        let fam = make_gamma_basis(GammaParams::<Rat>::standard(), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let t = vec![Rat::random(&mut rng, 3.0), Rat::random(&mut rng, 3.0)];
            let pt = fam.params.apply_p(&t);
            let f1 = fam.params.f.eval(&fam.params.a1, &fam.params.b1, &t);
            let f2 = fam.params.f.eval(&fam.params.a2, &fam.params.b2, &pt);
            if f1.is_zero() || f2.is_zero() || fam.params.fi.iter().any(|fi| fi.eval(&fam.params.a2, &fam.params.b2, &pt).is_zero()) {
                continue;
            }
            for j in 0..2 {
                for n in [[0, 0], [1, 2], [-2, 1]] {
                    assert!(fam.gluing_residual(j, &n, &t).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn float_and_exact_agree_and_are_normalized() {
        let exact = make_gamma_basis(GammaParams::<Rat>::standard(), 1).unwrap();
        let float = make_gamma_basis(GammaParams::<C64>::standard(), 1).unwrap();
        for n in [[0, 0], [2, -1]] {
            let ve = exact.coefficients(&n).unwrap();
            let vf = float.coefficients(&n).unwrap();
            for v in vf.iter() {
                let m = v.iter().map(|x| x.norm()).fold(0.0, f64::max);
                assert!((m - 1.0).abs() < 1e-12);
            }
            // same span: each float vector is a combination of the exact ones
            let rows: Vec<Vec<C64>> = ve.iter().map(|v| v.iter().map(|x| x.to_complex()).collect()).chain(vf.iter().cloned()).collect();
            assert_eq!(C64::rank(&Mat::from_rows(rows), 1e-9), 2);
        }
    }

    #[test]
    fn level2_dimension_and_gluing() {
        let fam = make_gamma_basis(GammaParams::<Rat>::standard(), 2).unwrap();
        assert_eq!(fam.rank(), expected_dimension(2, 2));
        let t = vec![Rat::from_ratio(1, 2), Rat::from_ratio(-3, 1)];
        for j in 0..fam.rank() {
            assert!(fam.gluing_residual(j, &[1, 1], &t).unwrap().is_zero());
        }
    }

    #[test]
    fn repeated_eigenvalue_rejected() {
        let mut p = GammaParams::<Rat>::standard();
        p.p = vec![vec![Rat::from_i64(2), <Rat as Scalar>::zero()], vec![<Rat as Scalar>::zero(), Rat::from_i64(2)]];
        assert!(make_gamma_basis(p, 1).is_err());
    }
}
