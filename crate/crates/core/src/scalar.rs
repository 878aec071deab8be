//! Scalar fields: complex floats and exact rationals.
//!
//! Both implement [`Scalar`]. Mixing them is a type error; the only bridge is
//! [`Scalar::to_complex`], which goes one way.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::linalg::{self, Solve};
use crate::matrix::Mat;

pub type C64 = Complex64;
pub type Rat = BigRational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ScalarField {
    ComplexFloat,
    ExactRational,
}

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const FIELD: ScalarField;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(p: i64, q: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn to_complex(&self) -> C64;

    fn is_exact() -> bool {
        Self::FIELD == ScalarField::ExactRational
    }

    /// `None` for zero.
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self.clone())
        }
    }

    /// Integer power; negative exponents fail on zero.
    fn powi(&self, k: i64) -> Option<Self> {
        let base = if k < 0 { self.inv()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Self::one();
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * sq.clone();
            }
            e >>= 1;
            if e > 0 {
                sq = sq.clone() * sq;
            }
        }
        Some(acc)
    }

    /// Least squares (float) or exact consistent solve (rational).
    fn solve(a: &Mat<Self>, b: &[Self], rank_tol: f64) -> Solve<Self>;

    fn nullspace(a: &Mat<Self>, rank_tol: f64) -> Vec<Vec<Self>>;

    fn rank(a: &Mat<Self>, rank_tol: f64) -> usize;

    /// Random value in a box of half-width `scale` around the origin
    /// (rationals draw small numerators over small denominators).
    fn random<R: Rng>(rng: &mut R, scale: f64) -> Self;

    /// Probe value for application-level checks: an integer in [-9, 9]
    /// for rationals, a point of the unit disk otherwise.
    fn probe<R: Rng>(rng: &mut R) -> Self;

    /// Nearest representable value (rationals take the exact binary value).
    fn from_f64(v: f64) -> Self;

    /// Lossless text form: "p/q" for rationals, 17 significant digits otherwise.
    fn exact_string(&self) -> String;
}

impl Scalar for C64 {
    const FIELD: ScalarField = ScalarField::ComplexFloat;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_i64(v: i64) -> Self {
        C64::new(v as f64, 0.0)
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        C64::new(p as f64 / q as f64, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> C64 {
        *self
    }
    fn powi(&self, k: i64) -> Option<Self> {
        if k < 0 && Scalar::is_zero(self) {
            return None;
        }
        Some(Complex64::powi(self, k as i32))
    }
    fn solve(a: &Mat<Self>, b: &[Self], rank_tol: f64) -> Solve<Self> {
        linalg::float::lstsq(a, b, rank_tol)
    }
    fn nullspace(a: &Mat<Self>, rank_tol: f64) -> Vec<Vec<Self>> {
        linalg::float::nullspace(a, rank_tol)
    }
    fn rank(a: &Mat<Self>, rank_tol: f64) -> usize {
        linalg::float::singular_values(a)
            .iter()
            .filter(|&&s| s > rank_tol * linalg::float::max_sv(a))
            .count()
    }
    fn random<R: Rng>(rng: &mut R, scale: f64) -> Self {
        C64::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
    }
    fn probe<R: Rng>(rng: &mut R) -> Self {
        let r: f64 = rng.gen_range(0.0f64..1.0).sqrt();
        C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    }
    fn from_f64(v: f64) -> Self {
        C64::new(v, 0.0)
    }
    fn exact_string(&self) -> String {
        format!("{:.16e}{:+.16e}i", self.re, self.im)
    }
}

impl Scalar for Rat {
    const FIELD: ScalarField = ScalarField::ExactRational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        Rat::new(BigInt::from(p), BigInt::from(q))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        rat_to_f64(&self.abs())
    }
    fn to_complex(&self) -> C64 {
        C64::new(rat_to_f64(self), 0.0)
    }
    fn solve(a: &Mat<Self>, b: &[Self], _rank_tol: f64) -> Solve<Self> {
        linalg::exact::solve(a, b)
    }
    fn nullspace(a: &Mat<Self>, _rank_tol: f64) -> Vec<Vec<Self>> {
        linalg::exact::nullspace(a)
    }
    fn rank(a: &Mat<Self>, _rank_tol: f64) -> usize {
        linalg::exact::rank(a)
    }
    fn random<R: Rng>(rng: &mut R, scale: f64) -> Self {
        let s = (scale.max(1.0) * 4.0) as i64;
        Rat::new(
            BigInt::from(rng.gen_range(-s..=s)),
            BigInt::from(rng.gen_range(1..=4i64)),
        )
    }
    fn probe<R: Rng>(rng: &mut R) -> Self {
        Rat::from_integer(BigInt::from(rng.gen_range(-9..=9i64)))
    }
    fn from_f64(v: f64) -> Self {
        Rat::from_float(v).unwrap_or_else(Zero::zero)
    }
    fn exact_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    // ToPrimitive on BigRational handles huge numerators and denominators
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Parses "p/q" or "p".
pub fn parse_rational(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if Zero::is_zero(&q) {
                None
            } else {
                Some(Rat::new(p, q))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rat::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_are_normalized() {
        let r = Rat::from_ratio(6, -4);
        assert_eq!(r.exact_string(), "-3/2");
        assert_eq!(parse_rational("-3/2"), Some(r));
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn powi_negative() {
        let r = Rat::from_ratio(2, 3);
        assert_eq!(r.powi(-2), Some(Rat::from_ratio(9, 4)));
        assert_eq!(<Rat as Zero>::zero().powi(-1), None);
        let z = C64::new(0.0, 2.0);
        assert!((Scalar::powi(&z, -2).unwrap() - C64::new(-0.25, 0.0)).norm() < 1e-15);
    }
}
