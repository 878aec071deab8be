//! Rational degeneration: theta replaced by sigma(z) = z1^3/3 - z2.

use rand_chacha::ChaCha8Rng;

use super::{above_floor, BasisFamily, FamilyTag, Point, SpectralFunction, Which};
use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::theta::sigma_schur;

#[derive(Debug, Clone, PartialEq)]
pub struct SchurParams<S> {
    pub h: [S; 2],
    pub x: [S; 2],
    pub beta: [S; 2],
}

impl<S: Scalar> Default for SchurParams<S> {
    /// h = (1, 1), x = 0, beta = (1, 1/3).
    fn default() -> Self {
        SchurParams {
            h: [S::one(), S::one()],
            x: [S::zero(), S::zero()],
            beta: [S::one(), S::from_ratio(1, 3)],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchurFamily<S> {
    pub params: SchurParams<S>,
}

pub fn make_schur_basis<S: Scalar>() -> SchurFamily<S> {
    SchurFamily { params: SchurParams::default() }
}

fn sig<S: Scalar>(a: S, b: S) -> S {
    sigma_schur(&a, &b)
}

impl<S: Scalar> SchurFamily<S> {
    fn nonzero_sigma(&self, z: &[S]) -> Result<S> {
        let s = sig(z[0].clone(), z[1].clone());
        if s.is_zero() {
            Err(Error::SpectralPole)
        } else {
            Ok(s)
        }
    }

    /// sigma(z - h_i e_i) for i = 1, 2.
    fn shifted_sigmas(&self, z: &[S]) -> [S; 2] {
        let h = &self.params.h;
        [
            sig(z[0].clone() - h[0].clone(), z[1].clone()),
            sig(z[0].clone(), z[1].clone() - h[1].clone()),
        ]
    }

    fn numerator(&self, j: usize, n: &[i64], z: &[S]) -> Result<(S, i64)> {
        let p = &self.params;
        let w0 = z[0].clone() + p.x[0].clone() + p.h[0].clone() * S::from_i64(n[0]);
        let w1 = z[1].clone() + p.x[1].clone() + p.h[1].clone() * S::from_i64(n[1]);
        match j {
            0 => Ok((sig(w0, w1), 1)),
            1 => Ok((
                sig(w0 + p.beta[0].clone(), w1 + p.beta[1].clone())
                    * sig(z[0].clone() - p.beta[0].clone(), z[1].clone() - p.beta[1].clone()),
                2,
            )),
            _ => Err(Error::InvalidParams(format!("basis index {j} out of range"))),
        }
    }

    /// sigma(z - h_i e_i) sigma(z + h_i e_i) / sigma(z)^2.
    pub fn lambda_direction(&self, i: usize) -> SpectralFunction<S> {
        let h = self.params.h.clone();
        let this = self.clone();
        SpectralFunction::new(if i == 0 { "lambda" } else { "mu" }, move |z: &[S]| {
            let s = this.nonzero_sigma(z)?;
            let (a, b) = if i == 0 {
                (
                    sig(z[0].clone() - h[0].clone(), z[1].clone()),
                    sig(z[0].clone() + h[0].clone(), z[1].clone()),
                )
            } else {
                (
                    sig(z[0].clone(), z[1].clone() - h[1].clone()),
                    sig(z[0].clone(), z[1].clone() + h[1].clone()),
                )
            };
            Ok(a * b / (s.clone() * s))
        })
    }

    pub fn eigenvalue(&self, which: Which) -> SpectralFunction<S> {
        self.lambda_direction(if which == Which::Lambda { 0 } else { 1 })
    }
}

impl<S: Scalar> BasisFamily<S> for SchurFamily<S> {
    fn tag(&self) -> FamilyTag {
        FamilyTag::SchurDegenerate
    }
    fn rank(&self) -> usize {
        2
    }
    fn g(&self) -> usize {
        2
    }

    fn eval(&self, j: usize, n: &[i64], z: &[S]) -> Result<S> {
        let s = self.nonzero_sigma(z)?;
        let sh = self.shifted_sigmas(z);
        let (num, lvl) = self.numerator(j, n, z)?;
        let mut v = num * s.powi(-lvl).ok_or(Error::SpectralPole)?;
        for i in 0..2 {
            v = v * (sh[i].clone() / s.clone()).powi(n[i]).ok_or(Error::SpectralPole)?;
        }
        Ok(v)
    }

    fn eval_scaled(&self, n: &[i64], items: &[(usize, MultiIndex)], z: &[S]) -> Result<Vec<S>> {
        let s = self.nonzero_sigma(z)?;
        let sh = self.shifted_sigmas(z);
        let r = [sh[0].clone() / s.clone(), sh[1].clone() / s.clone()];
        items
            .iter()
            .map(|(j, k)| {
                let (num, lvl) = self.numerator(*j, &k.offset(n), z)?;
                let mut v = num * s.powi(-lvl).ok_or(Error::SpectralPole)?;
                for i in 0..2 {
                    v = v * r[i].powi(k.0[i]).ok_or(Error::SpectralPole)?;
                }
                Ok(v)
            })
            .collect()
    }

    fn admissible(&self, z: &[S], floor: f64) -> bool {
        let s = sig(z[0].clone(), z[1].clone());
        let sh = self.shifted_sigmas(z);
        above_floor(&s, floor) && sh.iter().all(|v| above_floor(v, floor))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        vec![S::random(rng, 5.0), S::random(rng, 5.0)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    fn q(p: i64, d: i64) -> Rat {
        Rat::from_ratio(p, d)
    }

    #[test]
    fn base_cases() {
        let f = make_schur_basis::<Rat>();
        let z = vec![q(3, 1), q(1, 1)];
        assert_eq!(f.eval(0, &[0, 0], &z).unwrap(), q(1, 1));
        // psi_2(0) = sigma(z + beta) sigma(z - beta) / sigma(z)^2
        let want = sigma_schur(&q(4, 1), &q(4, 3)) * sigma_schur(&q(2, 1), &q(2, 3)) / (q(8, 1) * q(8, 1));
        assert_eq!(f.eval(1, &[0, 0], &z).unwrap(), want);
    }

    #[test]
    fn hand_expanded_value() {
        // psi_1((1,0), (3,1)) = sigma(4,1)/sigma(3,1) * sigma(2,1)/sigma(3,1)
        //                     = (61/3)/8 * (5/3)/8 = 305/576
        let f = make_schur_basis::<Rat>();
        assert_eq!(f.eval(0, &[1, 0], &[q(3, 1), q(1, 1)]).unwrap(), q(305, 576));
    }

    #[test]
    fn lambda_exact_value() {
        // ((8/3 - 1)(64/3 - 1)) / 8^2
        let f = make_schur_basis::<Rat>();
        let l = f.eigenvalue(Which::Lambda).eval(&[q(3, 1), q(1, 1)]).unwrap();
        assert_eq!(l, (q(8, 3) - q(1, 1)) * (q(64, 3) - q(1, 1)) / q(64, 1));
    }

    #[test]
    fn pole_reported() {
        let f = make_schur_basis::<Rat>();
        assert_eq!(f.eval(0, &[0, 0], &[q(0, 1), q(0, 1)]), Err(Error::SpectralPole));
    }
}
