//! The rational surface Omega: CP1 x CP1 with ([1,0],[t]) glued to ([t],[0,1]).
//!
//! Points are P = (z1, z2, w1, w2). With kappa(n) = prod (c_j/B)^{n_j} / (B Lambda),
//! psi_1 = z2 w1 / g * prod (g_j/g)^{n_j}
//! psi_2 = (z1 w1 + kappa z1 w2 + kappa^2 z2 w2) / g * prod (g_j/g)^{n_j}
//! which reduces to the 2^{n1}, (-1)^{n2} form for the standard data.

use rand_chacha::ChaCha8Rng;

use super::{above_floor, BasisFamily, FamilyTag, Point, SpectralFunction, Which};
use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bilinear form alpha z1w1 + beta z1w2 + gamma z2w1 + delta z2w2.
#[derive(Debug, Clone, PartialEq)]
pub struct Bilinear<S>(pub [S; 4]);

impl<S: Scalar> Bilinear<S> {
    pub fn eval(&self, p: &[S]) -> S {
        let [a, b, c, d] = &self.0;
        a.clone() * p[0].clone() * p[2].clone()
            + b.clone() * p[0].clone() * p[3].clone()
            + c.clone() * p[1].clone() * p[2].clone()
            + d.clone() * p[1].clone() * p[3].clone()
    }

    fn ints(v: [i64; 4]) -> Self {
        Bilinear(v.map(S::from_i64))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaParams<S> {
    pub g: Bilinear<S>,
    pub g1: Bilinear<S>,
    pub g2: Bilinear<S>,
    pub b: S,
    pub c1: S,
    pub c2: S,
    pub lambda: S,
}

impl<S: Scalar> OmegaParams<S> {
    /// g = z1w1 + z1w2 + z2w2, g1 = 4z1w1 + 2z1w2 + z2w2, g2 = z1w1 - z1w2 + z2w2,
    /// B = 1, c = (2, -1), Lambda = 1.
    pub fn standard() -> Self {
        OmegaParams {
            g: Bilinear::ints([1, 1, 0, 1]),
            g1: Bilinear::ints([4, 2, 0, 1]),
            g2: Bilinear::ints([1, -1, 0, 1]),
            b: S::one(),
            c1: S::from_i64(2),
            c2: S::from_i64(-1),
            lambda: S::one(),
        }
    }

    /// Checks g(0,1,0,1) != 0 and the two gluing identities on `trials`
    /// random t (exactly for rationals, to 1e-12 relative for floats).
    pub fn validate(&self, trials: usize, seed: u64) -> Result<()> {
        use rand::SeedableRng;
        if self.g.eval(&[S::zero(), S::one(), S::zero(), S::one()]).is_zero() {
            return Err(Error::InvalidParams("g(0,1,0,1) = 0".into()));
        }
        for v in [&self.b, &self.c1, &self.c2, &self.lambda] {
            if v.is_zero() {
                return Err(Error::InvalidParams("B, c_i and Lambda must be nonzero".into()));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let t1 = S::random(&mut rng, 3.0);
            let t2 = S::random(&mut rng, 3.0);
            let left = [S::one(), S::zero(), t1.clone(), t2.clone()];
            let right = [t1, t2, S::zero(), S::one()];
            for (name, form, k) in [("g", &self.g, &self.b), ("g1", &self.g1, &self.c1), ("g2", &self.g2, &self.c2)] {
                let l = form.eval(&left);
                let r = k.clone() * form.eval(&right);
                let diff = (l.clone() - r.clone()).magnitude();
                let ok = if S::is_exact() { diff == 0.0 } else { diff <= 1e-12 * l.magnitude().max(r.magnitude()).max(1.0) };
                if !ok {
                    return Err(Error::InvalidParams(format!("{name} violates its gluing identity")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OmegaFamily<S> {
    pub params: OmegaParams<S>,
}

pub fn make_omega_basis<S: Scalar>(p: OmegaParams<S>) -> Result<OmegaFamily<S>> {
    p.validate(10, 7)?;
    Ok(OmegaFamily { params: p })
}

impl<S: Scalar> OmegaFamily<S> {
    pub fn kappa(&self, n: &[i64]) -> Result<S> {
        let p = &self.params;
        let r1 = (p.c1.clone() / p.b.clone()).powi(n[0]).ok_or(Error::SpectralPole)?;
        let r2 = (p.c2.clone() / p.b.clone()).powi(n[1]).ok_or(Error::SpectralPole)?;
        Ok(r1 * r2 / (p.b.clone() * p.lambda.clone()))
    }

    fn numerator(&self, j: usize, n: &[i64], p: &[S]) -> Result<S> {
        match j {
            0 => Ok(p[1].clone() * p[2].clone()),
            1 => {
                let k = self.kappa(n)?;
                Ok(p[0].clone() * p[2].clone()
                    + k.clone() * p[0].clone() * p[3].clone()
                    + k.clone() * k * p[1].clone() * p[3].clone())
            }
            _ => Err(Error::InvalidParams(format!("basis index {j} out of range"))),
        }
    }

    fn forms(&self, p: &[S]) -> Result<(S, S, S)> {
        let g = self.params.g.eval(p);
        if g.is_zero() {
            return Err(Error::SpectralPole);
        }
        Ok((g, self.params.g1.eval(p), self.params.g2.eval(p)))
    }

    /// lambda_1 = z2 w1 / g, lambda_2 = z1 z2 w1 w2 / g^2.
    pub fn eigenvalue(&self, which: Which) -> SpectralFunction<S> {
        let g = self.params.g.clone();
        match which {
            Which::Lambda => SpectralFunction::new("lambda_1", move |p: &[S]| {
                let d = g.eval(p);
                if d.is_zero() {
                    return Err(Error::SpectralPole);
                }
                Ok(p[1].clone() * p[2].clone() / d)
            }),
            Which::Mu => SpectralFunction::new("lambda_2", move |p: &[S]| {
                let d = g.eval(p);
                if d.is_zero() {
                    return Err(Error::SpectralPole);
                }
                Ok(p[0].clone() * p[1].clone() * p[2].clone() * p[3].clone() / (d.clone() * d))
            }),
        }
    }
}

impl<S: Scalar> BasisFamily<S> for OmegaFamily<S> {
    fn tag(&self) -> FamilyTag {
        FamilyTag::OmegaRational
    }
    fn rank(&self) -> usize {
        2
    }
    fn g(&self) -> usize {
        2
    }

    fn eval(&self, j: usize, n: &[i64], p: &[S]) -> Result<S> {
        let (g, g1, g2) = self.forms(p)?;
        let prod = (g1 / g.clone()).powi(n[0]).ok_or(Error::SpectralPole)?
            * (g2 / g.clone()).powi(n[1]).ok_or(Error::SpectralPole)?;
        Ok(self.numerator(j, n, p)? / g * prod)
    }

    fn eval_scaled(&self, n: &[i64], items: &[(usize, MultiIndex)], p: &[S]) -> Result<Vec<S>> {
        let (g, g1, g2) = self.forms(p)?;
        let r1 = g1 / g.clone();
        let r2 = g2 / g.clone();
        items
            .iter()
            .map(|(j, k)| {
                let prod = r1.powi(k.0[0]).ok_or(Error::SpectralPole)? * r2.powi(k.0[1]).ok_or(Error::SpectralPole)?;
                Ok(self.numerator(*j, &k.offset(n), p)? / g.clone() * prod)
            })
            .collect()
    }

    fn admissible(&self, p: &[S], floor: f64) -> bool {
        [self.params.g.eval(p), self.params.g1.eval(p), self.params.g2.eval(p)]
            .iter()
            .all(|v| above_floor(v, floor))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        (0..4).map(|_| S::random(rng, 3.0)).collect()
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
    fn standard_data_matches_displayed_numerator() {
        let f = make_omega_basis(OmegaParams::<Rat>::standard()).unwrap();
        // n = (1, 1): z1w1 + (-1) 2 z1w2 + 4 z2w2
        let p = vec![q(2, 1), q(3, 1), q(5, 1), q(7, 1)];
        let num = f.numerator(1, &[1, 1], &p).unwrap();
        assert_eq!(num, q(2 * 5 - 2 * 2 * 7 + 4 * 3 * 7, 1));
        let g = f.params.g.eval(&p);
        assert_eq!(f.eval(0, &[0, 0], &p).unwrap(), q(15, 1) / g);
    }

    #[test]
    fn gluing_identities_hold_exactly() {
        let f = make_omega_basis(OmegaParams::<Rat>::standard()).unwrap();
        for (t1, t2) in [(q(1, 3), q(5, 2)), (q(-7, 2), q(2, 1)), (q(3, 1), q(-1, 4))] {
            let a = vec![q(1, 1), q(0, 1), t1.clone(), t2.clone()];
            let b = vec![t1, t2, q(0, 1), q(1, 1)];
            for j in 0..2 {
                for n in [[0, 0], [2, 1], [1, 3], [-1, 2]] {
                    assert_eq!(f.eval(j, &n, &a).unwrap(), f.eval(j, &n, &b).unwrap());
                }
            }
            for w in [Which::Lambda, Which::Mu] {
                let l = f.eigenvalue(w);
                assert_eq!(l.eval(&a).unwrap(), l.eval(&b).unwrap());
            }
        }
    }

    #[test]
    fn broken_gluing_is_rejected() {
        let mut p = OmegaParams::<Rat>::standard();
        p.g1 = Bilinear::ints([4, 3, 0, 1]);
        assert!(make_omega_basis(p).is_err());
    }
}
