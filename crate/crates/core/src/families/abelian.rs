//! Theta-function families on X = C^g / (Z^g + tau Z^g).
//!
//! psi_1 = theta(z + c + x + nh) / theta(z) * prod_j (theta(z - h_j e_j) / theta(z))^{n_j}
//! psi_2 = theta(z + c + x + nh + beta) theta(z - beta) / theta(z)^2 * (same product)

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{BasisFamily, FamilyTag, Point, SpectralFunction, Which};
use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::scalar::C64;
use crate::theta::{validate_siegel, Theta};

#[derive(Debug, Clone)]
pub struct AbelianDBAParams {
    pub theta: Theta,
    pub c: Vec<C64>,
    pub x0: Vec<C64>,
    pub h: Vec<C64>,
    pub beta: Vec<C64>,
}

fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl AbelianDBAParams {
    pub fn new(theta: Theta, c: Vec<C64>, x0: Vec<C64>, h: Vec<C64>, beta: Vec<C64>) -> Result<Self> {
        let g = theta.genus();
        for v in [&c, &x0, &h, &beta] {
            if v.len() != g {
                return Err(Error::DimensionMismatch { expected: g, got: v.len() });
            }
        }
        if h.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::InvalidParams("every step h_i must be nonzero".into()));
        }
        Ok(AbelianDBAParams { theta, c, x0, h, beta })
    }

    pub fn genus1_default() -> Self {
        let sp = validate_siegel(&[vec![cx(0.1, 1.1)]]).expect("default tau");
        Self::new(Theta::new(sp), vec![cx(0.0, 0.0)], vec![cx(0.05, 0.0)], vec![cx(0.17, 0.0)], vec![cx(0.0, 0.0)])
            .expect("default genus-1 parameters")
    }

    pub fn genus2_default() -> Self {
        let sp = validate_siegel(&[vec![cx(0.0, 2.0), cx(0.5, 0.0)], vec![cx(0.5, 0.0), cx(0.0, 3.0)]])
            .expect("default tau");
        Self::new(
            Theta::new(sp),
            vec![cx(0.0, 0.0); 2],
            vec![cx(0.05, 0.0), cx(0.03, 0.0)],
            vec![cx(0.2, 0.0), cx(0.3, 0.0)],
            vec![cx(0.11, 0.0), cx(0.07, 0.13)],
        )
        .expect("default genus-2 parameters")
    }

    pub fn genus(&self) -> usize {
        self.theta.genus()
    }

    /// c + x + n h (componentwise n_i h_i).
    pub fn base(&self, n: &[i64]) -> Vec<C64> {
        (0..self.genus()).map(|i| self.c[i] + self.x0[i] + self.h[i] * n[i] as f64).collect()
    }

    /// h_i e_i.
    pub fn step(&self, i: usize) -> Vec<C64> {
        let mut v = vec![cx(0.0, 0.0); self.genus()];
        v[i] = self.h[i];
        v
    }
}

pub(crate) fn vadd(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub(crate) fn vsub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn vscale(a: &[C64], s: f64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

#[derive(Debug, Clone)]
pub struct AbelianFamily {
    pub params: AbelianDBAParams,
    rank: usize,
}

pub fn make_genus1_basis(p: AbelianDBAParams) -> Result<AbelianFamily> {
    if p.genus() != 1 {
        return Err(Error::InvalidParams("genus-1 basis needs genus 1".into()));
    }
    Ok(AbelianFamily { params: p, rank: 1 })
}

pub fn make_genus2_basis(p: AbelianDBAParams) -> Result<AbelianFamily> {
    if p.genus() != 2 {
        return Err(Error::InvalidParams("genus-2 basis needs genus 2".into()));
    }
    Ok(AbelianFamily { params: p, rank: 2 })
}

impl AbelianFamily {
    fn th(&self) -> &Theta {
        &self.params.theta
    }

    /// Numerator of psi_j without the n-product, and its theta-power level.
    fn numerator(&self, j: usize, n: &[i64], z: &[C64]) -> Result<(C64, i32)> {
        let b = self.params.base(n);
        match j {
            0 => Ok((self.th().eval(&vadd(z, &b))?.value, 1)),
            1 => {
                let beta = &self.params.beta;
                let a = self.th().eval(&vadd(&vadd(z, &b), beta))?.value;
                let m = self.th().eval(&vsub(z, beta))?.value;
                Ok((a * m, 2))
            }
            _ => Err(Error::InvalidParams(format!("basis index {j} out of range"))),
        }
    }

    /// theta(z) and theta(z - h_i e_i).
    fn base_thetas(&self, z: &[C64]) -> Result<(C64, Vec<C64>)> {
        let t0 = self.th().nonzero(z)?;
        let th = (0..self.g()).map(|i| self.th().eval(&vsub(z, &self.params.step(i))).map(|v| v.value)).collect::<Result<_>>()?;
        Ok((t0, th))
    }

    /// theta(z - s e_i) theta(z + s e_i) / theta(z)^2 for step s = h_i.
    pub fn lambda_direction(&self, i: usize) -> SpectralFunction<C64> {
        let th = self.th().clone();
        let step = self.params.step(i);
        SpectralFunction::new(format!("lambda_{}", i + 1), move |z: &[C64]| {
            let t0 = th.nonzero(z)?;
            Ok(th.eval(&vsub(z, &step))?.value * th.eval(&vadd(z, &step))?.value / (t0 * t0))
        })
    }

    /// Genus 1: lambda = theta(z-h)theta(z+h)/theta^2 and
    /// mu = theta(z-h)theta(z+h/2)^2/theta^3. Genus 2: the two directions.
    pub fn eigenvalue(&self, which: Which) -> SpectralFunction<C64> {
        match (self.g(), which) {
            (_, Which::Lambda) => self.lambda_direction(0),
            (1, Which::Mu) => {
                let th = self.th().clone();
                let h = self.params.step(0);
                let half = vscale(&h, 0.5);
                SpectralFunction::new("mu", move |z: &[C64]| {
                    let t0 = th.nonzero(z)?;
                    let a = th.eval(&vsub(z, &h))?.value;
                    let b = th.eval(&vadd(z, &half))?.value;
                    Ok(a * b * b / (t0 * t0 * t0))
                })
            }
            (_, Which::Mu) => self.lambda_direction(1),
        }
    }
}

impl BasisFamily<C64> for AbelianFamily {
    fn tag(&self) -> FamilyTag {
        if self.rank == 1 {
            FamilyTag::Genus1
        } else {
            FamilyTag::Genus2Abelian
        }
    }

    fn rank(&self) -> usize {
        self.rank
    }

    fn g(&self) -> usize {
        self.params.genus()
    }

    fn eval(&self, j: usize, n: &[i64], z: &[C64]) -> Result<C64> {
        let (t0, th) = self.base_thetas(z)?;
        let (num, lvl) = self.numerator(j, n, z)?;
        let mut v = num / t0.powi(lvl);
        for i in 0..self.g() {
            v *= (th[i] / t0).powi(n[i] as i32);
        }
        Ok(v)
    }

    fn eval_scaled(&self, n: &[i64], items: &[(usize, MultiIndex)], z: &[C64]) -> Result<Vec<C64>> {
        let (t0, th) = self.base_thetas(z)?;
        items
            .iter()
            .map(|(j, k)| {
                let (num, lvl) = self.numerator(*j, &k.offset(n), z)?;
                let mut v = num / t0.powi(lvl);
                for i in 0..self.g() {
                    v *= (th[i] / t0).powi(k.0[i] as i32);
                }
                Ok(v)
            })
            .collect()
    }

    fn admissible(&self, z: &[C64], floor: f64) -> bool {
        let rel = |w: &[C64]| self.th().eval(w).map(|t| t.value.norm() / t.scale).unwrap_or(0.0);
        rel(z) >= floor && (0..self.g()).all(|i| rel(&vsub(z, &self.params.step(i))) >= floor)
    }

    /// Uniform in the fundamental parallelogram z = u + tau v, u, v in [0, 1)^g.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<C64> {
        let g = self.g();
        let u: Vec<f64> = (0..g).map(|_| rng.gen::<f64>()).collect();
        let v: Vec<f64> = (0..g).map(|_| rng.gen::<f64>()).collect();
        self.th().sp.from_real_coords(&u, &v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::sample_spectral_points;

    #[test]
    fn genus1_recurrence_and_base_case() {
        let fam = make_genus1_basis(AbelianDBAParams::genus1_default()).unwrap();
        let pts = sample_spectral_points(&fam, 5, 3, 1e-3).unwrap();
        let th = &fam.params.theta;
        for z in &pts {
            let base = th.value(&vadd(z, &fam.params.base(&[0]))) / th.value(z);
            assert!((fam.eval(0, &[0], z).unwrap() - base).norm() < 1e-12 * base.norm().max(1.0));
            for n in -3..3 {
                let lhs = fam.eval(0, &[n + 1], z).unwrap();
                let ratio = th.value(&vadd(z, &fam.params.base(&[n + 1]))) / th.value(&vadd(z, &fam.params.base(&[n])))
                    * th.value(&vsub(z, &fam.params.step(0)))
                    / th.value(z);
                let rhs = ratio * fam.eval(0, &[n], z).unwrap();
                assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-300), "n={n}");
            }
        }
    }

    #[test]
    fn scaled_evaluation_matches_unscaled_ratio() {
        let fam = make_genus2_basis(AbelianDBAParams::genus2_default()).unwrap();
        let z = sample_spectral_points(&fam, 1, 9, 1e-3).unwrap().remove(0);
        let n = [2, -1];
        let items = vec![(0, MultiIndex::zero(2)), (1, MultiIndex::from([1, 1])), (0, MultiIndex::from([2, 0]))];
        let s = fam.eval_scaled(&n, &items, &z).unwrap();
        let u: Vec<C64> = items.iter().map(|(j, k)| fam.eval(*j, &k.offset(&n), &z).unwrap()).collect();
        for i in 1..3 {
            let a = s[i] / s[0];
            let b = u[i] / u[0];
            assert!((a - b).norm() < 1e-11 * b.norm());
        }
    }

    #[test]
    fn sampling_is_deterministic_and_admissible() {
        let fam = make_genus1_basis(AbelianDBAParams::genus1_default()).unwrap();
        let a = sample_spectral_points(&fam, 50, 42, 1e-3).unwrap();
        let b = sample_spectral_points(&fam, 50, 42, 1e-3).unwrap();
        assert_eq!(a, b);
        for z in &a {
            let t = fam.params.theta.eval(z).unwrap();
            assert!(t.value.norm() / t.scale >= 1e-3);
        }
    }

    #[test]
    fn zero_step_rejected() {
        let mut p = AbelianDBAParams::genus1_default();
        p.h = vec![C64::new(0.0, 0.0)];
        assert!(AbelianDBAParams::new(p.theta, p.c, p.x0, p.h, p.beta).is_err());
    }
}
