//! Genus-1 operators L1 = v2 T^2 + v1 T and L2 = u3 T^3 + u2 T^2 + u1 T for
//! lambda = theta(z-h)theta(z+h)/theta^2 and mu = theta(z-h)theta(z+h/2)^2/theta^3,
//! from the zeros q = 1/2 + tau/2, p = q + h, r = q - h/2.

use std::sync::Arc;

use super::SpecialPoint;
use crate::algebra::{DifferenceOperator, LatticeFunction, MultiIndex, PoleSet};
use crate::error::{Error, Result};
use crate::families::abelian::{vadd, vscale, vsub};
use crate::families::AbelianDBAParams;
use crate::scalar::C64;

pub fn genus1_special_points(p: &AbelianDBAParams) -> Result<Vec<SpecialPoint>> {
    if p.genus() != 1 {
        return Err(Error::InvalidParams("genus-1 special points need genus 1".into()));
    }
    let q = vec![C64::new(0.5, 0.0) + p.theta.sp.tau(0, 0) * 0.5];
    let h = p.step(0);
    let pts = [
        ("p", vadd(&q, &h), vsub(&vadd(&q, &h), &h)),
        ("q", q.clone(), q.clone()),
        ("r", vsub(&q, &vscale(&h, 0.5)), q.clone()),
    ];
    // each point is characterised by a theta value that vanishes: theta(p - h), theta(q), theta(r + h/2)
    pts.into_iter()
        .map(|(name, z, zero_at)| {
            let residual = p.theta.eval(&zero_at)?.value.norm();
            Ok(SpecialPoint { name: name.into(), z, residual })
        })
        .collect()
}

/// n -> value with theta-valued numerator and denominator computed by `f`;
/// points where a denominator sits on the divisor are poles.
pub(crate) fn theta_coefficient(g: usize, f: impl Fn(&[i64]) -> Result<C64> + Send + Sync + 'static) -> LatticeFunction<C64> {
    let f = Arc::new(f);
    let probe = f.clone();
    let poles = PoleSet::zeros(move |n| matches!(probe(n), Err(Error::DivisorProximity { .. })));
    LatticeFunction::scalar(g, poles, move |n| f(n).ok())
}

/// Closed-form (L1, L2); v0 = u0 = 0 structurally.
pub fn build_genus1_pair(p: &AbelianDBAParams) -> Result<(DifferenceOperator<C64>, DifferenceOperator<C64>, Vec<SpecialPoint>)> {
    let pts = genus1_special_points(p)?;
    let (pp, q, r) = (pts[0].z.clone(), pts[1].z.clone(), pts[2].z.clone());
    let th = p.theta.clone();
    let h = p.step(0);
    let half = vscale(&h, 0.5);
    let params = Arc::new(p.clone());

    // theta(w + x_eff + n h)
    let at = {
        let th = th.clone();
        let params = params.clone();
        Arc::new(move |w: &[C64], n: i64| th.eval(&vadd(w, &params.base(&[n]))).map(|v| v.value))
    };
    let nz = {
        let th = th.clone();
        Arc::new(move |w: &[C64]| th.nonzero(w))
    };
    let den = {
        let th = th.clone();
        let params = params.clone();
        Arc::new(move |w: &[C64], n: i64| th.nonzero(&vadd(w, &params.base(&[n]))))
    };

    let v1 = {
        let (at, nz, den, th, pp, h) = (at.clone(), nz.clone(), den.clone(), th.clone(), pp.clone(), h.clone());
        theta_coefficient(1, move |n| {
            let n = n[0];
            Ok(at(&pp, n)? * th.eval(&vadd(&pp, &h))?.value / (den(&pp, n + 1)? * nz(&pp)?))
        })
    };
    let v2 = {
        let (at, nz, den, th, q, h) = (at.clone(), nz.clone(), den.clone(), th.clone(), q.clone(), h.clone());
        theta_coefficient(1, move |n| {
            let n = n[0];
            Ok(at(&q, n)? * th.eval(&vadd(&q, &h))?.value / (den(&q, n + 2)? * nz(&vsub(&q, &h))?))
        })
    };
    let u1 = {
        let (at, nz, den, th, pp, half) = (at.clone(), nz.clone(), den.clone(), th.clone(), pp.clone(), half.clone());
        theta_coefficient(1, move |n| {
            let n = n[0];
            let t = th.eval(&vadd(&pp, &half))?.value;
            let d = nz(&pp)?;
            Ok(at(&pp, n)? * t * t / (den(&pp, n + 1)? * d * d))
        })
    };
    let u3 = {
        let (at, nz, den, th, q, h, half) = (at.clone(), nz.clone(), den.clone(), th.clone(), q.clone(), h.clone(), half.clone());
        theta_coefficient(1, move |n| {
            let n = n[0];
            let t = th.eval(&vadd(&q, &half))?.value;
            let d = nz(&vsub(&q, &h))?;
            Ok(at(&q, n)? * t * t / (den(&q, n + 3)? * d * d))
        })
    };
    let u2 = {
        let (at, nz, den, r, h) = (at.clone(), nz.clone(), den.clone(), r.clone(), h.clone());
        let (u1, u3) = (u1.clone(), u3.clone());
        theta_coefficient(1, move |n| {
            let m = n[0];
            let tr = nz(&r)?;
            let trh = nz(&vsub(&r, &h))?;
            let d2 = den(&r, m + 2)?;
            let a = u1.eval(n)?.get(0, 0).to_owned() * at(&r, m + 1)? * tr / (d2 * trh);
            let b = u3.eval(n)?.get(0, 0).to_owned() * at(&r, m + 3)? * trh / (d2 * tr);
            Ok(-a - b)
        })
    };

    let k = |i: i64| MultiIndex::from([i]);
    let l1 = DifferenceOperator::monomial(v2, k(2)).with_term(k(1), v1)?;
    let l2 = DifferenceOperator::monomial(u3, k(3)).with_term(k(2), u2)?.with_term(k(1), u1)?;
    Ok((l1, l2, pts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_genus1_basis, sample_spectral_points, BasisFamily, Which};

    #[test]
    fn special_points_are_zeros() {
        let p = AbelianDBAParams::genus1_default();
        for sp in genus1_special_points(&p).unwrap() {
            assert!(sp.residual < 1e-12, "{}: {}", sp.name, sp.residual);
        }
    }

    #[test]
    fn closed_forms_satisfy_eigen_relations() {
        let p = AbelianDBAParams::genus1_default();
        let (l1, l2, _) = build_genus1_pair(&p).unwrap();
        let fam = make_genus1_basis(p).unwrap();
        let pts = sample_spectral_points(&fam, 10, 1, 1e-3).unwrap();
        for (op, which) in [(l1, Which::Lambda), (l2, Which::Mu)] {
            let lam = fam.eigenvalue(which);
            for z in &pts {
                let l = lam.eval(z).unwrap();
                for n in -3..=3 {
                    let psi = |m: &[i64]| fam.eval(0, m, z).map(crate::matrix::Mat::scalar);
                    let lhs = *op.apply_at(&psi, &[n]).unwrap().get(0, 0);
                    let rhs = l * fam.eval(0, &[n], z).unwrap();
                    assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1.0), "n={n}: {lhs} vs {rhs}");
                }
            }
        }
    }
}
