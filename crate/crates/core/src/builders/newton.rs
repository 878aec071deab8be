//! Common zeros of shifted theta functions theta(z + s_k) = 0, k = 1..g, by
//! damped Newton from a seed grid over the fundamental domain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SpecialPoint;
use crate::error::{Error, Result};
use crate::families::abelian::vadd;
use crate::matrix::Mat;
use crate::scalar::C64;
use crate::theta::Theta;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NewtonConfig {
    /// Seeds per real direction; a complex dimension gets grid^2.
    pub grid: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub fd_step: f64,
    /// Largest |theta| accepted at a returned root.
    pub accept: f64,
    /// Lattice-reduced distance under which two roots coincide.
    pub dedupe: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig { grid: 8, max_iter: 50, tol: 1e-12, fd_step: 1e-6, accept: 1e-10, dedupe: 1e-6 }
    }
}

fn residuals(th: &Theta, shifts: &[Vec<C64>], z: &[C64]) -> Result<Vec<C64>> {
    shifts.iter().map(|s| th.eval(&vadd(z, s)).map(|v| v.value)).collect()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Representative of z mod Z^g + tau Z^g with real coordinates in [0, 1).
pub fn reduce(th: &Theta, z: &[C64]) -> (Vec<C64>, Vec<f64>) {
    let (u, v) = th.sp.real_coords(z);
    let wrap = |x: f64| {
        let f = x - x.floor();
        if f >= 1.0 - 1e-12 {
            0.0
        } else {
            f
        }
    };
    let u: Vec<f64> = u.into_iter().map(wrap).collect();
    let v: Vec<f64> = v.into_iter().map(wrap).collect();
    let z = th.sp.from_real_coords(&u, &v);
    (z, u.into_iter().chain(v).collect())
}

fn jacobian(th: &Theta, shifts: &[Vec<C64>], z: &[C64], step: f64) -> Result<Mat<C64>> {
    let g = z.len();
    let mut j = Mat::zeros(shifts.len(), g);
    for l in 0..g {
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[l] += step;
        zm[l] -= step;
        let fp = residuals(th, shifts, &zp)?;
        let fm = residuals(th, shifts, &zm)?;
        for k in 0..shifts.len() {
            j.set(k, l, (fp[k] - fm[k]) / (2.0 * step));
        }
    }
    Ok(j)
}

fn newton(th: &Theta, shifts: &[Vec<C64>], seed: Vec<C64>, cfg: &NewtonConfig) -> Option<(Vec<C64>, f64)> {
    let mut z = seed;
    let mut f = residuals(th, shifts, &z).ok()?;
    let mut r = norm(&f);
    for _ in 0..cfg.max_iter {
        if r < cfg.tol {
            break;
        }
        let j = jacobian(th, shifts, &z, cfg.fd_step).ok()?;
        let neg: Vec<C64> = f.iter().map(|v| -v).collect();
        let s = crate::linalg::float::lstsq(&j, &neg, 1e-14);
        if s.rank < shifts.len() {
            return None;
        }
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..20 {
            let cand: Vec<C64> = z.iter().zip(&s.x).map(|(a, d)| a + d * t).collect();
            let (cand, _) = reduce(th, &cand);
            if let Ok(fc) = residuals(th, shifts, &cand) {
                let rc = norm(&fc);
                if rc < r {
                    z = cand;
                    f = fc;
                    r = rc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (r < cfg.accept).then_some((z, r))
}

/// Distance between two points of [0,1)^{2g} on the torus.
fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs();
            d.min(1.0 - d)
        })
        .fold(0.0, f64::max)
}

/// Distinct roots modulo the period lattice, in lexicographic order of
/// their real coordinates.
pub fn find_divisor_intersection(th: &Theta, shifts: &[Vec<C64>], expected: usize, cfg: &NewtonConfig) -> Result<Vec<SpecialPoint>> {
    let g = th.genus();
    if shifts.len() != g {
        return Err(Error::DimensionMismatch { expected: g, got: shifts.len() });
    }
    if shifts.iter().any(|s| s.len() != g) {
        return Err(Error::DimensionMismatch { expected: g, got: shifts[0].len() });
    }
    let m = cfg.grid.max(1);
    let total = m.pow(2 * g as u32);
    let seeds: Vec<Vec<C64>> = (0..total)
        .map(|mut idx| {
            let mut c = Vec::with_capacity(2 * g);
            for _ in 0..2 * g {
                c.push((idx % m) as f64 / m as f64 + 0.5 / m as f64);
                idx /= m;
            }
            th.sp.from_real_coords(&c[..g], &c[g..])
        })
        .collect();
    let roots: Vec<(Vec<C64>, f64)> = seeds.into_par_iter().filter_map(|s| newton(th, shifts, s, cfg)).collect();
    if roots.is_empty() {
        return Err(Error::NewtonDivergence);
    }
    let mut reduced: Vec<(Vec<f64>, Vec<C64>, f64)> = roots
        .into_iter()
        .map(|(z, r)| {
            let (z, c) = reduce(th, &z);
            (c, z, r)
        })
        .collect();
    reduced.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut kept: Vec<(Vec<f64>, Vec<C64>, f64)> = Vec::new();
    for cand in reduced {
        match kept.iter_mut().find(|k| torus_distance(&k.0, &cand.0) < cfg.dedupe) {
            Some(k) if cand.2 < k.2 => *k = cand,
            Some(_) => {}
            None => kept.push(cand),
        }
    }
    log::debug!("divisor intersection: {} distinct roots from {total} seeds", kept.len());
    if kept.len() < expected {
        return Err(Error::TooFewIntersections { expected, got: kept.len() });
    }
    Ok(kept
        .into_iter()
        .enumerate()
        .map(|(i, (_, z, r))| {
            let residual = residuals(th, shifts, &z).map(|f| norm(&f)).unwrap_or(r);
            SpecialPoint { name: format!("root{}", i + 1), z, residual }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::AbelianDBAParams;

    #[test]
    fn genus1_zero_is_half_period() {
        let p = AbelianDBAParams::genus1_default();
        let roots = find_divisor_intersection(&p.theta, &[vec![C64::new(0.0, 0.0)]], 1, &NewtonConfig::default()).unwrap();
        assert_eq!(roots.len(), 1);
        let want = reduce(&p.theta, &[C64::new(0.5, 0.0) + p.theta.sp.tau(0, 0) * 0.5]).0;
        assert!((roots[0].z[0] - want[0]).norm() < 1e-9);
    }

    #[test]
    fn genus2_pair_has_two_roots_at_two_resolutions() {
        let p = AbelianDBAParams::genus2_default();
        let shifts = vec![p.step(0).iter().map(|v| -v).collect(), p.step(1).iter().map(|v| -v).collect()];
        let a = find_divisor_intersection(&p.theta, &shifts, 2, &NewtonConfig::default()).unwrap();
        let b = find_divisor_intersection(&p.theta, &shifts, 2, &NewtonConfig { grid: 5, ..Default::default() }).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 2);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.residual < 1e-10);
            assert!((x.z[0] - y.z[0]).norm() + (x.z[1] - y.z[1]).norm() < 1e-8);
        }
    }
}
