//! Truncated lattice sums for theta_{a,b}(z, tau) with an a-priori tail bound.

use std::f64::consts::PI;

use super::siegel::{SiegelPoint, ThetaCharacteristic, TruncationPolicy};
use crate::error::{Error, Result};
use crate::scalar::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaValue {
    pub value: C64,
    /// Largest retained term; errors are measured relative to it.
    pub scale: f64,
    pub radius: usize,
}

/// Saddle of the Gaussian |term(n)|: the lattice point n0 nearest to
/// -(a + Y^-1 Im z), plus the offset d = n0 + a + Y^-1 Im z and the
/// exponent loss pi d^T Y d of the term at n0 below the continuous peak.
struct Saddle {
    n0: Vec<i64>,
    delta_inf: f64,
    anchor: f64,
}

fn saddle(sp: &SiegelPoint, z: &[C64], a: &[f64]) -> Saddle {
    let g = sp.genus();
    let yi = sp.im_inv();
    let c: Vec<f64> = (0..g).map(|i| a[i] + (0..g).map(|j| yi[(i, j)] * z[j].im).sum::<f64>()).collect();
    let n0: Vec<i64> = c.iter().map(|v| (-v).round() as i64).collect();
    let d: Vec<f64> = (0..g).map(|i| n0[i] as f64 + c[i]).collect();
    let y = sp.im();
    let mut quad = 0.0;
    for i in 0..g {
        for j in 0..g {
            quad += d[i] * y[(i, j)] * d[j];
        }
    }
    Saddle { n0, delta_inf: d.iter().fold(0.0f64, |m, v| m.max(v.abs())), anchor: PI * quad }
}

/// ln of the bound on (discarded tail) / (term at n0) for cube radius r.
/// Shell k = |n - n0|_inf has (2k+1)^g - (2k-1)^g points, each with
/// |n + a + c|_2 >= k - delta.
fn log_tail_bound(g: usize, lam_min: f64, s: &Saddle, r: usize) -> f64 {
    let mut terms = Vec::new();
    let mut k = r as f64 + 1.0;
    loop {
        let count = (2.0 * k + 1.0).powi(g as i32) - (2.0 * k - 1.0).powi(g as i32);
        let e = count.ln() - PI * lam_min * (k - s.delta_inf).powi(2);
        terms.push(e);
        let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if e < mx - 60.0 {
            break;
        }
        k += 1.0;
    }
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln();
    lse + s.anchor
}

fn radius_for(sp: &SiegelPoint, z: &[C64], a: &[f64], target: f64, cap: usize) -> Result<usize> {
    let s = saddle(sp, z, a);
    let lt = target.ln();
    let g = sp.genus();
    let limit = cap.max(1) * 8 + 64;
    for r in 0..=limit {
        if log_tail_bound(g, sp.lambda_min(), &s, r) < lt {
            if r > cap {
                return Err(Error::RadiusCapExceeded { target, needed: r, cap });
            }
            return Ok(r);
        }
    }
    Err(Error::RadiusCapExceeded { target, needed: limit + 1, cap })
}

/// Smallest cube radius whose Gaussian tail bound, relative to the largest
/// retained term, is below `target_error`.
pub fn truncation_radius(sp: &SiegelPoint, z: &[C64], target_error: f64, max_radius: usize) -> Result<usize> {
    radius_for(sp, z, &vec![0.0; sp.genus()], target_error, max_radius)
}

fn check_dims(sp: &SiegelPoint, z: &[C64], ch: &ThetaCharacteristic) -> Result<()> {
    let g = sp.genus();
    for len in [z.len(), ch.a.len(), ch.b.len()] {
        if len != g {
            return Err(Error::DimensionMismatch { expected: g, got: len });
        }
    }
    Ok(())
}

/// Sum over the cube n0 + [-r, r]^g in lexicographic order.
fn cube_sum(sp: &SiegelPoint, z: &[C64], ch: &ThetaCharacteristic, n0: &[i64], r: usize) -> (C64, f64) {
    let g = sp.genus();
    let r = r as i64;
    let side = (2 * r + 1) as usize;
    let total = side.pow(g as u32);
    let zb: Vec<C64> = (0..g).map(|i| z[i] + ch.b[i]).collect();
    let mut w = vec![0.0f64; g];
    let mut sum = C64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for idx in 0..total {
        let mut rem = idx;
        for i in (0..g).rev() {
            let off = (rem % side) as i64 - r;
            rem /= side;
            w[i] = (n0[i] + off) as f64 + ch.a[i];
        }
        let mut quad = C64::new(0.0, 0.0);
        let mut lin = C64::new(0.0, 0.0);
        for i in 0..g {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..g {
                row += sp.tau(i, j) * w[j];
            }
            quad += row * w[i];
            lin += zb[i] * w[i];
        }
        let e = C64::new(0.0, PI) * quad + C64::new(0.0, 2.0 * PI) * lin;
        let t = e.exp();
        scale = scale.max(t.norm());
        sum += t;
    }
    (sum, scale)
}

/// theta_{a,b}(z, tau) = sum_n exp(pi i (n+a)^T tau (n+a) + 2 pi i (n+a)^T (z+b)).
pub fn theta_eval(z: &[C64], sp: &SiegelPoint, ch: &ThetaCharacteristic, tp: &TruncationPolicy) -> Result<ThetaValue> {
    check_dims(sp, z, ch)?;
    let r = radius_for(sp, z, &ch.a, tp.target_error, tp.max_radius)?;
    let s = saddle(sp, z, &ch.a);
    let (value, scale) = cube_sum(sp, z, ch, &s.n0, r);
    Ok(ThetaValue { value, scale, radius: r })
}

/// Lattice sum at a fixed radius around the origin, no tail control.
pub fn theta_fixed_radius(z: &[C64], sp: &SiegelPoint, ch: &ThetaCharacteristic, r: usize) -> C64 {
    cube_sum(sp, z, ch, &vec![0; sp.genus()], r).0
}

/// theta_{0,0} bound to a Siegel point, policy and divisor-proximity floor.
#[derive(Debug, Clone)]
pub struct Theta {
    pub sp: SiegelPoint,
    pub policy: TruncationPolicy,
    /// Relative floor below which theta(z) counts as zero for division.
    pub floor: f64,
    zero_char: ThetaCharacteristic,
}

pub const DEFAULT_DIVISOR_FLOOR: f64 = 1e-8;

impl Theta {
    pub fn new(sp: SiegelPoint) -> Self {
        let g = sp.genus();
        Theta { sp, policy: TruncationPolicy::default(), floor: DEFAULT_DIVISOR_FLOOR, zero_char: ThetaCharacteristic::zero(g) }
    }

    pub fn with_policy(mut self, policy: TruncationPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn genus(&self) -> usize {
        self.sp.genus()
    }

    pub fn eval(&self, z: &[C64]) -> Result<ThetaValue> {
        theta_eval(z, &self.sp, &self.zero_char, &self.policy)
    }

    /// Value only; panics on dimension errors, which are programming errors here.
    pub fn value(&self, z: &[C64]) -> C64 {
        self.eval(z).expect("theta evaluation").value
    }

    /// theta(z), refusing points too close to the divisor.
    pub fn nonzero(&self, z: &[C64]) -> Result<C64> {
        let t = self.eval(z)?;
        let ratio = t.value.norm() / t.scale;
        if ratio < self.floor {
            return Err(Error::DivisorProximity { ratio });
        }
        Ok(t.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::siegel::validate_siegel;

    #[test]
    fn radius_shrinks_with_faster_decay() {
        let z = [C64::new(0.0, 0.0)];
        let a = validate_siegel(&[vec![C64::new(0.0, 1.0)]]).unwrap();
        let b = validate_siegel(&[vec![C64::new(0.0, 10.0)]]).unwrap();
        let ra = truncation_radius(&a, &z, 1e-12, 40).unwrap();
        let rb = truncation_radius(&b, &z, 1e-12, 40).unwrap();
        assert!(rb < ra, "{rb} !< {ra}");
    }

    #[test]
    fn unreachable_target_reports_cap() {
        let sp = validate_siegel(&[vec![C64::new(0.0, 1.0)]]).unwrap();
        let e = truncation_radius(&sp, &[C64::new(0.0, 0.0)], 1e-300, 5).unwrap_err();
        assert!(matches!(e, Error::RadiusCapExceeded { cap: 5, .. }));
    }

    #[test]
    fn nearly_singular_imaginary_part_hits_cap() {
        let sp = validate_siegel(&[vec![C64::new(0.0, 1e-4)]]).unwrap();
        assert!(truncation_radius(&sp, &[C64::new(0.0, 0.0)], 1e-12, 40).is_err());
    }
}
