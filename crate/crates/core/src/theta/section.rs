use super::series::{theta_eval, Theta};
use super::siegel::{ThetaCharacteristic, TruncationPolicy};
use crate::error::Result;
use crate::scalar::C64;

/// F_{m,a}(z, c) = theta_{a/m,0}(m z + c, m tau) / theta(z)^m.
pub fn basis_section(th: &Theta, m: u32, a: &[i64], z: &[C64], c: &[C64]) -> Result<C64> {
    let g = th.genus();
    let den = th.nonzero(z)?;
    let mf = m as f64;
    let ch = ThetaCharacteristic {
        a: a.iter().map(|&ai| ai.rem_euclid(m as i64) as f64 / mf).collect(),
        b: vec![0.0; g],
    };
    let w: Vec<C64> = (0..g).map(|i| z[i] * mf + c[i]).collect();
    let sp_m = th.sp.scaled(mf);
    let pol = TruncationPolicy { target_error: th.policy.target_error, max_radius: th.policy.max_radius };
    let num = theta_eval(&w, &sp_m, &ch, &pol)?;
    Ok(num.value / den.powu(m))
}
