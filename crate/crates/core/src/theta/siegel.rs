use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::C64;

/// A validated point of the Siegel upper half space.
#[derive(Debug, Clone)]
pub struct SiegelPoint {
    genus: usize,
    tau: Vec<C64>,
    im: DMatrix<f64>,
    im_inv: DMatrix<f64>,
    lam_min: f64,
    lam_max: f64,
}

const SYMMETRY_TOL: f64 = 1e-14;

pub fn validate_siegel(tau: &[Vec<C64>]) -> Result<SiegelPoint> {
    let g = tau.len();
    if g == 0 || tau.iter().any(|r| r.len() != g) {
        return Err(Error::NotSquare);
    }
    let mut asym: f64 = 0.0;
    for i in 0..g {
        for j in 0..g {
            asym = asym.max((tau[i][j] - tau[j][i]).norm());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric(asym));
    }
    let mut flat = Vec::with_capacity(g * g);
    for i in 0..g {
        for j in 0..g {
            flat.push((tau[i][j] + tau[j][i]) * 0.5);
        }
    }
    let im = DMatrix::from_fn(g, g, |i, j| flat[i * g + j].im);
    let eig = im.clone().symmetric_eigen();
    let lam_min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let lam_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lam_min > 0.0) {
        return Err(Error::ImaginaryPartNotPositiveDefinite(lam_min));
    }
    let im_inv = im.clone().try_inverse().ok_or(Error::ImaginaryPartNotPositiveDefinite(lam_min))?;
    Ok(SiegelPoint { genus: g, tau: flat, im, im_inv, lam_min, lam_max })
}

impl SiegelPoint {
    pub fn genus(&self) -> usize {
        self.genus
    }

    #[inline]
    pub fn tau(&self, i: usize, j: usize) -> C64 {
        self.tau[i * self.genus + j]
    }

    pub fn tau_rows(&self) -> Vec<Vec<C64>> {
        (0..self.genus).map(|i| (0..self.genus).map(|j| self.tau(i, j)).collect()).collect()
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn im_inv(&self) -> &DMatrix<f64> {
        &self.im_inv
    }

    pub fn lambda_min(&self) -> f64 {
        self.lam_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lam_max
    }

    /// `m * tau`, still a Siegel point for m > 0.
    pub fn scaled(&self, m: f64) -> SiegelPoint {
        assert!(m > 0.0);
        validate_siegel(
            &(0..self.genus)
                .map(|i| (0..self.genus).map(|j| self.tau(i, j) * m).collect())
                .collect::<Vec<_>>(),
        )
        .expect("positive multiple of a Siegel point")
    }

    /// `m0 + tau q` for integer vectors.
    pub fn lattice_vector(&self, m0: &[i64], q: &[i64]) -> Vec<C64> {
        (0..self.genus)
            .map(|i| {
                C64::new(m0[i] as f64, 0.0)
                    + (0..self.genus).map(|j| self.tau(i, j) * q[j] as f64).sum::<C64>()
            })
            .collect()
    }

    /// Real coordinates (u, v) with z = u + tau v.
    pub fn real_coords(&self, z: &[C64]) -> (Vec<f64>, Vec<f64>) {
        let g = self.genus;
        let v: Vec<f64> = (0..g)
            .map(|i| (0..g).map(|j| self.im_inv[(i, j)] * z[j].im).sum())
            .collect();
        let u: Vec<f64> = (0..g)
            .map(|i| z[i].re - (0..g).map(|j| self.tau(i, j).re * v[j]).sum::<f64>())
            .collect();
        (u, v)
    }

    pub fn from_real_coords(&self, u: &[f64], v: &[f64]) -> Vec<C64> {
        (0..self.genus)
            .map(|i| C64::new(u[i], 0.0) + (0..self.genus).map(|j| self.tau(i, j) * v[j]).sum::<C64>())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCharacteristic {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ThetaCharacteristic {
    pub fn zero(g: usize) -> Self {
        ThetaCharacteristic { a: vec![0.0; g], b: vec![0.0; g] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub target_error: f64,
    pub max_radius: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { target_error: 1e-15, max_radius: 40 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_siegel(&[vec![c(0.0, 1.0)]]).unwrap().genus(), 1);
        let sp = validate_siegel(&[vec![c(0.0, 2.0), c(0.5, 0.0)], vec![c(0.5, 0.0), c(0.0, 3.0)]]).unwrap();
        assert_eq!(sp.genus(), 2);
        assert!(matches!(
            validate_siegel(&[vec![c(0.0, -1.0)]]),
            Err(Error::ImaginaryPartNotPositiveDefinite(_))
        ));
        assert!(matches!(
            validate_siegel(&[vec![c(0.0, 2.0), c(0.5, 0.0)], vec![c(0.4, 0.0), c(0.0, 3.0)]]),
            Err(Error::NotSymmetric(_))
        ));
        // indefinite imaginary part with positive diagonal
        assert!(validate_siegel(&[vec![c(0.0, 1.0), c(0.0, 2.0)], vec![c(0.0, 2.0), c(0.0, 1.0)]]).is_err());
    }

    #[test]
    fn real_coordinates_round_trip() {
        let sp = validate_siegel(&[vec![c(0.1, 2.0), c(0.5, 0.3)], vec![c(0.5, 0.3), c(-0.2, 3.0)]]).unwrap();
        let z = vec![c(0.3, 0.7), c(-0.4, 1.1)];
        let (u, v) = sp.real_coords(&z);
        let back = sp.from_real_coords(&u, &v);
        assert!((back[0] - z[0]).norm() < 1e-14 && (back[1] - z[1]).norm() < 1e-14);
    }
}
