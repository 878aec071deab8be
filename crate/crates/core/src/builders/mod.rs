//! Constructions of D(lambda): closed forms, the special-point method and
//! the collocation solve that serves as the reference for both.

pub mod collocation;
pub mod genus1;
pub mod genus2;
pub mod newton;
pub mod omega;
pub mod schur;

use serde::{Deserialize, Serialize};

use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::scalar::C64;

pub use collocation::{build_collocation, solve_collocation_at, Collocated, CollocationReport};
pub use genus1::{build_genus1_pair, genus1_special_points};
pub use genus2::{build_genus2_special, Genus2Operator};
pub use newton::{find_divisor_intersection, NewtonConfig};
pub use omega::build_omega_pair;
pub use schur::{build_schur_pair, compare_schur_printed, SchurComparison, SchurPair};

/// Candidate shifts for one matrix entry of the ansatz.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportTemplate {
    pub shifts: Vec<MultiIndex>,
}

impl SupportTemplate {
    pub fn new(shifts: Vec<MultiIndex>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::InvalidParams("empty support template".into()));
        }
        let mut sorted = shifts.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != shifts.len() {
            return Err(Error::InvalidParams("repeated shift in support template".into()));
        }
        Ok(SupportTemplate { shifts })
    }

    /// All k >= 0 with |k|_1 <= d.
    pub fn simplex(g: usize, d: i64) -> Self {
        SupportTemplate { shifts: MultiIndex::simplex(g, d) }
    }
}

/// Templates indexed [row][column] for an N x N operator.
pub type EntryTemplates = Vec<Vec<SupportTemplate>>;

/// Row i of an operator on a basis with elements in levels `levels`:
/// entry (i, j) gets |k| <= deg(lambda) + level_i - level_j.
pub fn graded_templates(g: usize, levels: &[i64], degree: i64) -> EntryTemplates {
    levels
        .iter()
        .map(|li| levels.iter().map(|lj| SupportTemplate::simplex(g, (degree + li - lj).max(0))).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CollocationConfig {
    pub samples_per_unknown: usize,
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub seed: u64,
    /// Rejection floor on the divisor denominators of sampled points.
    pub floor: f64,
    /// Coefficients below this fraction of the largest at the same n become 0 (floats only).
    pub prune: f64,
    /// Record rank-deficient lattice points as poles instead of failing.
    pub skip_singular: bool,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        CollocationConfig {
            samples_per_unknown: 3,
            rank_tol: 1e-9,
            residual_tol: 1e-8,
            seed: 42,
            floor: 1e-3,
            prune: 1e-10,
            skip_singular: false,
        }
    }
}

impl CollocationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_unknown < 2 {
            return Err(Error::InvalidParams("samples_per_unknown must be at least 2".into()));
        }
        for (name, v) in [("rank_tol", self.rank_tol), ("residual_tol", self.residual_tol), ("floor", self.floor)] {
            if !(v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if self.prune < 0.0 {
            return Err(Error::InvalidParams("prune must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A named point on the spectral variety with its divisor residual.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialPoint {
    pub name: String,
    #[serde(serialize_with = "crate::serde_complex::vec")]
    pub z: Vec<C64>,
    pub residual: f64,
}

/// Solves a small dense complex system in the least-squares sense and
/// reports (solution, relative residual, sigma ratio).
pub(crate) fn small_solve(rows: Vec<Vec<C64>>, rhs: Vec<C64>) -> (Vec<C64>, f64, f64) {
    let a = crate::matrix::Mat::from_rows(rows);
    let s = crate::linalg::float::lstsq(&a, &rhs, 1e-14);
    (s.x, s.residual, s.sv_ratio)
}
