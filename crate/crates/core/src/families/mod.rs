//! Basis families Psi = (psi_1, ..., psi_N) of discrete Baker-Akhiezer
//! modules, their eigenvalue functions, and spectral-point samplers.

pub mod abelian;
pub mod gamma;
pub mod omega;
pub mod schur;

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::MultiIndex;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use abelian::{make_genus1_basis, make_genus2_basis, AbelianDBAParams, AbelianFamily};
pub use gamma::{make_gamma_basis, GammaFamily, GammaParams};
pub use omega::{make_omega_basis, OmegaFamily, OmegaParams};
pub use schur::{make_schur_basis, SchurFamily, SchurParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Genus1,
    Genus2Abelian,
    SchurDegenerate,
    OmegaRational,
    GammaRational,
}

/// A spectral point: z in C^g for abelian families, (z, t) or (z, w)
/// coordinates for the rational ones.
pub type Point<S> = Vec<S>;

pub trait BasisFamily<S: Scalar>: Send + Sync {
    fn tag(&self) -> FamilyTag;
    fn rank(&self) -> usize;
    /// Number of discrete variables.
    fn g(&self) -> usize;

    fn eval(&self, j: usize, n: &[i64], p: &[S]) -> Result<S>;

    /// c(n, P) psi_j(n + k, P) for each requested (j, k), with one common
    /// nonzero factor c(n, P) per point. Collocation rows are built from
    /// these; c removes the n-dependent geometric growth. The default uses
    /// c = 1.
    fn eval_scaled(&self, n: &[i64], items: &[(usize, MultiIndex)], p: &[S]) -> Result<Vec<S>> {
        items.iter().map(|(j, k)| self.eval(*j, &k.offset(n), p)).collect()
    }

    /// All divisor denominators at `p` are at least `floor` in relative
    /// magnitude (nonzero for exact fields).
    fn admissible(&self, p: &[S], floor: f64) -> bool;

    /// A candidate point from the natural domain (before rejection).
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S>;
}

/// Deterministic rejection sampling.
pub fn sample_spectral_points<S: Scalar, F: BasisFamily<S> + ?Sized>(
    family: &F,
    count: usize,
    seed: u64,
    floor: f64,
) -> Result<Vec<Point<S>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_tries = 200 * count.max(1) + 1000;
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        if tries == max_tries {
            return Err(Error::SamplingExhausted { wanted: count, got: out.len(), tries });
        }
        tries += 1;
        let p = family.draw(&mut rng);
        if family.admissible(&p, floor) {
            out.push(p);
        }
    }
    log::debug!("sampled {count} points for {:?} in {tries} draws", family.tag());
    Ok(out)
}

/// Nonzero test used by exact families, relative floor by float ones.
pub(crate) fn above_floor<S: Scalar>(v: &S, floor: f64) -> bool {
    if S::is_exact() {
        !v.is_zero()
    } else {
        v.magnitude() >= floor
    }
}

/// An eigenvalue function P -> lambda(P) with its pole divisor built in.
#[derive(Clone)]
pub struct SpectralFunction<S> {
    pub name: String,
    f: Arc<dyn Fn(&[S]) -> Result<S> + Send + Sync>,
}

impl<S> fmt::Debug for SpectralFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SpectralFunction({})", self.name)
    }
}

impl<S: Scalar> SpectralFunction<S> {
    pub fn new(name: impl Into<String>, f: impl Fn(&[S]) -> Result<S> + Send + Sync + 'static) -> Self {
        SpectralFunction { name: name.into(), f: Arc::new(f) }
    }

    pub fn constant(v: S) -> Self {
        Self::new("constant", move |_| Ok(v.clone()))
    }

    pub fn eval(&self, p: &[S]) -> Result<S> {
        (self.f)(p)
    }
}

/// Which eigenvalue function of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Lambda,
    Mu,
}

/// Basis with every evaluation delegated except one duplicated member;
/// the freeness probe must flag it.
pub struct DuplicatedRow<'a, S: Scalar> {
    pub inner: &'a dyn BasisFamily<S>,
    pub copy_of: usize,
}

impl<S: Scalar> BasisFamily<S> for DuplicatedRow<'_, S> {
    fn tag(&self) -> FamilyTag {
        self.inner.tag()
    }
    fn rank(&self) -> usize {
        self.inner.rank() + 1
    }
    fn g(&self) -> usize {
        self.inner.g()
    }
    fn eval(&self, j: usize, n: &[i64], p: &[S]) -> Result<S> {
        let j = if j == self.inner.rank() { self.copy_of } else { j };
        self.inner.eval(j, n, p)
    }
    fn eval_scaled(&self, n: &[i64], items: &[(usize, MultiIndex)], p: &[S]) -> Result<Vec<S>> {
        let r = self.inner.rank();
        let mapped: Vec<(usize, MultiIndex)> =
            items.iter().map(|(j, k)| (if *j == r { self.copy_of } else { *j }, k.clone())).collect();
        self.inner.eval_scaled(n, &mapped, p)
    }
    fn admissible(&self, p: &[S], floor: f64) -> bool {
        self.inner.admissible(p, floor)
    }
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        self.inner.draw(rng)
    }
}
