//! Linear solves used by collocation and the Gamma nullspace:
//! fraction-free elimination for rationals, SVD least squares for floats.

pub mod exact;
pub mod float;

/// Outcome of solving `A x = b`.
#[derive(Debug, Clone)]
pub struct Solve<S> {
    pub x: Vec<S>,
    pub rank: usize,
    pub unknowns: usize,
    /// Relative residual of the (row-normalized) system; exactly 0 when an
    /// exact system is consistent.
    pub residual: f64,
    /// sigma_min / sigma_max over all unknowns (exact: 1 if full rank, else 0).
    pub sv_ratio: f64,
    pub consistent: bool,
}

impl<S> Solve<S> {
    pub fn full_rank(&self) -> bool {
        self.rank == self.unknowns
    }
}
