//! D(lambda) from the defining relation alone: for each n, solve
//! sum_j sum_k C^{ij}_k(n) psi_j(n+k, P_s) = lambda(P_s) psi_i(n, P_s)
//! over sampled spectral points P_s.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{CollocationConfig, EntryTemplates};
use crate::algebra::{DifferenceOperator, LatticeFunction, LatticeWindow, MultiIndex};
use crate::error::{Error, Result};
use crate::families::{sample_spectral_points, BasisFamily, Point, SpectralFunction};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// Coefficients at one n, indexed [row][col][template position].
pub type PointSolution<S> = Vec<Vec<Vec<S>>>;

#[derive(Debug, Clone, Default, Serialize)]
pub struct CollocationReport {
    pub points: usize,
    pub solved: usize,
    pub max_residual: f64,
    pub min_sv_ratio: f64,
    /// Lattice points left out as rank deficient (only with skip_singular).
    pub singular: Vec<Vec<i64>>,
}

#[derive(Debug, Clone)]
pub struct Collocated<S> {
    pub op: DifferenceOperator<S>,
    pub report: CollocationReport,
    pub templates: EntryTemplates,
}

struct Stats {
    residual: f64,
    sv_ratio: f64,
}

fn check_templates<S: Scalar>(family: &dyn BasisFamily<S>, templates: &EntryTemplates) -> Result<()> {
    let r = family.rank();
    if templates.len() != r || templates.iter().any(|row| row.len() != r) {
        return Err(Error::ArityMismatch(format!("templates must be {r} x {r}")));
    }
    for t in templates.iter().flatten() {
        if t.shifts.iter().any(|k| k.g() != family.g()) {
            return Err(Error::DimensionMismatch { expected: family.g(), got: t.shifts[0].g() });
        }
    }
    Ok(())
}

fn unknowns(row: &[super::SupportTemplate]) -> Vec<(usize, MultiIndex)> {
    row.iter().enumerate().flat_map(|(j, t)| t.shifts.iter().map(move |k| (j, k.clone()))).collect()
}

/// Number of sample points the widest row needs.
pub fn sample_count(templates: &EntryTemplates, cfg: &CollocationConfig) -> usize {
    templates.iter().map(|row| unknowns(row).len()).max().unwrap_or(1) * cfg.samples_per_unknown
}

fn solve_row<S: Scalar>(
    family: &dyn BasisFamily<S>,
    lambda_vals: &[S],
    points: &[Point<S>],
    row: usize,
    items: &[(usize, MultiIndex)],
    n: &[i64],
    cfg: &CollocationConfig,
) -> Result<(Vec<S>, Stats)> {
    let used = items.len() * cfg.samples_per_unknown;
    let mut with_rhs = items.to_vec();
    with_rhs.push((row, MultiIndex::zero(family.g())));
    let mut a = Vec::with_capacity(used);
    let mut b = Vec::with_capacity(used);
    for (p, lam) in points.iter().zip(lambda_vals).take(used) {
        let mut vals = family.eval_scaled(n, &with_rhs, p)?;
        let psi = vals.pop().expect("rhs entry");
        b.push(lam.clone() * psi);
        a.push(vals);
    }
    let s = S::solve(&Mat::from_rows(a), &b, cfg.rank_tol);
    if !s.full_rank() {
        return Err(Error::AmbiguousSolution { n: n.to_vec(), rank: s.rank, unknowns: s.unknowns });
    }
    let bad = if S::is_exact() { !s.consistent } else { s.residual > cfg.residual_tol };
    if bad {
        return Err(Error::ResidualTooLarge { n: n.to_vec(), residual: s.residual, tol: cfg.residual_tol });
    }
    let mut x = s.x;
    if !S::is_exact() && cfg.prune > 0.0 {
        let m = x.iter().map(|v| v.magnitude()).fold(0.0, f64::max);
        for v in x.iter_mut() {
            if v.magnitude() < cfg.prune * m {
                *v = S::zero();
            }
        }
    }
    Ok((x, Stats { residual: s.residual, sv_ratio: s.sv_ratio }))
}

fn solve_point<S: Scalar>(
    family: &dyn BasisFamily<S>,
    lambda_vals: &[S],
    points: &[Point<S>],
    templates: &EntryTemplates,
    n: &[i64],
    cfg: &CollocationConfig,
) -> Result<(PointSolution<S>, Stats)> {
    let mut out = Vec::with_capacity(templates.len());
    let mut st = Stats { residual: 0.0, sv_ratio: f64::INFINITY };
    for (i, row) in templates.iter().enumerate() {
        let items = unknowns(row);
        let (x, s) = solve_row(family, lambda_vals, points, i, &items, n, cfg)?;
        st.residual = st.residual.max(s.residual);
        st.sv_ratio = st.sv_ratio.min(s.sv_ratio);
        let mut it = x.into_iter();
        out.push(row.iter().map(|t| it.by_ref().take(t.shifts.len()).collect()).collect());
    }
    Ok((out, st))
}

fn sample_with_lambda<S: Scalar>(
    family: &dyn BasisFamily<S>,
    lambda: &SpectralFunction<S>,
    count: usize,
    cfg: &CollocationConfig,
) -> Result<(Vec<Point<S>>, Vec<S>)> {
    let pts = sample_spectral_points(family, count, cfg.seed, cfg.floor)?;
    let lam = pts.iter().map(|p| lambda.eval(p)).collect::<Result<Vec<_>>>()?;
    Ok((pts, lam))
}

/// The collocation solve at a single lattice point.
pub fn solve_collocation_at<S: Scalar>(
    family: &dyn BasisFamily<S>,
    lambda: &SpectralFunction<S>,
    templates: &EntryTemplates,
    n: &[i64],
    cfg: &CollocationConfig,
) -> Result<PointSolution<S>> {
    cfg.validate()?;
    check_templates(family, templates)?;
    let (pts, lam) = sample_with_lambda(family, lambda, sample_count(templates, cfg), cfg)?;
    solve_point(family, &lam, &pts, templates, n, cfg).map(|r| r.0)
}

/// Solves every n of `window` independently and tabulates the result.
pub fn build_collocation<S: Scalar>(
    family: &dyn BasisFamily<S>,
    lambda: &SpectralFunction<S>,
    templates: &EntryTemplates,
    window: &LatticeWindow,
    cfg: &CollocationConfig,
) -> Result<Collocated<S>> {
    cfg.validate()?;
    check_templates(family, templates)?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let count = sample_count(templates, cfg);
    let (pts, lam) = sample_with_lambda(family, lambda, count, cfg)?;
    let ns = window.points();
    let solved: Vec<(Vec<i64>, Result<(PointSolution<S>, Stats)>)> = ns
        .par_iter()
        .map(|n| (n.clone(), solve_point(family, &lam, &pts, templates, n, cfg)))
        .collect();

    let mut report = CollocationReport { points: count, min_sv_ratio: f64::INFINITY, ..Default::default() };
    let mut table: BTreeMap<Vec<i64>, PointSolution<S>> = BTreeMap::new();
    for (n, r) in solved {
        match r {
            Ok((sol, st)) => {
                report.max_residual = report.max_residual.max(st.residual);
                report.min_sv_ratio = report.min_sv_ratio.min(st.sv_ratio);
                table.insert(n, sol);
            }
            Err(Error::AmbiguousSolution { .. }) if cfg.skip_singular => report.singular.push(n),
            Err(e) => return Err(e),
        }
    }
    report.solved = table.len();
    log::info!(
        "collocation on {} points: max residual {:.3e}, min sigma ratio {:.3e}, {} singular",
        report.solved,
        report.max_residual,
        report.min_sv_ratio,
        report.singular.len()
    );
    let op = assemble(family.g(), templates, window, &table)?;
    Ok(Collocated { op, report, templates: templates.clone() })
}

/// One tabulated N x N coefficient per distinct shift, zero where an entry's
/// template lacks the shift.
pub(crate) fn assemble<S: Scalar>(
    g: usize,
    templates: &EntryTemplates,
    window: &LatticeWindow,
    table: &BTreeMap<Vec<i64>, PointSolution<S>>,
) -> Result<DifferenceOperator<S>> {
    let r = templates.len();
    let mut shifts: Vec<MultiIndex> = templates.iter().flatten().flat_map(|t| t.shifts.iter().cloned()).collect();
    shifts.sort();
    shifts.dedup();
    let mut op = DifferenceOperator::zero(g, r, r);
    for k in shifts {
        let mut values = BTreeMap::new();
        for (n, sol) in table {
            let mut m = Mat::zeros(r, r);
            for i in 0..r {
                for j in 0..r {
                    if let Some(pos) = templates[i][j].shifts.iter().position(|s| *s == k) {
                        m.set(i, j, sol[i][j][pos].clone());
                    }
                }
            }
            values.insert(n.clone(), m);
        }
        op.add_term(k, LatticeFunction::from_table(g, (r, r), window.clone(), values))?;
    }
    Ok(op)
}
