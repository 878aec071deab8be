//! Checks tying the builders to the defining relations: eigen residuals,
//! commutators (coefficient and application level), freeness probes and the
//! continuum-limit order fit, with fault injection for negative controls.

pub mod suites;

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{DifferenceOperator, LatticeFunction, LatticeWindow, MultiIndex, PoleSet};
use crate::error::{Error, Result};
use crate::families::{sample_spectral_points, BasisFamily, Point, SpectralFunction};
use crate::matrix::Mat;
use crate::scalar::{Scalar, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Compare {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    /// The measured quantity: a residual, a ratio, a rank or a fitted order.
    pub max_residual: f64,
    /// Set for exact-field checks.
    pub exact_zero: Option<bool>,
    pub threshold: f64,
    pub compare: Compare,
    pub pass: bool,
    pub evaluated: usize,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check::new(name, value, threshold, Compare::AtMost)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check::new(name, value, threshold, Compare::AtLeast)
    }

    fn new(name: impl Into<String>, value: f64, threshold: f64, compare: Compare) -> Self {
        let pass = match compare {
            Compare::AtMost => value <= threshold,
            Compare::AtLeast => value >= threshold,
        };
        Check {
            name: name.into(),
            max_residual: value,
            exact_zero: None,
            threshold,
            compare,
            pass,
            evaluated: 0,
            wall_ms: 0.0,
            notes: vec![],
        }
    }

    /// Exact checks pass on exact zero only.
    pub fn exact(name: impl Into<String>, max_residual: f64, zero: bool) -> Self {
        let mut c = Check::at_most(name, max_residual, 0.0);
        c.exact_zero = Some(zero);
        c.pass = zero;
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn timed(mut self, start: Instant, evaluated: usize) -> Self {
        self.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        self.evaluated = evaluated;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Skip {
    pub check: String,
    pub at: String,
    pub reason: String,
}

/// Result of one check function: its entries and what it had to skip.
#[derive(Debug, Clone, Default)]
pub struct CheckOutcome {
    pub checks: Vec<Check>,
    pub skipped: Vec<Skip>,
    pub evaluated: usize,
}

impl From<Check> for CheckOutcome {
    fn from(c: Check) -> Self {
        let evaluated = c.evaluated;
        CheckOutcome { checks: vec![c], skipped: vec![], evaluated }
    }
}

/// Largest tolerated fraction of skipped evaluations.
pub const MAX_SKIPPED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub case_id: String,
    pub checks: Vec<Check>,
    pub skipped: Vec<Skip>,
    pub evaluated: usize,
    pub skipped_fraction: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(case_id: impl Into<String>) -> Self {
        VerificationReport { case_id: case_id.into(), checks: vec![], skipped: vec![], evaluated: 0, skipped_fraction: 0.0, pass: false }
    }

    pub fn add(&mut self, o: impl Into<CheckOutcome>) {
        let o = o.into();
        self.checks.extend(o.checks);
        self.skipped.extend(o.skipped);
        self.evaluated += o.evaluated;
        self.finalize();
    }

    /// Adds the outcome, or a failed entry carrying the error if the check
    /// could not run.
    pub fn add_result(&mut self, name: &str, r: Result<CheckOutcome>) {
        match r {
            Ok(o) => self.add(o),
            Err(e) => self.add(Check::at_most(name, f64::INFINITY, 0.0).with_note(format!("error: {e}"))),
        }
    }

    fn finalize(&mut self) {
        let total = self.evaluated + self.skipped.len();
        self.skipped_fraction = if total == 0 { 0.0 } else { self.skipped.len() as f64 / total as f64 };
        self.pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass) && self.skipped_fraction < MAX_SKIPPED_FRACTION;
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Checks whose names start with `prefix`.
    pub fn matching<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "case {}: {}", self.case_id, if self.pass { "PASS" } else { "FAIL" });
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(5);
        let _ = writeln!(s, "  {:<w$}  {:>12}  {:>10}  {:>4}  {:>9}", "check", "measured", "threshold", "ok", "ms");
        for c in &self.checks {
            let op = if c.compare == Compare::AtMost { "<=" } else { ">=" };
            let measured = match c.exact_zero {
                Some(true) => "exact 0".to_string(),
                _ => format!("{:.3e}", c.max_residual),
            };
            let _ = writeln!(
                s,
                "  {:<w$}  {:>12}  {op}{:>8.1e}  {:>4}  {:>9.1}",
                c.name,
                measured,
                c.threshold,
                if c.pass { "yes" } else { "NO" },
                c.wall_ms
            );
        }
        let _ = writeln!(s, "  skipped {} of {} ({:.1}%)", self.skipped.len(), self.evaluated + self.skipped.len(), 100.0 * self.skipped_fraction);
        s
    }
}

fn skip(check: &str, at: String, e: &Error) -> Skip {
    Skip { check: check.to_string(), at, reason: e.to_string() }
}

fn require_tol<S: Scalar>(tol: f64) -> Result<()> {
    if S::is_exact() && tol != 0.0 {
        return Err(Error::InexactTolerance(tol));
    }
    Ok(())
}

/// max |D Psi - lambda Psi| / max(1, |lambda Psi|) over window x points,
/// using the common per-point scaling of `eval_scaled`.
pub fn check_eigen<S: Scalar>(
    name: &str,
    d: &DifferenceOperator<S>,
    family: &dyn BasisFamily<S>,
    lambda: &SpectralFunction<S>,
    window: &LatticeWindow,
    points: &[Point<S>],
    tol: f64,
) -> Result<CheckOutcome> {
    let start = Instant::now();
    require_tol::<S>(tol)?;
    let r = family.rank();
    if d.shape() != (r, r) || d.g() != family.g() || window.g() != family.g() {
        return Err(Error::ArityMismatch(format!("operator {:?} on a rank-{r} family", d.shape())));
    }
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let mut support = d.support();
    let zero = MultiIndex::zero(family.g());
    if !support.contains(&zero) {
        support.push(zero.clone());
    }
    let items: Vec<(usize, MultiIndex)> = (0..r).flat_map(|j| support.iter().map(move |k| (j, k.clone()))).collect();
    let pos = |j: usize, k: &MultiIndex| j * support.len() + support.iter().position(|s| s == k).expect("in support");

    let mut skipped = Vec::new();
    let mut live: Vec<(Vec<i64>, Vec<(MultiIndex, Mat<S>)>)> = Vec::new();
    for n in window.points() {
        let c: Result<Vec<_>> = d.terms().map(|(k, f)| f.eval(&n).map(|m| (k.clone(), m))).collect();
        match c {
            Ok(c) => live.push((n, c)),
            Err(e) => skipped.push(skip(name, format!("n={n:?}"), &e)),
        }
    }

    struct Acc {
        max: f64,
        max_rhs: f64,
        zero: bool,
        evaluated: usize,
        skipped: Vec<Skip>,
    }
    let per_point: Vec<Acc> = points
        .par_iter()
        .enumerate()
        .map(|(pi, p)| {
            let mut acc = Acc { max: 0.0, max_rhs: 0.0, zero: true, evaluated: 0, skipped: vec![] };
            let lam = match lambda.eval(p) {
                Ok(l) => l,
                Err(e) => {
                    acc.skipped.push(skip(name, format!("P#{pi}"), &e));
                    return acc;
                }
            };
            for (n, coeffs) in &live {
                let vals = match family.eval_scaled(n, &items, p) {
                    Ok(v) => v,
                    Err(e) => {
                        acc.skipped.push(skip(name, format!("n={n:?} P#{pi}"), &e));
                        continue;
                    }
                };
                acc.evaluated += 1;
                for i in 0..r {
                    let mut lhs = S::zero();
                    let mut scale = 0.0;
                    for (k, c) in coeffs {
                        for j in 0..r {
                            let t = c.get(i, j).clone() * vals[pos(j, k)].clone();
                            scale += t.magnitude();
                            lhs = lhs + t;
                        }
                    }
                    let rhs = lam.clone() * vals[pos(i, &zero)].clone();
                    let diff = lhs - rhs.clone();
                    acc.zero &= diff.is_zero();
                    // backward error: relative to the terms that cancel
                    let d = diff.magnitude();
                    acc.max = acc.max.max(d / (scale + rhs.magnitude()).max(f64::MIN_POSITIVE));
                    acc.max_rhs = acc.max_rhs.max(d / rhs.magnitude().max(1.0));
                }
            }
            acc
        })
        .collect();

    let mut max = 0.0f64;
    let mut max_rhs = 0.0f64;
    let mut zero_all = true;
    let mut evaluated = 0;
    for a in per_point {
        max = max.max(a.max);
        max_rhs = max_rhs.max(a.max_rhs);
        zero_all &= a.zero;
        evaluated += a.evaluated;
        skipped.extend(a.skipped);
    }
    let check = if S::is_exact() {
        Check::exact(name, max, zero_all)
    } else {
        Check::at_most(name, max, tol).with_note(format!("relative to |lambda psi| alone: {max_rhs:.2e}"))
    };
    let check = check.with_note(format!("eigenvalue {}", lambda.name)).timed(start, evaluated);
    Ok(CheckOutcome { checks: vec![check], skipped, evaluated })
}

fn mix(seed: u64, probe: usize, n: &[i64]) -> u64 {
    // FNV-1a over the words, then the seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in std::iter::once(probe as i64).chain(n.iter().copied()) {
        for b in w.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    h ^ seed
}

/// Seeded lattice vector function, reproducible per (seed, probe, n).
pub fn probe_function<S: Scalar>(seed: u64, probe: usize, rows: usize) -> impl Fn(&[i64]) -> Result<Mat<S>> + Sync {
    move |n: &[i64]| {
        let mut rng = ChaCha8Rng::seed_from_u64(mix(seed, probe, n));
        Ok(Mat::column((0..rows).map(|_| S::probe(&mut rng)).collect()))
    }
}

fn normalized<S: Scalar>(op: &DifferenceOperator<S>, window: &LatticeWindow) -> (DifferenceOperator<S>, f64) {
    if S::is_exact() {
        return (op.clone(), 1.0);
    }
    let m = op.max_coefficient(window);
    if m > 0.0 {
        (op.scale(S::from_f64(1.0 / m)), m)
    } else {
        (op.clone(), 1.0)
    }
}

/// [A, B] = 0 on `window`, at coefficient level and applied to `probes`
/// seeded functions. Float operators are first scaled to unit largest
/// coefficient on the window.
pub fn check_commutator<S: Scalar>(
    name: &str,
    a: &DifferenceOperator<S>,
    b: &DifferenceOperator<S>,
    window: &LatticeWindow,
    probes: usize,
    tol: f64,
    seed: u64,
) -> Result<CheckOutcome> {
    require_tol::<S>(tol)?;
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let (na, sa) = normalized(a, window);
    let (nb, sb) = normalized(b, window);
    let start = Instant::now();
    let comm = na.commutator(&nb)?;
    let z = comm.is_zero_on_window(window, tol)?;
    let mut skipped: Vec<Skip> = z.skipped.iter().map(|(n, r)| Skip { check: format!("{name}/coefficients"), at: format!("n={n:?}"), reason: r.clone() }).collect();
    let coef = if S::is_exact() { Check::exact(format!("{name}/coefficients"), z.max_residual, z.zero) } else { Check::at_most(format!("{name}/coefficients"), z.max_residual, tol) };
    let coef = coef.with_note(format!("scales {sa:.3e}, {sb:.3e}")).timed(start, z.checked);

    let start = Instant::now();
    let cols = a.shape().1;
    let ns = window.points();
    let results: Vec<(Vec<i64>, Result<f64>, bool)> = ns
        .par_iter()
        .flat_map_iter(|n| (0..probes).map(move |p| (n.clone(), p)))
        .map(|(n, p)| {
            let phi = probe_function::<S>(seed, p, cols);
            let r = (|| {
                let ab = na.apply_at(&|m: &[i64]| nb.apply_at(&phi, m), &n)?;
                let ba = nb.apply_at(&|m: &[i64]| na.apply_at(&phi, m), &n)?;
                Ok(ab.sub(&ba))
            })();
            match r {
                Ok(d) => (n, Ok(d.max_abs()), d.is_zero()),
                Err(e) => (n, Err(e), false),
            }
        })
        .collect();
    let mut max = 0.0f64;
    let mut zero = true;
    let mut evaluated = 0;
    for (n, r, z) in results {
        match r {
            Ok(v) => {
                evaluated += 1;
                max = max.max(v);
                zero &= z;
            }
            Err(e) => skipped.push(skip(&format!("{name}/application"), format!("n={n:?}"), &e)),
        }
    }
    let app = if S::is_exact() { Check::exact(format!("{name}/application"), max, zero) } else { Check::at_most(format!("{name}/application"), max, tol) };
    let app = app.with_note(format!("{probes} probes")).timed(start, evaluated);
    let evaluated = coef.evaluated + app.evaluated;
    Ok(CheckOutcome { checks: vec![coef, app], skipped, evaluated })
}

/// Evaluation matrix of {T^m psi_j : m in [0, k-1]^g} at 3 x (columns)
/// sampled points, one entry per k. Floats normalize columns and pass on
/// sigma_min / sigma_max > svd_tol; exact fields pass on full column rank.
pub fn check_freeness<S: Scalar>(
    name: &str,
    family: &dyn BasisFamily<S>,
    k_max: usize,
    svd_tol: f64,
    seed: u64,
    floor: f64,
) -> Result<CheckOutcome> {
    let mut out = CheckOutcome::default();
    let g = family.g();
    for k in 1..=k_max {
        let start = Instant::now();
        let shifts = MultiIndex::cube(g, k as i64);
        let items: Vec<(usize, MultiIndex)> = (0..family.rank()).flat_map(|j| shifts.iter().map(move |m| (j, m.clone()))).collect();
        let cols = items.len();
        let pts = sample_spectral_points(family, 3 * cols, seed.wrapping_add(k as u64), floor)?;
        let n0 = vec![0; g];
        let rows: Vec<Vec<S>> = pts.iter().map(|p| family.eval_scaled(&n0, &items, p)).collect::<Result<_>>()?;
        let label = format!("{name}/k{k}");
        let check = if S::is_exact() {
            let rank = S::rank(&Mat::from_rows(rows), 0.0);
            Check::at_least(label, rank as f64, cols as f64).with_note(format!("rank {rank} of {cols} columns"))
        } else {
            let mut m: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|v| v.to_complex()).collect()).collect();
            for c in 0..cols {
                let s = m.iter().map(|r| r[c].norm()).fold(0.0, f64::max);
                if s > 0.0 {
                    for r in m.iter_mut() {
                        r[c] /= s;
                    }
                }
            }
            let ratio = crate::linalg::float::sv_ratio(&Mat::from_rows(m));
            Check::at_least(label, ratio, svd_tol).with_note(format!("{cols} columns"))
        };
        let check = check.timed(start, pts.len());
        out.evaluated += check.evaluated;
        out.checks.push(check);
    }
    Ok(out)
}

/// Fitted order of Delta(h) = (psi_h(n + e_i) - psi_h(n)) / h^power over
/// the step sequence: slope of log |Delta(h_k) - Delta(h_{k+1})| against
/// log h_k. power = 1 is the forward difference; other powers are the
/// negative control.
#[allow(clippy::too_many_arguments)]
pub fn check_continuum_limit(
    name: &str,
    factory: &dyn Fn(f64) -> Result<Box<dyn BasisFamily<C64>>>,
    j: usize,
    n: &[i64],
    z: &[C64],
    dir: usize,
    hs: &[f64],
    power: i32,
    min_order: f64,
) -> Result<CheckOutcome> {
    let start = Instant::now();
    if hs.len() < 3 || hs.windows(2).any(|w| !(w[1] < w[0] && w[1] > 0.0)) {
        return Err(Error::InvalidParams("h sequence must decrease strictly toward 0 and have at least 3 entries".into()));
    }
    let mut np = n.to_vec();
    np[dir] += 1;
    let deltas: Vec<C64> = hs
        .iter()
        .map(|&h| {
            let fam = factory(h)?;
            Ok((fam.eval(j, &np, z)? - fam.eval(j, n, z)?) / h.powi(power))
        })
        .collect::<Result<_>>()?;
    let diffs: Vec<f64> = deltas.windows(2).map(|w| (w[0] - w[1]).norm()).collect();
    let xs: Vec<f64> = hs[..diffs.len()].iter().map(|h| h.ln()).collect();
    let order = if diffs.iter().all(|&d| d == 0.0) {
        f64::INFINITY
    } else {
        let ys: Vec<f64> = diffs.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    };
    let diff_text: Vec<String> = diffs.iter().map(|d| format!("{d:.3e}")).collect();
    let check = Check::at_least(name, order, min_order)
        .with_note(format!("successive differences {}", diff_text.join(", ")))
        .timed(start, hs.len());
    Ok(check.into())
}

/// Injected faults; each must turn its check red.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// +1e-3 on the T coefficient of the genus-1 lambda operator.
    CorruptCoefficient,
    /// A basis member repeated in the freeness probe.
    DuplicateRow,
    /// T_1 against multiplication by n_1.
    NoncommutingPair,
    /// Continuum differences divided by h^2.
    ContinuumOverscale,
}

impl Fault {
    pub const ALL: [Fault; 4] = [Fault::CorruptCoefficient, Fault::DuplicateRow, Fault::NoncommutingPair, Fault::ContinuumOverscale];

    pub fn name(self) -> &'static str {
        match self {
            Fault::CorruptCoefficient => "corrupt-coefficient",
            Fault::DuplicateRow => "duplicate-row",
            Fault::NoncommutingPair => "noncommuting-pair",
            Fault::ContinuumOverscale => "continuum-overscale",
        }
    }
}

impl FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Fault::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown fault {s:?}; known: {}", Fault::ALL.map(|f| f.name()).join(", "))))
    }
}

/// Adds `delta` to every entry of the T^k coefficient.
pub fn corrupt_coefficient<S: Scalar>(op: &DifferenceOperator<S>, k: &MultiIndex, delta: S) -> DifferenceOperator<S> {
    op.map_term(k, |c| {
        c.map_values(move |_, m| {
            let (r, cl) = m.shape();
            let mut d = Mat::zeros(r, cl);
            for i in 0..r {
                for j in 0..cl {
                    d.set(i, j, delta.clone());
                }
            }
            m.add(&d)
        })
    })
}

/// The scalar pair (T_1, n_1) in genus g; [T_1, n_1] = T_1.
pub fn noncommuting_pair<S: Scalar>(g: usize) -> (DifferenceOperator<S>, DifferenceOperator<S>) {
    let t1 = DifferenceOperator::shift(MultiIndex::unit(g, 0));
    let n1 = DifferenceOperator::monomial(LatticeFunction::scalar(g, PoleSet::Empty, |n| Some(S::from_i64(n[0]))), MultiIndex::zero(g));
    (t1, n1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rat;

    #[test]
    fn noncommuting_pair_fails_both_levels() {
        let (a, b) = noncommuting_pair::<Rat>(2);
        let o = check_commutator("nc", &a, &b, &LatticeWindow::cube(2, -2, 2), 2, 0.0, 1).unwrap();
        assert!(o.checks.iter().all(|c| !c.pass));
    }

    #[test]
    fn shift_commutes_with_shift() {
        let a = DifferenceOperator::<Rat>::shift(MultiIndex::from([1, 0]));
        let b = DifferenceOperator::<Rat>::shift(MultiIndex::from([0, 2]));
        let o = check_commutator("tt", &a, &b, &LatticeWindow::cube(2, -2, 2), 2, 0.0, 1).unwrap();
        assert!(o.checks.iter().all(|c| c.pass && c.exact_zero == Some(true)));
    }

    #[test]
    fn probes_are_reproducible() {
        let f = probe_function::<Rat>(5, 1, 2);
        let g = probe_function::<Rat>(5, 1, 2);
        assert_eq!(f(&[3, -1]).unwrap(), g(&[3, -1]).unwrap());
        assert_ne!(f(&[3, -1]).unwrap(), probe_function::<Rat>(5, 2, 2)(&[3, -1]).unwrap());
    }

    #[test]
    fn fault_names_round_trip() {
        for f in Fault::ALL {
            assert_eq!(f.name().parse::<Fault>().unwrap(), f);
        }
        assert!("nonsense".parse::<Fault>().is_err());
    }

    #[test]
    fn report_fails_on_too_many_skips() {
        let mut r = VerificationReport::new("x");
        r.add(CheckOutcome {
            checks: vec![Check::at_most("a", 0.0, 1.0)],
            skipped: (0..3).map(|i| Skip { check: "a".into(), at: format!("{i}"), reason: "pole".into() }).collect(),
            evaluated: 7,
        });
        assert!(!r.pass);
        assert!((r.skipped_fraction - 0.3).abs() < 1e-12);
    }
}
