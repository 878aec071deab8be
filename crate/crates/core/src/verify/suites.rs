//! Per-family verification suites with the windows, tolerances and
//! sample sizes used by the acceptance target and the CLI.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_commutator, check_continuum_limit, check_eigen, check_freeness, corrupt_coefficient, noncommuting_pair, Check, CheckOutcome, Fault,
    VerificationReport,
};
use crate::algebra::{DifferenceOperator, LatticeWindow, MultiIndex};
use crate::builders::genus2::{build_genus2_from_points, genus2_special_points};
use crate::builders::{build_collocation, build_genus1_pair, build_omega_pair, build_schur_pair, compare_schur_printed, CollocationConfig, NewtonConfig, SupportTemplate};
use crate::error::{Error, Result};
use crate::families::{
    make_gamma_basis, make_genus1_basis, make_genus2_basis, make_omega_basis, make_schur_basis, sample_spectral_points, AbelianDBAParams, BasisFamily,
    DuplicatedRow, GammaParams, OmegaParams, Which,
};
use crate::scalar::{Rat, Scalar, C64};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Spectral points for float eigen checks.
    pub points: usize,
    /// Spectral points for exact eigen checks.
    pub exact_points: usize,
    pub probes: usize,
    pub floor: f64,
    pub newton: NewtonConfig,
    pub collocation: CollocationConfig,
    /// Replaces the family's default lattice window.
    pub window: Option<WindowSpec>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

/// Overrides of the float thresholds; exact families always test for zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub eigen: Option<f64>,
    pub commutator: Option<f64>,
    pub agreement: Option<f64>,
    pub structural_zeros: Option<f64>,
    pub newton: Option<f64>,
    pub freeness: Option<f64>,
    pub continuum_order: Option<f64>,
}

impl SuiteConfig {
    fn window(&self, g: usize, default: (i64, i64)) -> Result<LatticeWindow> {
        match &self.window {
            None => Ok(LatticeWindow::cube(g, default.0, default.1)),
            Some(w) if w.lo.len() != g || w.hi.len() != g => Err(Error::DimensionMismatch { expected: g, got: w.lo.len().max(w.hi.len()) }),
            Some(w) => LatticeWindow::new(w.lo.clone(), w.hi.clone()),
        }
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 42,
            points: 50,
            exact_points: 4,
            probes: 3,
            floor: 1e-3,
            newton: NewtonConfig::default(),
            collocation: CollocationConfig::default(),
            window: None,
            tolerances: Tolerances::default(),
            fault: None,
        }
    }
}

pub const GENUS1_WINDOW: (i64, i64) = (-5, 5);
pub const GENUS2_WINDOW: (i64, i64) = (-3, 3);
pub const SCHUR_WINDOW: (i64, i64) = (0, 8);
pub const OMEGA_WINDOW: (i64, i64) = (0, 6);
pub const GAMMA_WINDOW: (i64, i64) = (0, 3);

type Entry = (MultiIndex, usize, usize);

fn entries_at<S: Scalar>(op: &DifferenceOperator<S>, n: &[i64]) -> Result<BTreeMap<Entry, S>> {
    let mut out = BTreeMap::new();
    for (k, f) in op.terms() {
        let m = f.eval(n)?;
        let (r, c) = m.shape();
        for i in 0..r {
            for j in 0..c {
                out.insert((k.clone(), i, j), m.get(i, j).clone());
            }
        }
    }
    Ok(out)
}

/// Entrywise agreement |a - b| / max(1, |b|) of `reference` and `candidate`
/// over the window. Entries the reference holds at exactly zero are
/// reported separately as vanishings, relative to the largest entry at n.
/// Structural zeros are measured, so nothing may be pruned to zero first.
fn unpruned(cfg: &SuiteConfig) -> CollocationConfig {
    CollocationConfig { prune: 0.0, ..cfg.collocation.clone() }
}

fn compare_operators(
    name: &str,
    reference: &DifferenceOperator<C64>,
    candidate: &DifferenceOperator<C64>,
    window: &LatticeWindow,
    agree_tol: f64,
    vanish_tol: f64,
) -> CheckOutcome {
    let start = Instant::now();
    let mut agree = 0.0f64;
    let mut vanish = 0.0f64;
    let mut evaluated = 0;
    let mut skipped = vec![];
    let mut worst: Option<(Vec<i64>, Entry)> = None;
    for n in window.points() {
        let (r, c) = match (entries_at(reference, &n), entries_at(candidate, &n)) {
            (Ok(r), Ok(c)) => (r, c),
            (Err(e), _) | (_, Err(e)) => {
                skipped.push(super::skip(name, format!("n={n:?}"), &e));
                continue;
            }
        };
        evaluated += 1;
        let scale = c.values().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let keys: std::collections::BTreeSet<&Entry> = r.keys().chain(c.keys()).collect();
        for key in keys {
            let a = r.get(key).copied().unwrap_or_default();
            let b = c.get(key).copied().unwrap_or_default();
            let d = (a - b).norm() / b.norm().max(1.0);
            if d > agree {
                agree = d;
                worst = Some((n.clone(), key.clone()));
            }
            if a == C64::new(0.0, 0.0) {
                vanish = vanish.max(b.norm() / scale);
            }
        }
    }
    let mut a = Check::at_most(format!("{name}/agreement"), agree, agree_tol);
    if let Some((n, (k, i, j))) = worst {
        a = a.with_note(format!("worst at n={n:?}, shift {:?}, entry ({i},{j})", k.0));
    }
    let v = Check::at_most(format!("{name}/structural-zeros"), vanish, vanish_tol);
    let a = a.timed(start, evaluated);
    let v = v.timed(start, evaluated);
    CheckOutcome { checks: vec![a, v], skipped, evaluated: 2 * evaluated }
}

/// The genus-1 family with h rescaled to modulus `h`, keeping its phase.
fn genus1_family_at(p: &AbelianDBAParams, h: f64) -> Result<Box<dyn BasisFamily<C64>>> {
    let mut q = p.clone();
    q.h = vec![p.h[0] * (h / p.h[0].norm())];
    Ok(Box::new(make_genus1_basis(q)?))
}

/// Closed-form genus-1 pair against the defining relations, collocation,
/// freeness and the continuum limit.
pub fn genus1_suite(p: &AbelianDBAParams, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new(match cfg.fault {
        Some(f) => format!("genus1+{}", f.name()),
        None => "genus1".to_string(),
    });
    let (mut l1, l2, _) = build_genus1_pair(p)?;
    if cfg.fault == Some(Fault::CorruptCoefficient) {
        l1 = corrupt_coefficient(&l1, &MultiIndex::from([1]), C64::new(1e-3, 0.0));
    }
    let fam = make_genus1_basis(p.clone())?;
    let pts = sample_spectral_points(&fam, cfg.points, cfg.seed, cfg.floor)?;
    let w = cfg.window(1, GENUS1_WINDOW)?;
    let tol = &cfg.tolerances;

    rep.add_result("eigen/lambda", check_eigen("eigen/lambda", &l1, &fam, &fam.eigenvalue(Which::Lambda), &w, &pts, tol.eigen.unwrap_or(1e-9)));
    rep.add_result("eigen/mu", check_eigen("eigen/mu", &l2, &fam, &fam.eigenvalue(Which::Mu), &w, &pts, tol.eigen.unwrap_or(1e-9)));
    if cfg.fault == Some(Fault::NoncommutingPair) {
        let (a, b) = noncommuting_pair::<C64>(1);
        rep.add_result("commutator", check_commutator("commutator", &a, &b, &w, cfg.probes, tol.commutator.unwrap_or(1e-6), cfg.seed));
    } else {
        rep.add_result("commutator", check_commutator("commutator", &l1, &l2, &w, cfg.probes, tol.commutator.unwrap_or(1e-6), cfg.seed));
    }

    let dil = w.dilate(&[MultiIndex::from([3])]);
    for (which, op, deg) in [(Which::Lambda, &l1, 2), (Which::Mu, &l2, 3)] {
        let name = format!("collocation/{}", if which == Which::Lambda { "lambda" } else { "mu" });
        let t = vec![vec![SupportTemplate::simplex(1, deg)]];
        match build_collocation(&fam, &fam.eigenvalue(which), &t, &dil, &unpruned(cfg)) {
            Ok(c) => {
                // v0 and u0 are the structural zeros of the genus-1 pair
                rep.add(compare_operators(&name, op, &c.op, &w, tol.agreement.unwrap_or(1e-8), tol.structural_zeros.unwrap_or(1e-10)));
            }
            Err(e) => rep.add_result(&name, Err(e)),
        }
    }

    let dup = DuplicatedRow { inner: &fam, copy_of: 0 };
    let basis: &dyn BasisFamily<C64> = if cfg.fault == Some(Fault::DuplicateRow) { &dup } else { &fam };
    rep.add_result("freeness", check_freeness("freeness", basis, 2, tol.freeness.unwrap_or(1e-8), cfg.seed, cfg.floor));

    let h0 = p.h[0].norm();
    let hs: Vec<f64> = (0..5).map(|k| h0 / f64::from(1 << k)).collect();
    let power = if cfg.fault == Some(Fault::ContinuumOverscale) { 2 } else { 1 };
    let factory = |h: f64| genus1_family_at(p, h);
    rep.add_result("continuum", check_continuum_limit("continuum", &factory, 0, &[0], &pts[0], 0, &hs, power, tol.continuum_order.unwrap_or(0.9)));
    Ok(rep)
}

/// Special-point genus-2 operators: Newton residuals, agreement with
/// collocation, structural zeros, eigen relations, commutation, freeness.
pub fn genus2_suite(p: &AbelianDBAParams, cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("genus2");
    let tol = &cfg.tolerances;
    let start = Instant::now();
    let found = genus2_special_points(p, &cfg.newton)?;
    for (pair, roots) in &found {
        let r = roots.iter().map(|s| s.residual).fold(0.0, f64::max);
        let mut c = Check::at_most(format!("newton/{pair}"), r, tol.newton.unwrap_or(1e-10)).with_note(format!("{} points", roots.len()));
        c.wall_ms = start.elapsed().as_secs_f64() * 1e3;
        rep.add(c);
    }
    let fam = make_genus2_basis(p.clone())?;
    let w = cfg.window(2, GENUS2_WINDOW)?;
    let ops = [build_genus2_from_points(p, 0, &found)?, build_genus2_from_points(p, 1, &found)?];
    let templates = crate::builders::graded_templates(2, &[1, 2], 2);
    let pts = sample_spectral_points(&fam, cfg.points, cfg.seed, cfg.floor)?;
    for (dir, label) in [(0, "lambda"), (1, "mu")] {
        let lam = fam.lambda_direction(dir);
        match build_collocation(&fam, &lam, &templates, &w, &unpruned(cfg)) {
            Ok(c) => rep.add(compare_operators(&format!("collocation/{label}"), &ops[dir].op, &c.op, &w, tol.agreement.unwrap_or(1e-7), tol.structural_zeros.unwrap_or(1e-8))),
            Err(e) => rep.add_result(&format!("collocation/{label}"), Err(e)),
        }
        rep.add_result(&format!("eigen/{label}"), check_eigen(&format!("eigen/{label}"), &ops[dir].op, &fam, &lam, &w, &pts, tol.eigen.unwrap_or(1e-8)));
    }
    // one step in from the window edge keeps every composed product defined
    let inner = LatticeWindow::new(w.lo.iter().map(|v| v + 1).collect(), w.hi.iter().map(|v| v - 1).collect());
    let cw = inner.unwrap_or_else(|_| w.clone());
    rep.add_result("commutator", check_commutator("commutator", &ops[0].op, &ops[1].op, &cw, cfg.probes, tol.commutator.unwrap_or(1e-6), cfg.seed));
    rep.add_result("freeness", check_freeness("freeness", &fam, 2, tol.freeness.unwrap_or(1e-8), cfg.seed, cfg.floor));
    Ok(rep)
}

/// Exact collocation operators of the Schur limit and the displayed formulas.
pub fn schur_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("schur");
    let w = cfg.window(2, SCHUR_WINDOW)?;
    let start = Instant::now();
    let pair = build_schur_pair(&w, &cfg.collocation)?;
    rep.add(
        Check::at_most("collocation/residual", if pair.colloc_lambda.report.solved + pair.colloc_mu.report.solved > 0 { 0.0 } else { 1.0 }, 0.0)
            .with_note(format!("{} + {} exact solves", pair.colloc_lambda.report.solved, pair.colloc_mu.report.solved))
            .timed(start, pair.colloc_lambda.report.solved + pair.colloc_mu.report.solved),
    );
    let fam = make_schur_basis::<Rat>();
    let pts = sample_spectral_points(&fam, cfg.exact_points, cfg.seed, 0.0)?;
    rep.add_result("eigen/lambda", check_eigen("eigen/lambda", &pair.colloc_lambda.op, &fam, &fam.eigenvalue(Which::Lambda), &w, &pts, 0.0));
    rep.add_result("eigen/mu", check_eigen("eigen/mu", &pair.colloc_mu.op, &fam, &fam.eigenvalue(Which::Mu), &w, &pts, 0.0));
    rep.add_result("commutator", check_commutator("commutator", &pair.colloc_lambda.op, &pair.colloc_mu.op, &w, cfg.probes, 0.0, cfg.seed));

    let start = Instant::now();
    let cmp = compare_schur_printed(&pair)?;
    for c in &cmp.coefficients {
        let mut check = Check::at_most(format!("printed/{}/{}", c.operator, c.slot.name), c.mismatched as f64, 0.0);
        check.pass = c.mismatched == 0 && c.matched >= 30;
        check = check.with_note(format!("{} matched, {} mismatched, {} poles", c.matched, c.mismatched, c.poles));
        if let Some(m) = &c.first_mismatch {
            check = check.with_note(format!("first mismatch at n={:?}: printed {} vs {}", m.n, m.printed, m.collocated));
        }
        rep.add(check.timed(start, c.matched + c.mismatched));
    }
    let mut q1 = Check::at_most("printed/lambda/q1-undefined-p12", cmp.q1.mismatched as f64, 0.0)
        .with_note(format!("q1 references undefined {}; {} reconciles it at {} points", cmp.q1.undefined_symbol, cmp.q1.substitution, cmp.q1.matched));
    q1.pass = cmp.q1.mismatched == 0 && cmp.q1.matched >= 30;
    rep.add(q1.timed(start, cmp.q1.matched + cmp.q1.mismatched));
    rep.add(Check::at_most("printed/support", cmp.unexpected_nonzero as f64, 0.0).with_note("collocated entries outside every displayed slot"));
    Ok(rep)
}

fn omega_gluing(cfg: &SuiteConfig, trials: usize) -> Result<Check> {
    let start = Instant::now();
    let fam = make_omega_basis::<Rat>(OmegaParams::standard())?;
    let lam = [fam.eigenvalue(Which::Lambda), fam.eigenvalue(Which::Mu)];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut bad, mut tested) = (0usize, 0usize);
    while tested < trials {
        let t1 = Rat::random(&mut rng, 3.0);
        let t2 = Rat::random(&mut rng, 3.0);
        let left = [Rat::one(), Rat::zero(), t1.clone(), t2.clone()];
        let right = [t1, t2, Rat::zero(), Rat::one()];
        let vals = || -> Result<bool> {
            let mut ok = true;
            for l in &lam {
                ok &= l.eval(&left)? == l.eval(&right)?;
            }
            for j in 0..2 {
                for n in [[0, 0], [2, 1], [1, 3], [3, 2]] {
                    ok &= fam.eval(j, &n, &left)? == fam.eval(j, &n, &right)?;
                }
            }
            Ok(ok)
        };
        match vals() {
            Ok(ok) => {
                tested += 1;
                bad += usize::from(!ok);
            }
            Err(_) => continue,
        }
    }
    Ok(Check::exact("gluing", bad as f64, bad == 0).with_note(format!("{trials} rational points on the gluing line")).timed(start, trials))
}

/// Displayed Omega operators against the defining relations.
pub fn omega_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("omega");
    let (l1, l2) = build_omega_pair(&OmegaParams::standard())?;
    let fam = make_omega_basis::<Rat>(OmegaParams::standard())?;
    let w = cfg.window(2, OMEGA_WINDOW)?;
    let pts = sample_spectral_points(&fam, cfg.exact_points, cfg.seed, 0.0)?;
    rep.add_result("eigen/lambda1", check_eigen("eigen/lambda1", &l1, &fam, &fam.eigenvalue(Which::Lambda), &w, &pts, 0.0));
    rep.add_result("eigen/lambda2", check_eigen("eigen/lambda2", &l2, &fam, &fam.eigenvalue(Which::Mu), &w, &pts, 0.0));
    rep.add_result("commutator", check_commutator("commutator", &l1, &l2, &w, cfg.probes, 0.0, cfg.seed));
    match omega_gluing(cfg, 20) {
        Ok(c) => rep.add(c),
        Err(e) => rep.add_result("gluing", Err(e)),
    }
    rep.add_result("freeness", check_freeness("freeness", &fam, 2, 0.0, cfg.seed, 0.0));
    Ok(rep)
}

/// Exact collocation on the glued Gamma variety.
pub fn gamma_suite(cfg: &SuiteConfig) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("gamma");
    let fam = make_gamma_basis::<Rat>(GammaParams::standard(), 1)?;
    let r = fam.rank();
    let templates = vec![vec![SupportTemplate::simplex(2, 1); r]; r];
    let w = cfg.window(2, GAMMA_WINDOW)?;
    let dil = w.dilate(&MultiIndex::simplex(2, 1));
    let pts = sample_spectral_points(&fam, cfg.exact_points, cfg.seed, 0.0)?;
    let mut ops = vec![];
    for (which, label) in [(Which::Lambda, "lambda"), (Which::Mu, "mu")] {
        let lam = fam.eigenvalue(which);
        match build_collocation(&fam, &lam, &templates, &dil, &cfg.collocation) {
            Ok(c) => {
                rep.add_result(&format!("eigen/{label}"), check_eigen(&format!("eigen/{label}"), &c.op, &fam, &lam, &w, &pts, 0.0));
                ops.push(c.op);
            }
            Err(e) => rep.add_result(&format!("collocation/{label}"), Err(e)),
        }
    }
    if ops.len() == 2 {
        rep.add_result("commutator", check_commutator("commutator", &ops[0], &ops[1], &w, cfg.probes, 0.0, cfg.seed));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut bad = 0;
    for _ in 0..10 {
        let t = vec![Rat::random(&mut rng, 3.0), Rat::random(&mut rng, 3.0)];
        for j in 0..r {
            for n in [[0, 0], [1, 2], [3, 1]] {
                if fam.gluing_residual(j, &n, &t).map(|v| !Scalar::is_zero(&v)).unwrap_or(false) {
                    bad += 1;
                }
            }
        }
    }
    rep.add(Check::exact("gluing", bad as f64, bad == 0).timed(start, 10 * r * 3));
    rep.add_result("freeness", check_freeness("freeness", &fam, 2, 0.0, cfg.seed, 0.0));
    Ok(rep)
}
