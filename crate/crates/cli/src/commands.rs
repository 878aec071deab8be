//! The four modes. Everything is computed before the first file is written,
//! and each file is written atomically, so failures leave no partial output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use dba::algebra::csv::write_coefficients;
use dba::algebra::{DifferenceOperator, LatticeWindow, MultiIndex};
use dba::builders::genus2::{build_genus2_from_points, genus2_special_points};
use dba::builders::{build_collocation, build_genus1_pair, build_omega_pair, build_schur_pair, compare_schur_printed, SpecialPoint, SupportTemplate};
use dba::families::{make_gamma_basis, AbelianDBAParams, BasisFamily, GammaParams, OmegaParams, Which};
use dba::scalar::{Rat, Scalar, C64};
use dba::theta::{theta_eval, validate_siegel, ThetaCharacteristic};
use dba::verify::suites::{
    gamma_suite, genus1_suite, genus2_suite, omega_suite, schur_suite, SuiteConfig, GAMMA_WINDOW, GENUS1_WINDOW, GENUS2_WINDOW, OMEGA_WINDOW,
    SCHUR_WINDOW,
};
use dba::verify::{Fault, VerificationReport};
use dba::Error;

use crate::config::{AbelianConfig, Cx, Family, Mode, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUILD: i32 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn config(m: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, message: m.into() }
    }
}

/// Malformed input is a config error; anything the mathematics refuses is a
/// build failure.
fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::NotSymmetric(_)
            | Error::ImaginaryPartNotPositiveDefinite(_)
            | Error::NotSquare
            | Error::DimensionMismatch { .. }
            | Error::ArityMismatch(_)
            | Error::EmptyWindow
            | Error::InexactTolerance(_)
            | Error::InvalidParams(_)
    )
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if is_config_error(&e) { EXIT_CONFIG } else { EXIT_BUILD }, message: e.to_string() }
    }
}

pub struct Invocation {
    pub config: RunConfig,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub fault: Option<Fault>,
}

pub fn run(inv: &Invocation) -> Result<i32, Failure> {
    match inv.mode {
        Mode::Build => build(inv),
        Mode::Verify => verify(inv),
        Mode::ThetaEval => theta(inv),
        Mode::Sweep => sweep(inv),
    }
}

fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure { code: EXIT_BUILD, message: format!("writing {name}: {e}") };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

fn write_files(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure { code: EXIT_BUILD, message: format!("creating {}: {e}", dir.display()) })?;
    for (name, bytes) in files {
        write_atomic(dir, name, bytes)?;
    }
    Ok(())
}

fn json_bytes(v: &impl Serialize) -> Vec<u8> {
    let mut b = serde_json::to_vec_pretty(v).expect("serializable output");
    b.push(b'\n');
    b
}

fn cx_out(z: &C64) -> Cx {
    [z.re, z.im]
}

fn params_json(p: &AbelianDBAParams) -> Value {
    let v = |x: &[C64]| x.iter().map(cx_out).collect::<Vec<_>>();
    json!({
        "tau": p.theta.sp.tau_rows().iter().map(|r| v(r)).collect::<Vec<_>>(),
        "c": v(&p.c),
        "x0": v(&p.x0),
        "h": v(&p.h),
        "beta": v(&p.beta),
    })
}

fn points_json(points: &[SpecialPoint]) -> Value {
    json!(points.iter().map(|s| json!({"name": s.name, "z": s.z.iter().map(cx_out).collect::<Vec<_>>(), "residual": s.residual})).collect::<Vec<_>>())
}

fn window(inv: &Invocation, family: Family, default: (i64, i64)) -> Result<LatticeWindow, Failure> {
    match &inv.config.window {
        Some(w) => Ok(LatticeWindow::new(w.lo.clone(), w.hi.clone())?),
        None => Ok(LatticeWindow::cube(family.genus(), default.0, default.1)),
    }
}

struct Table {
    file: String,
    bytes: Vec<u8>,
    poles: Vec<Vec<i64>>,
}

fn table<S: Scalar>(file: &str, op: &DifferenceOperator<S>, w: &LatticeWindow) -> Result<Table, Failure> {
    let mut bytes = Vec::new();
    let poles = write_coefficients(op, w, &mut bytes)?;
    Ok(Table { file: file.to_string(), bytes, poles })
}

fn suite_config(inv: &Invocation) -> Result<SuiteConfig, Failure> {
    let mut cfg = inv.config.suite(inv.seed).map_err(Failure::config)?;
    cfg.fault = inv.fault;
    Ok(cfg)
}

fn build(inv: &Invocation) -> Result<i32, Failure> {
    let family = inv.config.require_family().map_err(Failure::config)?;
    let out = inv.out.clone().ok_or_else(|| Failure::config("build needs an output directory (--out or `out`)"))?;
    if inv.fault.is_some() {
        return Err(Failure::config("--inject-fault applies to verify and sweep"));
    }
    let params = inv.config.abelian(family).map_err(Failure::config)?;
    let cfg = suite_config(inv)?;
    let mut manifest = serde_json::Map::new();
    manifest.insert("family".into(), json!(family.name()));
    manifest.insert("seed".into(), json!(inv.seed));
    let mut tables = vec![];
    let mut residuals = serde_json::Map::new();
    let w;
    match family {
        Family::Genus1 => {
            let p = params.expect("theta family");
            w = window(inv, family, GENUS1_WINDOW)?;
            let (l1, l2, pts) = build_genus1_pair(&p)?;
            tables.push(table("L_lambda.csv", &l1, &w)?);
            tables.push(table("L_mu.csv", &l2, &w)?);
            manifest.insert("parameters".into(), params_json(&p));
            manifest.insert("special_points".into(), points_json(&pts));
            residuals.insert("special_points".into(), json!(pts.iter().map(|s| s.residual).fold(0.0, f64::max)));
        }
        Family::Genus2 => {
            let p = params.expect("theta family");
            w = window(inv, family, GENUS2_WINDOW)?;
            let found = genus2_special_points(&p, &cfg.newton)?;
            let ops = [build_genus2_from_points(&p, 0, &found)?, build_genus2_from_points(&p, 1, &found)?];
            for (op, file) in ops.iter().zip(["L_lambda.csv", "L_mu.csv"]) {
                tables.push(table(file, &op.op, &w)?);
                let (mut res, mut sv) = (0.0f64, f64::INFINITY);
                for n in w.points() {
                    if let (Ok(r), Ok(s)) = (op.step_residual(&n), op.min_sv_ratio(&n)) {
                        res = res.max(r);
                        sv = sv.min(s);
                    }
                }
                residuals.insert(format!("{file}/solve_residual"), json!(res));
                residuals.insert(format!("{file}/min_sv_ratio"), json!(sv));
            }
            let all: Vec<SpecialPoint> = found.iter().flat_map(|(_, v)| v.iter().cloned()).collect();
            residuals.insert("special_points".into(), json!(all.iter().map(|s| s.residual).fold(0.0, f64::max)));
            manifest.insert("parameters".into(), params_json(&p));
            manifest.insert("special_points".into(), points_json(&all));
        }
        Family::Schur => {
            w = window(inv, family, SCHUR_WINDOW)?;
            let pair = build_schur_pair(&w, &cfg.collocation)?;
            tables.push(table("L_lambda.csv", &pair.colloc_lambda.op, &w)?);
            tables.push(table("L_mu.csv", &pair.colloc_mu.op, &w)?);
            tables.push(table("L_lambda_printed.csv", &pair.lambda, &w)?);
            tables.push(table("L_mu_printed.csv", &pair.mu, &w)?);
            manifest.insert("collocation".into(), json!({"lambda": pair.colloc_lambda.report, "mu": pair.colloc_mu.report}));
            manifest.insert("printed_comparison".into(), serde_json::to_value(compare_schur_printed(&pair)?).expect("serializable"));
        }
        Family::Omega => {
            w = window(inv, family, OMEGA_WINDOW)?;
            let (l1, l2) = build_omega_pair(&OmegaParams::<Rat>::standard())?;
            tables.push(table("L_lambda1.csv", &l1, &w)?);
            tables.push(table("L_lambda2.csv", &l2, &w)?);
        }
        Family::Gamma => {
            w = window(inv, family, GAMMA_WINDOW)?;
            let fam = make_gamma_basis::<Rat>(GammaParams::standard(), 1)?;
            let r = fam.rank();
            let templates = vec![vec![SupportTemplate::simplex(2, 1); r]; r];
            let dil = w.dilate(&MultiIndex::simplex(2, 1));
            let mut reports = serde_json::Map::new();
            for (which, file) in [(Which::Lambda, "L_lambda.csv"), (Which::Mu, "L_mu.csv")] {
                let c = build_collocation(&fam, &fam.eigenvalue(which), &templates, &dil, &cfg.collocation)?;
                tables.push(table(file, &c.op, &w)?);
                reports.insert(file.into(), serde_json::to_value(&c.report).expect("serializable"));
            }
            manifest.insert("collocation".into(), Value::Object(reports));
        }
    }
    manifest.insert("window".into(), json!({"lo": w.lo, "hi": w.hi}));
    manifest.insert("residuals".into(), Value::Object(residuals));
    manifest.insert(
        "files".into(),
        json!(tables.iter().map(|t| json!({"name": t.file, "poles": t.poles})).collect::<Vec<_>>()),
    );
    let mut files: Vec<(String, Vec<u8>)> = tables.into_iter().map(|t| (t.file, t.bytes)).collect();
    files.push(("manifest.json".into(), json_bytes(&Value::Object(manifest))));
    write_files(&out, &files)?;
    println!("wrote {} files to {}", files.len(), out.display());
    Ok(EXIT_OK)
}

fn run_suite(family: Family, params: Option<&AbelianDBAParams>, cfg: &SuiteConfig) -> dba::Result<VerificationReport> {
    if cfg.fault.is_some() && family != Family::Genus1 {
        return Err(Error::InvalidParams("fault injection is wired into the genus1 suite".into()));
    }
    match family {
        Family::Genus1 => genus1_suite(params.expect("theta family"), cfg),
        Family::Genus2 => genus2_suite(params.expect("theta family"), cfg),
        Family::Schur => schur_suite(cfg),
        Family::Omega => omega_suite(cfg),
        Family::Gamma => gamma_suite(cfg),
    }
}

fn verify(inv: &Invocation) -> Result<i32, Failure> {
    let family = inv.config.require_family().map_err(Failure::config)?;
    let params = inv.config.abelian(family).map_err(Failure::config)?;
    let cfg = suite_config(inv)?;
    let report = run_suite(family, params.as_ref(), &cfg)?;
    print!("{}", report.summary());
    if let Some(out) = &inv.out {
        write_files(out, &[("report.json".into(), json_bytes(&report))])?;
    }
    Ok(if report.pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn theta(inv: &Invocation) -> Result<i32, Failure> {
    let t = inv.config.theta.as_ref().ok_or_else(|| Failure::config("theta-eval needs a `theta` block"))?;
    let tau: Vec<Vec<C64>> = t.tau.iter().map(|r| r.iter().map(|v| C64::new(v[0], v[1])).collect()).collect();
    let sp = validate_siegel(&tau)?;
    let g = sp.genus();
    let ch = t.characteristic.clone().unwrap_or_else(|| ThetaCharacteristic::zero(g));
    if ch.a.len() != g || ch.b.len() != g {
        return Err(Failure::config(format!("characteristic must have {g} entries")));
    }
    let policy = t.policy.unwrap_or_default();
    if let Some(z) = t.z.iter().find(|z| z.len() != g) {
        return Err(Failure::config(format!("z has {} coordinates, tau has genus {g}", z.len())));
    }
    let values: Vec<Value> = t
        .z
        .iter()
        .map(|zc| {
            let z: Vec<C64> = zc.iter().map(|v| C64::new(v[0], v[1])).collect();
            match theta_eval(&z, &sp, &ch, &policy) {
                Ok(v) => json!({
                    "z": zc,
                    "value": cx_out(&v.value),
                    "abs": v.value.norm(),
                    "radius": v.radius,
                    "error_estimate": policy.target_error * v.scale,
                }),
                Err(e) => json!({"z": zc, "error": e.to_string()}),
            }
        })
        .collect();
    let doc = json!({
        "tau": t.tau,
        "characteristic": {"a": ch.a, "b": ch.b},
        "policy": {"target_error": policy.target_error, "max_radius": policy.max_radius},
        "values": values,
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    if let Some(out) = &inv.out {
        write_files(out, &[("theta.json".into(), json_bytes(&doc))])?;
    }
    Ok(EXIT_OK)
}

/// Per-check worst residual; wall times are left out so reruns compare equal.
fn worst_by_check(r: &VerificationReport) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for c in &r.checks {
        let e = m.entry(c.name.clone()).or_insert(f64::NEG_INFINITY);
        *e = f64::max(*e, c.max_residual);
    }
    m
}

fn sweep(inv: &Invocation) -> Result<i32, Failure> {
    let family = inv.config.require_family().map_err(Failure::config)?;
    if !matches!(family, Family::Genus1 | Family::Genus2) {
        return Err(Failure::config("sweep runs over theta-family parameters (genus1 or genus2)"));
    }
    let sw = inv.config.sweep.clone().unwrap_or_default();
    if family == Family::Genus1 && sw.beta.is_some() {
        return Err(Failure::config("genus1 has no beta to sweep"));
    }
    let cfg = suite_config(inv)?;
    let base = inv.config.params.clone().unwrap_or_default();
    let g = family.genus();
    let hs: Vec<Option<Vec<Cx>>> = sw.h.map(|a| a.values(g).into_iter().map(Some).collect()).unwrap_or_else(|| vec![None]);
    let betas: Vec<Option<Vec<Cx>>> = sw.beta.map(|a| a.values(g).into_iter().map(Some).collect()).unwrap_or_else(|| vec![None]);
    let grid: Vec<AbelianConfig> = hs
        .iter()
        .flat_map(|h| {
            let base = base.clone();
            betas.iter().map(move |b| AbelianConfig {
                h: h.clone().or_else(|| base.h.clone()),
                beta: b.clone().or_else(|| base.beta.clone()),
                ..base.clone()
            })
        })
        .collect();
    if grid.is_empty() {
        return Err(Failure::config("sweep grid is empty"));
    }
    let points: Vec<Value> = grid
        .par_iter()
        .map(|pc| {
            let mut rec = json!({"h": pc.h, "beta": pc.beta});
            let o = rec.as_object_mut().expect("object");
            match pc.resolve(family) {
                Err(e) => {
                    o.insert("status".into(), json!("config-error"));
                    o.insert("error".into(), json!(e));
                }
                Ok(p) => match run_suite(family, Some(&p), &cfg) {
                    Err(e) => {
                        o.insert("status".into(), json!(if is_config_error(&e) { "config-error" } else { "build-error" }));
                        o.insert("error".into(), json!(e.to_string()));
                    }
                    Ok(r) => {
                        o.insert("status".into(), json!(if r.pass { "pass" } else { "fail" }));
                        o.insert("failing".into(), json!(r.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect::<Vec<_>>()));
                        o.insert("worst".into(), json!(worst_by_check(&r)));
                    }
                },
            }
            rec
        })
        .collect();
    let passed = points.iter().filter(|p| p["status"] == "pass").count();
    let mut worst: BTreeMap<String, f64> = BTreeMap::new();
    for p in &points {
        if let Some(m) = p.get("worst").and_then(|w| w.as_object()) {
            for (k, v) in m {
                let e = worst.entry(k.clone()).or_insert(f64::NEG_INFINITY);
                *e = e.max(v.as_f64().unwrap_or(f64::NAN));
            }
        }
    }
    let doc = json!({
        "family": family.name(),
        "seed": inv.seed,
        "total": points.len(),
        "passed": passed,
        "pass_rate": passed as f64 / points.len() as f64,
        "worst": worst,
        "points": points,
    });
    println!("{} of {} grid points pass", passed, points.len());
    if let Some(out) = &inv.out {
        write_files(out, &[("sweep.json".into(), json_bytes(&doc))])?;
    }
    let all_failed = points.iter().all(|p| p["status"] != "pass");
    Ok(if all_failed { EXIT_CHECK_FAILED } else { EXIT_OK })
}
