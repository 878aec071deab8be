//! Acceptance target: one PASS/FAIL line per criterion. Exits nonzero only
//! when a criterion fails outside the known-red list in the README.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dba::algebra::{DifferenceOperator, LatticeFunction, LatticeWindow, MultiIndex};
use dba::families::AbelianDBAParams;
use dba::matrix::Mat;
use dba::scalar::{Rat, Scalar, C64};
use dba::theta::{theta_fixed_radius, validate_siegel, Theta, ThetaCharacteristic};
use dba::verify::suites::{genus1_suite, genus2_suite, omega_suite, schur_suite, SuiteConfig};
use dba::verify::{probe_function, Fault, VerificationReport};

struct Line {
    id: usize,
    pass: bool,
    known_red: bool,
    detail: String,
    secs: f64,
    budget: f64,
}

fn fmt_report_failures(r: &VerificationReport) -> String {
    let bad: Vec<String> = r.checks.iter().filter(|c| !c.pass).map(|c| format!("{}={:.3e}", c.name, c.max_residual)).collect();
    if bad.is_empty() {
        "all checks pass".into()
    } else {
        format!("failing: {}", bad.join(", "))
    }
}

fn worst(r: &VerificationReport, prefix: &str) -> (bool, f64) {
    let mut pass = true;
    let mut m = 0.0f64;
    let mut any = false;
    for c in r.matching(prefix) {
        any = true;
        pass &= c.pass;
        m = m.max(c.max_residual);
    }
    (pass && any, m)
}

fn criterion1() -> Line {
    let t = Instant::now();
    let mut notes = vec![];
    let mut pass = true;
    let zero1 = [C64::new(0.0, 0.0)];
    let sp = validate_siegel(&[vec![C64::new(0.0, 1.0)]]).unwrap();
    let th = Theta::new(sp.clone());
    let brute = theta_fixed_radius(&zero1, &sp, &ThetaCharacteristic::zero(1), 30);
    let e = (th.value(&zero1) - brute).norm();
    pass &= e < 1e-12;
    notes.push(format!("theta(0,i) vs radius-30 sum {e:.1e}"));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut half = 0.0f64;
    for _ in 0..10 {
        let tau = C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(0.8..3.0));
        let th = Theta::new(validate_siegel(&[vec![tau]]).unwrap());
        half = half.max(th.value(&[(C64::new(1.0, 0.0) + tau) * 0.5]).norm());
    }
    pass &= half < 1e-12;
    notes.push(format!("|theta((1+tau)/2)| max {half:.1e}"));

    let taus = [
        vec![vec![C64::new(0.1, 1.1)]],
        vec![vec![C64::new(0.0, 2.0), C64::new(0.5, 0.0)], vec![C64::new(0.5, 0.0), C64::new(0.0, 3.0)]],
    ];
    let mut qp = 0.0f64;
    for tau in &taus {
        let sp = validate_siegel(tau).unwrap();
        let g = sp.genus();
        let th = Theta::new(sp.clone());
        for _ in 0..25 {
            let z: Vec<C64> = (0..g).map(|_| C64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
            let m0: Vec<i64> = (0..g).map(|_| rng.gen_range(-2..=2)).collect();
            let q: Vec<i64> = (0..g).map(|_| rng.gen_range(-1..=1)).collect();
            let shift = sp.lattice_vector(&m0, &q);
            let zs: Vec<C64> = z.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let mut quad = C64::new(0.0, 0.0);
            let mut lin = C64::new(0.0, 0.0);
            for i in 0..g {
                for j in 0..g {
                    quad += sp.tau(i, j) * (q[i] * q[j]) as f64;
                }
                lin += z[i] * q[i] as f64;
            }
            let factor = (C64::new(0.0, -std::f64::consts::PI) * quad + C64::new(0.0, -2.0 * std::f64::consts::PI) * lin).exp();
            let lhs = th.eval(&zs).unwrap();
            let rhs = factor * th.value(&z);
            qp = qp.max((lhs.value - rhs).norm() / lhs.scale.max(rhs.norm()).max(1e-300));
        }
    }
    pass &= qp < 1e-10;
    notes.push(format!("quasi-periodicity max {qp:.1e} on 50 samples"));
    Line { id: 1, pass, known_red: false, detail: notes.join("; "), secs: t.elapsed().as_secs_f64(), budget: 5.0 }
}

fn random_operator(rng: &mut ChaCha8Rng, table_window: &LatticeWindow) -> DifferenceOperator<Rat> {
    let mut op = DifferenceOperator::zero(2, 2, 2);
    let terms = rng.gen_range(1..=3);
    for _ in 0..terms {
        let k = MultiIndex::from([rng.gen_range(-2..=2), rng.gen_range(-2..=2)]);
        let table = table_window
            .points()
            .into_iter()
            .map(|n| {
                let v: Vec<Vec<Rat>> = (0..2).map(|_| (0..2).map(|_| Rat::from_i64(rng.gen_range(-3..=3))).collect()).collect();
                (n, Mat::from_rows(v))
            })
            .collect();
        op.add_term(k, LatticeFunction::from_table(2, (2, 2), table_window.clone(), table)).unwrap();
    }
    op
}

fn criterion2() -> Line {
    let t = Instant::now();
    let w = LatticeWindow::cube(2, -4, 4);
    let table_window = LatticeWindow::cube(2, -8, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut assoc_ok, mut apply_ok) = (0, 0);
    for trial in 0..100 {
        let a = random_operator(&mut rng, &table_window);
        let b = random_operator(&mut rng, &table_window);
        let c = random_operator(&mut rng, &table_window);
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        let z = left.sub(&right).unwrap().is_zero_on_window(&w, 0.0).unwrap();
        assoc_ok += usize::from(z.zero && z.skipped.is_empty());
        let ab = a.compose(&b).unwrap();
        let phi = probe_function::<Rat>(trial, 0, 2);
        let mut ok = true;
        for n in w.points() {
            let lhs = ab.apply_at(&phi, &n).unwrap();
            let rhs = a.apply_at(&|m: &[i64]| b.apply_at(&phi, m), &n).unwrap();
            ok &= lhs == rhs;
        }
        apply_ok += usize::from(ok);
    }
    let pass = assoc_ok == 100 && apply_ok == 100;
    Line {
        id: 2,
        pass,
        known_red: false,
        detail: format!("associativity exact {assoc_ok}/100, apply/compose exact {apply_ok}/100"),
        secs: t.elapsed().as_secs_f64(),
        budget: 10.0,
    }
}

fn criterion3(rep: &VerificationReport, secs: f64) -> Line {
    let (e, em) = worst(rep, "eigen/");
    let (c, cm) = worst(rep, "commutator/");
    let (a, am) = worst(rep, "collocation/");
    let pass = e && c && a;
    Line {
        id: 3,
        pass,
        known_red: false,
        detail: format!("eigen {em:.1e} (<=1e-9), commutator {cm:.1e} (<=1e-6), collocation agreement/zeros {am:.1e}"),
        secs,
        budget: 30.0,
    }
}

fn criterion4() -> (Line, VerificationReport) {
    let t = Instant::now();
    let rep = genus2_suite(&AbelianDBAParams::genus2_default(), &SuiteConfig::default()).expect("genus-2 suite");
    let secs = t.elapsed().as_secs_f64();
    let (n, nm) = worst(&rep, "newton/");
    let (a, _) = worst(&rep, "collocation/");
    let am = rep.matching("collocation/").filter(|c| c.name.ends_with("agreement")).map(|c| c.max_residual).fold(0.0, f64::max);
    let zm = rep.matching("collocation/").filter(|c| c.name.ends_with("structural-zeros")).map(|c| c.max_residual).fold(0.0, f64::max);
    let (e, em) = worst(&rep, "eigen/");
    let (c, cm) = worst(&rep, "commutator/");
    let pass = n && a && e && c;
    let line = Line {
        id: 4,
        pass,
        known_red: false,
        detail: format!("newton {nm:.1e}, special vs collocation {am:.1e} (<=1e-7), structural zeros {zm:.1e} (<=1e-8), eigen {em:.1e}, commutator {cm:.1e}"),
        secs,
        budget: 300.0,
    };
    (line, rep)
}

const LISTED_SCHUR: [&str; 17] =
    ["f11", "f02", "f2", "g2", "v20", "v11", "v1", "u1", "r21", "r12", "r03", "r11", "r02", "r2", "j11", "j02", "j2"];
/// Chained through the displayed r03, which disagrees with collocation.
const KNOWN_RED_SCHUR: [&str; 7] = ["r03", "r12", "r11", "r02", "r2", "j02", "j2"];

fn criterion5() -> Line {
    let t = Instant::now();
    let rep = schur_suite(&SuiteConfig::default()).expect("schur suite");
    let secs = t.elapsed().as_secs_f64();
    let (e, _) = worst(&rep, "eigen/");
    let (c, _) = worst(&rep, "commutator/");
    let q1 = rep.check("printed/lambda/q1-undefined-p12").map(|c| c.pass).unwrap_or(false);
    let mut failing = vec![];
    for name in LISTED_SCHUR {
        let key = if name.starts_with(['f', 'g', 'r', 'j']) { format!("printed/mu/{name}") } else { format!("printed/lambda/{name}") };
        if !rep.check(&key).map(|c| c.pass).unwrap_or(false) {
            failing.push(name);
        }
    }
    let pass = e && c && q1 && failing.is_empty();
    let known_red = e && c && q1 && failing.iter().all(|n| KNOWN_RED_SCHUR.contains(n));
    let min_matched = LISTED_SCHUR
        .iter()
        .filter(|n| !failing.contains(n))
        .filter_map(|n| {
            let op = if n.starts_with(['f', 'g', 'r', 'j']) { "mu" } else { "lambda" };
            rep.check(&format!("printed/{op}/{n}")).map(|c| c.evaluated)
        })
        .min()
        .unwrap_or(0);
    Line {
        id: 5,
        pass,
        known_red,
        detail: format!(
            "collocation eigen exact {e}, commutator exact {c}, q1/p12 reported {q1}, printed match ({min_matched}+ points each) except {:?}",
            failing
        ),
        secs,
        budget: 120.0,
    }
}

fn criterion6(rep: &VerificationReport, secs: f64) -> Line {
    let (e, _) = worst(rep, "eigen/");
    let (c, _) = worst(rep, "commutator/");
    let gl = rep.check("gluing").map(|c| c.pass).unwrap_or(false);
    let em = rep.matching("eigen/").map(|c| c.max_residual).fold(0.0, f64::max);
    let cm = rep.matching("commutator/").map(|c| c.max_residual).fold(0.0, f64::max);
    Line {
        id: 6,
        pass: e && c && gl,
        known_red: gl,
        detail: format!("eigen exact {e} (max {em:.3e}), commutator exact {c} (max {cm:.3e}), gluing exact {gl}"),
        secs,
        budget: 60.0,
    }
}

fn criterion7(g1: &VerificationReport, g2: &VerificationReport, om: &VerificationReport) -> Line {
    let t = Instant::now();
    let (f1, r1) = (worst(g1, "freeness/").0, g1.matching("freeness/").map(|c| c.max_residual).fold(f64::INFINITY, f64::min));
    let (f2, r2) = (worst(g2, "freeness/").0, g2.matching("freeness/").map(|c| c.max_residual).fold(f64::INFINITY, f64::min));
    let fo = worst(om, "freeness/").0;
    let ranks: Vec<String> = om.matching("freeness/").map(|c| format!("{} {}", c.name, c.notes.join(" "))).collect();
    let cont = g1.check("continuum").map(|c| (c.pass, c.max_residual)).unwrap_or((false, f64::NAN));
    Line {
        id: 7,
        pass: f1 && f2 && fo && cont.0,
        known_red: f1 && f2 && cont.0,
        detail: format!(
            "sigma ratio genus1 {r1:.1e}, genus2 {r2:.1e} (>1e-8); omega exact {fo} [{}]; continuum order {:.3}",
            ranks.join("; "),
            cont.1
        ),
        secs: t.elapsed().as_secs_f64(),
        budget: 60.0,
    }
}

fn criterion8() -> Line {
    let t = Instant::now();
    let p = AbelianDBAParams::genus1_default();
    let mut parts = vec![];
    let mut pass = true;
    for (fault, target) in [
        (Fault::CorruptCoefficient, "eigen/lambda"),
        (Fault::DuplicateRow, "freeness/"),
        (Fault::NoncommutingPair, "commutator/"),
        (Fault::ContinuumOverscale, "continuum"),
    ] {
        let cfg = SuiteConfig { fault: Some(fault), ..Default::default() };
        let rep = genus1_suite(&p, &cfg).expect("faulted suite");
        let targeted_fails = rep.matching(target).any(|c| !c.pass);
        let measured = rep.matching(target).find(|c| !c.pass).map(|c| c.max_residual).unwrap_or(f64::NAN);
        pass &= !rep.pass && targeted_fails;
        parts.push(format!("{} -> {} ({target} {measured:.2e})", fault.name(), if rep.pass { "pass" } else { "fail" }));
    }
    Line { id: 8, pass, known_red: false, detail: parts.join("; "), secs: t.elapsed().as_secs_f64(), budget: 60.0 }
}

fn main() -> ExitCode {
    let mut lines = vec![criterion1(), criterion2()];

    let t = Instant::now();
    let g1 = genus1_suite(&AbelianDBAParams::genus1_default(), &SuiteConfig::default()).expect("genus-1 suite");
    let g1_secs = t.elapsed().as_secs_f64();
    lines.push(criterion3(&g1, g1_secs));
    if !g1.pass {
        eprintln!("genus1: {}", fmt_report_failures(&g1));
    }
    let (l4, g2) = criterion4();
    lines.push(l4);
    lines.push(criterion5());
    let t = Instant::now();
    let om = omega_suite(&SuiteConfig::default()).expect("omega suite");
    lines.push(criterion6(&om, t.elapsed().as_secs_f64()));
    lines.push(criterion7(&g1, &g2, &om));
    lines.push(criterion8());

    let mut unexpected = 0;
    for l in &lines {
        let status = match (l.pass, l.known_red) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known red)",
            (false, false) => "FAIL",
        };
        let over = if l.secs > l.budget { format!(" OVER BUDGET {:.0}s", l.budget) } else { String::new() };
        println!("criterion {}: {status} [{:.1}s{over}] {}", l.id, l.secs, l.detail);
        if !l.pass && !l.known_red {
            unexpected += 1;
        }
    }
    println!("{} of {} criteria pass; {} fail outside the known-red list", lines.iter().filter(|l| l.pass).count(), lines.len(), unexpected);
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
