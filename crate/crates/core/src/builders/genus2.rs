//! Genus-2 operator for lambda_i = theta(z - h_i e_i) theta(z + h_i e_i) / theta^2
//! by evaluating the defining identity at intersection points of shifted
//! theta divisors.
//!
//! With theta_0 = theta(z), theta_k = theta(z - h_k e_k), theta_b = theta(z - beta)
//! and the n-product removed, row 1 multiplied by theta_0^3 and row 2 by
//! theta_0^4 are polynomial identities. Terms with m_i = 0 drop out on
//! Theta_i, and after dividing by theta_i the remaining unknowns decouple
//! at the points p = Theta_1 . Theta_2, r = Theta . Theta_b, Theta_k . Theta
//! and Theta_b . Theta_k, visited in an order where each step involves only
//! the unknowns it solves for and those already known.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use super::newton::{find_divisor_intersection, NewtonConfig};
use super::{small_solve, SpecialPoint};
use crate::algebra::{DifferenceOperator, LatticeFunction, MultiIndex, PoleSet};
use crate::error::{Error, Result};
use crate::families::abelian::{vadd, vsub};
use crate::families::AbelianDBAParams;
use crate::matrix::Mat;
use crate::scalar::C64;

/// Below this sigma ratio a special-point solve counts as singular.
const SINGULAR_RATIO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pair {
    P,
    Q,
    S,
    R,
    U,
    T,
}

impl Pair {
    fn name(self) -> &'static str {
        match self {
            Pair::P => "p",
            Pair::Q => "q",
            Pair::S => "s",
            Pair::R => "r",
            Pair::U => "u",
            Pair::T => "t",
        }
    }

    const ALL: [Pair; 6] = [Pair::P, Pair::Q, Pair::S, Pair::R, Pair::U, Pair::T];
}

/// (operator row, basis column, shift).
type Term = (usize, usize, MultiIndex);

#[derive(Debug, Clone)]
struct PointData {
    z: Vec<C64>,
    t0: C64,
    /// theta(z - h_k e_k) for k = 1, 2.
    tk: [C64; 2],
    tb: C64,
    /// theta(z + h_i e_i).
    tplus: C64,
}

#[derive(Debug)]
struct Solver {
    params: AbelianDBAParams,
    dir: usize,
    points: HashMap<Pair, Vec<PointData>>,
    steps: Vec<(usize, Pair, Vec<Term>)>,
    cache: RwLock<HashMap<Vec<i64>, Result<Solved>>>,
}

#[derive(Debug, Clone)]
struct Solved {
    coeffs: BTreeMap<MultiIndex, Mat<C64>>,
    residual: f64,
    min_sv_ratio: f64,
}

fn idx(g: [i64; 2]) -> MultiIndex {
    MultiIndex::from(g)
}

impl Solver {
    fn unit(&self, a: i64, b: i64) -> MultiIndex {
        // a along direction i, b along the other
        let mut v = [0; 2];
        v[self.dir] = a;
        v[1 - self.dir] = b;
        idx(v)
    }

    fn terms(&self, row: usize) -> Vec<Term> {
        let u = |a, b| self.unit(a, b);
        if row == 0 {
            vec![(0, 0, u(1, 0)), (0, 0, u(2, 0)), (0, 0, u(1, 1)), (0, 1, u(1, 0))]
        } else {
            vec![
                (1, 0, u(1, 0)),
                (1, 0, u(2, 0)),
                (1, 0, u(1, 1)),
                (1, 0, u(3, 0)),
                (1, 0, u(2, 1)),
                (1, 0, u(1, 2)),
                (1, 1, u(1, 0)),
                (1, 1, u(2, 0)),
                (1, 1, u(1, 1)),
            ]
        }
    }

    fn plan(dir: usize) -> Vec<(usize, Pair, Vec<(usize, i64, i64)>)> {
        let (own, other, b_own, b_other) = if dir == 0 { (Pair::Q, Pair::S, Pair::U, Pair::T) } else { (Pair::S, Pair::Q, Pair::T, Pair::U) };
        vec![
            (0, Pair::P, vec![(0, 1, 0), (1, 1, 0)]),
            (0, Pair::R, vec![(0, 2, 0), (0, 1, 1)]),
            (1, Pair::P, vec![(0, 1, 0), (1, 1, 0)]),
            (1, own, vec![(0, 1, 2), (1, 1, 1)]),
            (1, other, vec![(0, 3, 0), (1, 2, 0)]),
            (1, Pair::R, vec![(0, 2, 1)]),
            (1, b_own, vec![(0, 1, 1)]),
            (1, b_other, vec![(0, 2, 0)]),
        ]
    }

    /// Value of a reduced term and the reduced right-hand side at a point.
    fn term_value(&self, pd: &PointData, n: &[i64], (row, col, m): &Term) -> Result<C64> {
        let th = &self.params.theta;
        let i = self.dir;
        let j = 1 - i;
        let deg = 2 + *row as i32;
        let base = vadd(&pd.z, &self.params.base(&m.offset(n)));
        let mi = m.0[i] as i32 - 1;
        let mj = m.0[j] as i32;
        let l1 = (m.0[0] + m.0[1]) as i32;
        let common = pd.tk[i].powi(mi) * pd.tk[j].powi(mj);
        Ok(if *col == 0 {
            th.eval(&base)?.value * common * pd.t0.powi(deg - l1)
        } else {
            th.eval(&vadd(&base, &self.params.beta))?.value * pd.tb * common * pd.t0.powi(deg - 1 - l1)
        })
    }

    fn rhs(&self, pd: &PointData, n: &[i64], row: usize) -> Result<C64> {
        let th = &self.params.theta;
        let base = vadd(&pd.z, &self.params.base(n));
        Ok(if row == 0 {
            pd.tplus * th.eval(&base)?.value
        } else {
            pd.tplus * th.eval(&vadd(&base, &self.params.beta))?.value * pd.tb
        })
    }

    fn solve(&self, n: &[i64]) -> Result<Solved> {
        if let Some(r) = self.cache.read().ok().and_then(|c| c.get(n).cloned()) {
            return r;
        }
        let r = self.solve_uncached(n);
        if let Ok(mut c) = self.cache.write() {
            c.insert(n.to_vec(), r.clone());
        }
        r
    }

    fn solve_uncached(&self, n: &[i64]) -> Result<Solved> {
        let mut known: HashMap<Term, C64> = HashMap::new();
        let mut residual = 0.0f64;
        let mut min_sv = f64::INFINITY;
        for (row, pair, unknowns) in &self.steps {
            let all = self.terms(*row);
            let mut a = Vec::new();
            let mut b = Vec::new();
            for pd in &self.points[pair] {
                let mut rhs = self.rhs(pd, n, *row)?;
                for t in &all {
                    if let Some(c) = known.get(t) {
                        rhs -= c * self.term_value(pd, n, t)?;
                    }
                }
                a.push(unknowns.iter().map(|t| self.term_value(pd, n, t)).collect::<Result<Vec<_>>>()?);
                b.push(rhs);
            }
            let (x, res, sv) = small_solve(a, b);
            if sv < SINGULAR_RATIO {
                return Err(Error::SingularSolve(sv));
            }
            residual = residual.max(res);
            min_sv = min_sv.min(sv);
            for (t, v) in unknowns.iter().zip(x) {
                known.insert(t.clone(), v);
            }
        }
        let mut coeffs: BTreeMap<MultiIndex, Mat<C64>> = BTreeMap::new();
        for ((row, col, m), v) in known {
            coeffs.entry(m).or_insert_with(|| Mat::zeros(2, 2)).set(row, col, v);
        }
        Ok(Solved { coeffs, residual, min_sv_ratio: min_sv })
    }
}

/// Special-point operator for one direction together with its diagnostics.
#[derive(Debug, Clone)]
pub struct Genus2Operator {
    pub op: DifferenceOperator<C64>,
    pub direction: usize,
    pub points: Vec<SpecialPoint>,
    solver: Arc<Solver>,
}

impl Genus2Operator {
    /// Largest consistency residual of the overdetermined steps at n.
    pub fn step_residual(&self, n: &[i64]) -> Result<f64> {
        self.solver.solve(n).map(|s| s.residual)
    }

    pub fn min_sv_ratio(&self, n: &[i64]) -> Result<f64> {
        self.solver.solve(n).map(|s| s.min_sv_ratio)
    }
}

/// The six divisor-intersection pairs for the given parameters.
pub fn genus2_special_points(p: &AbelianDBAParams, cfg: &NewtonConfig) -> Result<Vec<(String, Vec<SpecialPoint>)>> {
    if p.genus() != 2 {
        return Err(Error::InvalidParams("genus-2 special points need genus 2".into()));
    }
    let zero = vec![C64::new(0.0, 0.0); 2];
    let m1: Vec<C64> = p.step(0).iter().map(|v| -v).collect();
    let m2: Vec<C64> = p.step(1).iter().map(|v| -v).collect();
    let mb: Vec<C64> = p.beta.iter().map(|v| -v).collect();
    let conditions = |pair: Pair| match pair {
        Pair::P => vec![m1.clone(), m2.clone()],
        Pair::Q => vec![m1.clone(), zero.clone()],
        Pair::S => vec![m2.clone(), zero.clone()],
        Pair::R => vec![zero.clone(), mb.clone()],
        Pair::U => vec![mb.clone(), m1.clone()],
        Pair::T => vec![mb.clone(), m2.clone()],
    };
    Pair::ALL
        .iter()
        .map(|&pair| {
            let mut roots = find_divisor_intersection(&p.theta, &conditions(pair), 2, cfg)?;
            if roots.len() != 2 {
                return Err(Error::InvalidParams(format!(
                    "pair {} has {} intersection points, expected 2 (degenerate parameters)",
                    pair.name(),
                    roots.len()
                )));
            }
            for (k, r) in roots.iter_mut().enumerate() {
                r.name = format!("{}{}", pair.name(), k + 1);
            }
            Ok((pair.name().to_string(), roots))
        })
        .collect()
}

/// Builds the operator for direction `dir` (0 for lambda, 1 for mu).
pub fn build_genus2_special(p: &AbelianDBAParams, dir: usize, cfg: &NewtonConfig) -> Result<Genus2Operator> {
    let found = genus2_special_points(p, cfg)?;
    build_genus2_from_points(p, dir, &found)
}

pub fn build_genus2_from_points(p: &AbelianDBAParams, dir: usize, found: &[(String, Vec<SpecialPoint>)]) -> Result<Genus2Operator> {
    if dir > 1 {
        return Err(Error::InvalidParams("direction must be 0 or 1".into()));
    }
    let th = &p.theta;
    let mut points = HashMap::new();
    for &pair in &Pair::ALL {
        let roots = &found.iter().find(|(n, _)| n == pair.name()).ok_or_else(|| Error::InvalidParams("missing pair".into()))?.1;
        let data = roots
            .iter()
            .map(|r| {
                let z = r.z.clone();
                Ok(PointData {
                    t0: th.eval(&z)?.value,
                    tk: [th.eval(&vsub(&z, &p.step(0)))?.value, th.eval(&vsub(&z, &p.step(1)))?.value],
                    tb: th.eval(&vsub(&z, &p.beta))?.value,
                    tplus: th.eval(&vadd(&z, &p.step(dir)))?.value,
                    z,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        points.insert(pair, data);
    }
    let mut solver = Solver { params: p.clone(), dir, points, steps: vec![], cache: RwLock::new(HashMap::new()) };
    solver.steps = Solver::plan(dir)
        .into_iter()
        .map(|(row, pair, us)| (row, pair, us.into_iter().map(|(col, a, b)| (row, col, solver.unit(a, b))).collect()))
        .collect();
    let solver = Arc::new(solver);
    // fail early on singular parameters
    solver.solve(&[0, 0])?;

    let mut shifts: Vec<MultiIndex> = (0..2).flat_map(|r| solver.terms(r)).map(|t| t.2).collect();
    shifts.sort();
    shifts.dedup();
    let mut op = DifferenceOperator::zero(2, 2, 2);
    for k in shifts {
        let s = solver.clone();
        let probe = solver.clone();
        let kk = k.clone();
        let poles = PoleSet::zeros(move |n| probe.solve(n).is_err());
        let f = LatticeFunction::new(2, (2, 2), poles, move |n| {
            s.solve(n).ok().map(|sol| sol.coeffs.get(&kk).cloned().unwrap_or_else(|| Mat::zeros(2, 2)))
        });
        op.add_term(k, f)?;
    }
    let pts = found.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    Ok(Genus2Operator { op, direction: dir, points: pts, solver })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{make_genus2_basis, sample_spectral_points, BasisFamily};

    #[test]
    fn special_point_operator_satisfies_eigen_relation() {
        let p = AbelianDBAParams::genus2_default();
        let found = genus2_special_points(&p, &NewtonConfig::default()).unwrap();
        let fam = make_genus2_basis(p.clone()).unwrap();
        let pts = sample_spectral_points(&fam, 4, 3, 1e-3).unwrap();
        for dir in 0..2 {
            let g2 = build_genus2_from_points(&p, dir, &found).unwrap();
            let lam = fam.lambda_direction(dir);
            for z in &pts {
                let l = lam.eval(z).unwrap();
                for n in [[0, 0], [1, -1], [-2, 2]] {
                    let psi = |m: &[i64]| {
                        Ok(Mat::column(vec![fam.eval(0, m, z)?, fam.eval(1, m, z)?]))
                    };
                    let lhs = g2.op.apply_at(&psi, &n).unwrap();
                    let rhs = psi(&n).unwrap();
                    for r in 0..2 {
                        let want = l * rhs.get(r, 0);
                        let err = (lhs.get(r, 0) - want).norm() / want.norm().max(1.0);
                        assert!(err < 1e-8, "dir {dir} n {n:?} row {r}: {err:.3e}");
                    }
                }
            }
        }
    }
}
