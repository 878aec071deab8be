//! JSON run configuration. Complex numbers are [re, im] pairs; every object
//! rejects unknown keys so typos fail before any computation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use dba::builders::{CollocationConfig, NewtonConfig};
use dba::scalar::C64;
use dba::theta::{validate_siegel, Theta, ThetaCharacteristic, TruncationPolicy};
use dba::verify::suites::{SuiteConfig, Tolerances, WindowSpec};
use dba::families::AbelianDBAParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Build,
    Verify,
    ThetaEval,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Genus1,
    Genus2,
    Schur,
    Omega,
    Gamma,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Genus1 => "genus1",
            Family::Genus2 => "genus2",
            Family::Schur => "schur",
            Family::Omega => "omega",
            Family::Gamma => "gamma",
        }
    }

    pub fn genus(self) -> usize {
        if self == Family::Genus1 {
            1
        } else {
            2
        }
    }
}

pub type Cx = [f64; 2];

fn cx(v: &Cx) -> C64 {
    C64::new(v[0], v[1])
}

fn cxs(v: &[Cx]) -> Vec<C64> {
    v.iter().map(cx).collect()
}

/// Theta-family parameters; omitted fields take the family defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AbelianConfig {
    pub tau: Option<Vec<Vec<Cx>>>,
    pub c: Option<Vec<Cx>>,
    pub x0: Option<Vec<Cx>>,
    pub h: Option<Vec<Cx>>,
    pub beta: Option<Vec<Cx>>,
}

impl AbelianConfig {
    pub fn resolve(&self, family: Family) -> Result<AbelianDBAParams, String> {
        let d = match family {
            Family::Genus1 => AbelianDBAParams::genus1_default(),
            Family::Genus2 => AbelianDBAParams::genus2_default(),
            f => return Err(format!("family {} takes no theta parameters", f.name())),
        };
        let theta = match &self.tau {
            Some(t) => Theta::new(validate_siegel(&t.iter().map(|r| cxs(r)).collect::<Vec<_>>()).map_err(|e| e.to_string())?),
            None => d.theta.clone(),
        };
        let pick = |v: &Option<Vec<Cx>>, dflt: &Vec<C64>| v.as_ref().map(|v| cxs(v)).unwrap_or_else(|| dflt.clone());
        AbelianDBAParams::new(theta, pick(&self.c, &d.c), pick(&self.x0, &d.x0), pick(&self.h, &d.h), pick(&self.beta, &d.beta))
            .map_err(|e| e.to_string())
    }
}

/// Sample sizes and solver settings shared by build and verify.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub points: usize,
    pub exact_points: usize,
    pub probes: usize,
    pub floor: f64,
    pub newton: NewtonConfig,
    pub collocation: CollocationConfig,
}

impl Default for Numerics {
    fn default() -> Self {
        let s = SuiteConfig::default();
        Numerics { points: s.points, exact_points: s.exact_points, probes: s.probes, floor: s.floor, newton: s.newton, collocation: s.collocation }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaEvalConfig {
    pub tau: Vec<Vec<Cx>>,
    pub z: Vec<Vec<Cx>>,
    #[serde(default)]
    pub characteristic: Option<ThetaCharacteristic>,
    #[serde(default)]
    pub policy: Option<TruncationPolicy>,
}

/// One sweep axis: explicit g-vectors, or a rectangular grid in the complex
/// plane applied to every component.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<Vec<Cx>>),
    Grid(GridAxis),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub re: [f64; 2],
    pub im: [f64; 2],
    pub steps: [usize; 2],
}

fn linspace(r: [f64; 2], n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![r[0]],
        _ => (0..n).map(|i| r[0] + (r[1] - r[0]) * i as f64 / (n - 1) as f64).collect(),
    }
}

impl Axis {
    pub fn values(&self, g: usize) -> Vec<Vec<Cx>> {
        match self {
            Axis::List(v) => v.clone(),
            Axis::Grid(a) => {
                let mut out = vec![];
                for re in linspace(a.re, a.steps[0]) {
                    for im in linspace(a.im, a.steps[1]) {
                        out.push(vec![[re, im]; g]);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub h: Option<Axis>,
    pub beta: Option<Axis>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub family: Option<Family>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub params: Option<AbelianConfig>,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub theta: Option<ThetaEvalConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn require_family(&self) -> Result<Family, String> {
        self.family.ok_or_else(|| "config: `family` is required for this mode".to_string())
    }

    /// Family parameters for theta families; rational families accept none.
    pub fn abelian(&self, family: Family) -> Result<Option<AbelianDBAParams>, String> {
        match (family, &self.params) {
            (Family::Genus1 | Family::Genus2, p) => p.clone().unwrap_or_default().resolve(family).map(Some),
            (_, None) => Ok(None),
            (f, Some(_)) => Err(format!("config: family {} has fixed data and takes no `params`", f.name())),
        }
    }

    pub fn suite(&self, seed: u64) -> Result<SuiteConfig, String> {
        let n = &self.numerics;
        n.collocation.validate().map_err(|e| format!("config: {e}"))?;
        if let (Some(w), Some(f)) = (&self.window, self.family) {
            if w.lo.len() != f.genus() || w.hi.len() != f.genus() {
                return Err(format!("config: window must have {} coordinates for {}", f.genus(), f.name()));
            }
            if w.lo.iter().zip(&w.hi).any(|(a, b)| a > b) {
                return Err("config: window lo exceeds hi".into());
            }
        }
        Ok(SuiteConfig {
            seed,
            points: n.points,
            exact_points: n.exact_points,
            probes: n.probes,
            floor: n.floor,
            newton: n.newton.clone(),
            collocation: CollocationConfig { seed, ..n.collocation.clone() },
            window: self.window.clone(),
            tolerances: self.tolerances.clone(),
            fault: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"family": "genus1", "windw": {}}"#).is_err());
        assert!(RunConfig::parse(r#"{"family": "genus1", "params": {"hh": [[0.1, 0]]}}"#).is_err());
    }

    #[test]
    fn defaults_fill_missing_parameters() {
        let c = RunConfig::parse(r#"{"family": "genus1", "params": {"h": [[0.2, 0.0]]}}"#).unwrap();
        let p = c.abelian(Family::Genus1).unwrap().unwrap();
        assert_eq!(p.h, vec![C64::new(0.2, 0.0)]);
        assert_eq!(p.x0, AbelianDBAParams::genus1_default().x0);
    }

    #[test]
    fn zero_step_is_a_config_error() {
        let c = RunConfig::parse(r#"{"family": "genus1", "params": {"h": [[0.0, 0.0]]}}"#).unwrap();
        assert!(c.abelian(Family::Genus1).is_err());
    }

    #[test]
    fn grid_axis_expands_row_major() {
        let a: Axis = serde_json::from_str(r#"{"re": [0.1, 0.5], "im": [0.0, 0.2], "steps": [3, 2]}"#).unwrap();
        let v = a.values(1);
        assert_eq!(v.len(), 6);
        assert_eq!(v[1], vec![[0.1, 0.2]]);
        assert_eq!(v[5], vec![[0.5, 0.2]]);
    }
}
