//! Sectioned `key = value` experiment configuration.
//!
//! ```ini
//! [model]
//! dim = 1
//! alpha = 1.0
//! weight = 1.0
//!
//! [domain]
//! kind = half_space        ; or sinusoidal
//! floor = 0
//!
//! [grids]
//! t = 0.5, 1, 2, 4
//! x = 0.25, 0.5, 1, 2, 4
//!
//! [sim]
//! dt = 1e-3
//! paths = 100000
//! horizon = 4
//! seed = 1
//!
//! [tolerance]
//! band_max = 20
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hk_core::montecarlo::SimConfig;
use hk_core::{Domain, ModelParams};
use ini::Ini;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Envelope,
    VerifyIdentities,
    Quadrature,
    Simulate,
    Sandwich,
    Report,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Envelope,
        Experiment::VerifyIdentities,
        Experiment::Quadrature,
        Experiment::Simulate,
        Experiment::Sandwich,
        Experiment::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Envelope => "envelope",
            Experiment::VerifyIdentities => "verify-identities",
            Experiment::Quadrature => "quadrature",
            Experiment::Simulate => "simulate",
            Experiment::Sandwich => "sandwich",
            Experiment::Report => "report",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| HarnessError::Usage(format!("unknown experiment '{s}'")))
    }
}

/// Value lists swept by the experiments. Empty lists fall back to the
/// experiment's defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub alpha: Vec<f64>,
    pub a: Vec<f64>,
    pub dim: Vec<usize>,
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: ModelParams,
    pub domain: Domain,
    pub grids: Grids,
    pub sim: SimConfig,
    pub output_dir: PathBuf,
    /// Sub-suites to run; empty means the experiment's default set.
    pub suites: Vec<String>,
    /// Random sample count for sweeps that take one.
    pub samples: Option<usize>,
    pub tolerance: BTreeMap<String, f64>,
    /// Also write `paths.bin` with the raw per-path outcomes.
    pub spool_paths: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            params: ModelParams::new(1, 1.0, 1.0).expect("valid defaults"),
            domain: Domain::half_space(0.0),
            grids: Grids::default(),
            sim: SimConfig::new(1e-3, 10_000, 4.0, 1).expect("valid defaults"),
            output_dir: PathBuf::from("hk-out"),
            suites: Vec::new(),
            samples: None,
            tolerance: BTreeMap::new(),
            spool_paths: false,
        }
    }

    /// Tolerance override `key`, or `default`.
    pub fn tol(&self, key: &str, default: f64) -> f64 {
        self.tolerance.get(key).copied().unwrap_or(default)
    }

    pub fn wants(&self, suite: &str) -> bool {
        self.suites.is_empty() || self.suites.iter().any(|s| s == suite)
    }

    pub fn load(experiment: Experiment, path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(experiment, &text)
    }

    pub fn parse(experiment: Experiment, text: &str) -> Result<Self, HarnessError> {
        let ini = Ini::load_from_str(text).map_err(|e| HarnessError::Usage(format!("config: {e}")))?;
        let mut cfg = Self::new(experiment);
        let mut sections: Vec<&str> = Vec::new();
        for (section, props) in ini.iter() {
            let section = section.unwrap_or("");
            sections.push(section);
            let get = |k: &str| props.get(k);
            match section {
                "model" => {
                    check_keys(section, props.iter().map(|(k, _)| k), &["dim", "alpha", "weight", "weight_cap"])?;
                    let dim = opt(get("dim"), "model.dim")?.unwrap_or(cfg.params.dim);
                    let alpha = opt(get("alpha"), "model.alpha")?.unwrap_or(cfg.params.alpha);
                    let weight = opt(get("weight"), "model.weight")?.unwrap_or(cfg.params.weight);
                    cfg.params = ModelParams::new(dim, alpha, weight).map_err(core_usage)?;
                    if let Some(cap) = opt::<f64>(get("weight_cap"), "model.weight_cap")? {
                        cfg.params = cfg.params.with_weight_cap(cap).map_err(core_usage)?;
                    }
                }
                "domain" => {
                    check_keys(
                        section,
                        props.iter().map(|(k, _)| k),
                        &["kind", "floor", "ceiling", "amplitude", "wavelength"],
                    )?;
                    let floor = opt(get("floor"), "domain.floor")?.unwrap_or(0.0);
                    cfg.domain = match get("kind").unwrap_or("half_space") {
                        "half_space" => Domain::half_space(floor),
                        "sinusoidal" => {
                            let amp: f64 = req(get("amplitude"), "domain.amplitude")?;
                            let wavelength = req(get("wavelength"), "domain.wavelength")?;
                            let ceiling = opt(get("ceiling"), "domain.ceiling")?.unwrap_or(floor + amp);
                            Domain::sinusoidal(floor, ceiling, amp, wavelength).map_err(core_usage)?
                        }
                        other => return Err(HarnessError::Usage(format!("unknown domain kind '{other}'"))),
                    };
                }
                "grids" => {
                    check_keys(section, props.iter().map(|(k, _)| k), &["t", "x", "y", "alpha", "a", "dim", "r"])?;
                    let g = &mut cfg.grids;
                    g.t = list(get("t"), "grids.t")?;
                    g.x = list(get("x"), "grids.x")?;
                    g.y = list(get("y"), "grids.y")?;
                    g.alpha = list(get("alpha"), "grids.alpha")?;
                    g.a = list(get("a"), "grids.a")?;
                    g.dim = list(get("dim"), "grids.dim")?;
                    g.r = list(get("r"), "grids.r")?;
                }
                "sim" => {
                    check_keys(
                        section,
                        props.iter().map(|(k, _)| k),
                        &["dt", "paths", "horizon", "seed", "bridge_correction", "spool"],
                    )?;
                    let s = &mut cfg.sim;
                    s.dt = opt(get("dt"), "sim.dt")?.unwrap_or(s.dt);
                    s.n_paths = opt(get("paths"), "sim.paths")?.unwrap_or(s.n_paths);
                    s.horizon = opt(get("horizon"), "sim.horizon")?.unwrap_or(s.horizon);
                    s.seed = opt(get("seed"), "sim.seed")?.unwrap_or(s.seed);
                    s.bridge_correction =
                        opt(get("bridge_correction"), "sim.bridge_correction")?.unwrap_or(s.bridge_correction);
                    cfg.spool_paths = opt(get("spool"), "sim.spool")?.unwrap_or(false);
                }
                "run" => {
                    check_keys(section, props.iter().map(|(k, _)| k), &["suites", "samples"])?;
                    cfg.suites = get("suites")
                        .map(|s| s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect())
                        .unwrap_or_default();
                    cfg.samples = opt(get("samples"), "run.samples")?;
                }
                "output" => {
                    check_keys(section, props.iter().map(|(k, _)| k), &["dir"])?;
                    if let Some(d) = get("dir") {
                        cfg.output_dir = PathBuf::from(d);
                    }
                }
                "tolerance" => {
                    for (k, v) in props.iter() {
                        let v = parse_value::<f64>(v, &format!("tolerance.{k}"))?;
                        cfg.tolerance.insert(k.to_string(), v);
                    }
                }
                "" if props.is_empty() => {}
                other => return Err(HarnessError::Usage(format!("unknown config section '[{other}]'"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.sim.validate().map_err(core_usage)?;
        let g = &self.grids;
        let bad = |name: &str, v: &[f64], positive: bool| {
            v.iter()
                .any(|x| !x.is_finite() || (positive && *x <= 0.0))
                .then(|| HarnessError::Usage(format!("grid {name} must hold finite{} values", if positive { " positive" } else { "" })))
        };
        for err in [
            bad("t", &g.t, true),
            bad("x", &g.x, false),
            bad("y", &g.y, false),
            bad("alpha", &g.alpha, true),
            bad("a", &g.a, false),
            bad("r", &g.r, true),
        ]
        .into_iter()
        .flatten()
        {
            return Err(err);
        }
        if g.alpha.iter().any(|a| *a >= 2.0) {
            return Err(HarnessError::Usage("grid alpha values must lie in (0, 2)".into()));
        }
        if g.dim.contains(&0) {
            return Err(HarnessError::Usage("grid dim values must be >= 1".into()));
        }
        if self.experiment == Experiment::Envelope && (g.t.is_empty() || g.x.is_empty() || g.y.is_empty()) {
            return Err(HarnessError::Usage("envelope needs non-empty t, x and y grids".into()));
        }
        Ok(())
    }
}

fn core_usage(e: hk_core::Error) -> HarnessError {
    HarnessError::Usage(e.to_string())
}

fn check_keys<'a>(section: &str, keys: impl Iterator<Item = &'a str>, allowed: &[&str]) -> Result<(), HarnessError> {
    for k in keys {
        if !allowed.contains(&k) {
            return Err(HarnessError::Usage(format!("unknown key '{k}' in [{section}]")));
        }
    }
    Ok(())
}

fn parse_value<T: FromStr>(v: &str, key: &str) -> Result<T, HarnessError> {
    v.trim()
        .parse()
        .map_err(|_| HarnessError::Usage(format!("cannot parse {key} = '{v}'")))
}

fn opt<T: FromStr>(v: Option<&str>, key: &str) -> Result<Option<T>, HarnessError> {
    v.map(|v| parse_value(v, key)).transpose()
}

fn req<T: FromStr>(v: Option<&str>, key: &str) -> Result<T, HarnessError> {
    opt(v, key)?.ok_or_else(|| HarnessError::Usage(format!("missing {key}")))
}

fn list<T: FromStr>(v: Option<&str>, key: &str) -> Result<Vec<T>, HarnessError> {
    match v {
        None => Ok(Vec::new()),
        Some(s) => s
            .split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(|p| parse_value(p, key))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "
[model]
dim = 2
alpha = 1.5
weight = 0.5

[domain]
kind = sinusoidal
floor = 0
amplitude = 0.5
wavelength = 2

[grids]
t = 0.5, 1, 2
x = 1,2

[sim]
dt = 0.01
paths = 500
horizon = 2
seed = 42
bridge_correction = false

[run]
suites = survival, levy

[tolerance]
sigma = 4
";
        let c = ExperimentConfig::parse(Experiment::Simulate, text).unwrap();
        assert_eq!(c.params.dim, 2);
        assert_eq!(c.params.weight, 0.5);
        assert_eq!(c.domain.inner_floor(), 0.5);
        assert_eq!(c.grids.t, vec![0.5, 1.0, 2.0]);
        assert_eq!(c.sim.n_paths, 500);
        assert!(!c.sim.bridge_correction);
        assert_eq!(c.suites, vec!["survival", "levy"]);
        assert_eq!(c.tol("sigma", 3.0), 4.0);
        assert_eq!(c.tol("other", 3.0), 3.0);
        assert!(c.wants("levy") && !c.wants("harmonic"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::parse(Experiment::Simulate, "[model]\nalpha = 2.5\n").is_err());
        assert!(ExperimentConfig::parse(Experiment::Simulate, "[model]\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::parse(Experiment::Simulate, "[nope]\nx = 1\n").is_err());
        assert!(ExperimentConfig::parse(Experiment::Simulate, "[grids]\nt = 1, a\n").is_err());
        assert!(ExperimentConfig::parse(Experiment::Envelope, "[grids]\nt = 1\n").is_err());
        assert!(ExperimentConfig::parse(Experiment::Simulate, "[sim]\ndt = 5\nhorizon = 1\n").is_err());
    }

    #[test]
    fn experiment_names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
        assert!("bogus".parse::<Experiment>().is_err());
    }
}
