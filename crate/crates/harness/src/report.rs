//! Check rows, fitted constants and the CSV / JSON writers.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

/// One verified statement: what was observed, what it was compared against,
/// and a score (a ratio or a distance in standard errors).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub score: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, observed: f64, bound: f64, score: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            observed,
            bound,
            score,
            pass,
        }
    }

    /// Passes when `observed ≤ bound`; the score is `observed / bound`.
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self::new(name, observed, bound, observed / bound, observed <= bound)
    }

    /// Passes when `observed` is within `sigmas` standard errors of `oracle`.
    pub fn within_sigma(name: impl Into<String>, observed: f64, oracle: f64, std_error: f64, sigmas: f64) -> Self {
        let diff = (observed - oracle).abs();
        let z = if diff == 0.0 { 0.0 } else { diff / std_error };
        Self::new(name, observed, oracle, z, z <= sigmas)
    }

    /// Informational row that always passes.
    pub fn info(name: impl Into<String>, observed: f64) -> Self {
        Self::new(name, observed, f64::NAN, f64::NAN, true)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub rows: Vec<CheckRow>,
    pub fitted: BTreeMap<String, f64>,
    pub wall_time_s: f64,
    pub seed: u64,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            experiment: config.experiment.name().to_string(),
            config: config.clone(),
            rows: Vec::new(),
            fitted: BTreeMap::new(),
            wall_time_s: 0.0,
            seed: config.sim.seed,
            pass: true,
        }
    }

    pub fn push(&mut self, row: CheckRow) {
        self.pass &= row.pass;
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = CheckRow>) {
        for r in rows {
            self.push(r);
        }
    }

    pub fn fit(&mut self, key: impl Into<String>, c: f64) {
        self.fitted.insert(key.into(), c);
    }

    pub fn merge(&mut self, other: Suite) {
        self.extend(other.rows);
        self.fitted.extend(other.fitted);
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn csv_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.csv", self.experiment))
    }

    pub fn json_path(&self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.json", self.experiment))
    }

    /// Rows as CSV. Deterministic given the rows: no timestamps.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["schema_version", "experiment", "check", "observed", "bound", "score", "pass"])?;
        for r in &self.rows {
            w.write_record([
                SCHEMA_VERSION.to_string(),
                self.experiment.clone(),
                r.name.clone(),
                fmt_num(r.observed),
                fmt_num(r.bound),
                fmt_num(r.score),
                r.pass.to_string(),
            ])?;
        }
        for (k, v) in &self.fitted {
            w.write_record([
                SCHEMA_VERSION.to_string(),
                self.experiment.clone(),
                format!("fitted:{k}"),
                fmt_num(*v),
                String::new(),
                String::new(),
                "true".into(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Writes `<experiment>.csv` and `<experiment>.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        fs::write(self.csv_path(dir), self.to_csv()?)?;
        let unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let doc = serde_json::json!({
            "schema_version": SCHEMA_VERSION,
            "metadata": { "finished_unix_s": unix, "wall_time_s": self.wall_time_s },
            "report": self,
        });
        fs::write(self.json_path(dir), serde_json::to_string_pretty(&doc)?)?;
        Ok(())
    }
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v:e}")
    }
}

/// Rows and fitted constants produced by one sub-suite.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Suite {
    pub rows: Vec<CheckRow>,
    pub fitted: BTreeMap<String, f64>,
}

impl Suite {
    pub fn push(&mut self, row: CheckRow) {
        self.rows.push(row);
    }

    pub fn fit(&mut self, key: impl Into<String>, c: f64) {
        self.fitted.insert(key.into(), c);
    }

    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&CheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn append(&mut self, other: Suite) {
        self.rows.extend(other.rows);
        self.fitted.extend(other.fitted);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    /// `observed ≤ c · shape`.
    Upper,
    /// `observed ≥ shape / c`.
    Lower,
    /// `shape / c ≤ observed ≤ c · shape`.
    Both,
}

/// Smallest `c ≥ 1` with the `(observed, shape)` rows inside the stated bound.
///
/// A zero observation satisfies any upper bound but no lower bound, so it
/// makes a lower or two-sided fit infinite.
pub fn fit_constant(rows: &[(f64, f64)], sides: Sides) -> Result<f64, HarnessError> {
    let mut c: f64 = 1.0;
    for &(obs, shape) in rows {
        if !(shape > 0.0) {
            return Err(HarnessError::Usage(format!("shape values must be > 0, got {shape}")));
        }
        if !(obs >= 0.0) {
            return Err(HarnessError::Usage(format!("observed values must be >= 0, got {obs}")));
        }
        let ratio = obs / shape;
        if matches!(sides, Sides::Upper | Sides::Both) {
            c = c.max(ratio);
        }
        if matches!(sides, Sides::Lower | Sides::Both) {
            c = c.max(1.0 / ratio);
        }
    }
    Ok(c)
}
