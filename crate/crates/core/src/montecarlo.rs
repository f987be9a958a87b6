//! Simulation of `X^a` killed on leaving a region, and the estimators built on it.
//!
//! Each step adds a Brownian increment with covariance `2h I` and then `a`
//! times a symmetric α-stable increment obtained by subordinating a Gaussian
//! to an `α/2`-stable subordinator. Between the two, the exact half-space
//! Brownian bridge crossing probability is sampled to catch diffusive exits
//! that happen inside a step.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path index)`
//! and results are reduced in path order, so reports do not depend on the
//! number of worker threads.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{self, Read, Write};

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelopes::stable_constant;
use crate::error::{invalid, Result};
use crate::model::{Domain, ModelParams, Region};
use crate::rng::{chunk_ranges, substream, CHUNK};

/// Variance per unit time of each Brownian coordinate (generator `Δ`).
pub const BROWNIAN_VARIANCE_RATE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub horizon: f64,
    pub seed: u64,
    pub bridge_correction: bool,
}

impl SimConfig {
    pub fn new(dt: f64, n_paths: usize, horizon: f64, seed: u64) -> Result<Self> {
        let c = Self {
            dt,
            n_paths,
            horizon,
            seed,
            bridge_correction: true,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("dt must be finite and > 0, got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return invalid(format!(
                "horizon must be finite and > 0, got {}",
                self.horizon
            ));
        }
        if self.dt > self.horizon {
            return invalid("dt must not exceed the horizon");
        }
        if self.n_paths == 0 {
            return invalid("need at least one path");
        }
        Ok(())
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        let c = Self {
            horizon,
            dt: self.dt.min(horizon),
            ..*self
        };
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KilledPathResult {
    pub alive: bool,
    pub exit_time: Option<f64>,
    pub exit_position: Option<Vec<f64>>,
    pub final_position: Option<Vec<f64>>,
}

impl KilledPathResult {
    /// Alive strictly after time `t`.
    pub fn survives(&self, t: f64) -> bool {
        self.exit_time.is_none_or(|e| e > t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub estimate: f64,
    pub std_error: f64,
    pub n: usize,
    pub meta: BTreeMap<String, String>,
}

impl EstimatorReport {
    fn new(estimate: f64, std_error: f64, n: usize) -> Self {
        Self {
            estimate,
            std_error,
            n,
            meta: BTreeMap::new(),
        }
    }

    /// Binomial proportion `k/n` with standard error `√(p(1−p)/n)`.
    pub fn proportion(k: usize, n: usize) -> Self {
        let p = k as f64 / n as f64;
        Self::new(p, (p * (1.0 - p) / n as f64).sqrt(), n)
    }

    /// Sample mean with standard error of the mean.
    pub fn mean_of(values: &[f64]) -> Self {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
        let var = if n > 1 {
            pairwise_sum(&dev) / (n - 1) as f64
        } else {
            0.0
        };
        Self::new(mean, (var / n as f64).sqrt(), n)
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    /// `|estimate − target| / std_error`, infinite when the error is zero and the values differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.estimate - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// One increment over `dt` of the `β`-stable subordinator with Laplace
/// exponent `λ^β`, `β = alpha_half ∈ (0, 1)`, via Kanter's representation
/// `sin(βU)/sin(U)^{1/β} · (sin((1−β)U)/W)^{(1−β)/β}` with `U` uniform on
/// `(0, π)` and `W` standard exponential.
pub fn sample_subordinator_increment<R: Rng + ?Sized>(
    alpha_half: f64,
    dt: f64,
    rng: &mut R,
) -> f64 {
    let b = alpha_half;
    loop {
        let u = PI * rng.random::<f64>();
        if u == 0.0 {
            continue;
        }
        let w: f64 = rng.sample(Exp1);
        if w == 0.0 {
            continue;
        }
        let s = (b * u).sin() / u.sin().powf(1.0 / b)
            * ((1.0 - b) * u).sin().powf((1.0 - b) / b)
            * w.powf(-(1.0 - b) / b);
        let s = s * dt.powf(1.0 / b);
        if s > 0.0 && s.is_finite() {
            return s;
        }
    }
}

/// Increment over `dt` of the unit-weight symmetric α-stable process with
/// characteristic exponent `|ξ|^α`, written into `out` as `G √(2 S_dt)`.
pub fn sample_stable_increment_into<R: Rng + ?Sized>(
    alpha: f64,
    dt: f64,
    rng: &mut R,
    out: &mut [f64],
) {
    let s = sample_subordinator_increment(0.5 * alpha, dt, rng);
    let scale = (BROWNIAN_VARIANCE_RATE * s).sqrt();
    for o in out.iter_mut() {
        let g: f64 = rng.sample(StandardNormal);
        *o = scale * g;
    }
}

pub fn sample_stable_increment<R: Rng + ?Sized>(
    params: &ModelParams,
    dt: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut v = vec![0.0; params.dim];
    sample_stable_increment_into(params.alpha, dt, rng, &mut v);
    v
}

/// Probability that the Brownian component, run from `x` to `y` over `h`,
/// left the region in between; both endpoints lie inside.
#[inline(always)]
fn bridge_crossing(region: &Region, x: &[f64], y: &[f64], h: f64) -> f64 {
    // Below e^{-37} a uniform draw can no longer fall under the probability.
    let cross = |d1: f64, d2: f64| {
        let e = d1 * d2 / h;
        if e > 37.0 {
            0.0
        } else {
            (-e).exp()
        }
    };
    match region {
        Region::Domain(Domain::HalfSpace { floor }) => {
            cross(x.last().unwrap() - floor, y.last().unwrap() - floor)
        }
        // The supporting half-space H_{b1} contains the domain, so this
        // underestimates the crossing probability.
        Region::Domain(d @ Domain::Sinusoidal(_)) => {
            let b = d.outer_floor();
            cross(x.last().unwrap() - b, y.last().unwrap() - b)
        }
        Region::Box { lower, upper } => {
            let mut stay = 1.0;
            for i in 0..x.len() {
                stay *= 1.0 - cross(x[i] - lower[i], y[i] - lower[i]);
                stay *= 1.0 - cross(upper[i] - x[i], upper[i] - y[i]);
            }
            1.0 - stay
        }
        Region::Ball { center, radius } => {
            let norm = |p: &[f64]| {
                p.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            };
            cross(radius - norm(x), radius - norm(y))
        }
    }
}

/// Nearest boundary point used as exit position for bridge-detected exits.
fn project_to_boundary(region: &Region, y: &mut [f64]) {
    match region {
        Region::Domain(Domain::HalfSpace { floor }) => *y.last_mut().unwrap() = *floor,
        Region::Domain(Domain::Sinusoidal(s)) => {
            let horizontal = if y.len() >= 2 { y[0] } else { 0.0 };
            *y.last_mut().unwrap() = s.height(horizontal);
        }
        Region::Box { lower, upper } => {
            let (mut best, mut face) = (f64::INFINITY, (0, 0.0));
            for i in 0..y.len() {
                if y[i] - lower[i] < best {
                    best = y[i] - lower[i];
                    face = (i, lower[i]);
                }
                if upper[i] - y[i] < best {
                    best = upper[i] - y[i];
                    face = (i, upper[i]);
                }
            }
            y[face.0] = face.1;
        }
        Region::Ball { center, radius } => {
            let norm = y
                .iter()
                .zip(center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let mut k = radius / norm;
            loop {
                for (v, c) in y.iter_mut().zip(center) {
                    *v = c + (*v - c) * k;
                }
                if !region.contains(y) {
                    break;
                }
                k = 1.0 + 4.0 * f64::EPSILON;
            }
        }
    }
}

fn check_start(params: &ModelParams, region: &Region, x: &[f64]) -> Result<()> {
    params.check_point(x)?;
    if let Some(d) = region.dim() {
        if d != params.dim {
            return invalid(format!(
                "region has dimension {d}, model has {}",
                params.dim
            ));
        }
    }
    if !region.contains(x) {
        return invalid(format!("start point {x:?} is not inside the region"));
    }
    Ok(())
}

/// Stop times: the requested snapshot times inside `(0, horizon]` and the horizon.
fn stop_times(snapshots: &[f64], horizon: f64) -> Vec<f64> {
    let mut stops: Vec<f64> = snapshots
        .iter()
        .copied()
        .filter(|&s| s > 0.0 && s < horizon)
        .collect();
    stops.push(horizon);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops
}

struct Walk {
    result: KilledPathResult,
    snapshots: Vec<Option<Vec<f64>>>,
}

/// Runs one path up to the horizon. `on_step(position, h)` is called before
/// every step with the current position and the step length.
fn walk<R: Rng + ?Sized>(
    params: &ModelParams,
    region: &Region,
    config: &SimConfig,
    x: &[f64],
    snapshots: &[f64],
    rng: &mut R,
    mut on_step: impl FnMut(&[f64], f64),
) -> Walk {
    let d = params.dim;
    let stops = stop_times(snapshots, config.horizon);
    let mut pos = x.to_vec();
    let mut next = vec![0.0; d];
    let mut jump = vec![0.0; d];
    let mut at_stop: Vec<Option<Vec<f64>>> = Vec::with_capacity(stops.len());
    let a = params.weight;
    let mut start = 0.0;
    let dead = |time: f64, at: Vec<f64>, at_stop: Vec<Option<Vec<f64>>>| Walk {
        result: KilledPathResult {
            alive: false,
            exit_time: Some(time),
            exit_position: Some(at),
            final_position: None,
        },
        snapshots: at_stop,
    };
    for &stop in &stops {
        let n = ((stop - start) / config.dt - 1e-9).ceil().max(1.0) as usize;
        let h = (stop - start) / n as f64;
        let sd = (BROWNIAN_VARIANCE_RATE * h).sqrt();
        for k in 0..n {
            let t0 = start + k as f64 * h;
            let t1 = if k + 1 == n {
                stop
            } else {
                start + (k + 1) as f64 * h
            };
            on_step(&pos, h);
            for i in 0..d {
                let g: f64 = rng.sample(StandardNormal);
                next[i] = pos[i] + sd * g;
            }
            if !region.contains(&next) {
                return dead(t1, next, at_stop);
            }
            if config.bridge_correction {
                let p = bridge_crossing(region, &pos, &next, h);
                if p > 0.0 && rng.random::<f64>() < p {
                    let u: f64 = rng.random();
                    project_to_boundary(region, &mut next);
                    return dead(t0 + u * h, next, at_stop);
                }
            }
            if a > 0.0 {
                sample_stable_increment_into(params.alpha, h, rng, &mut jump);
                for i in 0..d {
                    next[i] += a * jump[i];
                }
                if !region.contains(&next) {
                    return dead(t1, next, at_stop);
                }
            }
            std::mem::swap(&mut pos, &mut next);
        }
        at_stop.push(Some(pos.clone()));
        start = stop;
    }
    Walk {
        result: KilledPathResult {
            alive: true,
            exit_time: None,
            exit_position: None,
            final_position: Some(pos),
        },
        snapshots: at_stop,
    }
}

/// Snapshot of a path at the requested time, `None` once killed.
fn snapshot_at(w: &Walk, stops: &[f64], t: f64) -> Option<Vec<f64>> {
    let i = stops.iter().position(|&s| s == t)?;
    w.snapshots.get(i).cloned().flatten()
}

/// One path from a caller-supplied generator.
pub fn simulate_killed_path<R: Rng + ?Sized>(
    params: &ModelParams,
    region: &Region,
    config: &SimConfig,
    x: &[f64],
    rng: &mut R,
) -> Result<KilledPathResult> {
    config.validate()?;
    check_start(params, region, x)?;
    Ok(walk(params, region, config, x, &[], rng, |_, _| {}).result)
}

/// Maps every path index to a value in parallel and returns the values in
/// path order.
fn map_paths<T: Send>(
    n: usize,
    seed: u64,
    f: impl Fn(&mut rand_chacha::ChaCha8Rng) -> T + Sync,
) -> Vec<T> {
    let chunks: Vec<Vec<T>> = chunk_ranges(n, CHUNK)
        .into_par_iter()
        .map(|(_, range)| {
            range
                .map(|i| {
                    let mut rng = substream(seed, i as u64);
                    f(&mut rng)
                })
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

/// All `config.n_paths` paths from `x`, in path order.
pub fn simulate_paths(
    params: &ModelParams,
    region: &Region,
    x: &[f64],
    config: &SimConfig,
) -> Result<Vec<KilledPathResult>> {
    config.validate()?;
    check_start(params, region, x)?;
    Ok(map_paths(config.n_paths, config.seed, |rng| {
        walk(params, region, config, x, &[], rng, |_, _| {}).result
    }))
}

/// Fraction of paths still alive at `t`.
pub fn estimate_survival(
    params: &ModelParams,
    region: &Region,
    t: f64,
    x: &[f64],
    config: &SimConfig,
) -> Result<EstimatorReport> {
    if !(t > 0.0 && t <= config.horizon) {
        return invalid(format!(
            "t = {t} must lie in (0, horizon = {}]",
            config.horizon
        ));
    }
    Ok(estimate_survival_curve(params, region, &[t], x, config)?.remove(0))
}

/// Survival fractions at several times from a single set of paths run to the latest one.
pub fn estimate_survival_curve(
    params: &ModelParams,
    region: &Region,
    times: &[f64],
    x: &[f64],
    config: &SimConfig,
) -> Result<Vec<EstimatorReport>> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return invalid("need at least one positive time");
    }
    let last = times.iter().copied().fold(0.0, f64::max);
    let cfg = config.with_horizon(last)?;
    let paths = simulate_paths(params, region, x, &cfg)?;
    Ok(times
        .iter()
        .map(|&t| {
            let alive = paths.iter().filter(|p| p.survives(t)).count();
            EstimatorReport::proportion(alive, paths.len())
                .with_meta("t", t)
                .with_meta("dt", cfg.dt)
        })
        .collect())
}

/// Axis-aligned histogram cell `∏ [lower_i, upper_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bin {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return invalid("bin bounds must be non-empty and of equal length");
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return invalid("bin bounds must satisfy lower < upper");
        }
        Ok(Self { lower, upper })
    }

    /// Interval of width `width` centred at `y` in `d = 1`.
    pub fn centered(y: f64, width: f64) -> Result<Self> {
        Self::new(vec![y - 0.5 * width], vec![y + 0.5 * width])
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| u - l)
            .product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| v >= l && v < u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityBin {
    pub bin: Bin,
    pub report: EstimatorReport,
    pub count: usize,
    /// No path landed in the bin; the estimate is then 0.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityHistogram {
    pub t: f64,
    pub bins: Vec<DensityBin>,
    pub survival: EstimatorReport,
    /// Alive paths that landed in no bin.
    pub outside: usize,
    pub n_paths: usize,
}

impl DensityHistogram {
    /// `Σ estimate × volume + outside / n`; equals the survival fraction for disjoint bins.
    pub fn total_mass(&self) -> f64 {
        let binned: f64 = self.bins.iter().map(|b| b.count as f64).sum();
        (binned + self.outside as f64) / self.n_paths as f64
    }
}

fn histogram(t: f64, bins: &[Bin], positions: &[Option<Vec<f64>>]) -> DensityHistogram {
    let n = positions.len();
    let mut counts = vec![0usize; bins.len()];
    let mut alive = 0;
    let mut outside = 0;
    for p in positions.iter().flatten() {
        alive += 1;
        match bins.iter().position(|b| b.contains(p)) {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    let bins = bins
        .iter()
        .zip(counts)
        .map(|(bin, count)| {
            let vol = bin.volume();
            let prop = EstimatorReport::proportion(count, n);
            let report = EstimatorReport::new(prop.estimate / vol, prop.std_error / vol, n)
                .with_meta("volume", vol);
            DensityBin {
                bin: bin.clone(),
                report,
                count,
                empty: count == 0,
            }
        })
        .collect();
    DensityHistogram {
        t,
        bins,
        survival: EstimatorReport::proportion(alive, n).with_meta("t", t),
        outside,
        n_paths: n,
    }
}

fn check_bins(params: &ModelParams, bins: &[Bin]) -> Result<()> {
    if params.dim > 2 {
        return invalid("density histograms are limited to d <= 2");
    }
    if bins.is_empty() || bins.iter().any(|b| b.lower.len() != params.dim) {
        return invalid("bins must be non-empty and match the model dimension");
    }
    Ok(())
}

/// Histogram estimate of `p_D(t, x, ·)`: alive paths per bin over `n_paths × volume`.
pub fn estimate_density(
    params: &ModelParams,
    region: &Region,
    t: f64,
    x: &[f64],
    bins: &[Bin],
    config: &SimConfig,
) -> Result<DensityHistogram> {
    Ok(estimate_density_at_times(params, region, &[t], x, bins, config)?.remove(0))
}

/// Histograms at several times from one set of paths.
pub fn estimate_density_at_times(
    params: &ModelParams,
    region: &Region,
    times: &[f64],
    x: &[f64],
    bins: &[Bin],
    config: &SimConfig,
) -> Result<Vec<DensityHistogram>> {
    check_bins(params, bins)?;
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return invalid("need at least one positive time");
    }
    check_start(params, region, x)?;
    let last = times.iter().copied().fold(0.0, f64::max);
    let cfg = config.with_horizon(last)?;
    let stops = stop_times(times, last);
    let per_path: Vec<Vec<Option<Vec<f64>>>> = map_paths(cfg.n_paths, cfg.seed, |rng| {
        let w = walk(params, region, &cfg, x, times, rng, |_, _| {});
        times.iter().map(|&t| snapshot_at(&w, &stops, t)).collect()
    });
    Ok(times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let at: Vec<Option<Vec<f64>>> = per_path.iter().map(|p| p[k].clone()).collect();
            histogram(t, bins, &at)
        })
        .collect())
}

/// Exit estimate together with the number of paths still inside at the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitReport {
    pub report: EstimatorReport,
    pub censored: usize,
}

impl ExitReport {
    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.report.n as f64
    }
}

/// Fraction of paths whose exit position satisfies `target`. Paths still
/// inside at the horizon count as misses and are reported as censored.
pub fn estimate_exit_distribution(
    params: &ModelParams,
    region: &Region,
    x: &[f64],
    target: impl Fn(&[f64]) -> bool + Sync,
    config: &SimConfig,
) -> Result<ExitReport> {
    let paths = simulate_paths(params, region, x, config)?;
    let censored = paths.iter().filter(|p| p.alive).count();
    let hits = paths
        .iter()
        .filter(|p| p.exit_position.as_deref().is_some_and(&target))
        .count();
    let report = EstimatorReport::proportion(hits, paths.len())
        .with_meta("censored", censored)
        .with_meta("dt", config.dt);
    Ok(ExitReport { report, censored })
}

/// Mean of `τ ∧ horizon`; censored paths are reported.
pub fn estimate_mean_exit_time(
    params: &ModelParams,
    region: &Region,
    x: &[f64],
    config: &SimConfig,
) -> Result<ExitReport> {
    let paths = simulate_paths(params, region, x, config)?;
    let censored = paths.iter().filter(|p| p.alive).count();
    let times: Vec<f64> = paths
        .iter()
        .map(|p| p.exit_time.unwrap_or(config.horizon))
        .collect();
    let report = EstimatorReport::mean_of(&times)
        .with_meta("censored", censored)
        .with_meta("dt", config.dt);
    Ok(ExitReport { report, censored })
}

/// Both sides of the Lévy system identity and their paired difference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevySystemCheck {
    /// Expected number of jumps from the region into the target before exit.
    pub lhs: EstimatorReport,
    /// Expected time integral of the jump intensity into the target before exit.
    pub rhs: EstimatorReport,
    /// Per-path `lhs − rhs`; its standard error is the joint σ.
    pub difference: EstimatorReport,
    pub censored: usize,
}

impl LevySystemCheck {
    /// Joint σ of `lhs − rhs` with the jump-count variance taken under the
    /// hypothesis `lhs = rhs`: `√(rhs(1 − rhs)/n + se_rhs²)`.
    pub fn joint_sigma(&self) -> f64 {
        let p = self.rhs.estimate.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.rhs.n as f64 + self.rhs.std_error.powi(2)).sqrt()
    }

    /// `|lhs − rhs|` in units of [`Self::joint_sigma`].
    pub fn joint_z(&self) -> f64 {
        let diff = (self.lhs.estimate - self.rhs.estimate).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.joint_sigma()
        }
    }
}

/// `∫_A J^a(x, y) dy` for an interval `A = (lo, hi)` in `d = 1` with `x ∉ [lo, hi]`.
pub fn interval_jump_rate(params: &ModelParams, lo: f64, hi: f64, x: f64) -> f64 {
    let alpha = params.alpha;
    let k = params.weight.powf(alpha) * stable_constant(1, alpha).unwrap_or(0.0) / alpha;
    let (near, far) = if x <= lo {
        (lo - x, hi - x)
    } else {
        (x - hi, x - lo)
    };
    let tail = |s: f64| if s.is_infinite() { 0.0 } else { s.powf(-alpha) };
    k * (tail(near) - tail(far))
}

/// Compares the jump count into `target` (an interval disjoint from the
/// region, `d = 1`) with the time integral of the jump intensity into it,
/// both up to the exit time. Jumps are aggregated per step, so a step whose
/// stable increment lands the path in the target counts as one jump.
pub fn check_levy_system(
    params: &ModelParams,
    region: &Region,
    x: &[f64],
    target: &Region,
    config: &SimConfig,
) -> Result<LevySystemCheck> {
    if !(params.weight > 0.0) {
        return invalid("the Lévy system check needs a > 0");
    }
    let (lo, hi) = match target {
        Region::Box { lower, upper } if params.dim == 1 && lower.len() == 1 => (lower[0], upper[0]),
        _ => return invalid("the Lévy system target must be an interval in d = 1"),
    };
    let overlaps = match region {
        Region::Box { lower, upper } => lower[0] < hi && lo < upper[0],
        Region::Ball { center, radius } => center[0] - radius < hi && lo < center[0] + radius,
        Region::Domain(_) => true,
    };
    if overlaps {
        return invalid("target must be disjoint from a bounded region");
    }
    config.validate()?;
    check_start(params, region, x)?;
    let per_path: Vec<(f64, f64, bool)> = map_paths(config.n_paths, config.seed, |rng| {
        let mut integral = 0.0;
        let w = walk(params, region, config, x, &[], rng, |pos, h| {
            integral += interval_jump_rate(params, lo, hi, pos[0]) * h;
        });
        let hit = w
            .result
            .exit_position
            .as_deref()
            .is_some_and(|p| p[0] > lo && p[0] < hi);
        (if hit { 1.0 } else { 0.0 }, integral, w.result.alive)
    });
    let lhs: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = per_path.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = per_path.iter().map(|p| p.0 - p.1).collect();
    let censored = per_path.iter().filter(|p| p.2).count();
    Ok(LevySystemCheck {
        lhs: EstimatorReport::mean_of(&lhs),
        rhs: EstimatorReport::mean_of(&rhs),
        difference: EstimatorReport::mean_of(&diff),
        censored,
    })
}

/// Kolmogorov–Smirnov distance between the sample and a continuous CDF.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let f = cdf(s);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Fixed-width little-endian record: index `u64`, alive `u8`, exit time `f64`
/// (NaN while alive), then the exit position (or final position) as `d × f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub index: u64,
    pub alive: bool,
    pub exit_time: f64,
    pub position: Vec<f64>,
}

impl PathRecord {
    pub fn from_result(index: u64, r: &KilledPathResult) -> Self {
        let position = r
            .exit_position
            .clone()
            .or_else(|| r.final_position.clone())
            .unwrap_or_default();
        Self {
            index,
            alive: r.alive,
            exit_time: r.exit_time.unwrap_or(f64::NAN),
            position,
        }
    }

    pub fn byte_len(d: usize) -> usize {
        8 + 1 + 8 + 8 * d
    }
}

pub fn write_path_records<W: Write>(mut w: W, records: &[PathRecord]) -> io::Result<()> {
    for r in records {
        w.write_all(&r.index.to_le_bytes())?;
        w.write_all(&[r.alive as u8])?;
        w.write_all(&r.exit_time.to_le_bytes())?;
        for v in &r.position {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_path_records<R: Read>(mut r: R, d: usize) -> io::Result<Vec<PathRecord>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let len = PathRecord::byte_len(d);
    if buf.len() % len != 0 {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!(
                "{} bytes is not a multiple of the record length {len}",
                buf.len()
            ),
        ));
    }
    let f = |b: &[u8]| f64::from_le_bytes(b.try_into().expect("8 bytes"));
    Ok(buf
        .chunks_exact(len)
        .map(|c| PathRecord {
            index: u64::from_le_bytes(c[0..8].try_into().expect("8 bytes")),
            alive: c[8] != 0,
            exit_time: f(&c[9..17]),
            position: (0..d).map(|i| f(&c[17 + 8 * i..25 + 8 * i])).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::erf::{erf, erfc};

    fn unit() -> ModelParams {
        ModelParams::new(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn half_stable_subordinator_matches_levy_law() {
        let mut rng = substream(1, 0);
        let mut s: Vec<f64> = (0..100_000)
            .map(|_| sample_subordinator_increment(0.5, 1.0, &mut rng))
            .collect();
        assert!(s.iter().all(|v| *v > 0.0 && v.is_finite()));
        let ks = ks_statistic(&mut s, |v| erfc(0.5 / v.sqrt()));
        assert!(ks <= 0.01, "KS = {ks}");
    }

    #[test]
    fn subordinator_self_similarity() {
        let mut rng = substream(2, 0);
        let mut one: Vec<f64> = (0..40_000)
            .map(|_| sample_subordinator_increment(0.7, 1.0, &mut rng))
            .collect();
        let mut small: Vec<f64> = (0..40_000)
            .map(|_| sample_subordinator_increment(0.7, 0.01, &mut rng))
            .collect();
        one.sort_by(f64::total_cmp);
        small.sort_by(f64::total_cmp);
        for q in [0.25, 0.5, 0.75] {
            let i = (q * 40_000.0) as usize;
            assert_relative_eq!(
                small[i] / one[i],
                0.01f64.powf(1.0 / 0.7),
                max_relative = 0.05
            );
        }
    }

    #[test]
    fn cauchy_increments() {
        let p = unit();
        let mut rng = substream(3, 0);
        let mut s: Vec<f64> = (0..100_000)
            .map(|_| sample_stable_increment(&p, 1.0, &mut rng)[0])
            .collect();
        let positive = s.iter().filter(|v| **v > 0.0).count() as f64 / s.len() as f64;
        assert!((positive - 0.5).abs() < 0.01);
        let ks = ks_statistic(&mut s, |v| 0.5 + v.atan() / PI);
        assert!(ks <= 0.01, "KS = {ks}");
    }

    #[test]
    fn stable_increment_scaling() {
        let p = ModelParams::new(2, 1.4, 1.0).unwrap();
        let mut rng = substream(4, 0);
        let norms = |dt: f64, rng: &mut rand_chacha::ChaCha8Rng| {
            let mut v: Vec<f64> = (0..40_000)
                .map(|_| {
                    let y = sample_stable_increment(&p, dt, rng);
                    (y[0] * y[0] + y[1] * y[1]).sqrt()
                })
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let one = norms(1.0, &mut rng);
        let small = norms(0.05, &mut rng);
        assert_relative_eq!(
            small[20_000] / one[20_000],
            0.05f64.powf(1.0 / 1.4),
            max_relative = 0.05
        );
    }

    #[test]
    fn path_result_invariants() {
        let p = unit();
        let region = Region::Domain(Domain::half_space(0.0));
        let cfg = SimConfig::new(0.01, 500, 2.0, 9).unwrap();
        for r in simulate_paths(&p, &region, &[0.5], &cfg).unwrap() {
            if r.alive {
                assert!(region.contains(r.final_position.as_ref().unwrap()));
                assert!(r.exit_time.is_none());
            } else {
                assert!(r.exit_time.unwrap() <= 2.0);
                assert!(!region.contains(r.exit_position.as_ref().unwrap()));
            }
        }
        assert!(simulate_paths(&p, &region, &[-1.0], &cfg).is_err());
    }

    #[test]
    fn brownian_survival_matches_erf() {
        let p = ModelParams::new(1, 1.0, 0.0).unwrap();
        let region = Region::Domain(Domain::half_space(0.0));
        let cfg = SimConfig::new(1e-3, 20_000, 1.0, 5).unwrap();
        let r = estimate_survival(&p, &region, 1.0, &[1.0], &cfg).unwrap();
        assert!(r.z_score(erf(0.5)) < 3.5, "{r:?}");
    }

    #[test]
    fn brownian_image_density() {
        let p = ModelParams::new(1, 1.0, 0.0).unwrap();
        let region = Region::Domain(Domain::half_space(0.0));
        let cfg = SimConfig::new(1e-3, 20_000, 1.0, 6).unwrap();
        let bins = [Bin::centered(1.0, 0.1).unwrap()];
        let h = estimate_density(&p, &region, 1.0, &[1.0], &bins, &cfg).unwrap();
        let want = (4.0 * PI).powf(-0.5) * (1.0 - (-1.0f64).exp());
        assert!(h.bins[0].report.z_score(want) < 3.5, "{:?}", h.bins[0]);
    }

    #[test]
    fn histogram_mass_equals_survival() {
        let p = unit();
        let region = Region::Domain(Domain::half_space(0.0));
        let cfg = SimConfig::new(0.01, 2000, 1.0, 7).unwrap();
        let bins: Vec<Bin> = (0..10)
            .map(|i| Bin::new(vec![i as f64 * 0.5], vec![(i + 1) as f64 * 0.5]).unwrap())
            .collect();
        let h = estimate_density(&p, &region, 1.0, &[1.0], &bins, &cfg).unwrap();
        let mass: f64 = h
            .bins
            .iter()
            .map(|b| b.report.estimate * b.bin.volume())
            .sum::<f64>()
            + h.outside as f64 / h.n_paths as f64;
        assert!((mass - h.survival.estimate).abs() <= 1e-12);
        assert!((h.total_mass() - h.survival.estimate).abs() <= 1e-12);
    }

    #[test]
    fn brownian_mean_exit_time() {
        let p = ModelParams::new(1, 1.0, 0.0).unwrap();
        let region = Region::interval(0.0, 2.0).unwrap();
        let cfg = SimConfig::new(1e-3, 10_000, 20.0, 8).unwrap();
        let r = estimate_mean_exit_time(&p, &region, &[1.0], &cfg).unwrap();
        assert_eq!(r.censored, 0);
        assert!(r.report.z_score(0.5) < 3.5, "{:?}", r.report);
    }

    #[test]
    fn symmetric_exit() {
        let p = unit();
        let region = Region::interval(-1.0, 1.0).unwrap();
        let cfg = SimConfig::new(1e-3, 10_000, 50.0, 10).unwrap();
        let r = estimate_exit_distribution(&p, &region, &[0.0], |y| y[0] >= 1.0, &cfg).unwrap();
        assert!(r.report.z_score(0.5) < 3.5, "{:?}", r.report);
        assert!(r.censored_fraction() <= 1e-3);
    }

    #[test]
    fn levy_system_balances() {
        let p = unit();
        let region = Region::interval(-1.0, 1.0).unwrap();
        let target = Region::interval(2.0, 3.0).unwrap();
        let cfg = SimConfig::new(1e-3, 20_000, 50.0, 11).unwrap();
        let c = check_levy_system(&p, &region, &[0.0], &target, &cfg).unwrap();
        assert!(c.difference.z_score(0.0) < 3.5, "{c:?}");
        assert!(c.lhs.estimate > 0.0);
        assert!(check_levy_system(
            &p,
            &region,
            &[0.0],
            &Region::interval(0.5, 3.0).unwrap(),
            &cfg
        )
        .is_err());
    }

    #[test]
    fn interval_rate_closed_form() {
        let p = unit();
        // 𝒜(1,1) = 1/π, so the rate from 0 into (2,3) is (1/2 − 1/3)/π.
        assert_relative_eq!(
            interval_jump_rate(&p, 2.0, 3.0, 0.0),
            (0.5 - 1.0 / 3.0) / PI,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            interval_jump_rate(&p, -3.0, -2.0, 0.0),
            (0.5 - 1.0 / 3.0) / PI,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            interval_jump_rate(&p, 2.0, f64::INFINITY, 0.0),
            0.5 / PI,
            max_relative = 1e-12
        );
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let p = ModelParams::new(2, 1.2, 0.7).unwrap();
        let region = Region::Domain(Domain::sinusoidal(0.0, 0.5, 0.5, 2.0).unwrap());
        let cfg = SimConfig::new(0.01, 3000, 1.0, 12).unwrap();
        let a = estimate_survival(&p, &region, 1.0, &[0.3, 1.0], &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| estimate_survival(&p, &region, 1.0, &[0.3, 1.0], &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn records_round_trip() {
        let p = ModelParams::new(2, 1.0, 1.0).unwrap();
        let region = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let cfg = SimConfig::new(0.01, 50, 0.5, 13).unwrap();
        let paths = simulate_paths(&p, &region, &[0.1, 0.2], &cfg).unwrap();
        let recs: Vec<PathRecord> = paths
            .iter()
            .enumerate()
            .map(|(i, r)| PathRecord::from_result(i as u64, r))
            .collect();
        let mut buf = Vec::new();
        write_path_records(&mut buf, &recs).unwrap();
        assert_eq!(buf.len(), 50 * PathRecord::byte_len(2));
        let back = read_path_records(&buf[..], 2).unwrap();
        for (a, b) in recs.iter().zip(&back) {
            assert_eq!(a.index, b.index);
            assert_eq!(a.alive, b.alive);
            assert!(a.exit_time == b.exit_time || (a.exit_time.is_nan() && b.exit_time.is_nan()));
            assert_eq!(a.position, b.position);
        }
        assert!(read_path_records(&buf[..buf.len() - 1], 2).is_err());
    }

    #[test]
    fn bridge_projection_leaves_region() {
        let ball = Region::ball(vec![0.0, 0.0], 1.0).unwrap();
        let mut y = vec![0.3, 0.4];
        project_to_boundary(&ball, &mut y);
        assert!(!ball.contains(&y));
        let b = Region::boxed(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let mut y = vec![0.9, 1.0];
        project_to_boundary(&b, &mut y);
        assert_eq!(y, vec![1.0, 1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 1, 1.0, 0).is_err());
        assert!(SimConfig::new(2.0, 1, 1.0, 0).is_err());
        assert!(SimConfig::new(0.1, 0, 1.0, 0).is_err());
    }
}
