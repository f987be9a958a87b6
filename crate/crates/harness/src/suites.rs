//! Check suites shared by the CLI experiments and the acceptance tests.
//!
//! Each suite returns a [`Suite`] of rows; a suite passes when all rows do.

use hk_core::envelopes::{
    dirichlet_envelope, dirichlet_envelope_geometry, green_f_geometry, survival_envelope,
    ComparabilityConstants, PairGeometry,
};
use hk_core::identities::{
    check_power_identity, check_prop12_band, lambda_constant, sweep_sandwich, sweep_scaling,
};
use hk_core::montecarlo::{
    check_levy_system, estimate_density_at_times, estimate_mean_exit_time,
    estimate_survival_curve, ks_statistic, sample_stable_increment, sample_subordinator_increment,
    simulate_paths, Bin, EstimatorReport, KilledPathResult, SimConfig,
};
use hk_core::quadrature::{
    check_prop21, closed_i, green_split_geometry, integrate_i_geometry, integrate_j_geometry,
    j_bound_shape, q_integral_ratio, QuadratureResult,
};
use hk_core::rng::substream;
use hk_core::{Domain, ModelParams, Region};
use rand::Rng;
use rayon::prelude::*;
use statrs::function::erf::{erf, erfc};

use crate::report::{fit_constant, CheckRow, Sides, Suite};
use crate::HarnessError;

type Result<T> = std::result::Result<T, HarnessError>;

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn band_row(name: String, ratios: &[f64], cap: f64) -> CheckRow {
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c = hi.max(1.0 / lo);
    let ok = c.is_finite() && c <= cap && lo > 0.0;
    CheckRow::new(name, c, cap, c / cap, ok)
}

// ---------------------------------------------------------------------------
// Identities

/// Worst relative errors of the three scaling identities over `samples` random tuples.
pub fn scaling(samples: usize, seed: u64, tol: f64) -> Result<Suite> {
    let s = sweep_scaling(samples, seed)?;
    let mut out = Suite::default();
    out.push(CheckRow::at_most("scaling/q_form", s.q_max, tol));
    out.push(CheckRow::at_most("scaling/phi", s.phi_max, tol));
    out.push(CheckRow::at_most("scaling/free", s.free_max, tol));
    Ok(out)
}

pub fn sandwich_chain(samples: usize, seed: u64) -> Result<Suite> {
    let s = sweep_sandwich(samples, seed)?;
    let mut out = Suite::default();
    out.push(CheckRow::new(
        "phi_sandwich/violations",
        s.violations as f64,
        0.0,
        s.violations as f64,
        s.violations == 0 && s.samples == samples,
    ));
    Ok(out)
}

/// Stable-regime band of the free envelope, reported per weight.
pub fn prop12_bands(weights: &[f64], samples: usize, seed: u64) -> Result<Suite> {
    let mut out = Suite::default();
    for (i, &a) in weights.iter().enumerate() {
        let params = ModelParams::new(1, 1.0, a)?;
        let band = check_prop12_band(&params, 1.0, 1.0, samples, seed.wrapping_add(i as u64))?;
        let c = band.constant();
        out.push(CheckRow::new(
            format!("stable_band/a={a}"),
            c,
            f64::NAN,
            c,
            c.is_finite(),
        ));
        out.fit(format!("stable_band/a={a}"), c);
    }
    Ok(out)
}

/// `Λ(α, α/2)` vanishes, the sign of `Λ` follows `p − α/2` on a 20-point
/// grid, and the power identity holds at the listed points.
pub fn lambda(alphas: &[f64], power_points: &[(f64, f64, f64)], zero_tol: f64, rel_tol: f64) -> Result<Suite> {
    let mut out = Suite::default();
    for &alpha in alphas {
        let zero = lambda_constant(1, alpha, 0.5 * alpha)?;
        out.push(CheckRow::at_most(format!("lambda_zero/alpha={alpha}"), zero.abs(), zero_tol));
        let mut wrong = 0;
        for k in 0..20 {
            let p = alpha * (k as f64 + 0.5) / 20.0;
            let v = lambda_constant(1, alpha, p)?;
            let expected = if p < 0.5 * alpha { -1.0 } else { 1.0 };
            if v.signum() != expected || v == 0.0 {
                wrong += 1;
            }
        }
        out.push(CheckRow::new(
            format!("lambda_sign/alpha={alpha}"),
            wrong as f64,
            0.0,
            wrong as f64,
            wrong == 0,
        ));
    }
    for &(alpha, p, xd) in power_points {
        let c = check_power_identity(alpha, p, xd)?;
        out.push(CheckRow::at_most(
            format!("power_identity/alpha={alpha},p={p},x={xd}"),
            c.error(),
            rel_tol,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Quadrature

/// A pair of points in a half-space described by its distances; `d = 1`
/// forces `|δx − δy| = r`.
fn pair_with(rng: &mut impl Rng, d: usize, delta_x: f64, sep: f64) -> PairGeometry {
    let vertical = if d == 1 {
        if rng.random::<bool>() {
            sep
        } else {
            -sep
        }
    } else {
        rng.random_range(-sep..=sep)
    };
    let mut delta_y = delta_x + vertical;
    if delta_y <= 0.0 {
        delta_y = delta_x + vertical.abs();
    }
    PairGeometry {
        delta_x,
        delta_y,
        separation: sep,
    }
}

/// Ratio band of `∫_0^∞ q dt / f^a_D` per `(d, α, a)` over random half-space pairs.
pub fn q_integral_bands(
    dims: &[usize],
    alphas: &[f64],
    weights: &[f64],
    pairs: usize,
    seed: u64,
    cap: f64,
) -> Result<Suite> {
    let configs = grid3(dims, alphas, weights);
    let rows: Vec<Result<(CheckRow, String, f64, f64)>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, &(d, alpha, a))| {
            let params = ModelParams::new(d, alpha, a)?;
            let (_, r_star) = params.regime_thresholds()?;
            let mut rng = substream(seed, i as u64);
            let mut ratios = Vec::with_capacity(pairs);
            let mut worst = 0.0f64;
            for _ in 0..pairs {
                let dx = log_uniform(&mut rng, 1e-2, 1e2) * r_star;
                let sep = log_uniform(&mut rng, 1e-2, 1e2) * r_star;
                let g = pair_with(&mut rng, d, dx, sep);
                let (q, ratio) = q_integral_ratio(&params, &g)?;
                worst = worst.max(rel_error(&q));
                ratios.push(ratio);
            }
            let key = format!("q_integral/d={d},alpha={alpha},a={a}");
            let row = band_row(key.clone(), &ratios, cap);
            let c = row.observed;
            Ok((row, key, c, worst))
        })
        .collect();
    let mut out = Suite::default();
    for r in rows {
        let (row, key, c, worst) = r?;
        out.push(row);
        out.push(CheckRow::at_most(format!("{key}/quad_error"), worst, QUAD_REL_ERROR));
        out.fit(key, c);
    }
    Ok(out)
}

/// Relative quadrature error allowed on every integral reported by a suite.
pub const QUAD_REL_ERROR: f64 = 1e-6;

fn rel_error(q: &QuadratureResult) -> f64 {
    q.abs_error_estimate / q.value.abs()
}

fn grid3(dims: &[usize], alphas: &[f64], weights: &[f64]) -> Vec<(usize, f64, f64)> {
    let mut v = Vec::new();
    for &d in dims {
        for &alpha in alphas {
            for &a in weights {
                v.push((d, alpha, a));
            }
        }
    }
    v
}

/// Short-range (`|x − y| ≤ r_star`) checks of the time-split Green integrals.
///
/// * `I / closed form` band per `(d, α, a)`.
/// * `d ≥ 2`: `J ≤ c (1 ∧ δxδy/r²)` with one fitted `c` per `(d, α)` across weights.
/// * `d = 1`: `(I + J) / g^a_D` band per `(α, a)`.
pub fn short_range(
    dims: &[usize],
    alphas: &[f64],
    weights: &[f64],
    pairs: usize,
    seed: u64,
    cap: f64,
) -> Result<Suite> {
    struct Cell {
        d: usize,
        alpha: f64,
        a: f64,
        i_ratios: Vec<f64>,
        j_rows: Vec<(f64, f64)>,
        split_ratios: Vec<f64>,
        worst: f64,
    }
    let configs = grid3(dims, alphas, weights);
    let cells: Vec<Result<Cell>> = configs
        .par_iter()
        .enumerate()
        .map(|(i, &(d, alpha, a))| {
            let params = ModelParams::new(d, alpha, a)?;
            let (_, r_star) = params.regime_thresholds()?;
            let mut rng = substream(seed, 1000 + i as u64);
            let mut cell = Cell {
                d,
                alpha,
                a,
                i_ratios: Vec::new(),
                j_rows: Vec::new(),
                split_ratios: Vec::new(),
                worst: 0.0,
            };
            for _ in 0..pairs {
                let sep = log_uniform(&mut rng, 1e-3, 1.0) * r_star;
                let dx = log_uniform(&mut rng, 1e-3, 1e1) * r_star;
                let g = pair_with(&mut rng, d, dx, sep);
                let short = integrate_i_geometry(&params, 1.0, &g)?;
                cell.worst = cell.worst.max(rel_error(&short));
                cell.i_ratios.push(short.value / closed_i(&params, &g)?);
                if d >= 2 {
                    let long = integrate_j_geometry(&params, &g)?;
                    cell.worst = cell.worst.max(rel_error(&long));
                    cell.j_rows.push((long.value, j_bound_shape(&g)));
                } else {
                    let split = green_split_geometry(&params, 1.0, &g)?;
                    cell.worst = cell.worst.max(rel_error(&split.long_time));
                    cell.split_ratios.push(split.ratio());
                }
            }
            Ok(cell)
        })
        .collect();
    let mut out = Suite::default();
    let mut j_by_da: Vec<((usize, f64), Vec<(f64, f64)>)> = Vec::new();
    for cell in cells {
        let cell = cell?;
        let tag = format!("d={},alpha={},a={}", cell.d, cell.alpha, cell.a);
        let row = band_row(format!("short_time/{tag}"), &cell.i_ratios, cap);
        out.fit(format!("short_time/{tag}"), row.observed);
        out.push(row);
        out.push(CheckRow::at_most(format!("short_range/{tag}/quad_error"), cell.worst, QUAD_REL_ERROR));
        if cell.d == 1 {
            let row = band_row(format!("green_split/{tag}"), &cell.split_ratios, cap);
            out.fit(format!("green_split/{tag}"), row.observed);
            out.push(row);
        } else {
            match j_by_da.iter_mut().find(|(k, _)| *k == (cell.d, cell.alpha)) {
                Some((_, rows)) => rows.extend(cell.j_rows),
                None => j_by_da.push(((cell.d, cell.alpha), cell.j_rows)),
            }
        }
    }
    for ((d, alpha), rows) in j_by_da {
        let c = fit_constant(&rows, Sides::Upper)?;
        let key = format!("long_time/d={d},alpha={alpha}");
        out.push(CheckRow::new(key.clone(), c, f64::NAN, c, c.is_finite()));
        out.fit(key, c);
    }
    Ok(out)
}

/// Interval Green mass against its shape: one fitted `c` per α, and the fits
/// over the left (`x ≤ r/2`) and right (`x ≥ r/2`) halves of the grid agree within `spread`.
pub fn interval_green(alphas: &[f64], radii: &[f64], fractions: &[f64], spread: f64) -> Result<Suite> {
    let mut out = Suite::default();
    for &alpha in alphas {
        let cells: Vec<(f64, f64, f64, f64)> = radii
            .iter()
            .flat_map(|&r| fractions.iter().map(move |&f| (r, f)))
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&(r, f)| {
                let c = check_prop21(alpha, r, f * r)?;
                Ok((f, c.lhs_envelope, c.rhs_shape, c.abs_error_estimate / c.lhs_envelope))
            })
            .collect::<Result<_>>()?;
        let all: Vec<(f64, f64)> = cells.iter().map(|c| (c.1, c.2)).collect();
        let left: Vec<(f64, f64)> = cells.iter().filter(|c| c.0 <= 0.5).map(|c| (c.1, c.2)).collect();
        let right: Vec<(f64, f64)> = cells.iter().filter(|c| c.0 >= 0.5).map(|c| (c.1, c.2)).collect();
        let c = fit_constant(&all, Sides::Upper)?;
        let cl = fit_constant(&left, Sides::Upper)?;
        let cr = fit_constant(&right, Sides::Upper)?;
        let key = format!("interval_green/alpha={alpha}");
        out.fit(key.clone(), c);
        out.push(CheckRow::new(key.clone(), c, f64::NAN, c, c.is_finite()));
        let worst = cells.iter().map(|c| c.3).fold(0.0, f64::max);
        out.push(CheckRow::at_most(format!("{key}/quad_error"), worst, QUAD_REL_ERROR));
        let sp = cl.max(cr) / cl.min(cr);
        out.push(CheckRow::new(
            format!("{key}/halves"),
            sp,
            spread,
            sp / spread,
            sp.is_finite() && sp < spread,
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Monte Carlo

fn brownian_1d() -> ModelParams {
    ModelParams::new(1, 1.0, 0.0).expect("valid parameters")
}

fn image_kernel(t: f64, x: f64, y: f64) -> f64 {
    let s = 4.0 * t;
    ((-(x - y).powi(2) / s).exp() - (-(x + y).powi(2) / s).exp()) / (std::f64::consts::PI * s).sqrt()
}

/// `∫_lo^hi` of the image kernel in `y`, via the Gaussian CDF.
fn image_kernel_mass(t: f64, x: f64, lo: f64, hi: f64) -> f64 {
    let s = 2.0 * t.sqrt();
    let cdf = |m: f64, y: f64| 0.5 * erf((y - m) / s);
    (cdf(x, hi) - cdf(x, lo)) - (cdf(-x, hi) - cdf(-x, lo))
}

/// Brownian (`a = 0`, `d = 1`) oracles: survival, mean exit time and the image-kernel density.
pub fn brownian_oracles(dt: f64, paths: usize, seed: u64, sigmas: f64) -> Result<Suite> {
    let params = brownian_1d();
    let half: Region = Domain::half_space(0.0).into();
    let mut out = Suite::default();

    // x = 1: survival and density at t = 1 from one set of paths.
    let cfg = SimConfig::new(dt, paths, 1.0, seed)?;
    let width = 0.05;
    let bin = Bin::centered(1.0, width)?;
    let h = estimate_density_at_times(&params, &half, &[1.0], &[1.0], &[bin], &cfg)?.remove(0);
    let oracle = erf(0.5);
    out.push(CheckRow::within_sigma(
        "brownian/survival/x=1,t=1",
        h.survival.estimate,
        oracle,
        h.survival.std_error,
        sigmas,
    ));
    let point = image_kernel(1.0, 1.0, 1.0);
    let bin_mean = image_kernel_mass(1.0, 1.0, 1.0 - 0.5 * width, 1.0 + 0.5 * width) / width;
    let bias = (bin_mean - point).abs();
    let dens = &h.bins[0].report;
    let dev = (dens.estimate - point).abs();
    let allowed = sigmas * dens.std_error + bias;
    out.push(CheckRow::new(
        "brownian/density/t=1,x=1,y=1",
        dens.estimate,
        point,
        dev / allowed,
        dev <= allowed,
    ));

    // x = 2 at t = 4.
    let cfg = SimConfig::new(dt, paths, 4.0, seed.wrapping_add(1))?;
    let s = estimate_survival_curve(&params, &half, &[4.0], &[2.0], &cfg)?.remove(0);
    out.push(CheckRow::within_sigma("brownian/survival/x=2,t=4", s.estimate, oracle, s.std_error, sigmas));

    // Mean exit time of (0, 2) from 1.
    let cfg = SimConfig::new(dt, paths, 20.0, seed.wrapping_add(2))?;
    let e = estimate_mean_exit_time(&params, &Region::interval(0.0, 2.0)?, &[1.0], &cfg)?;
    out.push(CheckRow::within_sigma(
        "brownian/mean_exit/(0,2),x=1",
        e.report.estimate,
        0.5,
        e.report.std_error,
        sigmas,
    ));
    out.push(censoring_row("brownian/mean_exit/censored", e.censored, paths));
    Ok(out)
}

fn censoring_row(name: &str, censored: usize, n: usize) -> CheckRow {
    CheckRow::at_most(name, censored as f64 / n as f64, 1e-3)
}

/// KS distances of the α = 1 stable increment (Cauchy) and the ½-stable
/// subordinator (Lévy law) against their closed-form CDFs.
pub fn sampler_laws(samples: usize, seed: u64, max_ks: f64) -> Result<Suite> {
    let mut out = Suite::default();
    let params = ModelParams::new(1, 1.0, 1.0)?;
    let mut rng = substream(seed, 0);
    let mut cauchy: Vec<f64> = (0..samples)
        .map(|_| sample_stable_increment(&params, 1.0, &mut rng)[0])
        .collect();
    let ks = ks_statistic(&mut cauchy, |x| 0.5 + x.atan() / std::f64::consts::PI);
    out.push(CheckRow::at_most("sampler/cauchy_ks", ks, max_ks));

    let mut rng = substream(seed, 1);
    let mut levy: Vec<f64> = (0..samples)
        .map(|_| sample_subordinator_increment(0.5, 1.0, &mut rng))
        .collect();
    let ks = ks_statistic(&mut levy, |s| if s <= 0.0 { 0.0 } else { erfc(0.5 / s.sqrt()) });
    out.push(CheckRow::at_most("sampler/subordinator_ks", ks, max_ks));
    Ok(out)
}

/// Empirical Dirichlet density against the envelope midpoint on a `t × x × y` grid.
///
/// Bins are centred on each `y` with width `bin_fraction · y`.
pub struct DensityGrid<'a> {
    pub params: &'a ModelParams,
    pub domain: &'a Domain,
    pub times: &'a [f64],
    pub starts: &'a [f64],
    pub targets: &'a [f64],
    pub bin_fraction: f64,
    pub sim: SimConfig,
}

pub fn density_sandwich(grid: &DensityGrid<'_>, max_spread: f64, max_empty: f64) -> Result<Suite> {
    let DensityGrid {
        params,
        domain,
        times,
        starts,
        targets,
        bin_fraction,
        ..
    } = *grid;
    if params.dim != 1 {
        return Err(HarnessError::Usage("the density sandwich runs in d = 1".into()));
    }
    let bins: Vec<Bin> = targets
        .iter()
        .map(|&y| Bin::centered(y, bin_fraction * y))
        .collect::<std::result::Result<_, _>>()?;
    let region: Region = (*domain).into();
    let mut out = Suite::default();
    let mut pairs = Vec::new();
    let mut empty = 0usize;
    let mut cells = 0usize;
    for (i, &x) in starts.iter().enumerate() {
        let mut sim = grid.sim;
        sim.seed = grid.sim.seed.wrapping_add(i as u64);
        let hists = estimate_density_at_times(params, &region, times, &[x], &bins, &sim)?;
        for h in &hists {
            for (b, &y) in h.bins.iter().zip(targets) {
                cells += 1;
                let env = dirichlet_envelope(params, domain, h.t, &[x], &[y], ComparabilityConstants::UNIT)?;
                let mid = env.midpoint();
                let name = format!("density/t={},x={x},y={y}", h.t);
                if b.empty {
                    empty += 1;
                    out.push(CheckRow::info(format!("{name}/empty"), 0.0));
                } else {
                    let ratio = b.report.estimate / mid;
                    out.push(CheckRow::info(format!("{name}/ratio"), ratio));
                    pairs.push((b.report.estimate, mid));
                }
            }
        }
    }
    let c = fit_constant(&pairs, Sides::Both)?;
    out.fit("density/two_sided", c);
    out.push(CheckRow::new("density/two_sided_c", c, f64::NAN, c, c.is_finite()));
    let ratios: Vec<f64> = pairs.iter().map(|(o, m)| o / m).collect();
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    out.push(CheckRow::at_most("density/spread", hi / lo, max_spread));
    out.push(CheckRow::at_most("density/empty_fraction", empty as f64 / cells as f64, max_empty));
    Ok(out)
}

fn exit_stats(paths: &[KilledPathResult], horizon: f64, hit: impl Fn(&[f64]) -> bool) -> (EstimatorReport, EstimatorReport, usize) {
    let n = paths.len();
    let hits = paths
        .iter()
        .filter(|p| p.exit_position.as_deref().is_some_and(&hit))
        .count();
    let times: Vec<f64> = paths.iter().map(|p| p.exit_time.unwrap_or(horizon)).collect();
    let censored = paths.iter().filter(|p| p.alive).count();
    (EstimatorReport::proportion(hits, n), EstimatorReport::mean_of(&times), censored)
}

/// `P_x(|X_τ| ≥ r) ≤ c r^{−α} E_x[τ]` for `U = (0, r)`, `x = r/4`, one `c` across radii.
pub fn harmonic_measure(params: &ModelParams, radii: &[f64], dt: f64, paths: usize, seed: u64) -> Result<Suite> {
    let mut out = Suite::default();
    let mut rows = Vec::new();
    for (i, &r) in radii.iter().enumerate() {
        let horizon = 50.0 * r;
        let cfg = SimConfig::new(dt, paths, horizon, seed.wrapping_add(i as u64))?;
        let region = Region::interval(0.0, r)?;
        let res = simulate_paths(params, &region, &[0.25 * r], &cfg)?;
        let (p, tau, censored) = exit_stats(&res, horizon, |y| y[0].abs() >= r);
        let shape = r.powf(-params.alpha) * tau.estimate;
        out.push(CheckRow::info(format!("harmonic/r={r}/exit_far"), p.estimate));
        out.push(CheckRow::info(format!("harmonic/r={r}/mean_exit"), tau.estimate));
        out.push(censoring_row(&format!("harmonic/r={r}/censored"), censored, paths));
        rows.push((p.estimate, shape));
    }
    let c = fit_constant(&rows, Sides::Upper)?;
    out.fit("harmonic", c);
    out.push(CheckRow::new("harmonic/c", c, f64::NAN, c, c.is_finite()));
    Ok(out)
}

/// Exit of `V_R = (inner, R/2)` into the band `[R/2, R)` from `x`, against the
/// lower shape `(x/R)^{α/2}` with one fitted `c`. Starts on or outside `V_R` are skipped.
pub fn band_exit(
    params: &ModelParams,
    inner: f64,
    radii: &[f64],
    starts: &[f64],
    dt: f64,
    paths: usize,
    seed: u64,
) -> Result<Suite> {
    let mut out = Suite::default();
    let mut rows = Vec::new();
    let mut k = 0u64;
    for &big_r in radii {
        for &x in starts {
            if !(x > inner && x < 0.5 * big_r) {
                continue;
            }
            let horizon = 20.0 * big_r * big_r;
            let cfg = SimConfig::new(dt, paths, horizon, seed.wrapping_add(k))?;
            k += 1;
            let region = Region::interval(inner, 0.5 * big_r)?;
            let res = simulate_paths(params, &region, &[x], &cfg)?;
            let (p, _, censored) = exit_stats(&res, horizon, |y| y[0] >= 0.5 * big_r && y[0] < big_r);
            let shape = (x / big_r).powf(0.5 * params.alpha);
            let tag = format!("band_exit/R={big_r},x={x}");
            out.push(CheckRow::info(format!("{tag}/probability"), p.estimate));
            out.push(censoring_row(&format!("{tag}/censored"), censored, paths));
            rows.push((p.estimate, shape));
        }
    }
    let c = fit_constant(&rows, Sides::Lower)?;
    out.fit("band_exit", c);
    out.push(CheckRow::new("band_exit/c", c, f64::NAN, c, c.is_finite()));
    Ok(out)
}

/// Lévy system identity on `U = (−1, 1)` from 0 for each `(a, A)`.
pub fn levy_system(
    base: &ModelParams,
    cases: &[(f64, (f64, f64))],
    dt: f64,
    paths: usize,
    seed: u64,
    sigmas: f64,
) -> Result<Suite> {
    let mut out = Suite::default();
    let region = Region::interval(-1.0, 1.0)?;
    for (i, &(a, (lo, hi))) in cases.iter().enumerate() {
        let params = base.with_weight(a)?;
        let cfg = SimConfig::new(dt, paths, 20.0, seed.wrapping_add(i as u64))?;
        let target = Region::interval(lo, hi)?;
        let c = check_levy_system(&params, &region, &[0.0], &target, &cfg)?;
        let tag = format!("levy/a={a},A=({lo},{hi})");
        out.push(CheckRow::new(
            tag.clone(),
            c.lhs.estimate,
            c.rhs.estimate,
            c.joint_z(),
            c.joint_z() <= sigmas,
        ));
        out.push(censoring_row(&format!("{tag}/censored"), c.censored, paths));
    }
    Ok(out)
}

/// Survival from a fixed start against `1 ∧ φ_a(δ)/√t`, with a fitted
/// two-sided constant and monotonicity in `t`.
pub fn survival_profile(params: &ModelParams, domain: &Domain, x: &[f64], times: &[f64], sim: &SimConfig, sigmas: f64) -> Result<Suite> {
    let mut out = Suite::default();
    let region: Region = (*domain).into();
    let reports = estimate_survival_curve(params, &region, times, x, sim)?;
    let mut rows = Vec::new();
    for (t, rep) in times.iter().zip(&reports) {
        let env = survival_envelope(params, domain, *t, x, ComparabilityConstants::UNIT)?;
        out.push(CheckRow::info(format!("survival/t={t}"), rep.estimate));
        if rep.estimate > 0.0 {
            rows.push((rep.estimate, env.midpoint()));
        }
    }
    for (w, t) in reports.windows(2).zip(times.windows(2)) {
        let rise = w[1].estimate - w[0].estimate;
        let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
        let z = if rise <= 0.0 { 0.0 } else { rise / se };
        out.push(CheckRow::new(
            format!("survival/monotone/t={}..{}", t[0], t[1]),
            rise,
            0.0,
            z,
            z <= sigmas,
        ));
    }
    if !rows.is_empty() {
        let c = fit_constant(&rows, Sides::Both)?;
        out.fit("survival", c);
        out.push(CheckRow::new("survival/c", c, f64::NAN, c, c.is_finite()));
    }
    Ok(out)
}

/// Envelope values on a grid, informational only.
pub fn envelope_table(params: &ModelParams, domain: &Domain, times: &[f64], xs: &[f64], ys: &[f64]) -> Result<Suite> {
    let mut out = Suite::default();
    let lift = |v: f64| {
        let mut p = vec![0.0; params.dim];
        p[params.dim - 1] = v;
        p
    };
    for &t in times {
        for &x in xs {
            for &y in ys {
                let (px, py) = (lift(x), lift(y));
                let g = PairGeometry::of(params, domain, &px, &py)?;
                let env = dirichlet_envelope_geometry(params, t, &g, ComparabilityConstants::UNIT)?;
                let tag = format!("envelope/t={t},x={x},y={y}");
                out.push(CheckRow::info(format!("{tag}/lower"), env.lower));
                out.push(CheckRow::info(format!("{tag}/upper"), env.upper));
                if params.weight > 0.0 && g.separation > 0.0 {
                    out.push(CheckRow::info(format!("{tag}/green_f"), green_f_geometry(params, &g)?));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn image_kernel_mass_matches_point_value_for_narrow_bins() {
        let w = 1e-4;
        let m = image_kernel_mass(1.0, 1.0, 1.0 - w / 2.0, 1.0 + w / 2.0) / w;
        assert!((m - image_kernel(1.0, 1.0, 1.0)).abs() < 1e-8);
        assert!((image_kernel(1.0, 1.0, 1.0) - 0.178_318).abs() < 1e-6);
    }

    #[test]
    fn small_identity_suites_pass() {
        assert!(scaling(200, 3, 1e-10).unwrap().pass());
        assert!(sandwich_chain(5000, 3).unwrap().pass());
        assert!(lambda(&[1.0], &[(1.0, 0.75, 1.0)], 1e-8, 1e-3).unwrap().pass());
    }

    #[test]
    fn sampler_suite_passes_at_moderate_size() {
        assert!(sampler_laws(20_000, 5, 0.02).unwrap().pass());
    }

    #[test]
    fn pair_sampler_is_geometrically_consistent() {
        let mut rng = substream(1, 0);
        for d in 1..=3 {
            for _ in 0..1000 {
                let dx = log_uniform(&mut rng, 1e-3, 1.0);
                let sep = log_uniform(&mut rng, 1e-3, 1.0);
                let g = pair_with(&mut rng, d, dx, sep);
                assert!(g.delta_y > 0.0);
                assert!((g.delta_x - g.delta_y).abs() <= g.separation * (1.0 + 1e-12));
            }
        }
    }
}
