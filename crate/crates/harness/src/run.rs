//! Experiment dispatch.

use std::fs;
use std::time::Instant;

use hk_core::montecarlo::{simulate_paths, write_path_records, PathRecord};
use hk_core::{Domain, Region};

use crate::config::{Experiment, ExperimentConfig};
use crate::report::{CheckRow, RunReport, Suite};
use crate::suites::{self, DensityGrid};
use crate::HarnessError;

const ACCEPTANCE_T: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
const ACCEPTANCE_XY: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn or_default<'a, T>(v: &'a [T], default: &'a [T]) -> &'a [T] {
    if v.is_empty() {
        default
    } else {
        v
    }
}

/// Runs the configured experiment, writes `<experiment>.csv` and
/// `<experiment>.json` into the output directory and returns the report.
/// A failing check is reported through [`RunReport::pass`], not as an error.
pub fn run(config: &ExperimentConfig) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let start = Instant::now();
    let mut report = RunReport::new(config);
    match config.experiment {
        Experiment::Envelope => envelope(config, &mut report)?,
        Experiment::VerifyIdentities => verify_identities(config, &mut report)?,
        Experiment::Quadrature => quadrature(config, &mut report)?,
        Experiment::Simulate => simulate(config, &mut report)?,
        Experiment::Sandwich => sandwich(config, &mut report)?,
        Experiment::Report => aggregate(config, &mut report)?,
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.write(&config.output_dir)?;
    Ok(report)
}

fn envelope(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<(), HarnessError> {
    let g = &cfg.grids;
    report.merge(suites::envelope_table(&cfg.params, &cfg.domain, &g.t, &g.x, &g.y)?);
    Ok(())
}

fn verify_identities(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<(), HarnessError> {
    let seed = cfg.sim.seed;
    if cfg.wants("scaling") {
        let n = cfg.samples.unwrap_or(10_000);
        report.merge(suites::scaling(n, seed, cfg.tol("scaling", 1e-10))?);
    }
    if cfg.wants("sandwich") {
        let n = cfg.samples.unwrap_or(1_000_000);
        report.merge(suites::sandwich_chain(n, seed)?);
    }
    if cfg.wants("band") {
        let n = cfg.samples.unwrap_or(10_000);
        let weights = or_default(&cfg.grids.a, &[0.25, 1.0, 4.0]);
        report.merge(suites::prop12_bands(weights, n, seed)?);
    }
    if cfg.wants("lambda") {
        let alphas = or_default(&cfg.grids.alpha, &[0.5, 1.0, 1.5]);
        let points: Vec<(f64, f64, f64)> = [0.25, 0.75]
            .into_iter()
            .flat_map(|p| [0.5, 1.0, 2.0].into_iter().map(move |x| (1.0, p, x)))
            .collect();
        report.merge(suites::lambda(
            alphas,
            &points,
            cfg.tol("lambda_zero", 1e-8),
            cfg.tol("power_identity", 1e-3),
        )?);
    }
    Ok(())
}

fn quadrature(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<(), HarnessError> {
    let g = &cfg.grids;
    let dims = or_default(&g.dim, &[1, 2, 3]);
    let alphas = or_default(&g.alpha, &[0.5, 1.0, 1.5]);
    let weights = or_default(&g.a, &[0.25, 1.0, 4.0]);
    let pairs = cfg.samples.unwrap_or(100);
    let cap = cfg.tol("band_max", 20.0);
    if cfg.wants("q_integral") {
        report.merge(suites::q_integral_bands(dims, alphas, weights, pairs, cfg.sim.seed, cap)?);
    }
    if cfg.wants("short_range") {
        report.merge(suites::short_range(dims, alphas, weights, pairs, cfg.sim.seed, cap)?);
    }
    if cfg.wants("interval_green") {
        let radii = or_default(&g.r, &[0.1, 1.0, 10.0, 100.0]);
        let fractions = [0.01, 0.1, 0.5, 0.9, 0.99];
        report.merge(suites::interval_green(alphas, radii, &fractions, cfg.tol("halves_spread", 2.0))?);
    }
    Ok(())
}

fn simulate(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<(), HarnessError> {
    let sim = cfg.sim;
    let sigmas = cfg.tol("sigma", 3.0);
    if cfg.params.weight == 0.0 {
        if cfg.wants("oracles") {
            report.merge(suites::brownian_oracles(sim.dt, sim.n_paths, sim.seed, sigmas)?);
        }
        if cfg.wants("samplers") {
            report.merge(suites::sampler_laws(sim.n_paths, sim.seed, cfg.tol("ks", 0.01))?);
        }
    } else {
        if cfg.params.dim != 1 && cfg.suites.iter().any(|s| s != "survival") {
            return Err(HarnessError::Usage("harmonic, band_exit and levy suites run in d = 1".into()));
        }
        if cfg.wants("survival") {
            let times = or_default(&cfg.grids.t, &[1.0, 4.0, 16.0, 64.0]);
            let mut x = vec![0.0; cfg.params.dim];
            x[cfg.params.dim - 1] = cfg.grids.x.first().copied().unwrap_or(4.0) + cfg.domain.inner_floor();
            report.merge(suites::survival_profile(&cfg.params, &cfg.domain, &x, times, &sim, sigmas)?);
        }
        if cfg.params.dim == 1 {
            if cfg.wants("harmonic") {
                let radii = or_default(&cfg.grids.r, &[4.0, 8.0, 16.0]);
                report.merge(suites::harmonic_measure(&cfg.params, radii, sim.dt, sim.n_paths, sim.seed)?);
            }
            if cfg.wants("band_exit") {
                report.merge(suites::band_exit(
                    &cfg.params,
                    4.0,
                    &[64.0, 128.0],
                    &[8.0, 16.0, 32.0],
                    sim.dt,
                    sim.n_paths,
                    sim.seed,
                )?);
            }
            if cfg.wants("levy") {
                let a = cfg.params.weight;
                let cases = [(a, (2.0, 3.0)), (a, (100.0, 101.0)), (2.0 * a, (2.0, 3.0))];
                report.merge(suites::levy_system(&cfg.params, &cases, sim.dt, sim.n_paths, sim.seed, sigmas)?);
            }
        }
    }
    if cfg.spool_paths {
        spool(cfg)?;
    }
    Ok(())
}

/// Raw outcomes of the configured walk from the first `x` grid value.
fn spool(cfg: &ExperimentConfig) -> Result<(), HarnessError> {
    let d = cfg.params.dim;
    let mut x = vec![0.0; d];
    x[d - 1] = cfg.grids.x.first().copied().unwrap_or(1.0) + cfg.domain.inner_floor();
    let region: Region = cfg.domain.into();
    let paths = simulate_paths(&cfg.params, &region, &x, &cfg.sim)?;
    let records: Vec<PathRecord> = paths
        .iter()
        .enumerate()
        .map(|(i, p)| PathRecord::from_result(i as u64, p))
        .collect();
    fs::create_dir_all(&cfg.output_dir)?;
    let file = fs::File::create(cfg.output_dir.join("paths.bin"))?;
    write_path_records(std::io::BufWriter::new(file), &records)?;
    Ok(())
}

fn sandwich(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<(), HarnessError> {
    if !matches!(cfg.domain, Domain::HalfSpace { .. }) || cfg.params.dim != 1 {
        return Err(HarnessError::Usage("sandwich runs in d = 1 on a half-space".into()));
    }
    let g = &cfg.grids;
    let floor = cfg.domain.inner_floor();
    let starts: Vec<f64> = or_default(&g.x, &ACCEPTANCE_XY).iter().map(|x| x + floor).collect();
    let targets: Vec<f64> = or_default(&g.y, &ACCEPTANCE_XY).iter().map(|y| y + floor).collect();
    let grid = DensityGrid {
        params: &cfg.params,
        domain: &cfg.domain,
        times: or_default(&g.t, &ACCEPTANCE_T),
        starts: &starts,
        targets: &targets,
        bin_fraction: cfg.tol("bin_fraction", 0.25),
        sim: cfg.sim,
    };
    report.merge(suites::density_sandwich(&grid, cfg.tol("spread", 100.0), cfg.tol("empty", 0.05))?);
    Ok(())
}

/// One row per `<experiment>.json` found in the output directory.
fn aggregate(cfg: &ExperimentConfig, report: &mut RunReport) -> Result<(), HarnessError> {
    let mut out = Suite::default();
    for exp in Experiment::ALL {
        if exp == Experiment::Report {
            continue;
        }
        let path = cfg.output_dir.join(format!("{}.json", exp.name()));
        let Ok(text) = fs::read_to_string(&path) else {
            continue;
        };
        let doc: serde_json::Value = serde_json::from_str(&text)?;
        let inner = &doc["report"];
        let pass = inner["pass"].as_bool().unwrap_or(false);
        let rows = inner["rows"].as_array().map_or(0, Vec::len);
        out.push(CheckRow::new(exp.name(), rows as f64, f64::NAN, f64::NAN, pass));
        if let Some(fitted) = inner["fitted"].as_object() {
            for (k, v) in fitted {
                if let Some(c) = v.as_f64() {
                    out.fit(format!("{}/{k}", exp.name()), c);
                }
            }
        }
    }
    report.merge(out);
    Ok(())
}
