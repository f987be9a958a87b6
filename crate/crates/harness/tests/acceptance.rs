//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset with `cargo test --test acceptance -- 3 7`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use hk_core::montecarlo::SimConfig;
use hk_core::{Domain, ModelParams};
use hk_harness::suites::{self, DensityGrid};
use hk_harness::{HarnessError, Suite};

const SEED: u64 = 20_240_601;
const DIMS: [usize; 3] = [1, 2, 3];
const ALPHAS: [f64; 3] = [0.5, 1.0, 1.5];
const WEIGHTS: [f64; 3] = [0.25, 1.0, 4.0];

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
    run: fn() -> Result<Suite, HarnessError>,
}

fn unit_model() -> ModelParams {
    ModelParams::new(1, 1.0, 1.0).expect("valid parameters")
}

fn c1() -> Result<Suite, HarnessError> {
    suites::scaling(10_000, SEED, 1e-10)
}

fn c2() -> Result<Suite, HarnessError> {
    suites::sandwich_chain(1_000_000, SEED)
}

fn c3() -> Result<Suite, HarnessError> {
    suites::q_integral_bands(&DIMS, &ALPHAS, &WEIGHTS, 100, SEED, 20.0)
}

fn c4() -> Result<Suite, HarnessError> {
    suites::short_range(&DIMS, &ALPHAS, &WEIGHTS, 100, SEED, 20.0)
}

fn c5() -> Result<Suite, HarnessError> {
    suites::interval_green(&ALPHAS, &[0.1, 1.0, 10.0, 100.0], &[0.01, 0.1, 0.5, 0.9, 0.99], 2.0)
}

fn c6() -> Result<Suite, HarnessError> {
    let points: Vec<(f64, f64, f64)> = [0.25, 0.75]
        .into_iter()
        .flat_map(|p| [0.5, 1.0, 2.0].into_iter().map(move |x| (1.0, p, x)))
        .collect();
    suites::lambda(&ALPHAS, &points, 1e-8, 1e-3)
}

fn c7() -> Result<Suite, HarnessError> {
    suites::brownian_oracles(1e-4, 100_000, SEED, 3.0)
}

fn c8() -> Result<Suite, HarnessError> {
    suites::sampler_laws(100_000, SEED, 0.01)
}

fn c9() -> Result<Suite, HarnessError> {
    let params = unit_model();
    let domain = Domain::half_space(0.0);
    let grid = DensityGrid {
        params: &params,
        domain: &domain,
        times: &[0.5, 1.0, 2.0, 4.0],
        starts: &[0.25, 0.5, 1.0, 2.0, 4.0],
        targets: &[0.25, 0.5, 1.0, 2.0, 4.0],
        bin_fraction: 0.25,
        sim: SimConfig::new(1e-3, 100_000, 4.0, SEED)?,
    };
    suites::density_sandwich(&grid, 100.0, 0.05)
}

fn c10() -> Result<Suite, HarnessError> {
    let params = unit_model();
    let mut out = suites::harmonic_measure(&params, &[4.0, 8.0, 16.0], 0.01, 20_000, SEED)?;
    out.append(suites::band_exit(
        &params,
        4.0,
        &[64.0, 128.0],
        &[8.0, 16.0, 32.0],
        0.02,
        10_000,
        SEED,
    )?);
    let cases = [(1.0, (2.0, 3.0)), (1.0, (100.0, 101.0)), (2.0, (2.0, 3.0))];
    out.append(suites::levy_system(&params, &cases, 1e-3, 100_000, SEED, 3.0)?);
    Ok(out)
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, title: "exact scaling identities", budget: Duration::from_secs(5), run: c1 },
    Criterion { id: 2, title: "phi sandwich chain", budget: Duration::from_secs(10), run: c2 },
    Criterion { id: 3, title: "time-integrated q against f form", budget: Duration::from_secs(300), run: c3 },
    Criterion { id: 4, title: "short/long time Green splits", budget: Duration::from_secs(300), run: c4 },
    Criterion { id: 5, title: "interval Green mass shape", budget: Duration::from_secs(60), run: c5 },
    Criterion { id: 6, title: "power constant and identity", budget: Duration::from_secs(60), run: c6 },
    Criterion { id: 7, title: "Brownian Monte Carlo oracles", budget: Duration::from_secs(120), run: c7 },
    Criterion { id: 8, title: "sampler laws", budget: Duration::from_secs(30), run: c8 },
    Criterion { id: 9, title: "Dirichlet density sandwich", budget: Duration::from_secs(900), run: c9 },
    Criterion { id: 10, title: "exit laws and Levy system", budget: Duration::from_secs(600), run: c10 },
];

fn summary(suite: &Suite) -> String {
    let failing: Vec<String> = suite
        .rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{} (observed {:.4e}, bound {:.4e}, score {:.3})", r.name, r.observed, r.bound, r.score))
        .collect();
    let fitted: Vec<String> = suite.fitted.iter().map(|(k, v)| format!("{k}={v:.3}")).collect();
    let mut s = format!("{} rows", suite.rows.len());
    if !fitted.is_empty() {
        s.push_str(&format!("; fitted: {}", fitted.join(", ")));
    }
    if !failing.is_empty() {
        s.push_str(&format!("; failing: {}", failing.join("; ")));
    }
    s
}

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all_pass = true;
    for c in CRITERIA.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let (pass, detail) = match &outcome {
            Ok(suite) => (suite.pass() && in_time, summary(suite)),
            Err(e) => (false, format!("error: {e}")),
        };
        all_pass &= pass;
        println!(
            "criterion {:>2} {}: {} [{:.1}s of {}s{}] {}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.title,
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time { "" } else { ", over budget" },
            detail
        );
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
