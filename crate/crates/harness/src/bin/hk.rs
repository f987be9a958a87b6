use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hk_harness::{run, Experiment, ExperimentConfig, HarnessError};

/// Run one verification experiment and write `<out>/<experiment>.{csv,json}`.
///
/// Exit status: 0 when every check passes, 1 when a check fails or the run
/// errors, 2 for invalid usage or configuration.
#[derive(Debug, Parser)]
#[command(name = "hk", version)]
struct Cli {
    /// envelope, verify-identities, quadrature, simulate, sandwich or report
    experiment: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let experiment: Experiment = cli.experiment.parse()?;
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(experiment, path)?,
        None => ExperimentConfig::new(experiment),
    };
    if let Some(seed) = cli.seed {
        cfg.sim.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    if let Some(n) = cli.paths {
        cfg.sim.n_paths = n;
    }
    if let Some(dt) = cli.dt {
        cfg.sim.dt = dt;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn init_workers() -> Result<(), HarnessError> {
    let Ok(v) = std::env::var("HK_WORKERS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| HarnessError::Usage(format!("HK_WORKERS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| HarnessError::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = init_workers().and_then(|_| configure(&cli)).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            for row in &report.rows {
                println!(
                    "{} {} observed={} bound={} score={}",
                    if row.pass { "PASS" } else { "FAIL" },
                    row.name,
                    row.observed,
                    row.bound,
                    row.score
                );
            }
            for (k, c) in &report.fitted {
                println!("fitted {k} = {c}");
            }
            println!(
                "{}: {} ({:.2}s)",
                report.experiment,
                if report.pass { "pass" } else { "FAIL" },
                report.wall_time_s
            );
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("hk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
