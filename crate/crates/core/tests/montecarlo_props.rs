use hk_core::montecarlo::{
    estimate_density, estimate_survival, estimate_survival_curve, simulate_paths, Bin, SimConfig,
};
use hk_core::{Domain, ModelParams, Region};
use proptest::prelude::*;
use statrs::function::erf::erf;

fn half_line() -> Region {
    Region::Domain(Domain::half_space(0.0))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_are_probabilities(alpha in 0.3..1.8f64, a in 0.0..3.0f64, x in 0.05..3.0f64, t in 0.1..2.0f64, seed in any::<u64>()) {
        let p = ModelParams::new(1, alpha, a).unwrap();
        let cfg = SimConfig::new(0.01, 400, t, seed).unwrap();
        let curve = estimate_survival_curve(&p, &half_line(), &[0.25 * t, 0.5 * t, t], &[x], &cfg).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[1].estimate <= w[0].estimate);
        }
        for s in &curve {
            prop_assert!((0.0..=1.0).contains(&s.estimate) && s.std_error >= 0.0);
        }
        let bins: Vec<Bin> = (0..8).map(|k| Bin::centered(0.25 + 0.5 * k as f64, 0.5).unwrap()).collect();
        let h = estimate_density(&p, &half_line(), t, &[x], &bins, &cfg).unwrap();
        prop_assert!((h.total_mass() - h.survival.estimate).abs() <= 1e-12);
        prop_assert!(h.bins.iter().all(|b| b.report.estimate >= 0.0));
    }
}

#[test]
fn deep_start_survives() {
    let p = ModelParams::new(1, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(0.01, 10_000, 1.0, 11).unwrap();
    let s = estimate_survival(&p, &half_line(), 1.0, &[1e3], &cfg).unwrap();
    assert!(s.estimate >= 0.999, "{s:?}");
}

#[test]
fn density_is_symmetric_in_start_and_target() {
    let p = ModelParams::new(1, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(1e-3, 100_000, 1.0, 5).unwrap();
    let (x, y, w) = (0.5, 1.5, 0.1);
    let fwd = estimate_density(&p, &half_line(), 1.0, &[x], &[Bin::centered(y, w).unwrap()], &cfg).unwrap();
    let cfg = SimConfig { seed: 6, ..cfg };
    let bwd = estimate_density(&p, &half_line(), 1.0, &[y], &[Bin::centered(x, w).unwrap()], &cfg).unwrap();
    let (a, b) = (&fwd.bins[0].report, &bwd.bins[0].report);
    let sigma = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() <= 3.0 * sigma, "{} vs {} (σ {sigma})", a.estimate, b.estimate);
}

#[test]
fn uncorrected_walk_converges_from_above() {
    let p = ModelParams::new(1, 1.0, 0.0).unwrap();
    let exact = erf(0.5);
    let survival = |dt: f64| {
        let cfg = SimConfig {
            bridge_correction: false,
            ..SimConfig::new(dt, 20_000, 1.0, 3).unwrap()
        };
        estimate_survival(&p, &half_line(), 1.0, &[1.0], &cfg).unwrap()
    };
    let levels: Vec<_> = [0.1, 0.01, 0.001].into_iter().map(survival).collect();
    for w in levels.windows(2) {
        assert!(w[0].estimate > w[1].estimate, "{levels:?}");
    }
    let finest = &levels[2];
    assert!(finest.estimate >= exact - 3.0 * finest.std_error);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let p = ModelParams::new(2, 1.5, 0.7).unwrap();
    let region = Region::ball(vec![0.0, 0.0], 2.0).unwrap();
    let cfg = SimConfig::new(0.01, 3_000, 2.0, 99).unwrap();
    let one = in_pool(1, || simulate_paths(&p, &region, &[0.5, 0.0], &cfg).unwrap());
    let many = in_pool(4, || simulate_paths(&p, &region, &[0.5, 0.0], &cfg).unwrap());
    assert_eq!(one, many);
}
