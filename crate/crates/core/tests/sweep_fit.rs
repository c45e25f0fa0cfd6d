use biphoton_core::sweep::linear_r_squared;
use biphoton_core::{
    entropy_vs_range, fit_asymptote, run_sweep, EntropySeries, Evaluator, PhysicalParams,
    SpectralGridSpec, SweepAxis, SweepMode,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn ranges() -> Vec<f64> {
    (1..=15).map(|k| 10.0 * k as f64).collect()
}

fn model(a: f64, beta: f64, r: f64) -> f64 {
    a * (1.0 - (-beta * r).exp())
}

#[test]
fn confidence_interval_coverage() {
    let (a, beta) = (2.0, 0.1);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let trials = 1000;
    let mut covered = 0;
    for _ in 0..trials {
        let s = ranges()
            .iter()
            .map(|&r| (model(a, beta, r) + noise.sample(&mut rng)).max(0.0))
            .collect();
        let fit = fit_asymptote(&EntropySeries::new(ranges(), s).unwrap()).unwrap();
        if (fit.a - a).abs() <= fit.a_ci95 {
            covered += 1;
        }
    }
    let rate = covered as f64 / trials as f64;
    assert!(rate >= 0.93, "coverage {rate}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn noiseless_recovery(a in 0.1f64..10.0, beta in 0.01f64..1.0) {
        let s = ranges().iter().map(|&r| model(a, beta, r)).collect();
        let fit = fit_asymptote(&EntropySeries::new(ranges(), s).unwrap()).unwrap();
        prop_assert!((fit.a - a).abs() <= 1e-6 * a.max(1.0), "a {} vs {}", fit.a, a);
        prop_assert!((fit.beta - beta).abs() <= 1e-6 * beta.max(1.0), "beta {} vs {}", fit.beta, beta);
    }
}

fn coarse() -> SpectralGridSpec {
    // Same density as the default grid, fewer points, for speed.
    SpectralGridSpec::default()
}

#[test]
fn range_series_at_defaults_is_nondecreasing_and_fit_exceeds_it() {
    let p = PhysicalParams::default();
    let series =
        entropy_vs_range(&p, &[25.0, 50.0, 75.0, 100.0, 125.0, 150.0], &coarse(), Evaluator::Analytic)
            .unwrap();
    assert!(series.entropies.windows(2).all(|w| w[1] >= w[0]), "{series:?}");
    let fit = fit_asymptote(&series).unwrap();
    let max = series.entropies.iter().copied().fold(0.0, f64::max);
    assert!(fit.a >= max);
    assert!(fit.a_ci95.is_finite() && fit.beta_ci95.is_finite());
}

#[test]
fn separable_limit_has_flat_zero_entropy() {
    let p = PhysicalParams::default().with_temperature(0.0).with_tau(1e-6);
    let series = entropy_vs_range(&p, &[25.0, 50.0, 100.0], &coarse(), Evaluator::Analytic).unwrap();
    assert!(series.entropies.iter().all(|&s| s < 1e-6), "{series:?}");
}

#[test]
fn fixed_range_point_matches_direct_computation() {
    let p = PhysicalParams::default().with_temperature(200.0);
    let sweep = run_sweep(
        SweepAxis::Temperature,
        &[200.0],
        &PhysicalParams::default(),
        &SweepMode::fixed(),
        &coarse(),
        Evaluator::Analytic,
    )
    .unwrap();
    let series = entropy_vs_range(&p, &[150.0], &coarse(), Evaluator::Analytic).unwrap();
    assert_eq!(sweep.rows[0].entropy, Some(series.entropies[0]));
    assert_eq!(sweep.rows[0].grid_n, 512);
}

#[test]
fn sweep_is_independent_of_thread_count() {
    let values = [0.125, 0.25, 0.375, 0.5];
    let grid = SpectralGridSpec::new(150.0, 128).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                run_sweep(
                    SweepAxis::Tau,
                    &values,
                    &PhysicalParams::default(),
                    &SweepMode::asymptotic(),
                    &grid,
                    Evaluator::Analytic,
                )
                .unwrap()
            })
    };
    let one = run(1);
    let many = run(4);
    assert_eq!(one.rows, many.rows);
    let mut a = Vec::new();
    let mut b = Vec::new();
    one.write_csv(&mut a).unwrap();
    many.write_csv(&mut b).unwrap();
    assert_eq!(a, b);
}

#[test]
fn tau_sweep_is_near_linear() {
    let taus: Vec<f64> = (0..7).map(|k| 0.125 + 0.0625 * k as f64).collect();
    let r = run_sweep(
        SweepAxis::Tau,
        &taus,
        &PhysicalParams::default(),
        &SweepMode::fixed(),
        &SpectralGridSpec::default(),
        Evaluator::Analytic,
    )
    .unwrap();
    let s: Vec<f64> = r.values().into_iter().map(Option::unwrap).collect();
    assert!(s.windows(2).all(|w| w[1] > w[0]), "{s:?}");
    assert!(linear_r_squared(&taus, &s) >= 0.95);
}
