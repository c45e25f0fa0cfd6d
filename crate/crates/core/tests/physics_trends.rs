use biphoton_core::schmidt::{
    local_maxima, mode_profiles, peak_to_valley, schmidt_decompose, DEFAULT_THRESHOLD,
};
use biphoton_core::{
    build_spectral_matrix, Evaluator, PhysicalParams, Scheme, SpectralGridSpec, SpectralMatrix,
};

fn matrix(scheme: Scheme, temperature: f64) -> SpectralMatrix {
    build_spectral_matrix(
        &PhysicalParams::default()
            .with_scheme(scheme)
            .with_temperature(temperature),
        &SpectralGridSpec::default(),
        Evaluator::Analytic,
    )
    .unwrap()
}

#[test]
fn cold_ridge_follows_energy_conservation() {
    let m = matrix(Scheme::Copropagating, 0.0);
    let axis = m.signal_axis();
    let n = m.n();
    for k in (0..n).step_by(37) {
        let best = (0..n)
            .max_by(|&a, &b| m.get(a, k).norm().total_cmp(&m.get(b, k).norm()))
            .unwrap();
        // The grid is symmetric, so −Δi is itself a grid point.
        assert_eq!(axis[best], -axis[k]);
    }
}

#[test]
fn copropagating_correlation_turns_over_with_temperature() {
    // Along the ridge Δs = −Δi the cold intensity is anticorrelated; thermal
    // smearing along the Doppler direction eventually dominates and flips it.
    let cold = matrix(Scheme::Copropagating, 0.0).intensity_moments().correlation();
    let warm = matrix(Scheme::Copropagating, 500.0).intensity_moments().correlation();
    assert!(cold < -0.5, "{cold}");
    assert!(warm > 0.1, "{warm}");
    let mut last = cold;
    for t in [50.0, 100.0, 300.0, 500.0] {
        let c = matrix(Scheme::Copropagating, t).intensity_moments().correlation();
        assert!(c > last, "correlation not increasing at {t} K: {c} <= {last}");
        last = c;
    }
}

#[test]
fn counter_propagation_keeps_the_sum_frequency_narrow() {
    let co = matrix(Scheme::Copropagating, 300.0).intensity_moments();
    let counter = matrix(Scheme::CounterPropagating, 300.0).intensity_moments();
    assert!(counter.var_sum() < 0.2 * co.var_sum(), "{} vs {}", counter.var_sum(), co.var_sum());
    assert!(counter.correlation() < -0.5);
}

#[test]
fn doppler_averaging_lowers_the_peak_with_temperature() {
    for scheme in [Scheme::Copropagating, Scheme::CounterPropagating] {
        let grid = SpectralGridSpec::default();
        let mut last = f64::INFINITY;
        for t in [10.0, 100.0, 500.0] {
            let p = PhysicalParams::default().with_scheme(scheme).with_temperature(t);
            let raw = biphoton_core::spectral::SpectralMatrix::from_fn(grid, |s, i| {
                let d = biphoton_core::derive(&p).unwrap();
                biphoton_core::spectral::f_doppler_analytic(biphoton_core::Detuning::new(s, i), &d)
                    .unwrap()
            })
            .unwrap();
            let peak = raw.amplitudes().iter().map(|f| f.norm()).fold(0.0, f64::max);
            assert!(peak < last, "{scheme:?} at {t} K");
            last = peak;
        }
    }
}

#[test]
fn leading_schmidt_eigenvalue_falls_with_temperature() {
    for scheme in [Scheme::Copropagating, Scheme::CounterPropagating] {
        let cold = schmidt_decompose(&matrix(scheme, 50.0), DEFAULT_THRESHOLD).unwrap();
        let hot = schmidt_decompose(&matrix(scheme, 500.0), DEFAULT_THRESHOLD).unwrap();
        assert!(
            cold.eigenvalues[0] > hot.eigenvalues[0],
            "{scheme:?}: {} vs {}",
            cold.eigenvalues[0],
            hot.eigenvalues[0]
        );
        assert!(hot.rank() >= 10);
    }
}

#[test]
fn counter_propagating_idler_modes_are_more_distinct() {
    let co = schmidt_decompose(&matrix(Scheme::Copropagating, 500.0), DEFAULT_THRESHOLD).unwrap();
    let counter =
        schmidt_decompose(&matrix(Scheme::CounterPropagating, 500.0), DEFAULT_THRESHOLD).unwrap();
    for n in 0..3 {
        let a = mode_profiles(&co, n).unwrap();
        let b = mode_profiles(&counter, n).unwrap();
        assert_eq!(local_maxima(&a.idler, 1e-2).len(), n + 1);
        assert_eq!(local_maxima(&b.idler, 1e-2).len(), n + 1);
        if n > 0 {
            let pa = peak_to_valley(&a.idler, 1e-2).unwrap();
            let pb = peak_to_valley(&b.idler, 1e-2).unwrap();
            assert!(pb > pa, "mode {n}: counter {pb} vs co {pa}");
        }
    }
}
