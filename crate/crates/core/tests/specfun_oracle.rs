mod support;

use biphoton_core::specfun::{dawson, erfi_kernel, faddeeva};
use biphoton_core::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracle;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn oracle_reproduces_known_constants() {
    assert!((oracle::pi().to_f64() - std::f64::consts::PI).abs() < 1e-16);
    assert!((oracle::erfc(1.0) - 0.157_299_207_050_285_13).abs() < 1e-17);
    assert!((oracle::erfi(1.0) - 1.650_425_758_797_542_8).abs() < 1e-15);
}

#[test]
fn w_of_i_matches_e_erfc_one() {
    let expected = oracle::exp_real(1.0) * oracle::erfc(1.0);
    assert!((expected - 0.427_583_576_155_807_0).abs() < 1e-15);
    let w = faddeeva(Complex64::new(0.0, 1.0)).unwrap();
    assert!((w.re - expected).abs() <= 1e-15 * expected);
    assert_eq!(w.im, 0.0);
}

#[test]
fn faddeeva_real_axis_against_series() {
    let mut worst: f64 = 0.0;
    for i in -400..=400 {
        let z = Complex64::new(i as f64 * 0.01, 0.0);
        let err = rel(faddeeva(z).unwrap(), oracle::faddeeva(z));
        worst = worst.max(err);
    }
    assert!(worst <= 1e-10, "worst relative error {worst:e}");
}

#[test]
fn faddeeva_upper_half_plane_against_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..400 {
        let r = 10.0 * rng.random::<f64>().sqrt();
        let theta = std::f64::consts::PI * rng.random::<f64>();
        let z = Complex64::from_polar(r, theta);
        let err = rel(faddeeva(z).unwrap(), oracle::faddeeva(z));
        worst = worst.max(err);
    }
    assert!(worst <= 1e-10, "worst relative error {worst:e}");
}

#[test]
fn dawson_real_axis_against_series() {
    let mut worst: f64 = 0.0;
    for i in -800..=800 {
        let x = i as f64 * 0.005;
        let z = Complex64::new(x, 0.0);
        let d = dawson(z).unwrap();
        let o = oracle::dawson(z);
        worst = worst.max((d - o).norm());
    }
    assert!(worst <= 1e-11, "worst absolute error {worst:e}");
}

#[test]
fn dawson_maximum() {
    let x = 0.924_138_873_00;
    let o = oracle::dawson(Complex64::new(x, 0.0)).re;
    assert!((o - 0.541_044_224_635_18).abs() < 1e-14, "oracle {o}");
    let d = dawson(Complex64::new(x, 0.0)).unwrap().re;
    assert!((d - o).abs() < 1e-15);
}

#[test]
fn dawson_complex_against_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        let z = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        worst = worst.max(rel(dawson(z).unwrap(), oracle::dawson(z)));
    }
    assert!(worst <= 1e-9, "worst relative error {worst:e}");
}

#[test]
fn erfi_kernel_at_one() {
    let e = oracle::exp_real(-1.0);
    let pi = std::f64::consts::PI;
    let expected = Complex64::new(pi * e * oracle::erfi(1.0), pi * e);
    assert!(rel(erfi_kernel(Complex64::new(1.0, 0.0)).unwrap(), expected) < 1e-14);
}

proptest! {
    #[test]
    fn schwarz_reflection(r in 0.0..12.0_f64, theta in 0.0..std::f64::consts::PI) {
        let z = Complex64::from_polar(r, theta);
        let lhs = faddeeva(-z.conj()).unwrap();
        let rhs = faddeeva(z).unwrap().conj();
        prop_assert!((lhs - rhs).norm() <= 1e-15 * rhs.norm());
    }

    #[test]
    fn w_plus_w_of_minus_z(re in -10.0..10.0_f64, im in -10.0..10.0_f64) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() <= 10.0);
        let (wp, wm) = (faddeeva(z).unwrap(), faddeeva(-z).unwrap());
        let target = 2.0 * (-z * z).exp();
        // Measured against the largest term: the sum cancels wherever e^{-z²} is tiny.
        let scale = wp.norm().max(wm.norm()).max(target.norm());
        prop_assert!((wp + wm - target).norm() <= 1e-9 * scale, "z = {}", z);
    }

    #[test]
    fn dawson_is_odd(x in -50.0..50.0_f64) {
        let z = Complex64::new(x, 0.0);
        prop_assert_eq!(dawson(z).unwrap(), -dawson(-z).unwrap());
    }

    #[test]
    fn erfi_kernel_matches_dawson_route(re in -8.0..8.0_f64, im in -5.0..5.0_f64) {
        let a = Complex64::new(re, im);
        let direct = erfi_kernel(a).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let dawson_part = 2.0 * sqrt_pi * dawson(a).unwrap();
        let gauss_part = Complex64::new(0.0, std::f64::consts::PI) * (-a * a).exp();
        let via_dawson = dawson_part + gauss_part;
        let scale = direct.norm().max(dawson_part.norm()).max(gauss_part.norm());
        prop_assert!((direct - via_dawson).norm() <= 1e-9 * scale, "A = {}", a);
    }
}
