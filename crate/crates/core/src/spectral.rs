//! Joint spectral amplitudes, bare and Doppler-averaged, and their sampling
//! onto normalized frequency grids.
//!
//! Detunings are in units of Γ₃. With u = v/σ the Doppler average reads
//!
//! ```text
//! f_D(Δs, Δi) = ∫ du e^{−u²/2}/√(2π) · f(Δs − K_s u, Δi − κ u)
//! ```
//!
//! where K_s = k_s σ/Γ₃ and κ = ±k_i σ/Γ₃ carries the propagation sign.
//! The pulse envelope of `f` and the Maxwell–Boltzmann weight combine into a
//! single Gaussian exp(−α(u − u₀)²) with α = (τ²K² + 4)/8 and K = K_s + κ;
//! what is left is a Lorentzian in u, whose Gaussian average is a Faddeeva
//! function.

use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::format_float;
use crate::params::{derive, DerivedParams, PhysicalParams};
use crate::quadrature::{gauss_hermite_adaptive, trapezoid_adaptive};
use crate::specfun::erfi_kernel;

const SQRT_TWO_PI: f64 = 2.506_628_274_631_000_7;

/// Signal and idler detunings Δω_s, Δω_i in units of Γ₃.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Detuning {
    pub dws: f64,
    pub dwi: f64,
}

impl Detuning {
    pub fn new(dws: f64, dwi: f64) -> Self {
        Self { dws, dwi }
    }

    fn check(self) -> Result<Self> {
        if self.dws.is_finite() && self.dwi.is_finite() {
            Ok(self)
        } else {
            Err(Error::validation(
                "detuning",
                format!("must be finite, got ({}, {})", self.dws, self.dwi),
            ))
        }
    }
}

/// The bare amplitude e^{−(Δs+Δi)²τ²/8} / (Γ₃ᴺ/2 − iΔi).
pub fn f_bare(d: Detuning, p: &DerivedParams) -> Result<Complex64> {
    let d = d.check()?;
    Ok(bare(d, p))
}

fn bare(d: Detuning, p: &DerivedParams) -> Complex64 {
    let s = d.dws + d.dwi;
    let envelope = (-s * s * p.tau * p.tau / 8.0).exp();
    envelope / Complex64::new(p.half_width, -d.dwi)
}

/// Pieces shared by the closed form and the Gauss–Hermite route.
struct CombinedGaussian {
    /// √α
    sqrt_alpha: f64,
    /// Centre of the combined Gaussian, thermal-velocity units.
    center: f64,
    /// e^{−τ²(1−b)(Δs+Δi)²/8}
    envelope: f64,
}

fn combined_gaussian(d: Detuning, p: &DerivedParams) -> CombinedGaussian {
    let s = d.dws + d.dwi;
    let tau2 = p.tau * p.tau;
    let x2 = tau2 * p.doppler_sum * p.doppler_sum;
    let alpha = (x2 + 4.0) / 8.0;
    CombinedGaussian {
        sqrt_alpha: alpha.sqrt(),
        center: tau2 * s * p.doppler_sum / (8.0 * alpha),
        // 1 − b = 4/(x² + 4), written out to avoid cancelling when b → 1.
        envelope: (-tau2 * s * s / (2.0 * (x2 + 4.0))).exp(),
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// The complex argument A of the closed-form Doppler amplitude.
///
/// Reduces to √(τ²/8b)·[b(k_i/k̄)Δs + (bk_i/k̄ − 1)Δi − iΓ₃ᴺ/2]/(k_i/k̄) in the
/// copropagating case; for counter-propagation k_i is replaced by the signed
/// −k_i throughout. Evaluated in a form that stays finite as b → 0.
pub fn doppler_argument(d: Detuning, p: &DerivedParams) -> Complex64 {
    let g = combined_gaussian(d, p);
    let pole = Complex64::new(d.dwi, p.half_width) / p.doppler_idler;
    sign(p.doppler_sum) * g.sqrt_alpha * (g.center - pole)
}

/// Closed-form Doppler-broadened amplitude.
pub fn f_doppler_analytic(d: Detuning, p: &DerivedParams) -> Result<Complex64> {
    let d = d.check()?;
    if p.is_cold() {
        return Ok(bare(d, p));
    }
    let g = combined_gaussian(d, p);
    let a = doppler_argument(d, p);
    // The Lorentzian pole sits in the upper half-plane of the Gaussian
    // variable after multiplying by sgn κ; pick the sign of A accordingly.
    let kernel = if sign(p.doppler_sum) == sign(p.doppler_idler) {
        erfi_kernel(a)?
    } else {
        erfi_kernel(-a)?
    };
    let prefactor = Complex64::new(0.0, -g.envelope / (SQRT_TWO_PI * p.doppler_idler.abs()));
    Ok(prefactor * kernel)
}

/// Controls for [`f_doppler_quadrature_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Relative agreement required between successive rule orders.
    pub tolerance: f64,
    /// Largest Gauss–Hermite order tried.
    pub node_budget: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            node_budget: 16384,
        }
    }
}

/// Velocity average by adaptive Gauss–Hermite quadrature over the combined
/// Gaussian weight, with default [`QuadratureOptions`].
pub fn f_doppler_quadrature(d: Detuning, p: &DerivedParams) -> Result<Complex64> {
    f_doppler_quadrature_with(d, p, &QuadratureOptions::default())
}

pub fn f_doppler_quadrature_with(
    d: Detuning,
    p: &DerivedParams,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    let d = d.check()?;
    if p.is_cold() {
        return Ok(bare(d, p));
    }
    let g = combined_gaussian(d, p);
    let base = Complex64::new(p.half_width, -d.dwi);
    let kappa = p.doppler_idler;
    let integral = gauss_hermite_adaptive(
        |t| {
            let u = g.center + t / g.sqrt_alpha;
            1.0 / (base + Complex64::new(0.0, kappa * u))
        },
        opts.tolerance,
        opts.node_budget,
    )?;
    Ok(integral * g.envelope / (SQRT_TWO_PI * g.sqrt_alpha))
}

/// Velocity average by the nested trapezoid rule on u ∈ [−window, window],
/// integrating the bare amplitude against the Maxwell–Boltzmann weight with
/// no algebraic preprocessing.
pub fn f_doppler_trapezoid(
    d: Detuning,
    p: &DerivedParams,
    window: f64,
    tolerance: f64,
) -> Result<Complex64> {
    let d = d.check()?;
    if p.is_cold() {
        return Ok(bare(d, p));
    }
    trapezoid_adaptive(
        |u| {
            let shifted = Detuning::new(d.dws - p.doppler_signal * u, d.dwi - p.doppler_idler * u);
            bare(shifted, p) * ((-0.5 * u * u).exp() / SQRT_TWO_PI)
        },
        -window,
        window,
        tolerance,
        26,
    )
}

/// Which amplitude is sampled onto a grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluator {
    Bare,
    #[default]
    Analytic,
    Quadrature,
}

impl Evaluator {
    pub fn as_str(self) -> &'static str {
        match self {
            Evaluator::Bare => "bare",
            Evaluator::Analytic => "analytic",
            Evaluator::Quadrature => "quadrature",
        }
    }

    pub fn evaluate(self, d: Detuning, p: &DerivedParams) -> Result<Complex64> {
        match self {
            Evaluator::Bare => f_bare(d, p),
            Evaluator::Analytic => f_doppler_analytic(d, p),
            Evaluator::Quadrature => f_doppler_quadrature(d, p),
        }
    }
}

impl std::str::FromStr for Evaluator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bare" => Ok(Evaluator::Bare),
            "analytic" => Ok(Evaluator::Analytic),
            "quadrature" => Ok(Evaluator::Quadrature),
            other => Err(Error::validation(
                "evaluator",
                format!("unknown evaluator {other:?} (expected bare, analytic or quadrature)"),
            )),
        }
    }
}

/// Square grid ±`half_range` (units of Γ₃) with `n_points` samples per axis,
/// endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralGridSpec {
    pub half_range: f64,
    pub n_points: usize,
}

impl Default for SpectralGridSpec {
    fn default() -> Self {
        Self {
            half_range: 150.0,
            n_points: 512,
        }
    }
}

impl SpectralGridSpec {
    pub fn new(half_range: f64, n_points: usize) -> Result<Self> {
        let spec = Self {
            half_range,
            n_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_range.is_finite() && self.half_range > 0.0) {
            return Err(Error::validation(
                "half_range",
                format!("must be finite and positive, got {}", self.half_range),
            ));
        }
        if self.n_points < 16 {
            return Err(Error::validation(
                "n_points",
                format!("must be at least 16, got {}", self.n_points),
            ));
        }
        Ok(())
    }

    /// Sample spacing.
    pub fn step(&self) -> f64 {
        2.0 * self.half_range / (self.n_points - 1) as f64
    }

    /// Samples per unit Γ₃.
    pub fn density(&self) -> f64 {
        1.0 / self.step()
    }

    /// A grid over ±`half_range` with the same sample density as `self`.
    pub fn rescaled(&self, half_range: f64) -> Result<Self> {
        let n = (2.0 * half_range * self.density()).round() as usize + 1;
        Self::new(half_range, n.max(16))
    }

    /// Exactly antisymmetric: `axis[n-1-j] == -axis[j]`.
    pub fn axis(&self) -> Vec<f64> {
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|j| self.half_range * ((2 * j) as f64 - last) / last)
            .collect()
    }

    /// Trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step();
        let mut w = vec![h; self.n_points];
        w[0] = 0.5 * h;
        w[self.n_points - 1] = 0.5 * h;
        w
    }
}

/// Second moments of |f|² under the quadrature weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntensityMoments {
    pub mean_signal: f64,
    pub mean_idler: f64,
    pub var_signal: f64,
    pub var_idler: f64,
    pub covariance: f64,
}

impl IntensityMoments {
    pub fn correlation(&self) -> f64 {
        self.covariance / (self.var_signal * self.var_idler).sqrt()
    }

    /// Variance of Δs + Δi, the direction the pulse envelope confines.
    pub fn var_sum(&self) -> f64 {
        self.var_signal + self.var_idler + 2.0 * self.covariance
    }
}

/// Amplitude sampled on a [`SpectralGridSpec`]; rows index Δω_s, columns Δω_i.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrix {
    grid: SpectralGridSpec,
    axis: Vec<f64>,
    weights: Vec<f64>,
    amplitudes: Vec<Complex64>,
    evaluator: Option<Evaluator>,
    normalized: bool,
}

impl SpectralMatrix {
    /// Wrap row-major samples. Not normalized.
    pub fn from_samples(
        grid: SpectralGridSpec,
        amplitudes: Vec<Complex64>,
        evaluator: Option<Evaluator>,
    ) -> Result<Self> {
        grid.validate()?;
        let n = grid.n_points;
        if amplitudes.len() != n * n {
            return Err(Error::Contract(format!(
                "expected {} samples for a {n}x{n} grid, got {}",
                n * n,
                amplitudes.len()
            )));
        }
        Ok(Self {
            axis: grid.axis(),
            weights: grid.weights(),
            grid,
            amplitudes,
            evaluator,
            normalized: false,
        })
    }

    /// Sample an arbitrary function of (Δs, Δi). Not normalized.
    pub fn from_fn<F>(grid: SpectralGridSpec, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        grid.validate()?;
        let axis = grid.axis();
        let amplitudes = axis
            .par_iter()
            .flat_map_iter(|&ws| axis.iter().map(move |&wi| (ws, wi)))
            .map(|(ws, wi)| f(ws, wi))
            .collect();
        Self::from_samples(grid, amplitudes, None)
    }

    pub fn grid(&self) -> &SpectralGridSpec {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n_points
    }

    pub fn signal_axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn idler_axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn signal_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn idler_weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn evaluator(&self) -> Option<Evaluator> {
        self.evaluator
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn get(&self, signal: usize, idler: usize) -> Complex64 {
        self.amplitudes[signal * self.n() + idler]
    }

    /// Σ w_j w_k |f_jk|², summed in a fixed order.
    pub fn norm_squared(&self) -> f64 {
        let n = self.n();
        let mut total = 0.0;
        for (j, row) in self.amplitudes.chunks_exact(n).enumerate() {
            let row_sum: f64 = row
                .iter()
                .zip(&self.weights)
                .map(|(f, w)| w * f.norm_sqr())
                .sum();
            total += self.weights[j] * row_sum;
        }
        total
    }

    /// Rescale to unit L² norm.
    pub fn normalized(mut self) -> Result<Self> {
        let norm2 = self.norm_squared();
        if !(norm2.is_finite() && norm2 > 0.0) {
            return Err(Error::Normalization);
        }
        let inv = 1.0 / norm2.sqrt();
        for f in &mut self.amplitudes {
            *f *= inv;
        }
        self.normalized = true;
        Ok(self)
    }

    /// |f| divided by its maximum, row-major.
    pub fn peak_normalized_modulus(&self) -> Vec<f64> {
        let peak = self.amplitudes.iter().map(|f| f.norm()).fold(0.0, f64::max);
        let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
        self.amplitudes.iter().map(|f| f.norm() * scale).collect()
    }

    pub fn intensity_moments(&self) -> IntensityMoments {
        let n = self.n();
        let (mut m0, mut ms, mut mi) = (0.0, 0.0, 0.0);
        let (mut mss, mut mii, mut msi) = (0.0, 0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                let p = self.weights[j] * self.weights[k] * self.get(j, k).norm_sqr();
                let (s, i) = (self.axis[j], self.axis[k]);
                m0 += p;
                ms += p * s;
                mi += p * i;
                mss += p * s * s;
                mii += p * i * i;
                msi += p * s * i;
            }
        }
        let (mean_signal, mean_idler) = (ms / m0, mi / m0);
        IntensityMoments {
            mean_signal,
            mean_idler,
            var_signal: mss / m0 - mean_signal * mean_signal,
            var_idler: mii / m0 - mean_idler * mean_idler,
            covariance: msi / m0 - mean_signal * mean_idler,
        }
    }

    /// CSV with header `dws,dwi,re,im,abs`, signal index outermost.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["dws", "dwi", "re", "im", "abs"])?;
        let n = self.n();
        for j in 0..n {
            for k in 0..n {
                let f = self.get(j, k);
                out.write_record(&[
                    format_float(self.axis[j]),
                    format_float(self.axis[k]),
                    format_float(f.re),
                    format_float(f.im),
                    format_float(f.norm()),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut input = csv::Reader::from_reader(reader);
        let headers = input.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["dws", "dwi", "re", "im", "abs"] {
            return Err(Error::Format(format!(
                "expected header dws,dwi,re,im,abs, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut signal = Vec::new();
        let mut idler = Vec::new();
        let mut amplitudes = Vec::new();
        for record in input.records() {
            let record = record?;
            let field = |i: usize| -> Result<f64> {
                record[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Format(format!("bad number {:?}: {e}", &record[i])))
            };
            signal.push(field(0)?);
            idler.push(field(1)?);
            amplitudes.push(Complex64::new(field(2)?, field(3)?));
        }
        let n = (amplitudes.len() as f64).sqrt().round() as usize;
        if n * n != amplitudes.len() || n < 2 {
            return Err(Error::Format(format!(
                "{} rows do not form a square grid",
                amplitudes.len()
            )));
        }
        let grid = SpectralGridSpec::new(idler[n - 1], n)?;
        let axis = grid.axis();
        for j in 0..n {
            for k in 0..n {
                let row = j * n + k;
                if signal[row] != axis[j] || idler[row] != axis[k] {
                    return Err(Error::Format(format!(
                        "row {row}: ({}, {}) is not on the ±{} grid of {n} points",
                        signal[row], idler[row], grid.half_range
                    )));
                }
            }
        }
        let mut m = Self::from_samples(grid, amplitudes, None)?;
        m.normalized = (m.norm_squared() - 1.0).abs() <= 1e-12;
        Ok(m)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        let doc = MatrixDocument {
            grid: self.grid,
            evaluator: self.evaluator,
            normalized: self.normalized,
            amplitudes: self.amplitudes.iter().map(|f| [f.re, f.im]).collect(),
        };
        serde_json::to_writer(writer, &doc)?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let doc: MatrixDocument = serde_json::from_reader(reader)?;
        let amplitudes = doc
            .amplitudes
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let mut m = Self::from_samples(doc.grid, amplitudes, doc.evaluator)?;
        m.normalized = doc.normalized;
        Ok(m)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDocument {
    grid: SpectralGridSpec,
    evaluator: Option<Evaluator>,
    normalized: bool,
    amplitudes: Vec<[f64; 2]>,
}

/// Sample `evaluator` on `grid` and normalize.
pub fn build_spectral_matrix(
    params: &PhysicalParams,
    grid: &SpectralGridSpec,
    evaluator: Evaluator,
) -> Result<SpectralMatrix> {
    let derived = derive(params)?;
    build_from_derived(&derived, grid, evaluator)
}

pub fn build_from_derived(
    derived: &DerivedParams,
    grid: &SpectralGridSpec,
    evaluator: Evaluator,
) -> Result<SpectralMatrix> {
    grid.validate()?;
    let axis = grid.axis();
    let amplitudes = axis
        .par_iter()
        .flat_map_iter(|&ws| axis.iter().map(move |&wi| Detuning::new(ws, wi)))
        .map(|d| evaluator.evaluate(d, derived))
        .collect::<Result<Vec<_>>>()?;
    SpectralMatrix::from_samples(*grid, amplitudes, Some(evaluator))?.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Scheme;

    fn defaults() -> DerivedParams {
        derive(&PhysicalParams::default()).unwrap()
    }

    #[test]
    fn bare_at_origin() {
        let f = f_bare(Detuning::new(0.0, 0.0), &defaults()).unwrap();
        assert!((f.norm() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn bare_on_energy_ridge_is_lorentzian() {
        let p = defaults();
        for dwi in [-40.0, -3.0, 0.5, 2.5, 17.0] {
            let f = f_bare(Detuning::new(-dwi, dwi), &p).unwrap();
            let expected = 1.0 / (2.5_f64 * 2.5 + dwi * dwi).sqrt();
            assert!((f.norm() - expected).abs() < 1e-15 * expected);
        }
    }

    #[test]
    fn bare_off_ridge_value() {
        let f = f_bare(Detuning::new(10.0, 10.0), &defaults()).unwrap();
        let expected = (-3.125_f64).exp() / (2.5_f64 * 2.5 + 100.0).sqrt();
        assert!((f.norm() - expected).abs() < 1e-15);
        assert!((f.norm() - 4.264e-3).abs() < 2e-6);
    }

    #[test]
    fn bare_rejects_non_finite_detuning() {
        assert!(f_bare(Detuning::new(f64::NAN, 0.0), &defaults()).is_err());
    }

    #[test]
    fn cold_limit_delegates_to_bare() {
        let p = derive(&PhysicalParams::default().with_temperature(0.0)).unwrap();
        for (s, i) in [(0.0, 0.0), (3.0, -7.0), (120.0, 40.0)] {
            let d = Detuning::new(s, i);
            let bare = f_bare(d, &p).unwrap();
            assert_eq!(f_doppler_analytic(d, &p).unwrap(), bare);
            assert_eq!(f_doppler_quadrature(d, &p).unwrap(), bare);
            assert_eq!(f_doppler_trapezoid(d, &p, 8.0, 1e-9).unwrap(), bare);
        }
    }

    #[test]
    fn doppler_argument_has_negative_imaginary_part() {
        for scheme in [Scheme::Copropagating, Scheme::CounterPropagating] {
            let p = derive(&PhysicalParams::default().with_scheme(scheme)).unwrap();
            for (s, i) in [(0.0, 0.0), (-150.0, 150.0), (80.0, 12.0)] {
                assert!(doppler_argument(Detuning::new(s, i), &p).im < 0.0);
            }
        }
    }

    #[test]
    fn doppler_argument_matches_textbook_form_when_copropagating() {
        let p = defaults();
        let d = Detuning::new(13.0, -4.0);
        let ratio = p.k_i / p.kbar_si;
        let bracket = Complex64::new(
            p.b * ratio * d.dws + (p.b * ratio - 1.0) * d.dwi,
            -p.half_width,
        );
        let textbook = (p.tau * p.tau / (8.0 * p.b)).sqrt() * bracket / ratio;
        // A is dimensionless; the textbook form carries τ in 1/Γ₃ and k̄ in
        // thermal units, so compare after the common σ/Γ₃ scaling.
        let a = doppler_argument(d, &p);
        let scale = p.doppler_sum / p.kbar_si;
        let textbook = textbook * (p.kbar_si * scale).signum();
        assert!((a - textbook).norm() < 1e-12 * a.norm(), "{a} vs {textbook}");
    }

    #[test]
    fn grid_axis_and_weights() {
        let g = SpectralGridSpec::new(1.5, 16).unwrap();
        let axis = g.axis();
        assert_eq!(axis[0], -1.5);
        assert_eq!(axis[15], 1.5);
        let odd = SpectralGridSpec::new(150.0, 513).unwrap().axis();
        assert_eq!(odd[256], 0.0);
        assert!((0..513).all(|j| odd[512 - j] == -odd[j]));
        let w: f64 = g.weights().iter().sum();
        assert!((w - 3.0).abs() < 1e-15);
        assert!(SpectralGridSpec::new(1.0, 15).is_err());
        assert!(SpectralGridSpec::new(0.0, 32).is_err());
    }

    #[test]
    fn rescaled_grid_keeps_density() {
        let g = SpectralGridSpec::default();
        let half = g.rescaled(75.0).unwrap();
        assert_eq!(half.n_points, 257);
        assert!((half.density() - g.density()).abs() / g.density() < 5e-3);
    }

    #[test]
    fn normalization_is_unit() {
        let g = SpectralGridSpec::new(30.0, 64).unwrap();
        for evaluator in [Evaluator::Bare, Evaluator::Analytic] {
            let m = build_spectral_matrix(&PhysicalParams::default(), &g, evaluator).unwrap();
            assert!(m.is_normalized());
            assert!((m.norm_squared() - 1.0).abs() < 1e-12);
            assert_eq!(m.evaluator(), Some(evaluator));
        }
    }

    #[test]
    fn zero_amplitude_cannot_be_normalized() {
        let g = SpectralGridSpec::new(1.0, 16).unwrap();
        let m = SpectralMatrix::from_fn(g, |_, _| Complex64::new(0.0, 0.0)).unwrap();
        assert!(matches!(m.normalized(), Err(Error::Normalization)));
    }

    #[test]
    fn bare_ridge_maximum_per_row() {
        let g = SpectralGridSpec::new(20.0, 81).unwrap();
        let p = defaults();
        let m = SpectralMatrix::from_fn(g, |s, i| bare(Detuning::new(s, i), &p)).unwrap();
        let axis = m.signal_axis();
        // For every idler column the Gaussian factor peaks at Δs = −Δi.
        for k in 0..m.n() {
            let best = (0..m.n())
                .max_by(|&a, &b| m.get(a, k).norm().total_cmp(&m.get(b, k).norm()))
                .unwrap();
            assert_eq!(axis[best], -axis[k]);
        }
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = SpectralGridSpec::new(12.5, 17).unwrap();
        let m = build_spectral_matrix(&PhysicalParams::default(), &g, Evaluator::Analytic).unwrap();

        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dws,dwi,re,im,abs\n"));
        let back = SpectralMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.amplitudes(), m.amplitudes());
        assert!(back.is_normalized());

        let mut buf = Vec::new();
        m.write_json(&mut buf).unwrap();
        let back = SpectralMatrix::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn csv_reader_rejects_off_grid_points() {
        let text = "dws,dwi,re,im,abs\n0,0,1,0,1\n0,1,1,0,1\n1,0,1,0,1\n1,2,1,0,1\n";
        assert!(SpectralMatrix::read_csv(text.as_bytes()).is_err());
        let text = "a,b\n1,2\n";
        assert!(matches!(
            SpectralMatrix::read_csv(text.as_bytes()),
            Err(Error::Format(_))
        ));
    }
}
