//! Schmidt decomposition of sampled joint spectral amplitudes.
//!
//! The continuum operator is discretized with the grid's trapezoid weights:
//! M = W_s^{1/2} F W_i^{1/2}. Its singular values squared approximate the
//! Schmidt eigenvalues and its singular vectors, divided by √w, the modes.

use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fmt::format_float;
use crate::spectral::{SpectralGridSpec, SpectralMatrix};

/// Eigenvalues below this are dropped.
pub const DEFAULT_THRESHOLD: f64 = 1e-12;

/// Largest grid the kernel oracle accepts.
pub const ORACLE_MAX_POINTS: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtDecomposition {
    /// Retained λₙ, nonincreasing.
    pub eigenvalues: Vec<f64>,
    /// ψₙ on the signal axis, one vector per retained eigenvalue.
    pub signal_modes: Vec<Vec<Complex64>>,
    /// φₙ on the idler axis.
    pub idler_modes: Vec<Vec<Complex64>>,
    pub grid: SpectralGridSpec,
    pub threshold: f64,
    /// Σλₙ before truncation.
    pub total: f64,
    /// Σλₙ over the discarded eigenvalues.
    pub tail_mass: f64,
}

/// Eigenvalues only, for when the modes are not needed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub eigenvalues: Vec<f64>,
    pub threshold: f64,
    pub total: f64,
    pub tail_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyValue {
    pub bits: f64,
    pub rank: usize,
    pub tail_mass: f64,
}

fn weighted(m: &SpectralMatrix) -> Result<Mat<Complex64>> {
    if !m.is_normalized() {
        return Err(Error::Contract(
            "Schmidt decomposition needs a normalized spectral matrix".into(),
        ));
    }
    let n = m.n();
    let ws: Vec<f64> = m.signal_weights().iter().map(|w| w.sqrt()).collect();
    let wi: Vec<f64> = m.idler_weights().iter().map(|w| w.sqrt()).collect();
    let f = m.amplitudes();
    Ok(Mat::from_fn(n, n, |j, k| f[j * n + k] * (ws[j] * wi[k])))
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold.is_finite() && threshold >= 0.0 {
        Ok(())
    } else {
        Err(Error::validation(
            "threshold",
            format!("must be finite and nonnegative, got {threshold}"),
        ))
    }
}

fn factorization_error(m: &Mat<Complex64>) -> Error {
    let mut finite = true;
    for j in 0..m.nrows() {
        for k in 0..m.ncols() {
            let z = m[(j, k)];
            finite &= z.re.is_finite() && z.im.is_finite();
        }
    }
    Error::Numerical(format!(
        "SVD did not converge on a {}x{} matrix (Frobenius norm {:e}, all entries finite: {finite})",
        m.nrows(),
        m.ncols(),
        m.norm_l2()
    ))
}

fn split(values: impl Iterator<Item = f64>, threshold: f64) -> (Vec<f64>, f64, f64) {
    let mut kept = Vec::new();
    let (mut total, mut tail) = (0.0, 0.0);
    for lambda in values {
        total += lambda;
        if lambda >= threshold && lambda > 0.0 {
            kept.push(lambda);
        } else {
            tail += lambda;
        }
    }
    (kept, total, tail)
}

/// Full decomposition with modes.
pub fn schmidt_decompose(m: &SpectralMatrix, threshold: f64) -> Result<SchmidtDecomposition> {
    check_threshold(threshold)?;
    let mw = weighted(m)?;
    let n = m.n();
    let svd = mw.svd().map_err(|_| factorization_error(&mw))?;
    let (u, v) = (svd.U(), svd.V());
    let (eigenvalues, total, tail_mass) = split(
        svd.S().column_vector().iter().map(|s| s.re * s.re),
        threshold,
    );

    let inv_ws: Vec<f64> = m.signal_weights().iter().map(|w| 1.0 / w.sqrt()).collect();
    let inv_wi: Vec<f64> = m.idler_weights().iter().map(|w| 1.0 / w.sqrt()).collect();
    let mut signal_modes = Vec::with_capacity(eigenvalues.len());
    let mut idler_modes = Vec::with_capacity(eigenvalues.len());
    for mode in 0..eigenvalues.len() {
        let mut psi: Vec<Complex64> = (0..n).map(|j| u[(j, mode)] * inv_ws[j]).collect();
        let mut phi: Vec<Complex64> = (0..n).map(|k| v[(k, mode)].conj() * inv_wi[k]).collect();
        // Make the signal mode's largest sample real-positive and hand the
        // opposite phase to the idler mode, so that ψₙφₙ is unchanged.
        let peak = psi[phase_anchor(&psi)];
        if peak.norm() > 0.0 {
            let phase = peak / peak.norm();
            psi.iter_mut().for_each(|z| *z *= phase.conj());
            phi.iter_mut().for_each(|z| *z *= phase);
        }
        signal_modes.push(psi);
        idler_modes.push(phi);
    }
    Ok(SchmidtDecomposition {
        eigenvalues,
        signal_modes,
        idler_modes,
        grid: *m.grid(),
        threshold,
        total,
        tail_mass,
    })
}

/// First sample whose modulus is within 1e-9 of the largest. The slack keeps
/// mirror-symmetric peaks from trading places under rounding.
pub fn phase_anchor(mode: &[Complex64]) -> usize {
    let peak = mode.iter().map(|z| z.norm()).fold(0.0, f64::max);
    mode.iter()
        .position(|z| z.norm() >= peak * (1.0 - 1e-9))
        .unwrap_or(0)
}

/// Eigenvalues only; skips accumulating singular vectors.
pub fn schmidt_spectrum(m: &SpectralMatrix, threshold: f64) -> Result<SchmidtSpectrum> {
    check_threshold(threshold)?;
    let mw = weighted(m)?;
    let mut values: Vec<f64> = mw
        .singular_values()
        .map_err(|_| factorization_error(&mw))?
        .iter()
        .map(|s| s * s)
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let (eigenvalues, total, tail_mass) = split(values.into_iter(), threshold);
    Ok(SchmidtSpectrum {
        eigenvalues,
        threshold,
        total,
        tail_mass,
    })
}

/// −Σ λ log₂ λ, with 0·log 0 = 0.
pub fn entropy_bits(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

pub fn entropy(d: &SchmidtDecomposition) -> EntropyValue {
    d.entropy()
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn entropy(&self) -> EntropyValue {
        EntropyValue {
            bits: entropy_bits(&self.eigenvalues),
            rank: self.rank(),
            tail_mass: self.tail_mass,
        }
    }

    /// 1/Σλₙ², reported as a diagnostic.
    pub fn schmidt_number(&self) -> f64 {
        1.0 / self.eigenvalues.iter().map(|l| l * l).sum::<f64>()
    }

    /// Σₙ √λₙ ψₙ(ω_s)φₙ(ω_i), row-major.
    pub fn reconstruct(&self) -> Vec<Complex64> {
        let n = self.grid.n_points;
        let mut out = vec![Complex64::new(0.0, 0.0); n * n];
        for ((lambda, psi), phi) in self
            .eigenvalues
            .iter()
            .zip(&self.signal_modes)
            .zip(&self.idler_modes)
        {
            let s = lambda.sqrt();
            for j in 0..n {
                let a = psi[j] * s;
                for k in 0..n {
                    out[j * n + k] += a * phi[k];
                }
            }
        }
        out
    }

    pub fn spectrum(&self) -> SchmidtSpectrum {
        SchmidtSpectrum {
            eigenvalues: self.eigenvalues.clone(),
            threshold: self.threshold,
            total: self.total,
            tail_mass: self.tail_mass,
        }
    }
}

impl SchmidtSpectrum {
    pub fn entropy(&self) -> EntropyValue {
        EntropyValue {
            bits: entropy_bits(&self.eigenvalues),
            rank: self.eigenvalues.len(),
            tail_mass: self.tail_mass,
        }
    }
}

/// |ψₙ|² and |φₙ|² sampled on the grid axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub index: usize,
    pub eigenvalue: f64,
    pub omega: Vec<f64>,
    pub signal: Vec<f64>,
    pub idler: Vec<f64>,
}

pub fn mode_profiles(d: &SchmidtDecomposition, n: usize) -> Result<ModeProfile> {
    if n >= d.rank() {
        return Err(Error::validation(
            "mode",
            format!("index {n} out of range for {} retained modes", d.rank()),
        ));
    }
    Ok(ModeProfile {
        index: n,
        eigenvalue: d.eigenvalues[n],
        omega: d.grid.axis(),
        signal: d.signal_modes[n].iter().map(|z| z.norm_sqr()).collect(),
        idler: d.idler_modes[n].iter().map(|z| z.norm_sqr()).collect(),
    })
}

/// Writes `omega,abs2` rows.
pub fn write_mode_csv<W: Write>(writer: W, omega: &[f64], abs2: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["omega", "abs2"])?;
    for (w, a) in omega.iter().zip(abs2) {
        out.write_record(&[format_float(*w), format_float(*a)])?;
    }
    out.flush()?;
    Ok(())
}

/// Indices of local maxima at least `min_relative` of the global maximum.
pub fn local_maxima(profile: &[f64], min_relative: f64) -> Vec<usize> {
    let peak = profile.iter().copied().fold(0.0, f64::max);
    let floor = peak * min_relative;
    let n = profile.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || profile[i] > profile[i - 1];
            let right = i + 1 == n || profile[i] >= profile[i + 1];
            left && right && profile[i] >= floor && profile[i] > 0.0
        })
        .collect()
}

/// Lower of the two tallest maxima divided by the deepest point between them.
/// `None` for single-peaked profiles.
pub fn peak_to_valley(profile: &[f64], min_relative: f64) -> Option<f64> {
    let mut peaks = local_maxima(profile, min_relative);
    if peaks.len() < 2 {
        return None;
    }
    peaks.sort_by(|&a, &b| profile[b].total_cmp(&profile[a]));
    let (a, b) = (peaks[0].min(peaks[1]), peaks[0].max(peaks[1]));
    let valley = profile[a..=b].iter().copied().fold(f64::INFINITY, f64::min);
    let lower = profile[a].min(profile[b]);
    Some(if valley > 0.0 { lower / valley } else { f64::INFINITY })
}

/// Discretized one-photon kernels and their Hermitian eigenproblems.
#[derive(Clone, Debug)]
pub struct KernelOracle {
    /// K₁(ω_s, ω_s′) = ∫ f(ω_s, ω) f*(ω_s′, ω) dω on the grid.
    pub k1: Mat<Complex64>,
    /// K₂(ω_i, ω_i′) = ∫ f(ω, ω_i) f*(ω, ω_i′) dω on the grid.
    pub k2: Mat<Complex64>,
    pub signal_eigenvalues: Vec<f64>,
    pub idler_eigenvalues: Vec<f64>,
    pub signal_modes: Vec<Vec<Complex64>>,
    pub idler_modes: Vec<Vec<Complex64>>,
}

/// Brute-force cross-check for [`schmidt_decompose`]; small grids only.
pub fn kernel_eig_oracle(m: &SpectralMatrix, n_modes: usize) -> Result<KernelOracle> {
    let n = m.n();
    if n > ORACLE_MAX_POINTS {
        return Err(Error::Contract(format!(
            "kernel oracle refuses {n}-point grids (limit {ORACLE_MAX_POINTS})"
        )));
    }
    if !m.is_normalized() {
        return Err(Error::Contract(
            "kernel oracle needs a normalized spectral matrix".into(),
        ));
    }
    let f = |j: usize, k: usize| m.get(j, k);
    let ws = m.signal_weights();
    let wi = m.idler_weights();
    let k1 = Mat::from_fn(n, n, |a, b| {
        (0..n).map(|k| f(a, k) * f(b, k).conj() * wi[k]).sum()
    });
    let k2 = Mat::from_fn(n, n, |a, b| {
        (0..n).map(|j| f(j, a) * f(j, b).conj() * ws[j]).sum()
    });
    let (signal_eigenvalues, signal_modes) = kernel_eigen(&k1, ws, n_modes)?;
    let (idler_eigenvalues, idler_modes) = kernel_eigen(&k2, wi, n_modes)?;
    Ok(KernelOracle {
        k1,
        k2,
        signal_eigenvalues,
        idler_eigenvalues,
        signal_modes,
        idler_modes,
    })
}

fn kernel_eigen(
    kernel: &Mat<Complex64>,
    weights: &[f64],
    n_modes: usize,
) -> Result<(Vec<f64>, Vec<Vec<Complex64>>)> {
    let n = kernel.nrows();
    let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    // W^{1/2} K W^{1/2} is Hermitian with the same spectrum as K W.
    let sym = Mat::from_fn(n, n, |a, b| kernel[(a, b)] * (sw[a] * sw[b]));
    let eig = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("kernel eigenproblem failed: {e:?}")))?;
    let values = eig.S().column_vector();
    let vectors = eig.U();
    // Ascending from the solver; reverse for nonincreasing order.
    let order: Vec<usize> = (0..n).rev().take(n_modes.min(n)).collect();
    let eigenvalues = order.iter().map(|&i| values[i].re).collect();
    let modes = order
        .iter()
        .map(|&i| (0..n).map(|a| vectors[(a, i)] / sw[a]).collect())
        .collect();
    Ok((eigenvalues, modes))
}
