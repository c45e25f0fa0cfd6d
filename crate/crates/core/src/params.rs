//! Physical inputs and the dimensionless quantities derived from them.
//!
//! Every frequency downstream of [`derive`] is measured in units of the
//! intrinsic idler decay rate Γ₃ and every time in units of 1/Γ₃. Doppler
//! shifts enter as `k σ / Γ₃`, the shift produced by an atom moving at one
//! thermal velocity spread.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Mass of a ⁸⁷Rb atom, kg.
pub const RB87_MASS: f64 = 1.44316e-25;

/// Relative orientation of the signal and idler emission.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    #[serde(alias = "co")]
    Copropagating,
    #[serde(alias = "counter", alias = "counterpropagating")]
    CounterPropagating,
}

impl Scheme {
    /// Sign multiplying the idler wavenumber in the Doppler shift.
    pub fn idler_sign(self) -> f64 {
        match self {
            Scheme::Copropagating => 1.0,
            Scheme::CounterPropagating => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Copropagating => "copropagating",
            Scheme::CounterPropagating => "counter_propagating",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "co" | "copropagating" => Ok(Scheme::Copropagating),
            "counter" | "counter_propagating" | "counterpropagating" => {
                Ok(Scheme::CounterPropagating)
            }
            other => Err(Error::validation(
                "scheme",
                format!("unknown scheme {other:?} (expected co or counter)"),
            )),
        }
    }
}

/// Laboratory-unit description of the atomic cascade source.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    /// Signal (upper transition) wavelength, m.
    pub lambda_s: f64,
    /// Idler (lower transition) wavelength, m.
    pub lambda_i: f64,
    /// Intrinsic idler decay rate Γ₃, rad/s.
    pub gamma3: f64,
    /// Superradiant enhancement Γ₃ᴺ/Γ₃.
    #[serde(alias = "gamma3N_ratio")]
    pub gamma3n_ratio: f64,
    /// Pulse duration as the dimensionless product Γ₃τ.
    pub tau: f64,
    /// Vapor temperature, K.
    pub temperature: f64,
    /// Atomic mass, kg.
    pub atom_mass: f64,
    pub scheme: Scheme,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            lambda_s: 1.32e-6,
            lambda_i: 795e-9,
            gamma3: 2.0 * std::f64::consts::PI * 5.8e6,
            gamma3n_ratio: 5.0,
            tau: 0.25,
            temperature: 300.0,
            atom_mass: RB87_MASS,
            scheme: Scheme::Copropagating,
        }
    }
}

impl PhysicalParams {
    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_gamma3n_ratio(mut self, ratio: f64) -> Self {
        self.gamma3n_ratio = ratio;
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, value: f64) -> Result<()> {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::validation(
                    field,
                    format!("must be finite and strictly positive, got {value}"),
                ))
            }
        }
        positive("lambda_s", self.lambda_s)?;
        positive("lambda_i", self.lambda_i)?;
        positive("gamma3", self.gamma3)?;
        positive("tau", self.tau)?;
        positive("atom_mass", self.atom_mass)?;
        if !(self.gamma3n_ratio.is_finite() && self.gamma3n_ratio >= 1.0) {
            return Err(Error::validation(
                "gamma3n_ratio",
                format!("must be finite and >= 1, got {}", self.gamma3n_ratio),
            ));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::validation(
                "temperature",
                format!("must be finite and >= 0, got {}", self.temperature),
            ));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let params: Self = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Quantities derived from [`PhysicalParams`], in both SI and Γ₃-scaled form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivedParams {
    pub k_s: f64,
    pub k_i: f64,
    /// Thermal velocity spread √(k_B T / m), m/s.
    pub sigma: f64,
    /// Signed combined wavenumber k_s ± k_i, 1/m.
    pub kbar_si: f64,
    /// Doppler parameter k̄²/(k̄² + 4/(στ)²).
    pub b: f64,
    /// Γ₃ᴺ, rad/s.
    pub gamma3n: f64,

    pub scheme: Scheme,
    pub temperature: f64,
    /// Γ₃τ.
    pub tau: f64,
    /// Idler Lorentzian half width Γ₃ᴺ/(2Γ₃).
    pub half_width: f64,
    /// k_s σ / Γ₃.
    pub doppler_signal: f64,
    /// Signed ±k_i σ / Γ₃.
    pub doppler_idler: f64,
    /// Signed k̄ σ / Γ₃.
    pub doppler_sum: f64,
}

impl DerivedParams {
    /// True when the velocity distribution is a point mass.
    pub fn is_cold(&self) -> bool {
        self.sigma == 0.0
    }
}

pub fn derive(params: &PhysicalParams) -> Result<DerivedParams> {
    params.validate()?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let k_s = two_pi / params.lambda_s;
    let k_i = two_pi / params.lambda_i;
    let kappa_i = params.scheme.idler_sign() * k_i;
    let kbar_si = k_s + kappa_i;
    let sigma = (BOLTZMANN * params.temperature / params.atom_mass).sqrt();

    let doppler_signal = k_s * sigma / params.gamma3;
    let doppler_idler = kappa_i * sigma / params.gamma3;
    let doppler_sum = kbar_si * sigma / params.gamma3;

    // b = x²/(x² + 4) with x = k̄στ, dimensionless.
    let x = doppler_sum * params.tau;
    let b = x * x / (x * x + 4.0);

    Ok(DerivedParams {
        k_s,
        k_i,
        sigma,
        kbar_si,
        b,
        gamma3n: params.gamma3n_ratio * params.gamma3,
        scheme: params.scheme,
        temperature: params.temperature,
        tau: params.tau,
        half_width: 0.5 * params.gamma3n_ratio,
        doppler_signal,
        doppler_idler,
        doppler_sum,
    })
}
