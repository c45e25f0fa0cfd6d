//! Joint spectral amplitudes of cascade-emitted photon pairs from a thermal
//! vapor, their Schmidt decomposition and entanglement entropy.

pub mod error;
mod fmt;
pub mod params;
pub mod quadrature;
pub mod schmidt;
pub mod specfun;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
pub use fmt::format_float;
pub use num_complex::Complex64;
pub use params::{derive, DerivedParams, PhysicalParams, Scheme};
pub use spectral::{
    build_spectral_matrix, Detuning, Evaluator, SpectralGridSpec, SpectralMatrix,
};
pub use schmidt::{entropy, schmidt_decompose, EntropyValue, SchmidtDecomposition};
pub use sweep::{
    entropy_vs_range, fit_asymptote, run_sweep, AsymptoteFit, EntropySeries, SweepAxis,
    SweepMode, SweepResult,
};
