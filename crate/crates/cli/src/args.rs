use std::path::PathBuf;

use biphoton_core::{Evaluator, Scheme};
use biphoton_core::sweep::SweepAxis;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Doppler-broadened biphoton spectra from atomic cascades: Schmidt analysis, entropy sweeps and fits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the joint spectral amplitude and render its modulus.
    Spectrum(SpectrumArgs),
    /// Schmidt eigenvalues, entropy and leading mode functions.
    Schmidt(SchmidtArgs),
    /// Entropy across temperature, decay ratio or pulse duration.
    Sweep(SweepArgs),
    /// Fit S(R) = a(1 - exp(-beta R)) to an `R,S` CSV file.
    Fit(FitArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Co,
    Counter,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Co => Scheme::Copropagating,
            SchemeArg::Counter => Scheme::CounterPropagating,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvaluatorArg {
    Bare,
    Analytic,
    Quadrature,
}

impl From<EvaluatorArg> for Evaluator {
    fn from(e: EvaluatorArg) -> Self {
        match e {
            EvaluatorArg::Bare => Evaluator::Bare,
            EvaluatorArg::Analytic => Evaluator::Analytic,
            EvaluatorArg::Quadrature => Evaluator::Quadrature,
        }
    }
}

/// Flags shared by the computing subcommands.
#[derive(Debug, Args)]
pub struct Common {
    /// JSON file with parameter overrides.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "biphoton-out")]
    pub out: PathBuf,
    /// Samples per frequency axis.
    #[arg(long, value_name = "INT")]
    pub grid_n: Option<usize>,
    /// Half-width of the frequency window, in units of Γ₃.
    #[arg(long, value_name = "Γ₃")]
    pub range: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, value_enum)]
    pub evaluator: Option<EvaluatorArg>,
    /// Vapor temperature in kelvin.
    #[arg(long, value_name = "K")]
    pub temperature: Option<f64>,
    /// Superradiant enhancement Γ₃ᴺ/Γ₃.
    #[arg(long, value_name = "RATIO")]
    pub gamma3n_ratio: Option<f64>,
    /// Pulse duration as Γ₃τ.
    #[arg(long, value_name = "Γ₃τ")]
    pub tau: Option<f64>,
    /// Omit timestamps and durations so repeated runs are byte-identical.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also evaluate the other Doppler route and fail if the two disagree
    /// by more than 1e-6 relative to the peak.
    #[arg(long)]
    pub check_analytic: bool,
}

#[derive(Debug, Args)]
pub struct SchmidtArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of Schmidt eigenvalues to tabulate.
    #[arg(long, default_value_t = 10, value_name = "N")]
    pub modes: usize,
    /// Number of mode functions to export.
    #[arg(long, default_value_t = 3, value_name = "N")]
    pub profiles: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Asymptotic,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Parameter to sweep.
    #[arg(long, value_parser = parse_axis)]
    pub axis: SweepAxis,
    /// Comma-separated, strictly monotone values of the swept parameter.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub values: Vec<f64>,
    /// Fixed ±range entropy, or extrapolation from a fit over several ranges.
    #[arg(long, value_enum, default_value = "asymptotic")]
    pub mode: ModeArg,
    /// Half-ranges used by the asymptotic fit.
    #[arg(long, value_delimiter = ',', num_args = 1.., value_name = "R,...")]
    pub fit_ranges: Option<Vec<f64>>,
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: biphoton_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with `R,S` columns.
    pub series: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = "biphoton-out")]
    pub out: PathBuf,
    /// Omit durations so repeated runs are byte-identical.
    #[arg(long)]
    pub reproducible: bool,
}
