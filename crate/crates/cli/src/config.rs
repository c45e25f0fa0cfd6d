//! Built-in defaults, overridden by a JSON config file, overridden by flags.

use std::path::Path;

use biphoton_core::{Error, Evaluator, PhysicalParams, Result, Scheme, SpectralGridSpec};
use serde::{Deserialize, Serialize};

use crate::args::Common;

/// Every key is optional; unknown keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub lambda_s: Option<f64>,
    pub lambda_i: Option<f64>,
    pub gamma3: Option<f64>,
    #[serde(alias = "gamma3N_ratio")]
    pub gamma3n_ratio: Option<f64>,
    pub tau: Option<f64>,
    pub temperature: Option<f64>,
    pub atom_mass: Option<f64>,
    pub scheme: Option<Scheme>,
    pub grid_n: Option<usize>,
    pub range: Option<f64>,
    pub evaluator: Option<Evaluator>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Format(format!("cannot read config {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Format(format!("config {}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: PhysicalParams,
    pub grid: SpectralGridSpec,
    pub evaluator: Evaluator,
}

pub fn resolve(common: &Common) -> Result<RunConfig> {
    let file = match &common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut params = PhysicalParams::default();
    let mut grid = SpectralGridSpec::default();
    let mut evaluator = Evaluator::default();

    macro_rules! layer {
        ($target:expr, $($source:expr),+) => {
            $(if let Some(v) = $source { $target = v; })+
        };
    }
    layer!(params.lambda_s, file.lambda_s);
    layer!(params.lambda_i, file.lambda_i);
    layer!(params.gamma3, file.gamma3);
    layer!(params.atom_mass, file.atom_mass);
    layer!(params.gamma3n_ratio, file.gamma3n_ratio, common.gamma3n_ratio);
    layer!(params.tau, file.tau, common.tau);
    layer!(params.temperature, file.temperature, common.temperature);
    layer!(params.scheme, file.scheme, common.scheme.map(Scheme::from));
    layer!(grid.n_points, file.grid_n, common.grid_n);
    layer!(grid.half_range, file.range, common.range);
    layer!(evaluator, file.evaluator, common.evaluator.map(Evaluator::from));

    params.validate()?;
    grid.validate()?;
    Ok(RunConfig {
        params,
        grid,
        evaluator,
    })
}
