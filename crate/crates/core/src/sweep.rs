//! Parameter sweeps, entropy versus spectral range, and extrapolation of
//! S(R) = a(1 − e^{−βR}) to infinite range.

use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::fmt::format_float;
use crate::params::PhysicalParams;
use crate::schmidt::{schmidt_spectrum, DEFAULT_THRESHOLD};
use crate::spectral::{build_spectral_matrix, Evaluator, SpectralGridSpec};

/// Half-ranges (Γ₃ units) fitted by default.
pub const DEFAULT_FIT_RANGES: [f64; 6] = [25.0, 50.0, 75.0, 100.0, 125.0, 150.0];

/// Half-range used when a single fixed-range entropy is wanted.
pub const FIXED_RANGE: f64 = 150.0;

/// Relative 95% half-width on `a` above which a fit is flagged.
pub const CI_WARNING_THRESHOLD: f64 = 0.10;

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

/// (R, S) pairs with strictly increasing R.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySeries {
    pub ranges: Vec<f64>,
    pub entropies: Vec<f64>,
    /// Parameters the series was computed for, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PhysicalParams>,
}

impl EntropySeries {
    pub fn new(ranges: Vec<f64>, entropies: Vec<f64>) -> Result<Self> {
        if ranges.len() != entropies.len() {
            return Err(Error::validation(
                "series",
                format!("{} ranges but {} entropies", ranges.len(), entropies.len()),
            ));
        }
        if let Some(r) = ranges.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::validation(
                "series",
                format!("range {r} is not finite and positive"),
            ));
        }
        if ranges.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "series",
                "ranges must be strictly increasing",
            ));
        }
        if let Some(s) = entropies.iter().find(|s| !(s.is_finite() && **s >= 0.0)) {
            return Err(Error::validation(
                "series",
                format!("entropy {s} is not finite and nonnegative"),
            ));
        }
        Ok(Self {
            ranges,
            entropies,
            params: None,
        })
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// CSV with header `R,S`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["R", "S"])?;
        for (r, s) in self.ranges.iter().zip(&self.entropies) {
            out.write_record(&[format_float(*r), format_float(*s)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut input = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = input.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Format(format!("missing column {name:?}")))
        };
        let (ri, si) = (col("R")?, col("S")?);
        let mut ranges = Vec::new();
        let mut entropies = Vec::new();
        for record in input.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                let field = record.get(i).unwrap_or("");
                field
                    .parse()
                    .map_err(|e| Error::Format(format!("bad number {field:?}: {e}")))
            };
            ranges.push(parse(ri)?);
            entropies.push(parse(si)?);
        }
        Self::new(ranges, entropies)
    }
}

/// Entropy on ±R for each R, keeping the sample density of `reference`.
pub fn entropy_vs_range(
    params: &PhysicalParams,
    ranges: &[f64],
    reference: &SpectralGridSpec,
    evaluator: Evaluator,
) -> Result<EntropySeries> {
    if ranges.is_empty() {
        return Err(Error::validation("ranges", "no ranges given"));
    }
    let mut entropies = Vec::with_capacity(ranges.len());
    for &r in ranges {
        let s = range_entropy(params, r, reference, evaluator).map_err(|e| e.at("R", r))?;
        entropies.push(s);
    }
    let mut series = EntropySeries::new(ranges.to_vec(), entropies)?;
    series.params = Some(*params);
    Ok(series)
}

fn range_entropy(
    params: &PhysicalParams,
    range: f64,
    reference: &SpectralGridSpec,
    evaluator: Evaluator,
) -> Result<f64> {
    let grid = reference.rescaled(range)?;
    let m = build_spectral_matrix(params, &grid, evaluator)?;
    Ok(schmidt_spectrum(&m, DEFAULT_THRESHOLD)?.entropy().bits)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoteFit {
    /// Infinite-range entropy, bits.
    pub a: f64,
    /// Convergence rate, per Γ₃ of half-range.
    pub beta: f64,
    pub a_ci95: f64,
    pub beta_ci95: f64,
    /// √(Σ residual²).
    pub residual_norm: f64,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn model(a: f64, beta: f64, r: f64) -> f64 {
    a * (1.0 - (-beta * r).exp())
}

fn sse(series: &EntropySeries, a: f64, beta: f64) -> f64 {
    series
        .ranges
        .iter()
        .zip(&series.entropies)
        .map(|(&r, &s)| (s - model(a, beta, r)).powi(2))
        .sum()
}

/// JᵀJ and Jᵀr for the residual r = S − model.
fn normal_equations(series: &EntropySeries, a: f64, beta: f64) -> ([[f64; 2]; 2], [f64; 2]) {
    let mut jtj = [[0.0; 2]; 2];
    let mut jtr = [0.0; 2];
    for (&r, &s) in series.ranges.iter().zip(&series.entropies) {
        let e = (-beta * r).exp();
        let j = [1.0 - e, a * r * e];
        let res = s - model(a, beta, r);
        for p in 0..2 {
            jtr[p] += j[p] * res;
            for q in 0..2 {
                jtj[p][q] += j[p] * j[q];
            }
        }
    }
    (jtj, jtr)
}

fn solve2(m: [[f64; 2]; 2], v: [f64; 2]) -> Option<[f64; 2]> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let scale = m[0][0].abs() * m[1][1].abs();
    if !(det.is_finite() && det.abs() > 1e-14 * scale && scale > 0.0) {
        return None;
    }
    Some([
        (v[0] * m[1][1] - m[0][1] * v[1]) / det,
        (m[0][0] * v[1] - m[1][0] * v[0]) / det,
    ])
}

fn initial_guess(series: &EntropySeries) -> (f64, f64) {
    let a0 = series.entropies.iter().copied().fold(0.0, f64::max);
    let (r1, r2) = (series.ranges[0], series.ranges[1]);
    let (s1, s2) = (series.entropies[0], series.entropies[1]);
    let beta0 = ((a0 - s1) / (a0 - s2)).ln() / (r2 - r1);
    if beta0.is_finite() && beta0 > 0.0 {
        (a0, beta0)
    } else {
        let mid = series.ranges[series.len() / 2];
        (a0, 1.0 / mid)
    }
}

/// Least-squares fit of S(R) = a(1 − e^{−βR}) by Levenberg–Marquardt.
pub fn fit_asymptote(series: &EntropySeries) -> Result<AsymptoteFit> {
    let n = series.len();
    if n < 4 {
        return Err(Error::validation(
            "series",
            format!("the fit needs at least 4 points, got {n}"),
        ));
    }
    let lo = series.entropies.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = series.entropies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
        return Err(Error::Fit {
            iterations: 0,
            reason: "rank deficient: the series is flat".into(),
            trace: Vec::new(),
        });
    }

    let (mut a, mut beta) = initial_guess(series);
    let mut cost = sse(series, a, beta);
    let mut damping = 1e-3;
    let mut trace = vec![[a, beta]];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(series, a, beta);
        let mut accepted = false;
        while damping < 1e20 {
            let damped = [
                [jtj[0][0] * (1.0 + damping), jtj[0][1]],
                [jtj[1][0], jtj[1][1] * (1.0 + damping)],
            ];
            let Some(step) = solve2(damped, jtr) else {
                damping *= 10.0;
                continue;
            };
            let small = step[0].abs() <= STEP_TOLERANCE * a.abs().max(f64::MIN_POSITIVE)
                && step[1].abs() <= STEP_TOLERANCE * beta.abs();
            let (na, nb) = (a + step[0], beta + step[1]);
            let new_cost = if nb > 0.0 { sse(series, na, nb) } else { f64::INFINITY };
            if new_cost <= cost {
                a = na;
                beta = nb;
                cost = new_cost;
                damping = (damping / 10.0).max(1e-12);
                accepted = true;
                converged = small;
                break;
            }
            if small {
                // Rounding noise rejected a step that is already below tolerance.
                converged = true;
                break;
            }
            damping *= 10.0;
        }
        trace.push([a, beta]);
        if converged {
            break;
        }
        if !accepted {
            return Err(Error::Fit {
                iterations,
                reason: "no descent direction found; damping exhausted".into(),
                trace,
            });
        }
    }
    if !converged {
        return Err(Error::Fit {
            iterations,
            reason: format!("no convergence in {MAX_ITERATIONS} iterations"),
            trace,
        });
    }
    if !(a > 0.0 && beta > 0.0) {
        return Err(Error::Fit {
            iterations,
            reason: format!("fit left the admissible region (a = {a}, beta = {beta})"),
            trace,
        });
    }

    let (jtj, _) = normal_equations(series, a, beta);
    let det = jtj[0][0] * jtj[1][1] - jtj[0][1] * jtj[1][0];
    if !(det.is_finite() && det > 0.0) {
        return Err(Error::Fit {
            iterations,
            reason: "rank deficient: singular normal matrix at the solution".into(),
            trace,
        });
    }
    let dof = (n - 2) as f64;
    let variance = cost / dof;
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Numerical(format!("t distribution: {e}")))?
        .inverse_cdf(0.975);
    let a_ci95 = t * (variance * jtj[1][1] / det).sqrt();
    let beta_ci95 = t * (variance * jtj[0][0] / det).sqrt();
    let warning = (a_ci95 > CI_WARNING_THRESHOLD * a).then(|| {
        format!(
            "95% half-width on a is {:.1}% of a; the extrapolation is poorly constrained",
            100.0 * a_ci95 / a
        )
    });
    Ok(AsymptoteFit {
        a,
        beta,
        a_ci95,
        beta_ci95,
        residual_norm: cost.sqrt(),
        iterations,
        warning,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Temperature,
    #[serde(rename = "gamma3N_ratio", alias = "gamma3n_ratio")]
    Gamma3nRatio,
    Tau,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::Temperature => "temperature",
            SweepAxis::Gamma3nRatio => "gamma3N_ratio",
            SweepAxis::Tau => "tau",
        }
    }

    pub fn apply(self, base: &PhysicalParams, value: f64) -> PhysicalParams {
        match self {
            SweepAxis::Temperature => base.with_temperature(value),
            SweepAxis::Gamma3nRatio => base.with_gamma3n_ratio(value),
            SweepAxis::Tau => base.with_tau(value),
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "temperature" | "T" => Ok(SweepAxis::Temperature),
            "gamma3N_ratio" | "gamma3n_ratio" | "gamma" => Ok(SweepAxis::Gamma3nRatio),
            "tau" => Ok(SweepAxis::Tau),
            other => Err(Error::validation(
                "axis",
                format!("unknown axis {other:?} (expected temperature, gamma3N_ratio or tau)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SweepMode {
    /// Entropy on a single ±`range` grid.
    FixedRange { range: f64 },
    /// Entropy extrapolated from a fit over `ranges`.
    Asymptotic { ranges: Vec<f64> },
}

impl SweepMode {
    pub fn fixed() -> Self {
        SweepMode::FixedRange { range: FIXED_RANGE }
    }

    pub fn asymptotic() -> Self {
        SweepMode::Asymptotic {
            ranges: DEFAULT_FIT_RANGES.to_vec(),
        }
    }

    fn largest_range(&self) -> f64 {
        match self {
            SweepMode::FixedRange { range } => *range,
            SweepMode::Asymptotic { ranges } => ranges.iter().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    /// Entropy on the largest grid computed for this point.
    pub entropy: Option<f64>,
    pub fit: Option<AsymptoteFit>,
    pub series: Option<EntropySeries>,
    pub grid_n: usize,
    pub range: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    /// The figure of merit: fitted `a` in asymptotic mode, S otherwise.
    pub fn value(&self) -> Option<f64> {
        match &self.fit {
            Some(fit) => Some(fit.a),
            None if self.series.is_none() => self.entropy,
            None => None,
        }
    }

    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub mode: SweepMode,
    pub evaluator: Evaluator,
    /// Grid whose sample density every point uses.
    pub reference_grid: SpectralGridSpec,
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failed()).count()
    }

    pub fn values(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(SweepRow::value).collect()
    }

    /// CSV with columns `axis_value,S,a,beta,a_ci95,beta_ci95,grid_n,range`.
    /// Fields that do not apply, or that a failed point could not produce,
    /// are left empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record([
            "axis_value",
            "S",
            "a",
            "beta",
            "a_ci95",
            "beta_ci95",
            "grid_n",
            "range",
        ])?;
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        for row in &self.rows {
            let fit = row.fit.as_ref();
            out.write_record(&[
                format_float(row.axis_value),
                opt(row.entropy),
                opt(fit.map(|f| f.a)),
                opt(fit.map(|f| f.beta)),
                opt(fit.map(|f| f.a_ci95)),
                opt(fit.map(|f| f.beta_ci95)),
                row.grid_n.to_string(),
                format_float(row.range),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn check_values(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::validation("values", "no sweep values given"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("values", "sweep values must be finite"));
    }
    let up = values.windows(2).all(|w| w[1] > w[0]);
    let down = values.windows(2).all(|w| w[1] < w[0]);
    if !(up || down) {
        return Err(Error::validation(
            "values",
            "sweep values must be strictly monotone",
        ));
    }
    Ok(())
}

fn check_mode(mode: &SweepMode) -> Result<()> {
    match mode {
        SweepMode::FixedRange { range } if !(range.is_finite() && *range > 0.0) => Err(
            Error::validation("range", format!("must be finite and positive, got {range}")),
        ),
        SweepMode::Asymptotic { ranges } => {
            if ranges.len() < 4 {
                return Err(Error::validation(
                    "fit_ranges",
                    format!("the fit needs at least 4 ranges, got {}", ranges.len()),
                ));
            }
            if ranges.iter().any(|r| !(r.is_finite() && *r > 0.0))
                || ranges.windows(2).any(|w| w[1] <= w[0])
            {
                return Err(Error::validation(
                    "fit_ranges",
                    "ranges must be positive and strictly increasing",
                ));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn sweep_point(
    axis: SweepAxis,
    value: f64,
    base: &PhysicalParams,
    mode: &SweepMode,
    reference: &SpectralGridSpec,
    evaluator: Evaluator,
) -> SweepRow {
    let range = mode.largest_range();
    let grid_n = reference.rescaled(range).map(|g| g.n_points).unwrap_or(0);
    let mut row = SweepRow {
        axis_value: value,
        entropy: None,
        fit: None,
        series: None,
        grid_n,
        range,
        error: None,
    };
    let params = axis.apply(base, value);
    let outcome = params.validate().and_then(|()| match mode {
        SweepMode::FixedRange { range } => {
            row.entropy = Some(range_entropy(&params, *range, reference, evaluator)?);
            Ok(())
        }
        SweepMode::Asymptotic { ranges } => {
            let series = entropy_vs_range(&params, ranges, reference, evaluator)?;
            row.entropy = series.entropies.last().copied();
            let fit = fit_asymptote(&series);
            row.series = Some(series);
            row.fit = Some(fit?);
            Ok(())
        }
    });
    if let Err(e) = outcome {
        row.error = Some(e.at(axis.as_str(), value).to_string());
    }
    row
}

/// Entropy (fixed range or extrapolated) at each swept value. Points run in
/// parallel; failures are recorded per row and do not stop the sweep.
pub fn run_sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &PhysicalParams,
    mode: &SweepMode,
    reference: &SpectralGridSpec,
    evaluator: Evaluator,
) -> Result<SweepResult> {
    check_values(values)?;
    check_mode(mode)?;
    reference.validate()?;
    let started = Instant::now();
    let rows = values
        .par_iter()
        .map(|&v| sweep_point(axis, v, base, mode, reference, evaluator))
        .collect();
    Ok(SweepResult {
        axis,
        mode: mode.clone(),
        evaluator,
        reference_grid: *reference,
        rows,
        runtime_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Coefficient of determination of the least-squares line through (x, y).
pub fn linear_r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}
