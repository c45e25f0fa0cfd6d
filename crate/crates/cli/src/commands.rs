use std::fmt;
use std::fs::File;

use biphoton_core::schmidt::{mode_profiles, write_mode_csv, DEFAULT_THRESHOLD};
use biphoton_core::sweep::{SweepMode, DEFAULT_FIT_RANGES};
use biphoton_core::{
    build_spectral_matrix, fit_asymptote, run_sweep, schmidt_decompose, Complex64,
    EntropySeries, Error, Evaluator, SpectralMatrix,
};
use serde::Serialize;

use crate::args::{FitArgs, ModeArg, SchmidtArgs, SpectrumArgs, SweepArgs};
use crate::config::resolve;
use crate::output::OutputDir;
use crate::svg;

pub const CHECK_TOLERANCE: f64 = 1e-6;

#[derive(Debug)]
pub enum Failure {
    Core(Error),
    /// Some sweep rows failed; the rest were written.
    PartialSweep { failed: usize, total: usize },
    /// `--check-analytic` found the two Doppler routes disagreeing.
    CheckFailed { difference: f64 },
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_input_error() => 2,
            Failure::Core(e) if matches!(e.root(), Error::Fit { .. }) => 5,
            Failure::Core(_) => 3,
            Failure::PartialSweep { .. } => 4,
            Failure::CheckFailed { .. } => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::PartialSweep { failed, total } => {
                write!(f, "{failed} of {total} sweep points failed; see the error fields in sweep.json")
            }
            Failure::CheckFailed { difference } => write!(
                f,
                "analytic and quadrature amplitudes differ by {difference:.3e} relative to the peak \
                 (tolerance {CHECK_TOLERANCE:e})"
            ),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

type Outcome = Result<(), Failure>;

const SIGNAL_LABEL: &str = "Δω_s / Γ₃";
const IDLER_LABEL: &str = "Δω_i / Γ₃";

#[derive(Serialize)]
struct CheckReport {
    reference: Evaluator,
    max_relative_difference: f64,
    tolerance: f64,
    passed: bool,
}

fn max_relative_difference(a: &SpectralMatrix, b: &SpectralMatrix) -> f64 {
    let peak = a.amplitudes().iter().map(|f| f.norm()).fold(0.0, f64::max);
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm() / peak)
        .fold(0.0, f64::max)
}

pub fn spectrum(args: SpectrumArgs) -> Outcome {
    let cfg = resolve(&args.common)?;
    let mut out = OutputDir::create(&args.common.out, args.common.reproducible)?;
    let m = build_spectral_matrix(&cfg.params, &cfg.grid, cfg.evaluator)?;
    out.write("spectrum.csv", |w| m.write_csv(w))?;
    out.write("spectrum.json", |w| m.write_json(w))?;
    let title = format!(
        "|f| ({}, {}, T = {} K)",
        cfg.params.scheme.as_str(),
        cfg.evaluator.as_str(),
        cfg.params.temperature
    );
    let stamp = out.stamp();
    out.write_text(
        "spectrum.svg",
        &svg::heatmap(
            &m.peak_normalized_modulus(),
            m.n(),
            cfg.grid.half_range,
            &title,
            SIGNAL_LABEL,
            IDLER_LABEL,
            stamp.as_deref(),
        ),
    )?;

    let moments = m.intensity_moments();
    println!(
        "{} x {} grid over ±{} Γ₃; |f|² correlation {:.4}",
        m.n(),
        m.n(),
        cfg.grid.half_range,
        moments.correlation()
    );

    let mut failure = None;
    if args.check_analytic {
        let reference = match cfg.evaluator {
            Evaluator::Quadrature => Evaluator::Analytic,
            Evaluator::Analytic => Evaluator::Quadrature,
            Evaluator::Bare => {
                return Err(Error::Contract(
                    "--check-analytic compares the Doppler routes; choose --evaluator analytic or quadrature"
                        .into(),
                )
                .into())
            }
        };
        let other = build_spectral_matrix(&cfg.params, &cfg.grid, reference)?;
        let difference = max_relative_difference(&m, &other);
        let passed = difference <= CHECK_TOLERANCE;
        out.write_json(
            "check.json",
            &CheckReport {
                reference,
                max_relative_difference: difference,
                tolerance: CHECK_TOLERANCE,
                passed,
            },
        )?;
        println!(
            "check against {}: max relative difference {difference:.3e} ({})",
            reference.as_str(),
            if passed { "ok" } else { "FAILED" }
        );
        if !passed {
            failure = Some(Failure::CheckFailed { difference });
        }
    }
    out.finish(Some(cfg.params), Some(cfg.grid), Some(cfg.evaluator))?;
    failure.map_or(Ok(()), Err)
}

#[derive(Serialize)]
struct ModeRecord {
    index: usize,
    eigenvalue: f64,
    signal: Vec<Complex64>,
    idler: Vec<Complex64>,
    signal_abs2: Vec<f64>,
    idler_abs2: Vec<f64>,
}

#[derive(Serialize)]
struct SchmidtReport {
    entropy_bits: f64,
    rank: usize,
    tail_mass: f64,
    eigenvalue_sum: f64,
    schmidt_number: f64,
    threshold: f64,
    eigenvalues: Vec<f64>,
    omega: Vec<f64>,
    modes: Vec<ModeRecord>,
}

pub fn schmidt(args: SchmidtArgs) -> Outcome {
    let cfg = resolve(&args.common)?;
    let mut out = OutputDir::create(&args.common.out, args.common.reproducible)?;
    let m = build_spectral_matrix(&cfg.params, &cfg.grid, cfg.evaluator)?;
    let d = schmidt_decompose(&m, DEFAULT_THRESHOLD)?;
    let entropy = d.entropy();
    let shown: Vec<f64> = d.eigenvalues.iter().take(args.modes).copied().collect();

    out.write("eigenvalues.csv", |w| {
        use std::io::Write;
        writeln!(w, "n,lambda")?;
        for (i, l) in shown.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, biphoton_core::format_float(*l))?;
        }
        Ok(())
    })?;

    let n_profiles = args.profiles.min(d.rank());
    let mut modes = Vec::with_capacity(n_profiles);
    for n in 0..n_profiles {
        let p = mode_profiles(&d, n)?;
        out.write(&format!("mode_{n}_signal.csv"), |w| write_mode_csv(w, &p.omega, &p.signal))?;
        out.write(&format!("mode_{n}_idler.csv"), |w| write_mode_csv(w, &p.omega, &p.idler))?;
        modes.push(ModeRecord {
            index: n,
            eigenvalue: p.eigenvalue,
            signal: d.signal_modes[n].clone(),
            idler: d.idler_modes[n].clone(),
            signal_abs2: p.signal,
            idler_abs2: p.idler,
        });
    }
    let omega = cfg.grid.axis();
    let stamp = out.stamp();
    out.write_text(
        "eigenvalues.svg",
        &svg::bar_chart(
            &shown,
            &format!("Schmidt eigenvalues, S = {:.4} bits", entropy.bits),
            "n",
            "λₙ",
            stamp.as_deref(),
        ),
    )?;
    for (side, label) in [("signal", SIGNAL_LABEL), ("idler", IDLER_LABEL)] {
        let series: Vec<svg::Series<'_>> = modes
            .iter()
            .map(|r| svg::Series {
                label: format!("n = {}", r.index),
                x: &omega,
                y: if side == "signal" { &r.signal_abs2 } else { &r.idler_abs2 },
            })
            .collect();
        out.write_text(
            &format!("modes_{side}.svg"),
            &svg::line_plot(
                &series,
                &format!("{side} mode intensities"),
                label,
                "|mode|²",
                stamp.as_deref(),
            ),
        )?;
    }
    out.write_json(
        "schmidt.json",
        &SchmidtReport {
            entropy_bits: entropy.bits,
            rank: entropy.rank,
            tail_mass: entropy.tail_mass,
            eigenvalue_sum: d.total,
            schmidt_number: d.schmidt_number(),
            threshold: d.threshold,
            eigenvalues: shown.clone(),
            omega: omega.clone(),
            modes,
        },
    )?;

    println!("S = {:.6} bits (rank {}, K = {:.4})", entropy.bits, entropy.rank, d.schmidt_number());
    for (i, l) in shown.iter().enumerate() {
        println!("λ{} = {l:.6e}", i + 1);
    }
    out.finish(Some(cfg.params), Some(cfg.grid), Some(cfg.evaluator))?;
    Ok(())
}

pub fn sweep(args: SweepArgs) -> Outcome {
    let cfg = resolve(&args.common)?;
    let mode = match args.mode {
        ModeArg::Fixed => SweepMode::FixedRange {
            range: cfg.grid.half_range,
        },
        ModeArg::Asymptotic => SweepMode::Asymptotic {
            ranges: args
                .fit_ranges
                .clone()
                .unwrap_or_else(|| DEFAULT_FIT_RANGES.to_vec()),
        },
    };
    let mut out = OutputDir::create(&args.common.out, args.common.reproducible)?;
    let result = run_sweep(args.axis, &args.values, &cfg.params, &mode, &cfg.grid, cfg.evaluator)?;
    out.write("sweep.csv", |w| result.write_csv(w))?;
    out.write_json("sweep.json", &result)?;

    let x: Vec<f64> = result.rows.iter().map(|r| r.axis_value).collect();
    let y = result.values();
    let err: Vec<Option<f64>> = result
        .rows
        .iter()
        .map(|r| r.fit.as_ref().map(|f| f.a_ci95))
        .collect();
    let (what, y_label) = match mode {
        SweepMode::FixedRange { range } => (format!("S on ±{range} Γ₃"), "S (bits)"),
        SweepMode::Asymptotic { .. } => ("asymptotic S, 95% CI".to_string(), "a (bits)"),
    };
    let stamp = out.stamp();
    out.write_text(
        "sweep.svg",
        &svg::error_bar_plot(
            &x,
            &y,
            &err,
            &format!("{what} vs {}", result.axis.as_str()),
            result.axis.as_str(),
            y_label,
            stamp.as_deref(),
        ),
    )?;

    for row in &result.rows {
        match (&row.error, row.value()) {
            (Some(e), _) => eprintln!("{} = {}: {e}", result.axis.as_str(), row.axis_value),
            (None, Some(v)) => {
                let ci = row
                    .fit
                    .as_ref()
                    .map(|f| format!(" ± {:.4}", f.a_ci95))
                    .unwrap_or_default();
                println!("{} = {}: {v:.6}{ci}", result.axis.as_str(), row.axis_value);
                if let Some(w) = row.fit.as_ref().and_then(|f| f.warning.as_ref()) {
                    eprintln!("warning at {} = {}: {w}", result.axis.as_str(), row.axis_value);
                }
            }
            (None, None) => {}
        }
    }
    out.finish(Some(cfg.params), Some(cfg.grid), Some(cfg.evaluator))?;
    match result.failures() {
        0 => Ok(()),
        failed => Err(Failure::PartialSweep {
            failed,
            total: result.rows.len(),
        }),
    }
}

pub fn fit(args: FitArgs) -> Outcome {
    let file = File::open(&args.series).map_err(|e| {
        Error::Format(format!("cannot open {}: {e}", args.series.display()))
    })?;
    let series = EntropySeries::read_csv(file)?;
    let fit = fit_asymptote(&series)?;
    let mut out = OutputDir::create(&args.out, args.reproducible)?;
    out.write_json("fit.json", &fit)?;
    println!("{}", serde_json::to_string_pretty(&fit).map_err(Error::from)?);
    if let Some(w) = &fit.warning {
        eprintln!("warning: {w}");
    }
    out.finish(None, None, None)?;
    Ok(())
}
