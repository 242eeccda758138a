//! Configuration-driven experiment runner.
//!
//! [`run_experiment`] validates a configuration, runs the requested mode,
//! and writes plot data plus a report into the output directory. Output
//! files are assembled in memory and only written once everything has
//! succeeded; a failed write removes whatever was already written.
//!
//! Files per mode:
//!
//! | mode       | files                                                              |
//! |------------|--------------------------------------------------------------------|
//! | `exchange` | `histogram.csv`, `report.{json,csv}`                               |
//! | `gas`      | `histogram.csv`, `report.{json,csv}`                               |
//! | `fit`      | `histogram.csv`, `report.{json,csv}`                               |
//! | `sweep`    | `histogram_lambda_<l>.csv` per lambda, `curves.csv`, `report.*`    |
//! | `entropy`  | `margins.csv`, `report.{json,csv}`                                 |
//!
//! With `write_samples = true` the pooled samples also go to `samples.csv`.

mod config;
mod plot;

pub use config::{
    parse_pairs, ExperimentConfig, Mode, ReportFormat, DEFAULT_OUT_DIR, MAX_POOLED_SAMPLES, MAX_STATE_VALUES,
    MAX_TRIALS, OUT_DIR_ENV,
};
pub use plot::{emit_plot_data, format_decimal, format_plot_data, parse_plot_data, PlotCurve};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::entropy::{maxwell_boltzmann_check, stationarity_check, MaxwellBoltzmannReport, StationarityReport};
use crate::error::{Error, Result};
use crate::exchange::{effective_shape, effective_temperature, sample_replicates, ExchangeParams, WealthEnsemble};
use crate::gas::{sample_gas_replicates, GasParams, GasState};
use crate::stats::{fit_gamma, gini_of_gamma, histogram, inequality_report, GammaParams, Histogram, InequalityReport};

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), set_stream(replicate)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub algorithm: String,
    pub seed: u64,
    pub streams: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureCheck {
    /// `1 / beta_hat` from the fit.
    pub fitted: f64,
    /// `2 <x> / N`.
    pub predicted: f64,
    pub relative_error: f64,
}

/// Fit, inequality and prediction summary of one pooled sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSummary {
    pub lambda: Option<f64>,
    pub dimension: Option<f64>,
    pub samples: u64,
    pub snapshots: u64,
    pub mean: f64,
    pub inequality: InequalityReport,
    pub predicted: Option<GammaParams>,
    pub shape_relative_error: Option<f64>,
    /// Gini of the predicted gamma law, by quadrature.
    pub predicted_gini: Option<f64>,
    pub temperature: Option<TemperatureCheck>,
    pub replicate_fits: Vec<GammaParams>,
    pub energy_drift: Option<f64>,
    pub momentum_drift: Option<f64>,
    pub histogram_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySummary {
    pub stationarity: StationarityReport,
    /// Mean margin with the amplitude halved (same noise).
    pub half_amplitude_mean_margin: f64,
    /// `mean_margin / half_amplitude_mean_margin`; 4 for a quadratic minimum.
    pub scaling_ratio: f64,
    pub maxwell_boltzmann: MaxwellBoltzmannReport,
    pub margins_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RunResults {
    Exchange(EquilibriumSummary),
    Gas(EquilibriumSummary),
    Fit(EquilibriumSummary),
    Sweep { runs: Vec<EquilibriumSummary>, curves_file: String },
    Entropy(EntropySummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    /// Canonical configuration; enough to repeat the run.
    pub config: BTreeMap<String, String>,
    pub rng: RngProvenance,
    pub results: RunResults,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Flattened `key,value` rows, keys being dotted JSON paths.
    pub fn to_csv(&self) -> Result<String> {
        let value = serde_json::to_value(self).map_err(|e| Error::Parse(e.to_string()))?;
        let mut out = String::from("key,value\n");
        flatten(&value, String::new(), &mut out);
        Ok(out)
    }

    pub fn config(&self) -> Result<ExperimentConfig> {
        let text: String = self.config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        ExperimentConfig::from_text(None, &text)
    }
}

fn flatten(v: &Value, path: String, out: &mut String) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(v, join(k), out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(v, join(&i.to_string()), out)),
        Value::String(s) => out.push_str(&format!("{path},\"{}\"\n", s.replace('"', "\"\""))),
        Value::Null => out.push_str(&format!("{path},\n")),
        other => out.push_str(&format!("{path},{other}\n")),
    }
}

/// Outcome of a successful run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

struct Pending {
    files: Vec<(String, String)>,
}

impl Pending {
    fn add(&mut self, name: impl Into<String>, text: String) -> String {
        let name = name.into();
        self.files.push((name.clone(), text));
        name
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let started = Instant::now();
    let mut pending = Pending { files: Vec::new() };
    let (results, streams) = match config.mode {
        Mode::Exchange => {
            let s = run_exchange_mode(config, config.lambda, "histogram.csv", &mut pending)?;
            (RunResults::Exchange(s), replicate_streams(config))
        }
        Mode::Sweep => {
            let mut runs = Vec::new();
            for &l in &config.lambdas {
                runs.push(run_exchange_mode(config, l, &format!("histogram_lambda_{l}.csv"), &mut pending)?);
            }
            let curves_file = pending.add("curves.csv", sweep_curves(&runs)?);
            (RunResults::Sweep { runs, curves_file }, replicate_streams(config))
        }
        Mode::Gas => (RunResults::Gas(run_gas_mode(config, &mut pending)?), replicate_streams(config)),
        Mode::Fit => (RunResults::Fit(run_fit_mode(config, &mut pending)?), vec![]),
        Mode::Entropy => {
            let s = run_entropy_mode(config, &mut pending)?;
            let streams = (0..config.trials as u64).collect();
            (RunResults::Entropy(s), streams)
        }
    };
    let report = RunReport {
        tool: "kinex".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: config.to_pairs(),
        rng: RngProvenance { algorithm: RNG_ALGORITHM.into(), seed: config.seed, streams },
        results,
        wall_clock_seconds: config.timing.then(|| started.elapsed().as_secs_f64()),
    };
    match config.format {
        ReportFormat::Json => pending.add("report.json", report.to_json()?),
        ReportFormat::Csv => pending.add("report.csv", report.to_csv()?),
    };
    let files = write_all(&config.out, &pending.files)?;
    Ok(RunOutput { report, files })
}

fn replicate_streams(config: &ExperimentConfig) -> Vec<u64> {
    (0..config.replicates as u64).collect()
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    std::fs::create_dir_all(dir)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        for (name, text) in files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            std::fs::write(&tmp, text).inspect_err(|_| {
                let _ = std::fs::remove_file(&tmp);
            })?;
            std::fs::rename(&tmp, &target)?;
            written.push(target);
        }
        Ok(())
    })();
    if let Err(e) = result {
        for p in &written {
            let _ = std::fs::remove_file(p);
        }
        if created_dir {
            let _ = std::fs::remove_dir_all(dir);
        }
        return Err(e);
    }
    Ok(written)
}

fn samples_csv(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 14 + 6);
    s.push_str("value\n");
    for v in values {
        s.push_str(&format_decimal(*v));
        s.push('\n');
    }
    s
}

/// Fits, measures and bins a pooled sample, queueing its histogram file.
#[allow(clippy::too_many_arguments)]
fn summarize(
    config: &ExperimentConfig,
    mut pooled: Vec<f64>,
    replicate_fits: Vec<GammaParams>,
    predicted_shape: Option<f64>,
    dimension: Option<f64>,
    lambda: Option<f64>,
    snapshots: u64,
    histogram_file: &str,
    pending: &mut Pending,
) -> Result<EquilibriumSummary> {
    pooled.sort_by(f64::total_cmp);
    let mean = pooled.iter().sum::<f64>() / pooled.len() as f64;
    let inequality = inequality_report(&pooled, config.fit)?;
    let hist = histogram(&pooled, &config.histogram)?;
    let predicted = predicted_shape.map(|n| GammaParams::with_mean(n, mean)).transpose()?;
    let mut curves = vec![PlotCurve::sample("fitted", &hist, |x| inequality.fitted.pdf(x.max(0.0)).unwrap_or(0.0))];
    if let Some(p) = predicted {
        curves.push(PlotCurve::sample("predicted", &hist, |x| p.pdf(x.max(0.0)).unwrap_or(0.0)));
    }
    let histogram_file = pending.add(histogram_file, format_plot_data(&hist, &curves)?);
    if config.write_samples {
        let name = histogram_file.replacen("histogram", "samples", 1);
        pending.add(name, samples_csv(&pooled));
    }
    let temperature = dimension
        .map(|n| -> Result<TemperatureCheck> {
            // a 1D gas sits below the exchange-model range N >= 2
            let predicted = if n >= 2.0 { effective_temperature(mean, n)? } else { 2.0 * mean / n };
            let fitted = inequality.fitted.scale();
            Ok(TemperatureCheck { fitted, predicted, relative_error: (fitted - predicted).abs() / predicted })
        })
        .transpose()?;
    Ok(EquilibriumSummary {
        lambda,
        dimension,
        samples: pooled.len() as u64,
        snapshots,
        mean,
        shape_relative_error: predicted.map(|p| (inequality.fitted.shape - p.shape).abs() / p.shape),
        predicted_gini: predicted.map(|p| gini_of_gamma(p.shape)).transpose()?,
        predicted,
        inequality,
        temperature,
        replicate_fits,
        energy_drift: None,
        momentum_drift: None,
        histogram_file,
    })
}

fn run_exchange_mode(
    config: &ExperimentConfig,
    lambda: f64,
    histogram_file: &str,
    pending: &mut Pending,
) -> Result<EquilibriumSummary> {
    let params = ExchangeParams::new(lambda, config.iterations, config.seed)?;
    let start = WealthEnsemble::uniform(config.agents, config.mean)?;
    let reps = sample_replicates(&start, &params, config.replicates)?;
    let fits = reps.iter().map(|r| fit_gamma(&r.values, config.fit)).collect::<Result<Vec<_>>>()?;
    let snapshots = reps.iter().map(|r| r.snapshots as u64).sum();
    let pooled: Vec<f64> = reps.into_iter().flat_map(|r| r.values).collect();
    let shape = effective_shape(lambda)?;
    summarize(config, pooled, fits, Some(shape), Some(2.0 * shape), Some(lambda), snapshots, histogram_file, pending)
}

fn run_gas_mode(config: &ExperimentConfig, pending: &mut Pending) -> Result<EquilibriumSummary> {
    let dimension = config.dimension as usize;
    let speed = (2.0 * config.mean).sqrt();
    let start = GasState::equal_speeds(config.agents, dimension, speed, config.seed)?;
    let params = GasParams::new(config.iterations, config.seed);
    let reps = sample_gas_replicates(&start, &params, config.replicates)?;
    let fits = reps.iter().map(|r| fit_gamma(&r.values, config.fit)).collect::<Result<Vec<_>>>()?;
    let snapshots = reps.iter().map(|r| r.snapshots as u64).sum();
    let energy_drift = reps.iter().map(|r| r.energy_drift).fold(0.0, f64::max);
    let momentum_drift = reps.iter().map(|r| r.momentum_drift).fold(0.0, f64::max);
    let pooled: Vec<f64> = reps.into_iter().flat_map(|r| r.values).collect();
    let n = config.dimension;
    let mut s = summarize(config, pooled, fits, Some(n / 2.0), Some(n), None, snapshots, "histogram.csv", pending)?;
    s.energy_drift = Some(energy_drift);
    s.momentum_drift = Some(momentum_drift);
    Ok(s)
}

/// One value per line; blank lines are skipped, and so is a non-numeric first line.
/// Only the first comma-separated field of each line is read.
pub fn read_samples(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Parse(format!("line {}: '{field}' is not a number", i + 1))),
        }
    }
    Ok(out)
}

fn run_fit_mode(config: &ExperimentConfig, pending: &mut Pending) -> Result<EquilibriumSummary> {
    let path = config.input.as_ref().ok_or_else(|| Error::Config("fit mode needs an input file".into()))?;
    let samples = read_samples(&std::fs::read_to_string(path)?)?;
    summarize(config, samples, vec![], None, None, None, 0, "histogram.csv", pending)
}

fn run_entropy_mode(config: &ExperimentConfig, pending: &mut Pending) -> Result<EntropySummary> {
    let full = stationarity_check(config.dimension, config.beta, config.trials, config.amplitude, config.seed)?;
    let half = stationarity_check(config.dimension, config.beta, config.trials, 0.5 * config.amplitude, config.seed)?;
    let mut text = String::from("trial,margin,half_amplitude_margin\n");
    for (t, (a, b)) in full.margins.iter().zip(&half.margins).enumerate() {
        text.push_str(&format!("{t},{},{}\n", format_decimal(*a), format_decimal(*b)));
    }
    let margins_file = pending.add("margins.csv", text);
    Ok(EntropySummary {
        half_amplitude_mean_margin: half.mean_margin,
        scaling_ratio: full.mean_margin / half.mean_margin,
        stationarity: full,
        maxwell_boltzmann: maxwell_boltzmann_check(config.beta)?,
        margins_file,
    })
}

const CURVE_POINTS: usize = 400;

/// Fitted and predicted densities of every sweep run on one shared x grid.
fn sweep_curves(runs: &[EquilibriumSummary]) -> Result<String> {
    let x_max = runs
        .iter()
        .map(|r| r.inequality.fitted.mean() + 8.0 * r.inequality.fitted.variance().sqrt())
        .fold(0.0, f64::max);
    let xs: Vec<f64> = (1..=CURVE_POINTS).map(|k| x_max * k as f64 / CURVE_POINTS as f64).collect();
    let mut header = String::from("x");
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for r in runs {
        let l = r.lambda.unwrap_or(f64::NAN);
        header.push_str(&format!(",fitted_lambda_{l}"));
        columns.push(xs.iter().map(|&x| r.inequality.fitted.pdf(x)).collect::<Result<_>>()?);
        if let Some(p) = r.predicted {
            header.push_str(&format!(",predicted_lambda_{l}"));
            columns.push(xs.iter().map(|&x| p.pdf(x)).collect::<Result<_>>()?);
        }
    }
    let mut out = header;
    out.push('\n');
    for (i, x) in xs.iter().enumerate() {
        out.push_str(&format_decimal(*x));
        for c in &columns {
            out.push(',');
            out.push_str(&format_decimal(c[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Histogram helper used by the Python bindings and CLI summaries.
pub fn histogram_with_curves(
    samples: &[f64],
    spec: &crate::stats::BinSpec,
    curves: &[GammaParams],
) -> Result<(Histogram, String)> {
    let hist = histogram(samples, spec)?;
    let named: Vec<PlotCurve> = curves
        .iter()
        .enumerate()
        .map(|(i, p)| PlotCurve::sample(format!("gamma_{i}"), &hist, |x| p.pdf(x.max(0.0)).unwrap_or(0.0)))
        .collect();
    let text = format_plot_data(&hist, &named)?;
    Ok((hist, text))
}
