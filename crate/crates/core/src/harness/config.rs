//! Experiment configuration: a flat `key = value` text format whose keys
//! double as command-line flag names.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::ExchangeParams;
use crate::stats::{BinSpec, FitMethod};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "KINEX_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "kinex-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exchange,
    Gas,
    Fit,
    Entropy,
    Sweep,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exchange" => Mode::Exchange,
            "gas" => Mode::Gas,
            "fit" => Mode::Fit,
            "entropy" => Mode::Entropy,
            "sweep" => Mode::Sweep,
            _ => return Err(Error::Parse(format!("unknown mode '{s}'"))),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exchange => "exchange",
            Mode::Gas => "gas",
            Mode::Fit => "fit",
            Mode::Entropy => "entropy",
            Mode::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            _ => Err(Error::Parse(format!("unknown report format '{s}' (json | csv)"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

fn fit_name(m: FitMethod) -> &'static str {
    match m {
        FitMethod::Moments => "moments",
        FitMethod::MaximumLikelihood => "mle",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub mode: Mode,
    /// Saving propensity for `exchange`.
    pub lambda: f64,
    /// Saving propensities for `sweep`.
    pub lambdas: Vec<f64>,
    /// Space dimension for `gas` (integer) and `entropy` (real, >= 1).
    pub dimension: f64,
    pub agents: usize,
    /// Trades (`exchange`, `sweep`) or collisions (`gas`) per replicate.
    pub iterations: u64,
    pub seed: u64,
    pub replicates: usize,
    /// Initial wealth per agent, or initial kinetic energy per particle.
    pub mean: f64,
    /// Sample file for `fit`: one value per line (a non-numeric header line is skipped).
    pub input: Option<PathBuf>,
    pub out: PathBuf,
    pub histogram: BinSpec,
    pub format: ReportFormat,
    pub fit: FitMethod,
    /// Perturbation trials and amplitude for `entropy`.
    pub trials: usize,
    pub amplitude: f64,
    /// Rate parameter for `entropy`.
    pub beta: f64,
    /// Write the pooled samples to `samples.csv`.
    pub write_samples: bool,
    /// Include wall-clock time in the report (makes reports run-dependent).
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        let out = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
        Self {
            mode,
            lambda: 0.0,
            lambdas: vec![0.0, 0.2, 0.5, 0.8],
            dimension: 3.0,
            agents: 1_000,
            iterations: 10_000_000,
            seed: 1,
            replicates: 1,
            mean: 1.0,
            input: None,
            out,
            histogram: BinSpec::Default,
            format: ReportFormat::Json,
            fit: FitMethod::Moments,
            trials: 100,
            amplitude: 1e-2,
            beta: 1.0,
            write_samples: false,
            timing: false,
        }
    }

    /// Keys accepted by [`set`](Self::set), in canonical order.
    pub const KEYS: &'static [&'static str] = &[
        "mode",
        "lambda",
        "lambdas",
        "dimension",
        "agents",
        "iterations",
        "seed",
        "replicates",
        "mean",
        "input",
        "out",
        "histogram",
        "format",
        "fit",
        "trials",
        "amplitude",
        "beta",
        "write_samples",
        "timing",
    ];

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("invalid value '{v}' for '{key}'")))
        }
        fn flag(key: &str, v: &str) -> Result<bool> {
            match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Parse(format!("invalid boolean '{v}' for '{key}'"))),
            }
        }
        match key {
            "mode" => self.mode = value.parse()?,
            "lambda" => self.lambda = num(key, value)?,
            "lambdas" => {
                self.lambdas = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "dimension" => self.dimension = num(key, value)?,
            "agents" => self.agents = num(key, value)?,
            "iterations" => self.iterations = parse_count(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "replicates" => self.replicates = num(key, value)?,
            "mean" => self.mean = num(key, value)?,
            "input" => self.input = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "histogram" => self.histogram = value.parse()?,
            "format" => self.format = value.parse()?,
            "fit" => {
                self.fit = match value {
                    "moments" => FitMethod::Moments,
                    "mle" => FitMethod::MaximumLikelihood,
                    _ => return Err(Error::Parse(format!("unknown fit method '{value}' (moments | mle)"))),
                }
            }
            "trials" => self.trials = num(key, value)?,
            "amplitude" => self.amplitude = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "write_samples" => self.write_samples = flag(key, value)?,
            "timing" => self.timing = flag(key, value)?,
            _ => return Err(Error::Parse(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn from_text(mode: Option<Mode>, text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        let mode = match (mode, pairs.iter().find(|(k, _)| k == "mode")) {
            (Some(m), _) => m,
            (None, Some((_, v))) => v.parse()?,
            (None, None) => return Err(Error::Config("configuration does not name a mode".into())),
        };
        let mut cfg = Self::new(mode);
        for (k, v) in &pairs {
            if k != "mode" {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Canonical key-value form; feeding it back through [`from_text`](Self::from_text)
    /// reproduces the configuration.
    pub fn to_pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("mode", self.mode.to_string());
        put("lambda", self.lambda.to_string());
        put("lambdas", self.lambdas.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","));
        put("dimension", self.dimension.to_string());
        put("agents", self.agents.to_string());
        put("iterations", self.iterations.to_string());
        put("seed", self.seed.to_string());
        put("replicates", self.replicates.to_string());
        put("mean", self.mean.to_string());
        if let Some(input) = &self.input {
            put("input", input.display().to_string());
        }
        put("out", self.out.display().to_string());
        put("histogram", self.histogram.to_string());
        put("format", self.format.to_string());
        put("fit", fit_name(self.fit).to_string());
        put("trials", self.trials.to_string());
        put("amplitude", self.amplitude.to_string());
        put("beta", self.beta.to_string());
        put("write_samples", self.write_samples.to_string());
        put("timing", self.timing.to_string());
        m
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// Checks every parameter the selected mode will use, before anything runs.
    pub fn validate(&self) -> Result<()> {
        let cfg = |msg: String| Err(Error::Config(msg));
        self.histogram.validate()?;
        match self.mode {
            Mode::Exchange | Mode::Sweep | Mode::Gas => {
                if self.agents < 2 {
                    return cfg(format!("agents must be at least 2, got {}", self.agents));
                }
                if self.replicates < 1 {
                    return cfg("replicates must be at least 1".into());
                }
                if !(self.mean > 0.0 && self.mean.is_finite()) {
                    return cfg(format!("mean must be positive, got {}", self.mean));
                }
                // the fitter needs at least 10 pooled samples
                let per_rep = (self.iterations - self.iterations / 2) / self.agents as u64;
                let pooled = (per_rep * self.agents as u64).saturating_mul(self.replicates as u64);
                if pooled > MAX_POOLED_SAMPLES {
                    return cfg(format!(
                        "run would pool {pooled} samples; the limit is {MAX_POOLED_SAMPLES} \
                         (lower iterations or replicates)"
                    ));
                }
                let width = if self.mode == Mode::Gas { self.dimension.max(1.0) } else { 1.0 };
                if self.agents as f64 * width > MAX_STATE_VALUES as f64 {
                    return cfg(format!("agents x dimension must not exceed {MAX_STATE_VALUES}"));
                }
                if per_rep * self.agents as u64 * (self.replicates as u64) < 10 {
                    return cfg(format!(
                        "{} iterations over {} agents leave too few equilibrium samples; \
                         need at least {} iterations",
                        self.iterations,
                        self.agents,
                        2 * self.agents
                    ));
                }
            }
            Mode::Fit | Mode::Entropy => {}
        }
        match self.mode {
            Mode::Exchange => {
                ExchangeParams::new(self.lambda, self.iterations, self.seed)?;
            }
            Mode::Sweep => {
                if self.lambdas.is_empty() {
                    return cfg("sweep needs at least one lambda".into());
                }
                for &l in &self.lambdas {
                    ExchangeParams::new(l, self.iterations, self.seed)?;
                }
            }
            Mode::Gas => {
                if !(self.dimension >= 1.0 && self.dimension.fract() == 0.0 && self.dimension <= 1e6) {
                    return cfg(format!("gas dimension must be a positive integer, got {}", self.dimension));
                }
            }
            Mode::Fit => match &self.input {
                None => return cfg("fit mode needs an input file".into()),
                Some(p) if !p.is_file() => return cfg(format!("input file {} does not exist", p.display())),
                Some(_) => {}
            },
            Mode::Entropy => {
                if !(self.dimension >= 1.0 && self.dimension.is_finite()) {
                    return cfg(format!("entropy dimension must be >= 1, got {}", self.dimension));
                }
                if !(10..=MAX_TRIALS).contains(&self.trials) {
                    return cfg(format!("trials must lie in [10, {MAX_TRIALS}], got {}", self.trials));
                }
                if !(self.amplitude > 0.0 && self.amplitude <= 1e-2) {
                    return cfg(format!("amplitude must lie in (0, 1e-2], got {}", self.amplitude));
                }
                if !(self.beta > 0.0 && self.beta.is_finite()) {
                    return cfg(format!("beta must be positive, got {}", self.beta));
                }
            }
        }
        Ok(())
    }
}

/// Upper bound on pooled equilibrium samples per run (8 bytes each).
pub const MAX_POOLED_SAMPLES: u64 = 200_000_000;
/// Upper bound on stored state values (wealths or velocity components).
pub const MAX_STATE_VALUES: u64 = 100_000_000;
pub const MAX_TRIALS: usize = 1_000_000;

/// Counts accept plain integers, `_` separators and scientific notation (`1e7`).
fn parse_count(key: &str, v: &str) -> Result<u64> {
    let cleaned = v.replace('_', "");
    if let Ok(n) = cleaned.parse::<u64>() {
        return Ok(n);
    }
    match cleaned.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(Error::Parse(format!("invalid count '{v}' for '{key}'"))),
    }
}

pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| Error::Parse(format!("line {}: expected 'key = value'", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}
