//! Normalized histograms with left-closed bins.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// How to lay out bins.
///
/// `Default` is 50 linear bins over `[0, q99.9]` plus one overflow bin
/// reaching the sample maximum (only when some sample exceeds `q99.9`).
/// Without an explicit range, `Linear` and `Logarithmic` span the sample
/// minimum to maximum.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BinSpec {
    #[default]
    Default,
    Linear {
        bins: usize,
        range: Option<(f64, f64)>,
    },
    Logarithmic {
        bins: usize,
        range: Option<(f64, f64)>,
    },
}

const DEFAULT_BINS: usize = 50;
const DEFAULT_QUANTILE: f64 = 0.999;

impl fmt::Display for BinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, bins, range) = match *self {
            BinSpec::Default => return f.write_str("default"),
            BinSpec::Linear { bins, range } => ("linear", bins, range),
            BinSpec::Logarithmic { bins, range } => ("log", bins, range),
        };
        write!(f, "{name}:{bins}")?;
        if let Some((lo, hi)) = range {
            write!(f, ":{lo}:{hi}")?;
        }
        Ok(())
    }
}

impl FromStr for BinSpec {
    type Err = Error;

    /// `default`, `linear:<bins>[:<lo>:<hi>]` or `log:<bins>[:<lo>:<hi>]`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("invalid histogram spec '{s}'"));
        if parts == ["default"] {
            return Ok(BinSpec::Default);
        }
        if parts.len() != 2 && parts.len() != 4 {
            return Err(bad());
        }
        let bins: usize = parts[1].parse().map_err(|_| bad())?;
        let range = if parts.len() == 4 {
            let lo: f64 = parts[2].parse().map_err(|_| bad())?;
            let hi: f64 = parts[3].parse().map_err(|_| bad())?;
            Some((lo, hi))
        } else {
            None
        };
        let spec = match parts[0] {
            "linear" => BinSpec::Linear { bins, range },
            "log" => BinSpec::Logarithmic { bins, range },
            _ => return Err(bad()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl BinSpec {
    /// Checks everything that does not depend on the data.
    pub fn validate(&self) -> Result<()> {
        let (bins, range, log) = match *self {
            BinSpec::Default => return Ok(()),
            BinSpec::Linear { bins, range } => (bins, range, false),
            BinSpec::Logarithmic { bins, range } => (bins, range, true),
        };
        if !(2..=MAX_BINS).contains(&bins) {
            return Err(Error::Config(format!("bin count must lie in [2, {MAX_BINS}], got {bins}")));
        }
        if let Some((lo, hi)) = range {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!("invalid histogram range [{lo}, {hi}]")));
            }
            if log && lo <= 0.0 {
                return Err(domain(format!("logarithmic bins need positive edges, got {lo}")));
            }
        }
        Ok(())
    }
}

pub const MAX_BINS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
    pub total_samples: u64,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `sum density * width`; 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.densities.iter().zip(self.widths()).map(|(d, w)| d * w).sum()
    }
}

fn linear_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let mut edges: Vec<f64> = (0..=bins).map(|k| lo + (hi - lo) * k as f64 / bins as f64).collect();
    edges[bins] = hi;
    edges
}

fn log_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut edges: Vec<f64> = (0..=bins).map(|k| (a + (b - a) * k as f64 / bins as f64).exp()).collect();
    edges[0] = lo;
    edges[bins] = hi;
    edges
}

/// Builds a histogram whose densities integrate to one over its edges.
///
/// Bins are `[e_k, e_{k+1})` except the last, which includes its right edge.
/// Samples outside an explicit range are an error.
pub fn histogram(samples: &[f64], spec: &BinSpec) -> Result<Histogram> {
    spec.validate()?;
    if samples.is_empty() {
        return Err(Error::Config("histogram needs at least one sample".into()));
    }
    if let Some(bad) = samples.iter().find(|x| !x.is_finite()) {
        return Err(domain(format!("samples must be finite, got {bad}")));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let edges = match *spec {
        BinSpec::Default => {
            if min < 0.0 {
                return Err(domain("default binning starts at 0 and needs nonnegative samples"));
            }
            let rank = ((DEFAULT_QUANTILE * samples.len() as f64).ceil() as usize).clamp(1, samples.len());
            let mut hi = if samples.windows(2).all(|w| w[0] <= w[1]) {
                samples[rank - 1]
            } else {
                let mut scratch = samples.to_vec();
                *scratch.select_nth_unstable_by(rank - 1, f64::total_cmp).1
            };
            if hi <= 0.0 {
                hi = if max > 0.0 { max } else { 1.0 };
            }
            let mut edges = linear_edges(0.0, hi, DEFAULT_BINS);
            if max > hi {
                edges.push(max);
            }
            edges
        }
        BinSpec::Linear { bins, range } => {
            let (lo, hi) = match range {
                Some(r) => r,
                None if min < max => (min, max),
                None => (min - 0.5, max + 0.5),
            };
            linear_edges(lo, hi, bins)
        }
        BinSpec::Logarithmic { bins, range } => {
            let (lo, hi) = match range {
                Some(r) => r,
                None => {
                    if min <= 0.0 {
                        return Err(domain("logarithmic bins need positive samples"));
                    }
                    if min < max {
                        (min, max)
                    } else {
                        (min / 2.0, max * 2.0)
                    }
                }
            };
            log_edges(lo, hi, bins)
        }
    };
    let lo = edges[0];
    let hi = *edges.last().expect("at least two edges");
    let bins = edges.len() - 1;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x < lo || x > hi {
            return Err(domain(format!("sample {x} outside histogram range [{lo}, {hi}]")));
        }
        let k = match edges.binary_search_by(|e| e.total_cmp(&x)) {
            Ok(k) => k.min(bins - 1),
            Err(k) => k - 1,
        };
        counts[k] += 1;
    }
    let total = samples.len() as u64;
    let densities = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| {
            let width = w[1] - w[0];
            if c == 0 {
                0.0
            } else {
                c as f64 / (total as f64 * width)
            }
        })
        .collect();
    Ok(Histogram { edges, densities, counts, total_samples: total })
}
