//! Plot-ready columnar text.
//!
//! Layout: a header row `x,empirical_density[,<curve>...]`, then one row per
//! histogram bin with the bin centre, the empirical density and each curve
//! evaluated at that centre. Fields are comma-separated, rows end in `\n`.
//! Numbers are plain decimals (never exponent notation) carrying at least
//! nine significant digits and at least nine fractional digits, so a
//! re-parsed value is within 5e-10 of the original.

use std::path::Path;

use crate::error::{Error, Result};
use crate::stats::Histogram;

/// A named curve sampled at the histogram bin centres.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotCurve {
    pub name: String,
    pub values: Vec<f64>,
}

impl PlotCurve {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self { name: name.into(), values }
    }

    /// Evaluates `f` at each bin centre.
    pub fn sample<F: Fn(f64) -> f64>(name: impl Into<String>, hist: &Histogram, f: F) -> Self {
        Self::new(name, hist.centers().into_iter().map(f).collect())
    }
}

pub fn format_decimal(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if x == 0.0 {
        return format!("{:.9}", 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).clamp(9, 400) as usize;
    format!("{x:.decimals$}")
}

pub fn format_plot_data(hist: &Histogram, curves: &[PlotCurve]) -> Result<String> {
    let bins = hist.bins();
    for c in curves {
        if c.values.len() != bins {
            return Err(Error::Config(format!(
                "curve '{}' has {} points but the histogram has {bins} bins",
                c.name,
                c.values.len()
            )));
        }
        if c.name.contains([',', '\n']) {
            return Err(Error::Config(format!("curve name '{}' contains a separator", c.name)));
        }
    }
    let mut out = String::from("x,empirical_density");
    for c in curves {
        out.push(',');
        out.push_str(&c.name);
    }
    out.push('\n');
    for (k, x) in hist.centers().into_iter().enumerate() {
        out.push_str(&format_decimal(x));
        out.push(',');
        out.push_str(&format_decimal(hist.densities[k]));
        for c in curves {
            out.push(',');
            out.push_str(&format_decimal(c.values[k]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes [`format_plot_data`] output to `path`.
pub fn emit_plot_data(hist: &Histogram, curves: &[PlotCurve], path: &Path) -> Result<()> {
    let text = format_plot_data(hist, curves)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads plot data back: header names and rows of numbers.
pub fn parse_plot_data(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> =
        lines.next().ok_or_else(|| Error::Parse("empty plot file".into()))?.split(',').map(str::to_string).collect();
    let rows = lines
        .map(|line| {
            let row: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{f}'"))))
                .collect::<Result<_>>()?;
            if row.len() != header.len() {
                return Err(Error::Parse(format!("row has {} fields, header has {}", row.len(), header.len())));
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok((header, rows))
}
