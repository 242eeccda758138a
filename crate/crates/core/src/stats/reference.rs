//! Reference laws for the upper and middle wealth ranges: Pareto power law
//! and Gibrat's lognormal. These are only evaluated, never generated by the
//! exchange dynamics.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// `alpha xmin^alpha x^(-1-alpha)` on `[xmin, inf)`.
pub fn pareto_pdf(x: f64, alpha: f64, xmin: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(xmin > 0.0) {
        return Err(Error::Parameter(format!("pareto needs alpha > 0 and xmin > 0, got ({alpha}, {xmin})")));
    }
    if !(x >= xmin) {
        return Err(domain(format!("pareto density defined for x >= {xmin}, got {x}")));
    }
    Ok(alpha * (alpha * xmin.ln() - (1.0 + alpha) * x.ln()).exp())
}

/// Lognormal with median `x0` and log-variance `sigma^2`.
pub fn gibrat_pdf(x: f64, x0: f64, sigma: f64) -> Result<f64> {
    if !(x0 > 0.0) || !(sigma > 0.0) {
        return Err(Error::Parameter(format!("gibrat needs x0 > 0 and sigma > 0, got ({x0}, {sigma})")));
    }
    if !(x > 0.0) {
        return Err(domain(format!("gibrat density defined for x > 0, got {x}")));
    }
    let l = (x / x0).ln();
    Ok((-l * l / (2.0 * sigma * sigma)).exp() / (x * (2.0 * PI * sigma * sigma).sqrt()))
}

/// Gibrat index `1 / sqrt(2 sigma^2)`; smaller means more uneven.
pub fn gibrat_index(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    Ok(1.0 / (2.0 * sigma * sigma).sqrt())
}

/// Mode of the lognormal, `x0 exp(-sigma^2)`.
pub fn gibrat_mode(x0: f64, sigma: f64) -> f64 {
    x0 * (-sigma * sigma).exp()
}
