//! The gamma law `f(x) = beta (beta x)^(n-1) exp(-beta x) / Gamma(n)` and its fitters.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{digamma, ln_gamma, regularized_gamma, trigamma};

/// Shape `n > 0` and rate `beta > 0`. Mean `n / beta`, variance `n / beta^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::Parameter(format!("gamma shape must be positive, got {shape}")));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::Parameter(format!("gamma rate must be positive, got {rate}")));
        }
        Ok(Self { shape, rate })
    }

    /// The law with shape `n` and the given mean (rate `n / mean`).
    pub fn with_mean(shape: f64, mean: f64) -> Result<Self> {
        Self::new(shape, shape / mean)
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    /// Scale `1 / beta`; the effective temperature for an equilibrium law.
    pub fn scale(&self) -> f64 {
        1.0 / self.rate
    }

    /// Density at `x`; `x = 0` gives `beta` for `n = 1`, `0` for `n > 1`, `inf` for `n < 1`.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("gamma density needs x >= 0, got {x}")));
        }
        Ok(self.pdf_unchecked(x))
    }

    pub(crate) fn pdf_unchecked(&self, x: f64) -> f64 {
        let xi = self.rate * x;
        if xi == 0.0 {
            return if self.shape == 1.0 {
                self.rate
            } else if self.shape > 1.0 {
                0.0
            } else {
                f64::INFINITY
            };
        }
        self.rate * ((self.shape - 1.0) * xi.ln() - xi - ln_gamma(self.shape)).exp()
    }

    /// `P(n, beta x)`, accurate to ~1e-14 absolute.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(domain(format!("gamma cdf needs x >= 0, got {x}")));
        }
        Ok(regularized_gamma(self.shape, self.rate * x)?.0)
    }

    /// Cdf that accepts any real, returning 0 below the support.
    pub fn cdf_total(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            regularized_gamma(self.shape, self.rate * x).map(|p| p.0).unwrap_or(f64::NAN)
        }
    }
}

pub fn gamma_pdf(x: f64, params: &GammaParams) -> Result<f64> {
    params.pdf(x)
}

pub fn gamma_cdf(x: f64, params: &GammaParams) -> Result<f64> {
    params.cdf(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    #[default]
    Moments,
    MaximumLikelihood,
}

fn mean_and_variance(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 10 {
        return Err(Error::Config(format!("need at least 10 samples to fit, got {}", samples.len())));
    }
    if let Some(bad) = samples.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(domain(format!("samples must be finite and nonnegative, got {bad}")));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok((mean, var))
}

/// Method of moments: `n = mean^2 / var`, `beta = mean / var`.
///
/// Uses the population variance (divisor `M`). A zero variance means the
/// samples have collapsed to a point mass, which has no gamma fit.
pub fn fit_gamma_moments(samples: &[f64]) -> Result<GammaParams> {
    let (mean, var) = mean_and_variance(samples)?;
    if !(var > 0.0) || mean == 0.0 {
        return Err(Error::Degenerate(format!(
            "samples have zero variance (all equal to {mean}); the law is a point mass"
        )));
    }
    GammaParams::new(mean * mean / var, mean / var)
}

/// Maximum likelihood: solves `ln n - digamma(n) = ln(mean) - mean(ln x)` by Newton.
pub fn fit_gamma_mle(samples: &[f64]) -> Result<GammaParams> {
    let (mean, var) = mean_and_variance(samples)?;
    if !(var > 0.0) {
        return Err(Error::Degenerate("samples have zero variance".into()));
    }
    if samples.contains(&0.0) {
        return Err(domain("maximum-likelihood fit needs strictly positive samples"));
    }
    let mean_log = samples.iter().map(|x| x.ln()).sum::<f64>() / samples.len() as f64;
    let s = mean.ln() - mean_log;
    if !(s > 0.0) {
        return Err(Error::Degenerate("log-moment gap is not positive".into()));
    }
    let mut shape = (3.0 - s + ((s - 3.0).powi(2) + 24.0 * s).sqrt()) / (12.0 * s);
    for _ in 0..100 {
        let f = shape.ln() - digamma(shape) - s;
        let df = 1.0 / shape - trigamma(shape);
        let next = shape - f / df;
        let next = if next <= 0.0 { shape / 2.0 } else { next };
        if ((next - shape) / shape).abs() < 1e-14 {
            shape = next;
            break;
        }
        shape = next;
    }
    GammaParams::new(shape, shape / mean)
}

pub fn fit_gamma(samples: &[f64], method: FitMethod) -> Result<GammaParams> {
    match method {
        FitMethod::Moments => fit_gamma_moments(samples),
        FitMethod::MaximumLikelihood => fit_gamma_mle(samples),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;
    use crate::rng::stream_rng;
    use rand::Rng;
    use rand_distr::Gamma;

    #[test]
    fn pdf_examples() {
        let exp = GammaParams::new(1.0, 1.0).unwrap();
        assert_eq!(exp.pdf(0.0).unwrap(), 1.0);
        let g2 = GammaParams::new(2.0, 1.0).unwrap();
        assert!((g2.pdf(1.0).unwrap() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((g2.pdf(1.0).unwrap() - 0.367_879_441).abs() < 1e-9);
        assert_eq!(g2.pdf(0.0).unwrap(), 0.0);
        // mode at (n - 1) / beta = 1
        assert!(g2.pdf(1.0).unwrap() > g2.pdf(0.99).unwrap());
        assert!(g2.pdf(1.0).unwrap() > g2.pdf(1.01).unwrap());
        assert!(g2.pdf(-1.0).is_err());
        assert!(GammaParams::new(0.0, 1.0).is_err());
        assert!(GammaParams::new(1.0, -2.0).is_err());
    }

    #[test]
    fn cdf_examples() {
        let exp = GammaParams::new(1.0, 1.0).unwrap();
        assert_eq!(exp.cdf(0.0).unwrap(), 0.0);
        for &x in &[0.3, 1.0, 4.0] {
            assert!((exp.cdf(x).unwrap() - (1.0 - (-x).exp())).abs() < 1e-14);
        }
        let g2 = GammaParams::new(2.0, 1.0).unwrap();
        let closed = 1.0 - 2.0 * (-1.0f64).exp();
        let quad = integrate(|t| g2.pdf_unchecked(t), 0.0, 1.0, 4);
        assert!((g2.cdf(1.0).unwrap() - closed).abs() < 1e-14);
        assert!((quad - closed).abs() < 1e-14);
        assert!((closed - 0.264_241).abs() < 1e-6);
    }

    fn draws(shape: f64, rate: f64, count: usize, seed: u64) -> Vec<f64> {
        let dist = Gamma::new(shape, 1.0 / rate).unwrap();
        let mut rng = stream_rng(seed, 0);
        (0..count).map(|_| rng.sample(dist)).collect()
    }

    #[test]
    fn moment_fit_recovers_parameters() {
        let xs = draws(4.0, 4.0, 1_000_000, 10);
        let fit = fit_gamma_moments(&xs).unwrap();
        assert!((3.9..=4.1).contains(&fit.shape), "{fit:?}");
        assert!((fit.rate - 4.0).abs() < 0.1);
        let exp = fit_gamma_moments(&draws(1.0, 2.0, 200_000, 11)).unwrap();
        assert!((exp.shape - 1.0).abs() < 0.05);
    }

    #[test]
    fn mle_fit_recovers_parameters() {
        let xs = draws(2.5, 0.5, 200_000, 12);
        let fit = fit_gamma_mle(&xs).unwrap();
        // sd of the shape MLE ~ sqrt(n / (M (n psi'(n) - 1))) ~ 0.008
        assert!((fit.shape - 2.5).abs() < 0.03, "{fit:?}");
        assert!((fit.rate - 0.5).abs() < 0.01);
    }

    #[test]
    fn degenerate_and_short_inputs() {
        assert!(matches!(fit_gamma_moments(&[2.0; 20]), Err(Error::Degenerate(_))));
        assert!(fit_gamma_moments(&[1.0, 2.0]).is_err());
        assert!(fit_gamma_moments(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, -1.0]).is_err());
        let mut with_zero = vec![1.0; 10];
        with_zero[0] = 0.0;
        assert!(fit_gamma_mle(&with_zero).is_err());
    }

    #[test]
    fn agrees_with_reference_implementation() {
        use statrs::distribution::{Continuous, ContinuousCDF};
        let mut rng = stream_rng(77, 0);
        for _ in 0..500 {
            let shape = rng.random_range(0.3..60.0);
            let rate = rng.random_range(0.1..10.0);
            let x = rng.random_range(0.0..4.0) * shape / rate;
            let ours = GammaParams::new(shape, rate).unwrap();
            let reference = statrs::distribution::Gamma::new(shape, rate).unwrap();
            let (c, rc) = (ours.cdf(x).unwrap(), reference.cdf(x));
            assert!((c - rc).abs() < 1e-10, "cdf n = {shape}, beta = {rate}, x = {x}: {c} vs {rc}");
            if x > 0.0 {
                let (p, rp) = (ours.pdf(x).unwrap(), reference.pdf(x));
                assert!((p - rp).abs() <= 1e-10 * rp.max(1.0), "pdf n = {shape}: {p} vs {rp}");
            }
        }
    }
}
