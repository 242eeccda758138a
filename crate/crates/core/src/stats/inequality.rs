//! Gini coefficient and Lorenz curve.
//!
//! The Gini coefficient is the population form
//! `sum_ij |x_i - x_j| / (2 M^2 <x>)`, which ranges over `[0, 1 - 1/M]`; no
//! small-sample correction is applied.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use super::gamma::{fit_gamma, FitMethod, GammaParams};
use super::ks::ks_statistic;
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate, regularized_gamma};

fn sorted_checked(wealths: &[f64]) -> Result<(Cow<'_, [f64]>, f64)> {
    if wealths.len() < 2 {
        return Err(Error::Config(format!("need at least 2 values, got {}", wealths.len())));
    }
    if let Some(bad) = wealths.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(domain(format!("values must be finite and nonnegative, got {bad}")));
    }
    let sorted = if wealths.windows(2).all(|w| w[0] <= w[1]) {
        Cow::Borrowed(wealths)
    } else {
        let mut v = wealths.to_vec();
        v.sort_by(f64::total_cmp);
        Cow::Owned(v)
    };
    let total: f64 = sorted.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Undefined("Gini coefficient of zero total wealth".into()));
    }
    Ok((sorted, total))
}

fn gini_sorted(sorted: &[f64], total: f64) -> f64 {
    // sum_i (2i - M - 1) x_(i), paired from both ends so equal values cancel exactly
    let m = sorted.len();
    let mut acc = 0.0;
    for i in 0..m / 2 {
        let weight = (m - 1 - 2 * i) as f64;
        acc += weight * (sorted[m - 1 - i] - sorted[i]);
    }
    (acc / (m as f64 * total)).clamp(0.0, 1.0)
}

/// Gini coefficient in `O(M log M)` via the sorted-rank formula.
pub fn gini(wealths: &[f64]) -> Result<f64> {
    let (sorted, total) = sorted_checked(wealths)?;
    Ok(gini_sorted(&sorted, total))
}

/// Points `(k / M, share held by the poorest k)` for `k = 0..=M`.
pub fn lorenz_curve(wealths: &[f64]) -> Result<Vec<(f64, f64)>> {
    let (sorted, total) = sorted_checked(wealths)?;
    Ok(lorenz_sorted(&sorted, total))
}

fn lorenz_sorted(sorted: &[f64], total: f64) -> Vec<(f64, f64)> {
    let m = sorted.len();
    let mut points = Vec::with_capacity(m + 1);
    points.push((0.0, 0.0));
    let mut cum = 0.0;
    let mut prev = 0.0;
    for (k, x) in sorted.iter().enumerate() {
        cum += x;
        let p = (k + 1) as f64 / m as f64;
        let share = (cum / total).clamp(prev, p);
        points.push((p, share));
        prev = share;
    }
    if let Some(last) = points.last_mut() {
        *last = (1.0, 1.0);
    }
    points
}

/// The Lorenz curve evaluated at `segments + 1` evenly spaced population shares,
/// by linear interpolation of the exact step curve.
pub fn lorenz_curve_resampled(wealths: &[f64], segments: usize) -> Result<Vec<(f64, f64)>> {
    let (sorted, total) = sorted_checked(wealths)?;
    Ok(resample(&lorenz_sorted(&sorted, total), segments))
}

fn resample(full: &[(f64, f64)], segments: usize) -> Vec<(f64, f64)> {
    let segments = segments.max(1);
    let m = full.len() - 1;
    (0..=segments)
        .map(|s| {
            let p = s as f64 / segments as f64;
            let pos = p * m as f64;
            let k = (pos.floor() as usize).min(m - 1);
            let frac = pos - k as f64;
            let l = full[k].1 + frac * (full[k + 1].1 - full[k].1);
            (p, l.min(p))
        })
        .collect()
}

/// Area under a piecewise-linear curve by the trapezoidal rule.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// Gini coefficient of the gamma law of shape `n` (independent of the rate).
///
/// The Lorenz curve of a gamma(n) law is parametrized by `x` as
/// `(P(n, x), P(n + 1, x))`, so `G = 1 - 2 int_0^inf P(n + 1, x) g_n(x) dx`.
/// The integral is evaluated by composite Gauss-Legendre quadrature.
pub fn gini_of_gamma(shape: f64) -> Result<f64> {
    let law = GammaParams::new(shape, 1.0)?;
    let upper = shape + 40.0 * shape.sqrt() + 60.0;
    // x = t^2 smooths the x^(2n) behaviour at the origin for small shapes.
    let integrand = |t: f64| {
        let x = t * t;
        if x == 0.0 {
            return 0.0;
        }
        let lifted = regularized_gamma(shape + 1.0, x).map(|p| p.0).unwrap_or(0.0);
        2.0 * t * lifted * law.pdf_unchecked(x)
    };
    let area = integrate(integrand, 0.0, upper.sqrt(), 400);
    Ok((1.0 - 2.0 * area).clamp(0.0, 1.0))
}

/// Inequality summary of a wealth sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub gini: f64,
    /// Lorenz curve at 101 evenly spaced population shares.
    pub lorenz: Vec<(f64, f64)>,
    pub fitted: GammaParams,
    /// KS distance between the samples and the fitted gamma law.
    pub ks_statistic: f64,
}

pub const REPORT_LORENZ_SEGMENTS: usize = 100;

pub fn inequality_report(samples: &[f64], method: FitMethod) -> Result<InequalityReport> {
    let (sorted, total) = sorted_checked(samples)?;
    let fitted = fit_gamma(&sorted, method)?;
    let ks = ks_statistic(&sorted, |x| fitted.cdf_total(x))?;
    Ok(InequalityReport {
        gini: gini_sorted(&sorted, total),
        lorenz: resample(&lorenz_sorted(&sorted, total), REPORT_LORENZ_SEGMENTS),
        fitted,
        ks_statistic: ks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ln_gamma;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::Exp1;

    fn pairwise_gini(xs: &[f64]) -> f64 {
        let m = xs.len() as f64;
        let total: f64 = xs.iter().sum();
        let mut s = 0.0;
        for a in xs {
            for b in xs {
                s += (a - b).abs();
            }
        }
        s / (2.0 * m * total)
    }

    /// Closed form G = Gamma(n + 1/2) / (sqrt(pi) Gamma(n + 1)).
    fn gamma_gini_closed(n: f64) -> f64 {
        (ln_gamma(n + 0.5) - ln_gamma(n + 1.0)).exp() / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(gini(&[0.0, 0.0, 0.0, 4.0]).unwrap(), 0.75);
        assert_eq!(pairwise_gini(&[0.0, 0.0, 0.0, 4.0]), 0.75);
        assert!(matches!(gini(&[0.0, 0.0]), Err(Error::Undefined(_))));
        assert!(gini(&[1.0]).is_err());
        assert_eq!(gini(&[0.1; 7]).unwrap(), 0.0);
    }

    #[test]
    fn exponential_gini_is_one_half() {
        let mut rng = stream_rng(3, 0);
        let xs: Vec<f64> = (0..1_000_000).map(|_| rng.sample(Exp1)).collect();
        assert!((gini(&xs).unwrap() - 0.5).abs() < 0.01);
    }

    #[test]
    fn lorenz_examples() {
        assert_eq!(lorenz_curve(&[1.0, 1.0]).unwrap(), vec![(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]);
        assert_eq!(lorenz_curve(&[0.0, 4.0]).unwrap(), vec![(0.0, 0.0), (0.5, 0.0), (1.0, 1.0)]);
        let r = lorenz_curve_resampled(&[0.0, 4.0], 4).unwrap();
        assert_eq!(r, vec![(0.0, 0.0), (0.25, 0.0), (0.5, 0.0), (0.75, 0.5), (1.0, 1.0)]);
    }

    #[test]
    fn gini_of_gamma_matches_closed_form() {
        assert!((gini_of_gamma(1.0).unwrap() - 0.5).abs() < 1e-6);
        for &n in &[0.5, 1.5, 4.0, 28.0, 400.0] {
            let g = gini_of_gamma(n).unwrap();
            assert!((g - gamma_gini_closed(n)).abs() < 1e-6, "n = {n}: {g}");
        }
        assert!(gini_of_gamma(400.0).unwrap() < 0.03);
        let seq: Vec<f64> = [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&n| gini_of_gamma(n).unwrap()).collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    }

    #[test]
    fn gini_of_gamma_falls_with_saving() {
        let seq: Vec<f64> = (0..10)
            .map(|k| {
                let lambda = 0.1 * k as f64;
                gini_of_gamma((1.0 + 2.0 * lambda) / (1.0 - lambda)).unwrap()
            })
            .collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]), "{seq:?}");
    }

    #[test]
    fn single_holder_gini() {
        for m in 2..20 {
            let mut xs = vec![0.0; m];
            xs[m / 2] = 3.0;
            let expected = (m as f64 - 1.0) / m as f64;
            assert!((gini(&xs).unwrap() - expected).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn gini_matches_pairwise_and_lorenz(xs in proptest::collection::vec(0.0f64..100.0, 2..60)) {
            prop_assume!(xs.iter().sum::<f64>() > 0.0);
            let g = gini(&xs).unwrap();
            prop_assert!((g - pairwise_gini(&xs)).abs() < 1e-12);
            let curve = lorenz_curve(&xs).unwrap();
            prop_assert!((g - (1.0 - 2.0 * trapezoid_area(&curve))).abs() < 1e-9);
            prop_assert!(g <= 1.0 - 1.0 / xs.len() as f64 + 1e-12);
            prop_assert_eq!(curve[0], (0.0, 0.0));
            prop_assert_eq!(*curve.last().unwrap(), (1.0, 1.0));
            for w in curve.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
                prop_assert!(w[1].1 <= w[1].0);
            }
        }

        #[test]
        fn gini_is_scale_invariant(xs in proptest::collection::vec(0.01f64..100.0, 2..60),
                                   exp in -20i32..20, c in 0.001f64..1000.0) {
            let g = gini(&xs).unwrap();
            let pow2 = 2f64.powi(exp);
            let scaled: Vec<f64> = xs.iter().map(|x| x * pow2).collect();
            prop_assert_eq!(gini(&scaled).unwrap(), g);
            let scaled: Vec<f64> = xs.iter().map(|x| x * c).collect();
            prop_assert!((gini(&scaled).unwrap() - g).abs() < 1e-12);
        }
    }
}
