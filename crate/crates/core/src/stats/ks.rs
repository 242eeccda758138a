use crate::error::{Error, Result};

/// Kolmogorov-Smirnov distance `sup_x |F_M(x) - F(x)|` between the empirical
/// cdf of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.len() < 10 {
        return Err(Error::Config(format!("need at least 10 samples, got {}", samples.len())));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("samples contain NaN".into()));
    }
    let sorted_input = samples.windows(2).all(|w| w[0] <= w[1]);
    let owned;
    let sorted: &[f64] = if sorted_input {
        samples
    } else {
        let mut v = samples.to_vec();
        v.sort_by(f64::total_cmp);
        owned = v;
        &owned
    };
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / m - f).max(f - i as f64 / m);
    }
    Ok(d)
}
