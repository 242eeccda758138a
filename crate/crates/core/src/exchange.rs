//! Kinetic wealth-exchange models.
//!
//! Agents trade in random pairs. With saving propensity `lambda` each agent
//! keeps `lambda` of its own wealth and the pooled remainder
//! `(1 - lambda)(x_i + x_j)` is split by a uniform random fraction `eps`.
//! At `lambda = 0` this is the pure random-reshuffling model whose
//! equilibrium is exponential; for `lambda > 0` the equilibrium is a gamma
//! law of shape `n = (1 + 2 lambda) / (1 - lambda)`.

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{stream_rng, SimRng};

/// Wealth held by each of `M >= 2` agents, with the conserved total cached.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthEnsemble {
    wealths: Vec<f64>,
    total: f64,
}

impl WealthEnsemble {
    pub fn new(wealths: Vec<f64>) -> Result<Self> {
        if wealths.len() < 2 {
            return Err(Error::Config(format!("an ensemble needs at least 2 agents, got {}", wealths.len())));
        }
        if let Some(bad) = wealths.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(domain(format!("wealth must be finite and nonnegative, got {bad}")));
        }
        let total = wealths.iter().sum();
        Ok(Self { wealths, total })
    }

    /// `agents` agents each holding `mean` (the default initial condition uses 1).
    pub fn uniform(agents: usize, mean: f64) -> Result<Self> {
        Self::new(vec![mean; agents])
    }

    pub fn wealths(&self) -> &[f64] {
        &self.wealths
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.wealths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wealths.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.total / self.wealths.len() as f64
    }

    /// Fresh sum of the current wealths, for drift checks against `total()`.
    pub fn current_sum(&self) -> f64 {
        self.wealths.iter().sum()
    }

    pub fn into_wealths(self) -> Vec<f64> {
        self.wealths
    }
}

/// Parameters of one exchange run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeParams {
    pub lambda: f64,
    pub trades: u64,
    pub seed: u64,
    /// RNG stream; replicate `k` of a pooled run uses stream `k`.
    #[serde(default)]
    pub stream: u64,
}

impl ExchangeParams {
    pub fn new(lambda: f64, trades: u64, seed: u64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self { lambda, trades, seed, stream: 0 })
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lambda) {
        return Err(domain(format!("saving propensity must lie in [0, 1), got {lambda}")));
    }
    Ok(())
}

fn check_trade_inputs(xi: f64, xj: f64, eps: f64) -> Result<()> {
    if !(xi >= 0.0 && xj >= 0.0 && xi.is_finite() && xj.is_finite()) {
        return Err(domain(format!("trade wealths must be finite and nonnegative, got ({xi}, {xj})")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// Full reshuffle: `(eps (xi + xj), (1 - eps)(xi + xj))`.
pub fn trade_no_saving(xi: f64, xj: f64, eps: f64) -> Result<(f64, f64)> {
    check_trade_inputs(xi, xj, eps)?;
    let pool = xi + xj;
    Ok((eps * pool, (1.0 - eps) * pool))
}

/// Trade with saving propensity `lambda`.
///
/// Each output is `lambda * own + share * (1 - lambda)(xi + xj)`, so no agent
/// leaves with less than `lambda` times what it brought.
pub fn trade_with_saving(xi: f64, xj: f64, lambda: f64, eps: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    check_trade_inputs(xi, xj, eps)?;
    Ok(trade_with_saving_unchecked(xi, xj, lambda, eps))
}

#[inline]
fn trade_with_saving_unchecked(xi: f64, xj: f64, lambda: f64, eps: f64) -> (f64, f64) {
    let pool = (1.0 - lambda) * (xi + xj);
    (lambda * xi + eps * pool, lambda * xj + (1.0 - eps) * pool)
}

/// Draws the next trade: an ordered pair `i != j` uniform over the `M(M-1)`
/// choices and `eps` uniform on the open interval (0, 1).
#[inline]
pub fn draw_trade(rng: &mut SimRng, agents: usize) -> (usize, usize, f64) {
    let i = rng.random_range(0..agents);
    let mut j = rng.random_range(0..agents - 1);
    if j >= i {
        j += 1;
    }
    let eps: f64 = rng.sample(Open01);
    (i, j, eps)
}

fn step(wealths: &mut [f64], lambda: f64, rng: &mut SimRng) {
    let (i, j, eps) = draw_trade(rng, wealths.len());
    let (xi, xj) = trade_with_saving_unchecked(wealths[i], wealths[j], lambda, eps);
    wealths[i] = xi;
    wealths[j] = xj;
}

/// Runs `params.trades` random pairwise trades and returns the final state.
pub fn run_exchange(ensemble: WealthEnsemble, params: &ExchangeParams) -> Result<WealthEnsemble> {
    params.validate()?;
    if ensemble.len() < 2 {
        return Err(Error::Config("an ensemble needs at least 2 agents".into()));
    }
    let mut rng = stream_rng(params.seed, params.stream);
    let WealthEnsemble { mut wealths, total } = ensemble;
    for _ in 0..params.trades {
        step(&mut wealths, params.lambda, &mut rng);
    }
    Ok(WealthEnsemble { wealths, total })
}

/// Pooled equilibrium samples from one run plus the metadata needed to redo it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WealthSnapshots {
    pub lambda: f64,
    pub agents: usize,
    pub trades: u64,
    pub seed: u64,
    pub stream: u64,
    pub snapshots: usize,
    pub values: Vec<f64>,
}

/// Runs the exchange and samples the equilibrium.
///
/// The first half of the trades is discarded; afterwards the whole ensemble
/// is recorded every `M` trades.
pub fn sample_equilibrium(ensemble: WealthEnsemble, params: &ExchangeParams) -> Result<WealthSnapshots> {
    params.validate()?;
    let agents = ensemble.len();
    if agents < 2 {
        return Err(Error::Config("an ensemble needs at least 2 agents".into()));
    }
    let mut rng = stream_rng(params.seed, params.stream);
    let mut wealths = ensemble.into_wealths();
    let burn_in = params.trades / 2;
    for _ in 0..burn_in {
        step(&mut wealths, params.lambda, &mut rng);
    }
    let interval = agents as u64;
    let snapshots = ((params.trades - burn_in) / interval) as usize;
    let mut values = Vec::with_capacity(snapshots * agents);
    for _ in 0..snapshots {
        for _ in 0..interval {
            step(&mut wealths, params.lambda, &mut rng);
        }
        values.extend_from_slice(&wealths);
    }
    for _ in 0..(params.trades - burn_in) % interval {
        step(&mut wealths, params.lambda, &mut rng);
    }
    Ok(WealthSnapshots {
        lambda: params.lambda,
        agents,
        trades: params.trades,
        seed: params.seed,
        stream: params.stream,
        snapshots,
        values,
    })
}

/// Runs `replicates` independent copies (streams `0..replicates`) in parallel.
///
/// Results come back in stream order regardless of scheduling.
pub fn sample_replicates(
    initial: &WealthEnsemble,
    params: &ExchangeParams,
    replicates: usize,
) -> Result<Vec<WealthSnapshots>> {
    if replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    (0..replicates as u64)
        .into_par_iter()
        .map(|k| sample_equilibrium(initial.clone(), &params.with_stream(k)))
        .collect()
}

/// Gamma shape `n(lambda) = (1 + 2 lambda) / (1 - lambda) = 1 + 3 lambda / (1 - lambda)`.
pub fn effective_shape(lambda: f64) -> Result<f64> {
    if lambda == 1.0 {
        return Err(domain("lambda = 1 freezes the dynamics; the effective dimension diverges"));
    }
    check_lambda(lambda)?;
    Ok((1.0 + 2.0 * lambda) / (1.0 - lambda))
}

/// Effective dimension `N(lambda) = 2 n(lambda)`; ranges over `[2, inf)`.
pub fn effective_dimension(lambda: f64) -> Result<f64> {
    Ok(2.0 * effective_shape(lambda)?)
}

/// Inverse of [`effective_dimension`]: `lambda = (N - 2) / (N + 4)`.
pub fn lambda_of_dimension(dimension: f64) -> Result<f64> {
    if !(dimension >= 2.0) || dimension.is_infinite() {
        return Err(domain(format!("effective dimension must be finite and >= 2, got {dimension}")));
    }
    Ok((dimension - 2.0) / (dimension + 4.0))
}

/// Reshuffled fraction `1 - lambda` expressed through the dimension: `6 / (N + 4)`.
///
/// The mean per-trade coefficient `<eps (1 - lambda)>` is half of this,
/// `3 / (N + 4)`.
pub fn exchanged_fraction(dimension: f64) -> Result<f64> {
    lambda_of_dimension(dimension)?;
    Ok(6.0 / (dimension + 4.0))
}

/// Equipartition temperature `T = 2 <x> / N`.
pub fn effective_temperature(mean_wealth: f64, dimension: f64) -> Result<f64> {
    if !(mean_wealth > 0.0) {
        return Err(domain(format!("mean wealth must be positive, got {mean_wealth}")));
    }
    if !(dimension >= 2.0) {
        return Err(domain(format!("dimension must be >= 2, got {dimension}")));
    }
    Ok(2.0 * mean_wealth / dimension)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trade_no_saving_examples() {
        assert_eq!(trade_no_saving(1.0, 1.0, 0.5).unwrap(), (1.0, 1.0));
        assert_eq!(trade_no_saving(2.0, 0.0, 0.25).unwrap(), (0.5, 1.5));
        assert!(trade_no_saving(-1.0, 1.0, 0.5).is_err());
        assert!(trade_no_saving(1.0, 1.0, 0.0).is_err());
        assert!(trade_no_saving(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn trade_with_saving_examples() {
        assert_eq!(trade_with_saving(1.0, 1.0, 0.5, 0.5).unwrap(), (1.0, 1.0));
        // eps = 0 is outside the open interval drawn by the sampler
        assert!(trade_with_saving(2.0, 0.0, 0.5, 0.0).is_err());
        assert_eq!(trade_with_saving_unchecked(2.0, 0.0, 0.5, 0.0), (1.0, 1.0));
        assert!(trade_with_saving(1.0, 1.0, 1.0, 0.5).is_err());
        assert!(trade_with_saving(1.0, 1.0, -0.1, 0.5).is_err());
    }

    #[test]
    fn shape_and_dimension() {
        assert_eq!(effective_shape(0.0).unwrap(), 1.0);
        assert_eq!(effective_shape(0.5).unwrap(), 4.0);
        assert!((effective_shape(0.9).unwrap() - 28.0).abs() < 1e-12);
        assert_eq!(effective_dimension(0.5).unwrap(), 8.0);
        assert!(effective_shape(1.0).is_err());
        assert_eq!(lambda_of_dimension(2.0).unwrap(), 0.0);
        assert_eq!(lambda_of_dimension(8.0).unwrap(), 0.5);
        assert!(lambda_of_dimension(1.5).is_err());
        let back = lambda_of_dimension(effective_dimension(0.3).unwrap()).unwrap();
        assert!((back - 0.3).abs() < 1e-12);
        assert!((exchanged_fraction(8.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn temperature_examples() {
        assert_eq!(effective_temperature(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(effective_temperature(1.0, 8.0).unwrap(), 0.25);
        assert!(effective_temperature(0.0, 8.0).is_err());
    }

    #[test]
    fn ensemble_validation() {
        assert!(WealthEnsemble::new(vec![1.0]).is_err());
        assert!(WealthEnsemble::new(vec![1.0, -0.5]).is_err());
        assert!(WealthEnsemble::new(vec![1.0, f64::NAN]).is_err());
        let e = WealthEnsemble::uniform(10, 1.0).unwrap();
        assert_eq!(e.total(), 10.0);
        assert_eq!(e.mean(), 1.0);
    }

    #[test]
    fn single_trade_run_matches_direct_call() {
        let start = WealthEnsemble::new(vec![3.0, 0.5]).unwrap();
        let params = ExchangeParams::new(0.3, 1, 99).unwrap();
        let out = run_exchange(start.clone(), &params).unwrap();
        let mut rng = stream_rng(99, 0);
        let (i, j, eps) = draw_trade(&mut rng, 2);
        let (xi, xj) = trade_with_saving(start.wealths()[i], start.wealths()[j], 0.3, eps).unwrap();
        let mut expected = start.wealths().to_vec();
        expected[i] = xi;
        expected[j] = xj;
        assert_eq!(out.wealths(), expected.as_slice());
    }

    #[test]
    fn runs_are_deterministic_and_conserve_wealth() {
        let start = WealthEnsemble::uniform(100, 1.0).unwrap();
        let params = ExchangeParams::new(0.2, 200_000, 5).unwrap();
        let a = run_exchange(start.clone(), &params).unwrap();
        let b = run_exchange(start, &params).unwrap();
        assert_eq!(a, b);
        assert!(((a.current_sum() - a.total()) / a.total()).abs() < 1e-9);
        assert!(a.wealths().iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn snapshot_protocol_counts() {
        let start = WealthEnsemble::uniform(10, 1.0).unwrap();
        let params = ExchangeParams::new(0.0, 1_005, 1).unwrap();
        let snap = sample_equilibrium(start, &params).unwrap();
        // 503 post burn-in trades -> 50 snapshots of 10 agents
        assert_eq!(snap.snapshots, 50);
        assert_eq!(snap.values.len(), 500);
        assert!(sample_replicates(&WealthEnsemble::uniform(10, 1.0).unwrap(), &params, 0).is_err());
    }

    #[test]
    fn replicates_use_distinct_streams() {
        let start = WealthEnsemble::uniform(20, 1.0).unwrap();
        let params = ExchangeParams::new(0.5, 2_000, 3).unwrap();
        let reps = sample_replicates(&start, &params, 3).unwrap();
        assert_eq!(reps.iter().map(|r| r.stream).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_ne!(reps[0].values, reps[1].values);
        assert_eq!(reps[2], sample_equilibrium(start, &params.with_stream(2)).unwrap());
    }

    proptest! {
        #[test]
        fn trade_conserves_and_saves(xi in 0.0f64..1e6, xj in 0.0f64..1e6,
                                     lambda in 0.0f64..0.999, eps in 1e-9f64..(1.0 - 1e-9)) {
            let (a, b) = trade_with_saving(xi, xj, lambda, eps).unwrap();
            let s = xi + xj;
            prop_assert!((a + b - s).abs() <= 4.0 * f64::EPSILON * s);
            prop_assert!(a >= 0.0 && b >= 0.0);
            prop_assert!(a >= lambda * xi);
            prop_assert!(b >= lambda * xj);
        }

        #[test]
        fn zero_saving_is_bitwise_no_saving(xi in 0.0f64..1e6, xj in 0.0f64..1e6, eps in 1e-9f64..(1.0 - 1e-9)) {
            prop_assert_eq!(trade_with_saving(xi, xj, 0.0, eps).unwrap(), trade_no_saving(xi, xj, eps).unwrap());
        }
    }
}
