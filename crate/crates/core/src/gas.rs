//! Equal-mass elastic collisions in N dimensions.
//!
//! A collision transfers momentum `dv` along a unit direction `u`:
//! `dv = -((v1 - v2) . u) u`, `v1' = v1 + dv`, `v2' = v2 - dv`. With unit
//! masses this conserves momentum and kinetic energy for any `u`, and the
//! energy bookkeeping takes the exchange form
//! `x1' = x1 + r2^2 x2 - r1^2 x1` where `r_i` is the cosine between `dv` and
//! the incoming velocity `v_i`.
//!
//! Transfer directions are drawn uniformly on the sphere, independent of the
//! velocities (molecular chaos). A hard-sphere kernel weighting collisions
//! by relative speed would change relaxation rates but not the equilibrium
//! energy law, which is a gamma distribution of shape `N / 2`.
//!
//! In one dimension `u = +-1` and every collision swaps the two velocities,
//! so a 1D gas never relaxes: it only permutes its initial speeds.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::rng::{stream_rng, SimRng};

const UNIT_NORM_TOL: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `M` unit-mass particles with `N`-component velocities stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GasState {
    velocities: Vec<f64>,
    dimension: usize,
    total_energy: f64,
    total_momentum: Vec<f64>,
}

impl GasState {
    pub fn new(velocities: Vec<f64>, dimension: usize) -> Result<Self> {
        if dimension < 1 {
            return Err(domain("dimension must be at least 1"));
        }
        if !velocities.len().is_multiple_of(dimension) {
            return Err(Error::Config(format!(
                "velocity buffer of length {} is not a multiple of dimension {dimension}",
                velocities.len()
            )));
        }
        if velocities.len() / dimension < 2 {
            return Err(Error::Config("a gas needs at least 2 particles".into()));
        }
        if velocities.iter().any(|v| !v.is_finite()) {
            return Err(domain("velocities must be finite"));
        }
        let mut state = Self { velocities, dimension, total_energy: 0.0, total_momentum: vec![] };
        state.total_energy = state.energy();
        state.total_momentum = state.momentum();
        Ok(state)
    }

    /// Every particle at `speed`, each pointing in an independent uniform direction.
    pub fn equal_speeds(particles: usize, dimension: usize, speed: f64, seed: u64) -> Result<Self> {
        if dimension < 1 {
            return Err(domain("dimension must be at least 1"));
        }
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(domain(format!("speed must be finite and nonnegative, got {speed}")));
        }
        let mut rng = stream_rng(seed, u64::MAX);
        let mut velocities = vec![0.0; particles * dimension];
        for v in velocities.chunks_exact_mut(dimension) {
            fill_unit_direction(v, &mut rng);
            v.iter_mut().for_each(|c| *c *= speed);
        }
        Self::new(velocities, dimension)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn particles(&self) -> usize {
        self.velocities.len() / self.dimension
    }

    pub fn velocity(&self, k: usize) -> &[f64] {
        &self.velocities[k * self.dimension..(k + 1) * self.dimension]
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    /// Energy and momentum recorded when the state was built.
    pub fn initial_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn initial_momentum(&self) -> &[f64] {
        &self.total_momentum
    }

    /// Recomputed total kinetic energy `1/2 sum |v|^2`.
    pub fn energy(&self) -> f64 {
        0.5 * self.velocities.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn momentum(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.dimension];
        for v in self.velocities.chunks_exact(self.dimension) {
            p.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        }
        p
    }

    pub fn kinetic_energies(&self) -> Vec<f64> {
        self.velocities.chunks_exact(self.dimension).map(|v| 0.5 * dot(v, v)).collect()
    }
}

fn fill_unit_direction(out: &mut [f64], rng: &mut SimRng) {
    loop {
        for c in out.iter_mut() {
            *c = rng.sample(StandardNormal);
        }
        let n = norm(out);
        if n > 0.0 {
            out.iter_mut().for_each(|c| *c /= n);
            return;
        }
    }
}

/// Direction uniform on the unit (N-1)-sphere, from normalized Gaussian deviates.
pub fn sample_unit_direction(dimension: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    if dimension < 1 {
        return Err(domain("dimension must be at least 1"));
    }
    let mut u = vec![0.0; dimension];
    fill_unit_direction(&mut u, rng);
    Ok(u)
}

/// Post-collision velocities and the momentum transfer `dv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collision {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub transfer: Vec<f64>,
}

/// Elastic collision with transfer direction `u_hat` (must be unit norm).
pub fn collide(v1: &[f64], v2: &[f64], u_hat: &[f64]) -> Result<Collision> {
    if v1.len() != v2.len() || v1.len() != u_hat.len() || v1.is_empty() {
        return Err(domain("velocities and direction must share a nonzero dimension"));
    }
    let un = norm(u_hat);
    if (un - 1.0).abs() > UNIT_NORM_TOL {
        return Err(domain(format!("transfer direction must have unit norm, got {un}")));
    }
    let mut out = Collision { v1: v1.to_vec(), v2: v2.to_vec(), transfer: vec![0.0; v1.len()] };
    collide_in_place(&mut out.v1, &mut out.v2, u_hat, Some(&mut out.transfer));
    Ok(out)
}

#[inline]
fn collide_in_place(a: &mut [f64], b: &mut [f64], u: &[f64], transfer: Option<&mut [f64]>) {
    let proj: f64 = a.iter().zip(b.iter()).zip(u).map(|((x, y), w)| (x - y) * w).sum();
    if let Some(t) = transfer {
        t.iter_mut().zip(u).for_each(|(t, w)| *t = -proj * w);
    }
    for k in 0..u.len() {
        let dv = -proj * u[k];
        a[k] += dv;
        b[k] -= dv;
    }
}

/// Cosines between the transfer and each incoming velocity; `None` where undefined
/// (zero speed or zero transfer).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionCosines {
    pub r1: Option<f64>,
    pub r2: Option<f64>,
}

pub fn collision_cosines(v1: &[f64], v2: &[f64], transfer: &[f64]) -> Result<CollisionCosines> {
    if v1.len() != v2.len() || v1.len() != transfer.len() {
        return Err(domain("dimension mismatch"));
    }
    let dn = norm(transfer);
    let cosine = |v: &[f64]| {
        let vn = norm(v);
        if vn == 0.0 || dn == 0.0 {
            None
        } else {
            Some((dot(v, transfer) / (vn * dn)).clamp(-1.0, 1.0))
        }
    };
    Ok(CollisionCosines { r1: cosine(v1), r2: cosine(v2) })
}

/// Energy update written with the collision cosines:
/// `(x1 + r2^2 x2 - r1^2 x1, x2 - r2^2 x2 + r1^2 x1)`.
pub fn energy_update_form(x1: f64, x2: f64, r1: f64, r2: f64) -> Result<(f64, f64)> {
    if !(x1 >= 0.0 && x2 >= 0.0) {
        return Err(domain(format!("energies must be nonnegative, got ({x1}, {x2})")));
    }
    if !((-1.0..=1.0).contains(&r1) && (-1.0..=1.0).contains(&r2)) {
        return Err(domain(format!("cosines must lie in [-1, 1], got ({r1}, {r2})")));
    }
    let (k1, k2) = (r1 * r1, r2 * r2);
    Ok(((1.0 - k1) * x1 + k2 * x2, (1.0 - k2) * x2 + k1 * x1))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    /// Draws skipped because the cosine was undefined.
    pub undefined: usize,
}

/// Estimates `<r1^2>` over independent collisions.
///
/// Incoming velocities are isotropic Gaussian vectors (random directions and
/// speeds) and the transfer direction is uniform on the sphere. The exact
/// value is `1 / N`.
pub fn mean_square_cosine(dimension: usize, samples: usize, seed: u64) -> Result<Estimate> {
    if dimension < 1 {
        return Err(domain("dimension must be at least 1"));
    }
    if samples < 1_000 {
        return Err(Error::Config(format!("need at least 1000 samples, got {samples}")));
    }
    let mut rng = stream_rng(seed, 0);
    let mut v1 = vec![0.0; dimension];
    let mut v2 = vec![0.0; dimension];
    let mut u = vec![0.0; dimension];
    let mut transfer = vec![0.0; dimension];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let (mut used, mut undefined) = (0usize, 0usize);
    while used < samples {
        for k in 0..dimension {
            v1[k] = rng.sample(StandardNormal);
            v2[k] = rng.sample(StandardNormal);
        }
        fill_unit_direction(&mut u, &mut rng);
        let (mut a, mut b) = (v1.clone(), v2.clone());
        collide_in_place(&mut a, &mut b, &u, Some(&mut transfer));
        match collision_cosines(&v1, &v2, &transfer)?.r1 {
            Some(r) => {
                let r2 = r * r;
                sum += r2;
                sum_sq += r2 * r2;
                used += 1;
            }
            None => undefined += 1,
        }
    }
    let n = used as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(Estimate { mean, std_error: (var / n).sqrt(), samples: used, undefined })
}

/// Collision-count and seeding for a gas run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    pub collisions: u64,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
}

impl GasParams {
    pub fn new(collisions: u64, seed: u64) -> Self {
        Self { collisions, seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }
}

#[inline]
fn gas_step(state: &mut GasState, u: &mut [f64], rng: &mut SimRng) -> (usize, usize) {
    let m = state.particles();
    let d = state.dimension;
    let i = rng.random_range(0..m);
    let mut j = rng.random_range(0..m - 1);
    if j >= i {
        j += 1;
    }
    fill_unit_direction(u, rng);
    let (lo, hi) = if i < j { (i, j) } else { (j, i) };
    let (head, tail) = state.velocities.split_at_mut(hi * d);
    let a = &mut head[lo * d..lo * d + d];
    let b = &mut tail[..d];
    if i < j {
        collide_in_place(a, b, u, None);
    } else {
        collide_in_place(b, a, u, None);
    }
    (i, j)
}

/// Applies `params.collisions` collisions between uniformly chosen distinct pairs.
pub fn run_gas(mut state: GasState, params: &GasParams) -> Result<GasState> {
    if state.particles() < 2 {
        return Err(Error::Config("a gas needs at least 2 particles".into()));
    }
    let mut rng = stream_rng(params.seed, params.stream);
    let mut u = vec![0.0; state.dimension];
    for _ in 0..params.collisions {
        gas_step(&mut state, &mut u, &mut rng);
    }
    Ok(state)
}

/// Worst per-collision conservation errors seen during an audited run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CollisionAudit {
    /// max |E'_pair - E_pair| / E_pair
    pub energy: f64,
    /// max |p'_pair - p_pair| / (|v1| + |v2|)
    pub momentum: f64,
    /// max |dv^2 + (v1 - v2) . dv| / (|v1| + |v2|)^2
    pub transfer_residual: f64,
}

/// Same trajectory as [`run_gas`], recording per-collision conservation errors.
pub fn run_gas_audited(mut state: GasState, params: &GasParams) -> Result<(GasState, CollisionAudit)> {
    if state.particles() < 2 {
        return Err(Error::Config("a gas needs at least 2 particles".into()));
    }
    let d = state.dimension;
    let mut rng = stream_rng(params.seed, params.stream);
    let mut u = vec![0.0; d];
    let mut audit = CollisionAudit::default();
    let (mut before1, mut before2) = (vec![0.0; d], vec![0.0; d]);
    for _ in 0..params.collisions {
        // Peek at the pair by cloning the RNG; the real step consumes identical draws.
        let mut peek = rng.clone();
        let m = state.particles();
        let i = peek.random_range(0..m);
        let mut j = peek.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        before1.copy_from_slice(state.velocity(i));
        before2.copy_from_slice(state.velocity(j));
        let stepped = gas_step(&mut state, &mut u, &mut rng);
        debug_assert_eq!(stepped, (i, j));
        let (a, b) = (state.velocity(i), state.velocity(j));
        let scale = norm(&before1) + norm(&before2);
        if scale == 0.0 {
            continue;
        }
        let e0 = 0.5 * (dot(&before1, &before1) + dot(&before2, &before2));
        let e1 = 0.5 * (dot(a, a) + dot(b, b));
        if e0 > 0.0 {
            audit.energy = audit.energy.max((e1 - e0).abs() / e0);
        }
        let mut dp: f64 = 0.0;
        let mut dv2 = 0.0;
        let mut rel = 0.0;
        for k in 0..d {
            dp = dp.max(((a[k] + b[k]) - (before1[k] + before2[k])).abs());
            let dv = a[k] - before1[k];
            dv2 += dv * dv;
            rel += (before1[k] - before2[k]) * dv;
        }
        audit.momentum = audit.momentum.max(dp / scale);
        audit.transfer_residual = audit.transfer_residual.max((dv2 + rel).abs() / (scale * scale));
    }
    Ok((state, audit))
}

/// Pooled per-particle kinetic energies from an equilibrated gas run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySnapshots {
    pub dimension: usize,
    pub particles: usize,
    pub collisions: u64,
    pub seed: u64,
    pub stream: u64,
    pub snapshots: usize,
    /// Relative drift of total energy over the run.
    pub energy_drift: f64,
    /// Max component-wise momentum drift divided by the initial total speed sum.
    pub momentum_drift: f64,
    pub values: Vec<f64>,
}

/// Runs the gas, discarding the first half of the collisions, then recording
/// all kinetic energies every `M` collisions.
pub fn sample_gas_equilibrium(state: GasState, params: &GasParams) -> Result<EnergySnapshots> {
    let m = state.particles();
    if m < 2 {
        return Err(Error::Config("a gas needs at least 2 particles".into()));
    }
    let speed_scale: f64 = state.velocities.chunks_exact(state.dimension).map(norm).sum();
    let mut rng = stream_rng(params.seed, params.stream);
    let mut u = vec![0.0; state.dimension];
    let mut state = state;
    let burn_in = params.collisions / 2;
    for _ in 0..burn_in {
        gas_step(&mut state, &mut u, &mut rng);
    }
    let interval = m as u64;
    let snapshots = ((params.collisions - burn_in) / interval) as usize;
    let mut values = Vec::with_capacity(snapshots * m);
    for _ in 0..snapshots {
        for _ in 0..interval {
            gas_step(&mut state, &mut u, &mut rng);
        }
        values.extend(state.kinetic_energies());
    }
    for _ in 0..(params.collisions - burn_in) % interval {
        gas_step(&mut state, &mut u, &mut rng);
    }
    let e0 = state.initial_energy();
    let energy_drift = if e0 > 0.0 { (state.energy() - e0).abs() / e0 } else { 0.0 };
    let momentum_drift =
        state.momentum().iter().zip(state.initial_momentum()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            / speed_scale.max(f64::MIN_POSITIVE);
    Ok(EnergySnapshots {
        dimension: state.dimension,
        particles: m,
        collisions: params.collisions,
        seed: params.seed,
        stream: params.stream,
        snapshots,
        energy_drift,
        momentum_drift,
        values,
    })
}

/// Independent gas replicates on streams `0..replicates`, in stream order.
pub fn sample_gas_replicates(
    initial: &GasState,
    params: &GasParams,
    replicates: usize,
) -> Result<Vec<EnergySnapshots>> {
    if replicates == 0 {
        return Err(Error::Config("replicates must be at least 1".into()));
    }
    (0..replicates as u64)
        .into_par_iter()
        .map(|k| sample_gas_equilibrium(initial.clone(), &params.with_stream(k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn one_dimensional_direction_is_a_sign() {
        let mut rng = stream_rng(1, 0);
        let mut plus = 0;
        for _ in 0..10_000 {
            let u = sample_unit_direction(1, &mut rng).unwrap();
            assert!(u[0] == 1.0 || u[0] == -1.0);
            if u[0] > 0.0 {
                plus += 1;
            }
        }
        // binomial(10^4, 1/2): sd = 50
        assert!((plus as i64 - 5_000).abs() < 250);
        assert!(sample_unit_direction(0, &mut rng).is_err());
    }

    #[test]
    fn directions_have_unit_norm() {
        let mut rng = stream_rng(2, 0);
        for n in 1..12 {
            let u = sample_unit_direction(n, &mut rng).unwrap();
            assert!((norm(&u) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn head_on_swap() {
        let c = collide(&[1.0], &[-1.0], &[1.0]).unwrap();
        assert_eq!(c.v1, vec![-1.0]);
        assert_eq!(c.v2, vec![1.0]);
        let cos = collision_cosines(&[1.0], &[-1.0], &c.transfer).unwrap();
        assert_eq!(cos.r1, Some(-1.0));
        assert_eq!(cos.r2, Some(1.0));
    }

    #[test]
    fn equal_velocities_do_not_exchange() {
        let c = collide(&[0.3, -0.2], &[0.3, -0.2], &[0.6, 0.8]).unwrap();
        assert_eq!(c.v1, vec![0.3, -0.2]);
        assert_eq!(c.v2, vec![0.3, -0.2]);
        let cos = collision_cosines(&[0.3, -0.2], &[0.3, -0.2], &c.transfer).unwrap();
        assert_eq!(cos, CollisionCosines { r1: None, r2: None });
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(collide(&[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]).is_err());
        assert!(collide(&[1.0, 0.0], &[0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn orthogonal_transfer_has_zero_cosine() {
        let cos = collision_cosines(&[1.0, 0.0], &[1.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(cos.r1, Some(0.0));
        let zero_speed = collision_cosines(&[0.0, 0.0], &[1.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(zero_speed.r1, None);
        assert!(zero_speed.r2.is_some());
    }

    #[test]
    fn energy_form_limits() {
        assert_eq!(energy_update_form(0.7, 0.2, 1.0, -1.0).unwrap(), (0.2, 0.7));
        assert_eq!(energy_update_form(0.7, 0.2, 0.0, 0.0).unwrap(), (0.7, 0.2));
        assert!(energy_update_form(-0.1, 0.2, 0.0, 0.0).is_err());
        assert!(energy_update_form(0.1, 0.2, 1.5, 0.0).is_err());
    }

    #[test]
    fn one_dimensional_square_cosine_is_exactly_one() {
        let est = mean_square_cosine(1, 2_000, 4).unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.std_error, 0.0);
        assert!(mean_square_cosine(3, 10, 4).is_err());
    }

    #[test]
    fn zero_collisions_leave_state_unchanged() {
        let s = GasState::equal_speeds(10, 3, 1.0, 8).unwrap();
        assert_eq!(run_gas(s.clone(), &GasParams::new(0, 1)).unwrap(), s);
        assert!(GasState::new(vec![1.0, 2.0], 2).is_err());
        assert!(GasState::new(vec![1.0, 2.0, 3.0], 2).is_err());
    }

    #[test]
    fn runs_are_deterministic_and_conservative() {
        let s = GasState::equal_speeds(50, 3, 1.0, 8).unwrap();
        let p = GasParams::new(100_000, 11);
        let a = run_gas(s.clone(), &p).unwrap();
        let (b, audit) = run_gas_audited(s.clone(), &p).unwrap();
        assert_eq!(a, b);
        assert!(audit.energy < 1e-12);
        assert!(audit.momentum < 1e-12);
        assert!(audit.transfer_residual < 1e-12);
        assert!(((a.energy() - s.energy()) / s.energy()).abs() < 1e-9);
        for (x, y) in a.momentum().iter().zip(s.momentum()) {
            assert!((x - y).abs() < 1e-9 * 50.0);
        }
    }

    #[test]
    fn long_run_is_isotropic() {
        let s = GasState::equal_speeds(400, 3, 1.0, 21).unwrap();
        let p0 = s.momentum();
        let out = run_gas(s, &GasParams::new(400_000, 22)).unwrap();
        // Component means equal the conserved centre-of-mass velocity; the
        // spread around it is isotropic with mean square speed 1 / N each.
        let m = out.particles() as f64;
        for (k, total) in p0.iter().enumerate() {
            let comp: Vec<f64> = (0..out.particles()).map(|i| out.velocity(i)[k]).collect();
            let mean = comp.iter().sum::<f64>() / m;
            assert!((mean - total / m).abs() < 1e-12);
            let ms = comp.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / m;
            // variance of a sample mean square: 2 sigma^4 / M, sigma^2 ~ 1/3
            assert!((ms - 1.0 / 3.0).abs() < 5.0 * (2.0f64 / m).sqrt() / 3.0);
        }
    }

    #[test]
    fn three_dimensional_directions_have_sphere_moments() {
        let mut rng = stream_rng(3, 0);
        let m = 1_000_000;
        let (mut sum, mut sq) = ([0.0f64; 3], [0.0f64; 3]);
        let mut fourth = [0.0f64; 3];
        for _ in 0..m {
            let u = sample_unit_direction(3, &mut rng).unwrap();
            for k in 0..3 {
                sum[k] += u[k];
                sq[k] += u[k] * u[k];
                fourth[k] += u[k].powi(4);
            }
        }
        let m = m as f64;
        for k in 0..3 {
            // component variance 1/3; mean-square variance <u^4> - 1/9
            let se_mean = (sq[k] / m / m).sqrt();
            assert!((sum[k] / m).abs() < 3.0 * se_mean);
            let se_sq = ((fourth[k] / m - (sq[k] / m).powi(2)) / m).sqrt();
            assert!((sq[k] / m - 1.0 / 3.0).abs() < 3.0 * se_sq, "component {k}");
        }
    }

    #[test]
    fn planar_collision_with_resting_partner_conserves() {
        let mut rng = stream_rng(4, 0);
        for _ in 0..100 {
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let u = [theta.cos(), theta.sin()];
            let c = collide(&[1.0, 0.0], &[0.0, 0.0], &u).unwrap();
            let energy = 0.5 * (dot(&c.v1, &c.v1) + dot(&c.v2, &c.v2));
            assert!((energy - 0.5).abs() < 1e-12);
            assert!((c.v1[0] + c.v2[0] - 1.0).abs() < 1e-12);
            assert!((c.v1[1] + c.v2[1]).abs() < 1e-12);
        }
    }

    /// Cartesian components from hyperspherical angles: `v_k = v sin(a_1)..sin(a_{k-1}) cos(a_k)`,
    /// with the last component carrying only sines.
    fn from_angles(modulus: f64, angles: &[f64]) -> Vec<f64> {
        let n = angles.len() + 1;
        let mut out = Vec::with_capacity(n);
        let mut sines = modulus;
        for &a in angles {
            out.push(sines * a.cos());
            sines *= a.sin();
        }
        out.push(sines);
        out
    }

    #[test]
    fn cosine_matches_angular_expansion() {
        let mut rng = stream_rng(5, 0);
        for n in [2usize, 3] {
            for _ in 0..200 {
                let phi: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
                let theta: Vec<f64> = (0..n - 1).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect();
                let v1 = from_angles(rng.random_range(0.1..3.0), &phi);
                let dv = from_angles(rng.random_range(0.1..3.0), &theta);
                let unit_v = from_angles(1.0, &phi);
                let unit_dv = from_angles(1.0, &theta);
                // sum over components of products of the angular factors
                let expansion: f64 = unit_v.iter().zip(&unit_dv).map(|(a, b)| a * b).sum();
                let r1 = collision_cosines(&v1, &v1, &dv).unwrap().r1.unwrap();
                assert!((r1 - expansion).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn collisions_conserve(v in proptest::collection::vec(-10.0f64..10.0, 8), seed in 0u64..1000) {
            let mut rng = stream_rng(seed, 0);
            let u = sample_unit_direction(4, &mut rng).unwrap();
            let (v1, v2) = v.split_at(4);
            let c = collide(v1, v2, &u).unwrap();
            let scale = norm(v1) + norm(v2);
            let e0 = dot(v1, v1) + dot(v2, v2);
            let e1 = dot(&c.v1, &c.v1) + dot(&c.v2, &c.v2);
            prop_assert!((e1 - e0).abs() <= 1e-12 * scale * scale);
            for k in 0..4 {
                prop_assert!((c.v1[k] + c.v2[k] - v1[k] - v2[k]).abs() <= 1e-12 * scale);
            }
            let rel: Vec<f64> = v1.iter().zip(v2).map(|(a, b)| a - b).collect();
            let residual = dot(&c.transfer, &c.transfer) + dot(&rel, &c.transfer);
            prop_assert!(residual.abs() <= 1e-12 * scale * scale);
        }

        #[test]
        fn transfer_modulus_identity(v in proptest::collection::vec(-10.0f64..10.0, 6), seed in 0u64..1000) {
            let mut rng = stream_rng(seed, 1);
            let u = sample_unit_direction(3, &mut rng).unwrap();
            let (v1, v2) = v.split_at(3);
            let c = collide(v1, v2, &u).unwrap();
            let cos = collision_cosines(v1, v2, &c.transfer).unwrap();
            if let (Some(r1), Some(r2)) = (cos.r1, cos.r2) {
                let scale = norm(v1) + norm(v2);
                prop_assert!((norm(&c.transfer) - (-r1 * norm(v1) + r2 * norm(v2))).abs() <= 1e-12 * scale);
            }
        }

        #[test]
        fn energy_form_reproduces_kinematics(v in proptest::collection::vec(-10.0f64..10.0, 10), seed in 0u64..1000) {
            let mut rng = stream_rng(seed, 2);
            let u = sample_unit_direction(5, &mut rng).unwrap();
            let (v1, v2) = v.split_at(5);
            let c = collide(v1, v2, &u).unwrap();
            let cos = collision_cosines(v1, v2, &c.transfer).unwrap();
            if let (Some(r1), Some(r2)) = (cos.r1, cos.r2) {
                let (x1, x2) = (0.5 * dot(v1, v1), 0.5 * dot(v2, v2));
                let (y1, y2) = energy_update_form(x1, x2, r1, r2).unwrap();
                let total = x1 + x2;
                prop_assert!((y1 - 0.5 * dot(&c.v1, &c.v1)).abs() <= 1e-9 * total);
                prop_assert!((y2 - 0.5 * dot(&c.v2, &c.v2)).abs() <= 1e-9 * total);
            }
        }
    }
}
