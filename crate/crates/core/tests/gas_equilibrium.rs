use kinex::gas::{sample_gas_equilibrium, GasParams, GasState};
use kinex::stats::fit_gamma_moments;

fn equilibrium_shape(dimension: usize) -> f64 {
    let state = GasState::equal_speeds(1_000, dimension, 2f64.sqrt(), 11).unwrap();
    let snaps = sample_gas_equilibrium(state, &GasParams::new(10_000_000, 12)).unwrap();
    assert!(snaps.energy_drift < 1e-6);
    fit_gamma_moments(&snaps.values).unwrap().shape
}

#[test]
fn kinetic_energy_shape_is_half_the_dimension() {
    for dimension in [2usize, 3, 6] {
        let expected = 0.5 * dimension as f64;
        let shape = equilibrium_shape(dimension);
        assert!((shape - expected).abs() / expected < 0.05, "N = {dimension}: shape {shape}");
    }
}
