#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use canontime::oracle::oracle_spectrum;
use canontime::{box_state, build_oracle_state, EnergyState, FreeParticleParams, SpectrumSpec, TimeGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BOX_E_MAX: f64 = 4.0;

/// m = 1, σ = 1, so a = 1/2.
pub fn oracle_params() -> FreeParticleParams {
    FreeParticleParams::new(1.0, 1.0).unwrap()
}

pub fn oracle_state() -> EnergyState {
    let p = oracle_params();
    build_oracle_state(&p, Arc::new(oracle_spectrum(&p, 4001).unwrap())).unwrap()
}

/// Resolves the (t² + a²)^{-3/2} tails out to |t| = 2000.
pub fn oracle_grid() -> TimeGrid {
    TimeGrid::sinh(2000.0, 4001, 0.5).unwrap()
}

/// Uniform box on [0, E_max]; two nodes already hold the whole envelope.
pub fn box_with_nodes(nodes: usize) -> EnergyState {
    box_state(Arc::new(SpectrumSpec::uniform(BOX_E_MAX, nodes, 1).unwrap())).unwrap()
}

/// The box density decays like 2/(π E t²), so 1e-6 coverage needs |t| ≈ 3.3e5.
/// Spacing 0.1875 stays well under the Nyquist limit 2π/E_max.
pub fn box_grid() -> TimeGrid {
    TimeGrid::symmetric(327_680.0, 3_495_254).unwrap()
}

/// Band-limited state: a random trigonometric polynomial under a sin² bump
/// that vanishes at both ends of [0, E_max].
pub fn random_state(rng: &mut ChaCha8Rng, degeneracy: usize, nodes: usize) -> EnergyState {
    let e_max: f64 = rng.random_range(2.0..6.0);
    let coef: Vec<Complex64> =
        (0..3 * degeneracy).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let s = Arc::new(SpectrumSpec::uniform(e_max, nodes, degeneracy).unwrap());
    EnergyState::sample(
        s,
        |j, e| {
            if e > e_max {
                return Complex64::new(0.0, 0.0);
            }
            let bump = (PI * e / e_max).sin().powi(2);
            (0..3).map(|m| coef[3 * j + m] * Complex64::cis(m as f64 * PI * e / e_max)).sum::<Complex64>() * bump
        },
        1e-10,
    )
    .unwrap()
}

/// Twenty states alternating d = 1 and d = 2, seed 7.
pub fn random_corpus() -> Vec<EnergyState> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    (0..20).map(|i| random_state(&mut rng, 1 + i % 2, 2001)).collect()
}

/// A smooth band-limited density falls off fast; 2^11 nodes at the default
/// spacing reach |t| ≈ 1000/E_max, far past where it drops below 1e-12.
pub fn random_grid(state: &EnergyState) -> TimeGrid {
    let dt = PI / (8.0 * state.spectrum().e_max());
    TimeGrid::symmetric(1024.0 * dt, 2049).unwrap()
}
