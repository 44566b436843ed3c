//! Workloads shared by the benchmarks.

use std::f64::consts::PI;
use std::sync::Arc;

use canontime::{box_state, EnergyState, SpectrumSpec};
use num_complex::Complex64;

/// sin² bump with a linear phase on [0, 4], sampled at `nodes` points.
pub fn bump_state(nodes: usize) -> EnergyState {
    let e_max = 4.0;
    let s = Arc::new(SpectrumSpec::uniform(e_max, nodes, 1).expect("valid grid"));
    EnergyState::sample(
        s,
        |_, e| {
            if e > e_max {
                return Complex64::new(0.0, 0.0);
            }
            Complex64::cis(0.3 * e) * (PI * e / e_max).sin().powi(2)
        },
        1e-10,
    )
    .expect("bump state")
}

pub fn uniform_box(nodes: usize) -> EnergyState {
    box_state(Arc::new(SpectrumSpec::uniform(4.0, nodes, 1).expect("valid grid"))).expect("box state")
}

/// Levels 0, 1, √2, ... (√k for k ≥ 2), generically incommensurate.
pub fn incommensurate_spectrum(levels: usize) -> Arc<SpectrumSpec> {
    let energies = (0..levels).map(|k| if k < 2 { k as f64 } else { (k as f64).sqrt() }).collect();
    Arc::new(SpectrumSpec::discrete(energies, 1).expect("valid levels"))
}
