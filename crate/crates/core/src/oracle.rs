//! Closed-form free-particle results used as ground truth.
//!
//! A free particle of mass m at rest with Gaussian momentum spread σ has
//! two energy branches j = ± (p = ±(2mE)^{1/2}) and the time scale
//! a = m / (2σ²). The reference state here is
//! ψ_±(E) = √2 a E^{1/2} e^{−aE}, whose canonical time density and
//! arrow-of-time curve are
//!
//! p_T(t) = (a²/2)(t² + a²)^{−3/2},   ⟨M_F⟩(t) = 1/2 − t / (2√(t² + a²)).
//!
//! The plain momentum Gaussian ψ_±(E) ∝ E^{−1/4} e^{−aE} is provided as
//! well; its density is N'(t² + a²)^{−3/4}.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{EnergyState, SpectrumSpec, DEFAULT_TAIL_TOL};

/// Largest quadrature norm error accepted for a sampled oracle state.
pub const NORM_RESOLUTION: f64 = 1e-6;

/// Value of the Beta function B(1/2, 1/4).
const BETA_HALF_QUARTER: f64 = 5.244_115_108_584_24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParticleParams {
    pub m: f64,
    pub sigma: f64,
}

impl FreeParticleParams {
    pub fn new(m: f64, sigma: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite() && sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("m = {m} and sigma = {sigma} must be positive")));
        }
        Ok(Self { m, sigma })
    }

    /// a = m / (2σ²).
    pub fn a(&self) -> f64 {
        self.m / (2.0 * self.sigma * self.sigma)
    }

    /// Probability of the reference state above `e`.
    pub fn tail_mass(&self, e: f64) -> f64 {
        let x = 2.0 * self.a() * e;
        (-x).exp() * (1.0 + x)
    }
}

/// Quadratic grid with `nodes` points whose top leaves a tail mass below
/// 1e-14.
pub fn oracle_spectrum(params: &FreeParticleParams, nodes: usize) -> Result<SpectrumSpec> {
    let e_max = 36.0 / (2.0 * params.a());
    SpectrumSpec::quadratic(e_max, nodes, 2)
}

/// Reference amplitude ψ_±(E).
pub fn oracle_amplitude(params: &FreeParticleParams, e: f64) -> f64 {
    let a = params.a();
    2f64.sqrt() * a * e.max(0.0).sqrt() * (-a * e).exp()
}

fn check_two_branches(spectrum: &SpectrumSpec) -> Result<()> {
    if !spectrum.is_continuous() || spectrum.degeneracy() != 2 {
        return Err(Error::InvalidSpectrum("the free-particle state needs a continuous grid with d = 2".into()));
    }
    Ok(())
}

fn sampled(spectrum: Arc<SpectrumSpec>, f: impl Fn(f64) -> f64, tail: f64) -> Result<EnergyState> {
    check_two_branches(&spectrum)?;
    if tail > DEFAULT_TAIL_TOL {
        return Err(Error::TailMass { mass: tail, tol: DEFAULT_TAIL_TOL });
    }
    let n = spectrum.len();
    let amplitudes: Vec<Complex64> = (0..2 * n).map(|i| Complex64::new(f(spectrum.energies()[i % n]), 0.0)).collect();
    let probe = EnergyState::with_norm_tol(spectrum.clone(), amplitudes.clone(), f64::INFINITY)?;
    let error = (probe.norm_squared() - (1.0 - tail)).abs();
    if error > NORM_RESOLUTION {
        return Err(Error::GridResolution { error });
    }
    EnergyState::from_unnormalized(spectrum, amplitudes)
}

/// The reference state sampled on `spectrum` (d = 2) and normalized.
pub fn build_oracle_state(params: &FreeParticleParams, spectrum: Arc<SpectrumSpec>) -> Result<EnergyState> {
    let tail = params.tail_mass(spectrum.e_max());
    sampled(spectrum, |e| oracle_amplitude(params, e), tail)
}

/// (a²/2)(t² + a²)^{−3/2}.
pub fn analytic_time_density(params: &FreeParticleParams, t: f64) -> f64 {
    let a = params.a();
    0.5 * a * a * (t * t + a * a).powf(-1.5)
}

/// 1/2 − t / (2√(t² + a²)).
pub fn analytic_mf(params: &FreeParticleParams, t: f64) -> f64 {
    let a = params.a();
    0.5 - 0.5 * t / (t * t + a * a).sqrt()
}

/// t / √(t² + a²).
pub fn analytic_sgn(params: &FreeParticleParams, t: f64) -> f64 {
    let a = params.a();
    t / (t * t + a * a).sqrt()
}

/// p(E) = 4a² E e^{−2aE}, summed over both branches.
pub fn analytic_energy_density(params: &FreeParticleParams, e: f64) -> f64 {
    let a = params.a();
    4.0 * a * a * e * (-2.0 * a * e).exp()
}

/// Energy ensemble length e^{1+γ} / (2a).
pub fn analytic_energy_length(params: &FreeParticleParams) -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    (1.0 + EULER_GAMMA).exp() / (2.0 * params.a())
}

/// Plain momentum Gaussian, ψ_±(E) ∝ E^{−1/4} e^{−aE}.
///
/// The amplitude is singular at E = 0, so the grid must start above zero;
/// the mass in [0, E_0) is counted as missing resolution.
pub fn momentum_gaussian_state(params: &FreeParticleParams, spectrum: Arc<SpectrumSpec>) -> Result<EnergyState> {
    if spectrum.e_min() <= 0.0 {
        return Err(Error::InvalidSpectrum("momentum Gaussian needs a grid starting above E = 0".into()));
    }
    let a = params.a();
    // Σ_± ∫ c² E^{−1/2} e^{−2aE} dE = 2c² √(π/(2a)) = 1
    let c = (2.0 * (PI / (2.0 * a)).sqrt()).sqrt().recip();
    let e_max = spectrum.e_max();
    let tail = {
        // e^{−2aE}/√E decays faster than e^{−2aE}; bound by the exponential
        let x = 2.0 * a * e_max;
        2.0 * c * c * (-x).exp() / (2.0 * a * e_max.sqrt())
    };
    sampled(spectrum, |e| c * e.powf(-0.25) * (-a * e).exp(), tail)
}

/// N'(t² + a²)^{−3/4} with N' = a^{1/2} / B(1/2, 1/4).
pub fn momentum_gaussian_time_density(params: &FreeParticleParams, t: f64) -> f64 {
    let a = params.a();
    a.sqrt() / BETA_HALF_QUARTER * (t * t + a * a).powf(-0.75)
}
