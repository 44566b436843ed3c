//! Energy spectra and states in the energy representation.
//!
//! Units are natural throughout (ħ = 1): energies and inverse times share a
//! unit. A state is stored as its envelope ψ_j(E) together with the time it
//! has been evolved for; the physical amplitudes are e^{-iEt} ψ_j(E).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::quadrature::{simpson, strictly_increasing, trapezoid_weights};

pub const HBAR: f64 = 1.0;

/// Norm tolerance accepted by [`EnergyState::new`].
pub const DEFAULT_NORM_TOL: f64 = 1e-8;

/// Largest mass a sampled state may carry beyond the top of the energy grid.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

const ZERO_NORM: f64 = 1e-14;

/// Unit convention recorded alongside every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsConfig {
    pub hbar: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { hbar: HBAR }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Continuous,
    Discrete,
}

/// Energy levels with a fixed degeneracy `d`.
///
/// Continuous spectra are a grid `E_0 < … < E_N` with trapezoid weights;
/// discrete spectra are a list of levels, each with unit weight.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSpec {
    kind: SpectrumKind,
    energies: Vec<f64>,
    weights: Vec<f64>,
    degeneracy: usize,
}

impl SpectrumSpec {
    pub fn continuous(energies: Vec<f64>, degeneracy: usize) -> Result<Self> {
        check_degeneracy(degeneracy)?;
        if energies.len() < 2 {
            return Err(Error::InvalidSpectrum("continuous grid needs at least two nodes".into()));
        }
        if !strictly_increasing(&energies) {
            return Err(Error::InvalidSpectrum("energy nodes must be finite and strictly increasing".into()));
        }
        if energies[0] < 0.0 {
            return Err(Error::InvalidSpectrum(format!("negative energy {}", energies[0])));
        }
        let weights = trapezoid_weights(&energies);
        Ok(Self { kind: SpectrumKind::Continuous, energies, weights, degeneracy })
    }

    /// `nodes` equally spaced points on `[0, e_max]`.
    pub fn uniform(e_max: f64, nodes: usize, degeneracy: usize) -> Result<Self> {
        check_grid_args(e_max, nodes)?;
        let h = e_max / (nodes - 1) as f64;
        let mut energies: Vec<f64> = (0..nodes).map(|k| k as f64 * h).collect();
        energies[nodes - 1] = e_max;
        Self::continuous(energies, degeneracy)
    }

    /// Grid `E_k = e_max (k / (nodes-1))²`, clustered near `E = 0`.
    ///
    /// Amplitudes behaving like √E near threshold are smooth in the
    /// underlying uniform variable, which keeps the linear interpolation
    /// used by the Fourier kernel second order.
    pub fn quadratic(e_max: f64, nodes: usize, degeneracy: usize) -> Result<Self> {
        check_grid_args(e_max, nodes)?;
        let n = (nodes - 1) as f64;
        let mut energies: Vec<f64> = (0..nodes).map(|k| e_max * (k as f64 / n).powi(2)).collect();
        energies[nodes - 1] = e_max;
        Self::continuous(energies, degeneracy)
    }

    /// Discrete levels. Repeated energies are allowed; they make the levels
    /// indistinguishable to any time measurement.
    pub fn discrete(energies: Vec<f64>, degeneracy: usize) -> Result<Self> {
        check_degeneracy(degeneracy)?;
        if energies.is_empty() {
            return Err(Error::InvalidSpectrum("discrete spectrum is empty".into()));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite() || **e < 0.0) {
            return Err(Error::InvalidSpectrum(format!("discrete energy {e} must be finite and nonnegative")));
        }
        let weights = vec![1.0; energies.len()];
        Ok(Self { kind: SpectrumKind::Discrete, energies, weights, degeneracy })
    }

    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }

    pub fn is_continuous(&self) -> bool {
        self.kind == SpectrumKind::Continuous
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degeneracy(&self) -> usize {
        self.degeneracy
    }

    /// Number of energy nodes (levels) per degeneracy block.
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Dimension of the discretized Hilbert space, `d · len`.
    pub fn dim(&self) -> usize {
        self.degeneracy * self.energies.len()
    }

    pub fn e_max(&self) -> f64 {
        *self.energies.last().expect("spectrum is never empty")
    }

    pub fn e_min(&self) -> f64 {
        self.energies[0]
    }

    /// Flat index of `(j, k)`; blocks are stored j-major.
    pub fn index(&self, j: usize, k: usize) -> usize {
        j * self.energies.len() + k
    }

    /// Spacing of a uniform continuous grid.
    pub fn uniform_spacing(&self) -> Result<f64> {
        if !self.is_continuous() {
            return Err(Error::SpectrumKind { expected: "continuous" });
        }
        let h = (self.e_max() - self.e_min()) / (self.len() - 1) as f64;
        let deviation = self.energies.windows(2).map(|w| ((w[1] - w[0]) - h).abs()).fold(0.0, f64::max);
        if deviation > 1e-9 * h {
            return Err(Error::NonUniformGrid { deviation });
        }
        Ok(h)
    }

    /// Same spectrum with every energy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {factor} must be positive")));
        }
        let energies = self.energies.iter().map(|e| e * factor).collect();
        match self.kind {
            SpectrumKind::Continuous => Self::continuous(energies, self.degeneracy),
            SpectrumKind::Discrete => Self::discrete(energies, self.degeneracy),
        }
    }
}

fn check_degeneracy(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidSpectrum("degeneracy must be at least 1".into()));
    }
    Ok(())
}

fn check_grid_args(e_max: f64, nodes: usize) -> Result<()> {
    if !(e_max > 0.0 && e_max.is_finite()) {
        return Err(Error::InvalidSpectrum(format!("E_max {e_max} must be positive")));
    }
    if nodes < 2 {
        return Err(Error::InvalidSpectrum("grid needs at least two nodes".into()));
    }
    Ok(())
}

/// A pure state ψ_j(E) in the energy representation.
#[derive(Debug, Clone)]
pub struct EnergyState {
    spectrum: Arc<SpectrumSpec>,
    envelope: Vec<Complex64>,
    elapsed: f64,
    norm_tol: f64,
}

impl EnergyState {
    /// A state from amplitudes already normalized to within
    /// [`DEFAULT_NORM_TOL`].
    pub fn new(spectrum: Arc<SpectrumSpec>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::with_norm_tol(spectrum, amplitudes, DEFAULT_NORM_TOL)
    }

    pub fn with_norm_tol(spectrum: Arc<SpectrumSpec>, amplitudes: Vec<Complex64>, norm_tol: f64) -> Result<Self> {
        if norm_tol.is_nan() || norm_tol <= 0.0 {
            return Err(Error::InvalidArgument(format!("norm tolerance {norm_tol} must be positive")));
        }
        let state = Self::unchecked(spectrum, amplitudes, norm_tol)?;
        let norm = state.norm_squared();
        if (norm - 1.0).abs() > norm_tol {
            return Err(Error::InvalidState(format!("norm {norm:.15} differs from 1 by more than {norm_tol:e}")));
        }
        Ok(state)
    }

    /// Normalizes `amplitudes` under the spectrum's quadrature rule.
    pub fn from_unnormalized(spectrum: Arc<SpectrumSpec>, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::unchecked(spectrum, amplitudes, DEFAULT_NORM_TOL)?.normalize()
    }

    /// Samples `f(j, E)` on the spectrum and normalizes.
    ///
    /// For continuous spectra the mass of `f` above the grid is estimated on
    /// `[E_max, 64 E_max]` and must stay below `tail_tol` relative to the
    /// sampled norm.
    pub fn sample<F>(spectrum: Arc<SpectrumSpec>, f: F, tail_tol: f64) -> Result<Self>
    where
        F: Fn(usize, f64) -> Complex64,
    {
        let n = spectrum.len();
        let mut amplitudes = Vec::with_capacity(spectrum.dim());
        for j in 0..spectrum.degeneracy() {
            amplitudes.extend(spectrum.energies().iter().map(|&e| f(j, e)));
        }
        debug_assert_eq!(amplitudes.len(), spectrum.degeneracy() * n);
        let raw = Self::unchecked(spectrum.clone(), amplitudes, DEFAULT_NORM_TOL)?;
        let norm = raw.norm_squared();
        if spectrum.is_continuous() && norm > ZERO_NORM {
            let e_max = spectrum.e_max();
            let span = 64f64.ln();
            let tail: f64 = (0..spectrum.degeneracy())
                .map(|j| {
                    simpson(
                        |s| {
                            let e = e_max * s.exp();
                            f(j, e).norm_sqr() * e
                        },
                        0.0,
                        span,
                        2048,
                    )
                })
                .sum();
            let mass = tail / norm;
            if mass > tail_tol {
                return Err(Error::TailMass { mass, tol: tail_tol });
            }
        }
        raw.normalize()
    }

    fn unchecked(spectrum: Arc<SpectrumSpec>, amplitudes: Vec<Complex64>, norm_tol: f64) -> Result<Self> {
        if amplitudes.len() != spectrum.dim() {
            return Err(Error::InvalidState(format!(
                "expected {} amplitudes (d = {}, {} nodes), got {}",
                spectrum.dim(),
                spectrum.degeneracy(),
                spectrum.len(),
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidState("amplitudes must be finite".into()));
        }
        Ok(Self { spectrum, envelope: amplitudes, elapsed: 0.0, norm_tol })
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn spectrum_arc(&self) -> &Arc<SpectrumSpec> {
        &self.spectrum
    }

    /// Amplitudes at zero elapsed time.
    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    /// Envelope of degeneracy block `j`.
    pub fn block(&self, j: usize) -> &[Complex64] {
        let n = self.spectrum.len();
        &self.envelope[j * n..(j + 1) * n]
    }

    /// Total evolution time applied to the envelope.
    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn norm_tol(&self) -> f64 {
        self.norm_tol
    }

    /// Physical amplitudes e^{-iE t} ψ_j(E), j-major.
    pub fn amplitudes(&self) -> Vec<Complex64> {
        let energies = self.spectrum.energies();
        let n = energies.len();
        self.envelope
            .iter()
            .enumerate()
            .map(|(i, a)| a * Complex64::from_polar(1.0, -energies[i % n] * self.elapsed))
            .collect()
    }

    /// Σ_j ∫ |ψ_j(E)|² dE under the spectrum's weights.
    pub fn norm_squared(&self) -> f64 {
        let w = self.spectrum.weights();
        let n = w.len();
        self.envelope.iter().enumerate().map(|(i, a)| w[i % n] * a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm_squared();
        if norm < ZERO_NORM {
            return Err(Error::ZeroNorm { norm });
        }
        let scale = norm.sqrt().recip();
        Ok(Self { envelope: self.envelope.iter().map(|a| a * scale).collect(), ..self.clone() })
    }

    pub fn evolve(&self, t: f64) -> Self {
        Self { elapsed: self.elapsed + t, ..self.clone() }
    }

    /// The same state with the evolution phase folded into the envelope.
    pub fn materialized(&self) -> Self {
        Self { envelope: self.amplitudes(), elapsed: 0.0, ..self.clone() }
    }

    /// p(E) = Σ_j |ψ_j(E)|².
    pub fn energy_density(&self) -> Distribution {
        let n = self.spectrum.len();
        let mut p = vec![0.0; n];
        for (i, a) in self.envelope.iter().enumerate() {
            p[i % n] += a.norm_sqr();
        }
        let nodes = self.spectrum.energies().to_vec();
        match self.spectrum.kind() {
            SpectrumKind::Continuous => Distribution::density(nodes, self.spectrum.weights().to_vec(), p),
            SpectrumKind::Discrete => Distribution::point_masses(nodes, p),
        }
        .expect("energy density arrays are consistent")
    }

    /// Number of energy nodes carrying nonzero amplitude in some block.
    pub fn occupied_levels(&self) -> usize {
        let n = self.spectrum.len();
        (0..n)
            .filter(|&k| (0..self.spectrum.degeneracy()).any(|j| self.envelope[j * n + k] != Complex64::new(0.0, 0.0)))
            .count()
    }

    /// The dilated state ψ'(E) = λ^{-1/2} ψ(E/λ) on the grid scaled by λ.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        let spectrum = Arc::new(self.spectrum.scaled(factor)?);
        let scale = match spectrum.kind() {
            SpectrumKind::Continuous => factor.sqrt().recip(),
            SpectrumKind::Discrete => 1.0,
        };
        Ok(Self {
            spectrum,
            envelope: self.envelope.iter().map(|a| a * scale).collect(),
            elapsed: self.elapsed / factor,
            norm_tol: self.norm_tol,
        })
    }

    /// Extrapolated mass above the top node of a continuous grid, assuming
    /// the energy density keeps its final exponential decay rate. `None` when
    /// the density does not decay at the edge (a hard cutoff).
    pub fn tail_mass_estimate(&self) -> Option<f64> {
        if !self.spectrum.is_continuous() {
            return Some(0.0);
        }
        let p = self.energy_density();
        let v = p.values();
        let n = v.len();
        let (last, prev) = (v[n - 1], v[n - 2]);
        if last == 0.0 {
            return Some(0.0);
        }
        if last >= prev {
            return None;
        }
        let h = self.spectrum.energies()[n - 1] - self.spectrum.energies()[n - 2];
        Some(last * h / (prev / last).ln())
    }
}

pub fn normalize(state: &EnergyState) -> Result<EnergyState> {
    state.normalize()
}

pub fn evolve(state: &EnergyState, t: f64) -> EnergyState {
    state.evolve(t)
}

pub fn energy_density(state: &EnergyState) -> Distribution {
    state.energy_density()
}

/// Flat-amplitude state ψ(E) = E_max^{-1/2} on `[0, E_max]`, d = 1.
pub fn box_state(spectrum: Arc<SpectrumSpec>) -> Result<EnergyState> {
    if !spectrum.is_continuous() {
        return Err(Error::SpectrumKind { expected: "continuous" });
    }
    let width = spectrum.e_max() - spectrum.e_min();
    let value = Complex64::new(width.sqrt().recip(), 0.0);
    EnergyState::new(spectrum.clone(), vec![value; spectrum.dim()])
}

/// (2π)^{-1/2}, the time-ket normalization.
pub(crate) fn inv_sqrt_2pi() -> f64 {
    (2.0 * PI).sqrt().recip()
}
