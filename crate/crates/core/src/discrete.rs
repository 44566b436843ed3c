//! Finite-resolution time measurements for discrete spectra.
//!
//! Time kets |t,j⟩ = (2π)^{-1/2} Σ_k e^{-iE_k t} |E_k,j⟩ are integrated over
//! [0, τ) into N_τ; the POM elements are T_t = N_τ^{-1/2} |t⟩⟨t| N_τ^{-1/2}
//! with the inverse square root taken on the support of N_τ, and P_τ is the
//! projector onto its null space. Everything is block diagonal in j with
//! identical blocks, so the linear algebra is done once on an n×n block.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{EnergyState, SpectrumSpec};

/// Eigenvalues of N_τ below this fraction of the largest count as zero.
pub const NULL_THRESHOLD: f64 = 1e-10;

/// Eigenvalues within this factor of the threshold are ill-conditioned.
pub const GAP_RATIO: f64 = 10.0;

pub const DEFAULT_COMPLETENESS_TOL: f64 = 1e-8;

/// Below this |Δτ| the N_τ entries use their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

fn require_discrete(spectrum: &SpectrumSpec) -> Result<()> {
    if spectrum.is_continuous() {
        return Err(Error::SpectrumKind { expected: "discrete" });
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("tau = {tau} must be positive and finite")));
    }
    Ok(())
}

/// |t,j⟩ for a discrete spectrum, optionally rescaled by a constant.
#[derive(Debug, Clone)]
pub struct DiscreteTimeKet {
    energies: Vec<f64>,
    scale: f64,
}

impl DiscreteTimeKet {
    pub fn new(spectrum: &SpectrumSpec) -> Result<Self> {
        Self::scaled(spectrum, 1.0)
    }

    pub fn scaled(spectrum: &SpectrumSpec, scale: f64) -> Result<Self> {
        require_discrete(spectrum)?;
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("ket scale {scale} must be positive")));
        }
        Ok(Self { energies: spectrum.energies().to_vec(), scale })
    }

    /// Components v_k(t) = scale · (2π)^{-1/2} e^{-iE_k t} of one block.
    pub fn components(&self, t: f64) -> DVector<Complex64> {
        let c = self.scale / (2.0 * PI).sqrt();
        DVector::from_iterator(self.energies.len(), self.energies.iter().map(|e| Complex64::from_polar(c, -e * t)))
    }
}

/// ∫_0^τ e^{-iΔt} dt.
fn phase_integral(delta: f64, tau: f64) -> Complex64 {
    let x = delta * tau;
    if x.abs() < SERIES_CUTOFF {
        let ix = Complex64::new(0.0, -x);
        // τ Σ (−ix)^n/(n+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = ZERO;
        for n in 0..8 {
            acc += term;
            term = term * ix / (n as f64 + 2.0);
        }
        acc * tau
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -x)) / Complex64::new(0.0, delta)
    }
}

/// N_τ on one degeneracy block with its eigendecomposition.
#[derive(Debug, Clone)]
pub struct NTauOperator {
    tau: f64,
    degeneracy: usize,
    matrix: DMatrix<Complex64>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
    threshold: f64,
}

impl NTauOperator {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// One n×n block; the full operator is `degeneracy` copies of it.
    pub fn block(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn degeneracy(&self) -> usize {
        self.degeneracy
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    /// Absolute cut below which eigenvalues are treated as zero.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn rank(&self) -> usize {
        self.eigenvalues.iter().filter(|l| **l >= self.threshold).count()
    }

    /// Full block-diagonal matrix of dimension d·n.
    pub fn full_matrix(&self) -> DMatrix<Complex64> {
        block_diagonal(&self.matrix, self.degeneracy)
    }

    fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let diag =
            DVector::from_iterator(self.eigenvalues.len(), self.eigenvalues.iter().map(|l| Complex64::new(f(*l), 0.0)));
        v * DMatrix::from_diagonal(&diag) * v.adjoint()
    }

    /// N^{-1/2} on the support, zero on the null space.
    pub fn inverse_sqrt(&self) -> DMatrix<Complex64> {
        let th = self.threshold;
        self.spectral_map(|l| if l >= th { l.sqrt().recip() } else { 0.0 })
    }

    /// Projector onto the null space.
    pub fn null_projector(&self) -> DMatrix<Complex64> {
        let th = self.threshold;
        self.spectral_map(|l| if l >= th { 0.0 } else { 1.0 })
    }
}

fn block_diagonal(block: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    let n = block.nrows();
    let mut m = DMatrix::zeros(d * n, d * n);
    for j in 0..d {
        m.view_mut((j * n, j * n), (n, n)).copy_from(block);
    }
    m
}

pub fn build_ntau(spectrum: &SpectrumSpec, tau: f64) -> Result<NTauOperator> {
    build_ntau_scaled(spectrum, tau, 1.0)
}

/// N_τ built from kets rescaled by `ket_scale`.
pub fn build_ntau_scaled(spectrum: &SpectrumSpec, tau: f64, ket_scale: f64) -> Result<NTauOperator> {
    require_discrete(spectrum)?;
    check_tau(tau)?;
    if !(ket_scale > 0.0 && ket_scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("ket scale {ket_scale} must be positive")));
    }
    let e = spectrum.energies();
    let n = e.len();
    let c = ket_scale * ket_scale / (2.0 * PI);
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        matrix[(k, k)] = Complex64::new(c * tau, 0.0);
        for l in k + 1..n {
            let v = phase_integral(e[k] - e[l], tau) * c;
            matrix[(k, l)] = v;
            matrix[(l, k)] = v.conj();
        }
    }
    let eig = matrix.clone().symmetric_eigen();
    let eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let lambda_max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = NULL_THRESHOLD * lambda_max;
    for &l in &eigenvalues {
        if l > threshold / GAP_RATIO && l < threshold * GAP_RATIO {
            return Err(Error::IllConditioned { ratio: l / threshold });
        }
    }
    Ok(NTauOperator {
        tau,
        degeneracy: spectrum.degeneracy(),
        matrix,
        eigenvalues,
        eigenvectors: eig.eigenvectors,
        threshold,
    })
}

/// Construction options for [`build_pom`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PomOptions {
    /// Overall factor applied to every time ket; the POM does not depend on it.
    pub ket_scale: f64,
    /// Fail with `Completeness` above this residual; `None` only records it.
    pub completeness_tol: Option<f64>,
}

impl Default for PomOptions {
    fn default() -> Self {
        Self { ket_scale: 1.0, completeness_tol: Some(DEFAULT_COMPLETENESS_TOL) }
    }
}

/// The POM {T_t dt} on a uniform grid of [0, τ) plus P_τ.
///
/// Each element is rank one per block, T_{t_i} = u_i u_i† with
/// u_i = N^{-1/2} v(t_i); only the u_i are stored. Integrals over [0, τ)
/// use the left-point sum dt Σ_i plus Euler–Maclaurin endpoint corrections
/// through the fifth derivative, held in `endpoint_correction`.
#[derive(Debug, Clone)]
pub struct PomFamily {
    spectrum: Arc<SpectrumSpec>,
    ntau: NTauOperator,
    times: Vec<f64>,
    dt: f64,
    inv_sqrt: DMatrix<Complex64>,
    ket: DiscreteTimeKet,
    vectors: Vec<DVector<Complex64>>,
    endpoint_correction: DMatrix<Complex64>,
    projector: DMatrix<Complex64>,
    completeness_residual: f64,
}

impl PomFamily {
    pub fn tau(&self) -> f64 {
        self.ntau.tau
    }

    pub fn ntau(&self) -> &NTauOperator {
        &self.ntau
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Quadrature weight of every node, τ / M.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// T_{t_i} on one block.
    pub fn element_block(&self, i: usize) -> DMatrix<Complex64> {
        let u = &self.vectors[i];
        u * u.adjoint()
    }

    /// T_{t_i} on the full d·n space.
    pub fn element(&self, i: usize) -> DMatrix<Complex64> {
        block_diagonal(&self.element_block(i), self.ntau.degeneracy)
    }

    /// T_t at an arbitrary time, one block.
    pub fn element_block_at(&self, t: f64) -> DMatrix<Complex64> {
        let u = &self.inv_sqrt * self.ket.components(t);
        &u * u.adjoint()
    }

    /// P_τ on one block.
    pub fn projector_block(&self) -> &DMatrix<Complex64> {
        &self.projector
    }

    pub fn projector(&self) -> DMatrix<Complex64> {
        block_diagonal(&self.projector, self.ntau.degeneracy)
    }

    /// ∫_0^τ T_t dt on one block.
    pub fn integrated_block(&self) -> DMatrix<Complex64> {
        let n = self.spectrum.len();
        let mut sum = DMatrix::<Complex64>::zeros(n, n);
        for u in &self.vectors {
            sum += u * u.adjoint();
        }
        sum * Complex64::new(self.dt, 0.0) + &self.endpoint_correction
    }

    /// max |∫ T_t dt + P_τ − I|.
    pub fn completeness_residual(&self) -> f64 {
        self.completeness_residual
    }

    /// max |P² − P|.
    pub fn idempotency_residual(&self) -> f64 {
        let p = &self.projector;
        (p * p - p).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all elements (each is u u†, so this only
    /// measures round-off).
    pub fn min_element_eigenvalue(&self) -> f64 {
        self.vectors
            .iter()
            .map(|u| {
                let m = u * u.adjoint();
                m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// T_t and its odd derivatives at `t`, one block: A((−iΔ)^n ∘ K_t)A.
fn element_derivative(
    energies: &[f64],
    inv_sqrt: &DMatrix<Complex64>,
    ket: &DiscreteTimeKet,
    t: f64,
    order: u32,
) -> DMatrix<Complex64> {
    let n = energies.len();
    let v = ket.components(t);
    let mut k = &v * v.adjoint();
    if order > 0 {
        for a in 0..n {
            for b in 0..n {
                let factor = Complex64::new(0.0, -(energies[a] - energies[b])).powu(order);
                k[(a, b)] *= factor;
            }
        }
    }
    inv_sqrt * k * inv_sqrt
}

/// Builds the POM on `nodes` equally spaced times t_i = i τ / nodes.
pub fn build_pom(spectrum: Arc<SpectrumSpec>, tau: f64, nodes: usize, options: &PomOptions) -> Result<PomFamily> {
    if nodes < 2 || !nodes.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("POM node count {nodes} must be a power of two ≥ 2")));
    }
    let ntau = build_ntau_scaled(&spectrum, tau, options.ket_scale)?;
    let ket = DiscreteTimeKet::scaled(&spectrum, options.ket_scale)?;
    let inv_sqrt = ntau.inverse_sqrt();
    let projector = ntau.null_projector();
    let dt = tau / nodes as f64;
    let times: Vec<f64> = (0..nodes).map(|i| i as f64 * dt).collect();
    let vectors: Vec<DVector<Complex64>> = times.par_iter().map(|&t| &inv_sqrt * ket.components(t)).collect();

    let e = spectrum.energies();
    let jump = |order: u32| {
        element_derivative(e, &inv_sqrt, &ket, tau, order) - element_derivative(e, &inv_sqrt, &ket, 0.0, order)
    };
    let c = |x: f64| Complex64::new(x, 0.0);
    let endpoint_correction = jump(0) * c(dt / 2.0) - jump(1) * c(dt.powi(2) / 12.0) + jump(3) * c(dt.powi(4) / 720.0)
        - jump(5) * c(dt.powi(6) / 30240.0);

    let mut pom = PomFamily {
        spectrum,
        ntau,
        times,
        dt,
        inv_sqrt,
        ket,
        vectors,
        endpoint_correction,
        projector,
        completeness_residual: 0.0,
    };
    let n = pom.spectrum.len();
    let deviation = pom.integrated_block() + &pom.projector - DMatrix::<Complex64>::identity(n, n);
    pom.completeness_residual = deviation.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if let Some(tol) = options.completeness_tol {
        if pom.completeness_residual > tol {
            return Err(Error::Completeness { residual: pom.completeness_residual, tol });
        }
    }
    Ok(pom)
}

/// p(t_i) = ⟨ψ|T_{t_i}|ψ⟩ with the mass left in P_τ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PomProbability {
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    pub dt: f64,
    /// ∫_0^τ p dt with the same endpoint corrections as the completeness check.
    pub integrated_mass: f64,
    /// ⟨ψ|P_τ|ψ⟩.
    pub residual_mass: f64,
}

impl PomProbability {
    /// |integrated + residual − 1|.
    pub fn total_error(&self) -> f64 {
        (self.integrated_mass + self.residual_mass - 1.0).abs()
    }
}

fn state_blocks(pom: &PomFamily, state: &EnergyState) -> Result<Vec<DVector<Complex64>>> {
    if state.spectrum() != pom.spectrum.as_ref() {
        return Err(Error::InvalidArgument("state lives on a different spectrum".into()));
    }
    let n = pom.spectrum.len();
    let amps = state.amplitudes();
    Ok((0..pom.spectrum.degeneracy()).map(|j| DVector::from_column_slice(&amps[j * n..(j + 1) * n])).collect())
}

fn quadratic_form(m: &DMatrix<Complex64>, v: &DVector<Complex64>) -> f64 {
    v.dotc(&(m * v)).re
}

pub fn pom_probability(pom: &PomFamily, state: &EnergyState) -> Result<PomProbability> {
    let blocks = state_blocks(pom, state)?;
    let density: Vec<f64> = pom.vectors.iter().map(|u| blocks.iter().map(|psi| u.dotc(psi).norm_sqr()).sum()).collect();
    let correction: f64 = blocks.iter().map(|psi| quadratic_form(&pom.endpoint_correction, psi)).sum();
    let residual_mass = blocks.iter().map(|psi| quadratic_form(&pom.projector, psi)).sum();
    let integrated_mass = pom.dt * density.iter().sum::<f64>() + correction;
    Ok(PomProbability { times: pom.times.clone(), density, dt: pom.dt, integrated_mass, residual_mass })
}

/// ⟨ψ|T_t|ψ⟩ at an arbitrary time.
pub fn pom_probability_at(pom: &PomFamily, state: &EnergyState, t: f64) -> Result<f64> {
    let blocks = state_blocks(pom, state)?;
    let u = &pom.inv_sqrt * pom.ket.components(t);
    Ok(blocks.iter().map(|psi| u.dotc(psi).norm_sqr()).sum())
}

/// Grid-search settings for [`find_recurrence_time`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceSearch {
    pub t_min: f64,
    pub horizon: f64,
    /// Grid step; by default small enough that the distance moves by at most
    /// ε/4 per step.
    pub step: Option<f64>,
}

impl Default for RecurrenceSearch {
    fn default() -> Self {
        Self { t_min: 0.0, horizon: 1e4, step: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    /// First grid time back inside the ε-ball.
    pub entry_time: f64,
    /// Local minimum of the distance following `entry_time`.
    pub time: f64,
    pub distance: f64,
}

/// ‖ψ_t − ψ_0‖ = (Σ |c|² 4 sin²(E t / 2))^{1/2}.
pub fn recurrence_distance(state: &EnergyState, t: f64) -> f64 {
    let e = state.spectrum().energies();
    let n = e.len();
    state
        .envelope()
        .iter()
        .enumerate()
        .map(|(i, c)| c.norm_sqr() * 4.0 * (0.5 * e[i % n] * t).sin().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// First return of the state to within `epsilon` of itself after leaving
/// the ε-ball, refined to the bottom of that approach.
pub fn find_recurrence_time(state: &EnergyState, epsilon: f64, search: &RecurrenceSearch) -> Result<Recurrence> {
    require_discrete(state.spectrum())?;
    if !(epsilon > 0.0 && epsilon < 2.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, 2)")));
    }
    if search.horizon.is_nan() || search.horizon <= search.t_min {
        return Err(Error::InvalidArgument("search horizon must exceed t_min".into()));
    }
    let e = state.spectrum().energies();
    let n = e.len();
    let speed =
        state.envelope().iter().enumerate().map(|(i, c)| c.norm_sqr() * e[i % n] * e[i % n]).sum::<f64>().sqrt();
    let step = match search.step {
        Some(s) if s > 0.0 => s,
        Some(s) => return Err(Error::InvalidArgument(format!("search step {s} must be positive"))),
        None if speed > 0.0 => epsilon / (4.0 * speed),
        None => return Err(Error::NotFound { best_time: search.t_min, best_distance: 0.0 }),
    };
    let dist = |t: f64| recurrence_distance(state, t);
    let steps = ((search.horizon - search.t_min) / step).ceil() as usize;
    let mut left_ball = dist(search.t_min) > epsilon;
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 1..=steps {
        let t = search.t_min + i as f64 * step;
        let d = dist(t);
        if !left_ball {
            left_ball = d > epsilon;
            continue;
        }
        if d < best.1 {
            best = (t, d);
        }
        if d <= epsilon {
            let mut k = i;
            while dist(search.t_min + (k + 1) as f64 * step) < dist(search.t_min + k as f64 * step) {
                k += 1;
            }
            let lo = search.t_min + (k - 1) as f64 * step;
            let hi = search.t_min + (k + 1) as f64 * step;
            let (time, distance) = golden_minimum(&dist, lo, hi);
            return Ok(Recurrence { entry_time: t, time, distance });
        }
    }
    Err(Error::NotFound { best_time: best.0, best_distance: best.1 })
}

fn golden_minimum(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * b.abs().max(1.0) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(levels: &[f64], d: usize) -> Arc<SpectrumSpec> {
        Arc::new(SpectrumSpec::discrete(levels.to_vec(), d).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_level_ntau() {
        let n = build_ntau(&spec(&[0.7], 1), 3.0).unwrap();
        assert!((n.block()[(0, 0)].re - 3.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn full_period_ntau_is_diagonal() {
        let w = 1.3;
        let n = build_ntau(&spec(&[0.0, w], 1), 2.0 * PI / w).unwrap();
        assert!(n.block()[(0, 1)].norm() < 1e-15);
        assert!((n.block()[(1, 1)].re - 1.0 / w).abs() < 1e-15);
    }

    #[test]
    fn half_period_ntau_entry() {
        let w = 2.0;
        let tau = PI / w;
        let n = build_ntau(&spec(&[0.0, w], 1), tau).unwrap();
        // (1 − e^{iπ})/(i(−ω)) / 2π = 2/(−iω) / 2π
        let expected = c(2.0, 0.0) / c(0.0, -w) / (2.0 * PI);
        assert!((n.block()[(0, 1)] - expected).norm() < 1e-15);
        assert_eq!(n.block()[(1, 0)], n.block()[(0, 1)].conj());
    }

    #[test]
    fn series_branch_is_continuous() {
        let tau = 2.0;
        for &delta in &[0.99e-3 / tau, 1.01e-3 / tau] {
            let exact = (c(1.0, 0.0) - Complex64::from_polar(1.0, -delta * tau)) / c(0.0, delta);
            assert!((phase_integral(delta, tau) - exact).norm() < 1e-12);
        }
    }

    #[test]
    fn single_level_pom_is_uniform() {
        let s = spec(&[0.4], 1);
        let pom = build_pom(s.clone(), 2.5, 64, &PomOptions::default()).unwrap();
        assert!(pom.completeness_residual() < 1e-12);
        assert!(pom.projector_block()[(0, 0)].norm() < 1e-15);
        let st = EnergyState::new(s, vec![c(0.0, 1.0)]).unwrap();
        let p = pom_probability(&pom, &st).unwrap();
        assert!(p.density.iter().all(|v| (v - 1.0 / 2.5).abs() < 1e-14));
    }

    #[test]
    fn repeated_levels_leave_a_null_space() {
        let s = spec(&[1.0, 1.0, 2.0], 1);
        let pom = build_pom(s.clone(), 3.0, 256, &PomOptions::default()).unwrap();
        assert_eq!(pom.ntau().rank(), 2);
        assert!(pom.completeness_residual() < 1e-10);
        assert!(pom.idempotency_residual() < 1e-12);
        // the antisymmetric combination of the repeated level is never seen
        let st = EnergyState::from_unnormalized(s, vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let p = pom_probability(&pom, &st).unwrap();
        assert!((p.residual_mass - 1.0).abs() < 1e-12);
        assert!(p.density.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pom_is_invariant_under_ket_rescaling() {
        let s = spec(&[0.0, 1.0, 2f64.sqrt()], 1);
        let a = build_pom(s.clone(), 5.0, 128, &PomOptions::default()).unwrap();
        let b = build_pom(s, 5.0, 128, &PomOptions { ket_scale: 3.7, ..PomOptions::default() }).unwrap();
        for i in [0, 17, 127] {
            let diff = (a.element_block(i) - b.element_block(i)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "{diff}");
        }
    }

    #[test]
    fn two_level_full_period_density() {
        let w = 1.0;
        let tau = 2.0 * PI / w;
        let s = spec(&[0.0, w], 1);
        let pom = build_pom(s.clone(), tau, 128, &PomOptions::default()).unwrap();
        let st = EnergyState::from_unnormalized(s, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let p = pom_probability(&pom, &st).unwrap();
        for (t, v) in p.times.iter().zip(&p.density) {
            assert!((v - (1.0 + (w * t).cos()) / tau).abs() < 1e-13);
        }
        assert!(p.total_error() < 1e-12);
    }

    #[test]
    fn node_count_must_be_power_of_two() {
        assert!(build_pom(spec(&[0.0], 1), 1.0, 100, &PomOptions::default()).is_err());
    }

    #[test]
    fn degeneracy_blocks_match_independent_runs() {
        let single = build_pom(spec(&[0.0, 1.0, 2.5], 1), 4.0, 256, &PomOptions::default()).unwrap();
        let double = build_pom(spec(&[0.0, 1.0, 2.5], 2), 4.0, 256, &PomOptions::default()).unwrap();
        assert_eq!(single.element_block(9), double.element_block(9));
        let full = double.element(9);
        assert_eq!(full.view((3, 3), (3, 3)).into_owned(), single.element_block(9));
        assert_eq!(full[(0, 3)], c(0.0, 0.0));
    }

    #[test]
    fn periodic_recurrences() {
        let w = 0.8;
        let s = spec(&[0.0, w, 2.0 * w, 3.0 * w], 1);
        let st = EnergyState::from_unnormalized(s, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0), c(1.0, -1.0)]).unwrap();
        let r = find_recurrence_time(&st, 0.1, &RecurrenceSearch::default()).unwrap();
        assert!((r.time - 2.0 * PI / w).abs() < 1e-6);
        assert!(r.distance < 1e-12);
        let two = EnergyState::from_unnormalized(spec(&[0.0, 1.0], 1), vec![c(1.0, 0.0); 2]).unwrap();
        let r = find_recurrence_time(&two, 0.05, &RecurrenceSearch::default()).unwrap();
        assert!((r.time - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn recurrence_not_found_reports_best() {
        let st = EnergyState::from_unnormalized(spec(&[0.0, 1.0, 2f64.sqrt()], 1), vec![c(1.0, 0.0); 3]).unwrap();
        let err =
            find_recurrence_time(&st, 0.01, &RecurrenceSearch { horizon: 20.0, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::NotFound { .. }));
    }
}
