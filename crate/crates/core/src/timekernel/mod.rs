//! Time-ket amplitudes ⟨t,j|ψ⟩ and the canonical time density p_T(t|ψ).
//!
//! The time kets are the truncated Fourier transform of the energy kets,
//! |t,j⟩ = (2π)^{-1/2} ∫_0^∞ dE e^{-iEt} |E,j⟩, so
//! ⟨t,j|ψ⟩ = (2π)^{-1/2} ∫ e^{iEt} ψ_j(E) dE. The density is never
//! renormalized; the mass captured by the time grid is recorded instead.

pub mod filon;

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::distribution::Distribution;
use crate::error::{Error, Result};
use crate::quadrature::{cumulative_trapezoid, strictly_increasing, trapezoid_weights};
use crate::spectra::{inv_sqrt_2pi, EnergyState, SpectrumKind};

pub use filon::{FilonPlan, FilonRule};

pub const DEFAULT_COVERAGE_TOL: f64 = 1e-6;

/// Node cap for automatically widened grids.
pub const MAX_TIME_NODES: usize = 1 << 20;

/// Widening stops once a doubling shrinks the coverage deficit by less than
/// this factor.
const STALL_RATIO: f64 = 0.75;

/// Tail exponents within this margin of the divergence threshold count as
/// divergent.
const EXPONENT_MARGIN: f64 = 0.1;

/// Tail contributions to a moment below this are ignored by the divergence
/// guard (the density has reached its numerical floor).
const NEGLIGIBLE_TAIL: f64 = 1e-10;

/// Time nodes with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    coverage_tol: f64,
}

impl TimeGrid {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || !strictly_increasing(&nodes) {
            return Err(Error::InvalidArgument(
                "time grid needs at least two finite, strictly increasing nodes".into(),
            ));
        }
        let weights = trapezoid_weights(&nodes);
        Ok(Self { nodes, weights, coverage_tol: DEFAULT_COVERAGE_TOL })
    }

    pub fn uniform(t_min: f64, t_max: f64, nodes: usize) -> Result<Self> {
        if t_max.is_nan() || t_max <= t_min || nodes < 2 {
            return Err(Error::InvalidArgument(format!(
                "uniform time grid needs t_max > t_min and at least two nodes (got [{t_min}, {t_max}], {nodes})"
            )));
        }
        let h = (t_max - t_min) / (nodes - 1) as f64;
        let mut ts: Vec<f64> = (0..nodes).map(|i| t_min + i as f64 * h).collect();
        ts[nodes - 1] = t_max;
        Self::from_nodes(ts)
    }

    /// Uniform grid on `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, nodes: usize) -> Result<Self> {
        let mut grid = Self::uniform(-half_width, half_width, nodes)?;
        // exact mirror symmetry
        let n = grid.nodes.len();
        for i in 0..n / 2 {
            grid.nodes[i] = -grid.nodes[n - 1 - i];
        }
        if n % 2 == 1 {
            grid.nodes[n / 2] = 0.0;
        }
        grid.weights = trapezoid_weights(&grid.nodes);
        Ok(grid)
    }

    /// Symmetric grid `t = scale · sinh(s)` with `s` uniform.
    ///
    /// Spacing is about `scale · Δs` near the origin and `|t| · Δs` in the
    /// tails, which suits densities with power-law tails.
    pub fn sinh(half_width: f64, nodes: usize, scale: f64) -> Result<Self> {
        if !(half_width > 0.0 && scale > 0.0) || nodes < 3 {
            return Err(Error::InvalidArgument(
                "sinh grid needs positive width, scale and at least three nodes".into(),
            ));
        }
        let s_max = (half_width / scale).asinh();
        let n = nodes;
        let ds = 2.0 * s_max / (n - 1) as f64;
        let mut ts: Vec<f64> = (0..n).map(|i| scale * (-s_max + i as f64 * ds).sinh()).collect();
        for i in 0..n / 2 {
            ts[i] = -ts[n - 1 - i];
        }
        if n % 2 == 1 {
            ts[n / 2] = 0.0;
        }
        Self::from_nodes(ts)
    }

    pub fn with_coverage_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::InvalidArgument(format!("coverage tolerance {tol} must lie in (0, 1)")));
        }
        self.coverage_tol = tol;
        Ok(self)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coverage_tol(&self) -> f64 {
        self.coverage_tol
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn t_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// The grid translated by `shift`, same weights.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            nodes: self.nodes.iter().map(|t| t + shift).collect(),
            weights: self.weights.clone(),
            coverage_tol: self.coverage_tol,
        }
    }

    /// Symmetric uniform grid widened by doubling until `state`'s density
    /// meets the coverage tolerance.
    pub fn auto(state: &EnergyState, config: &AutoGrid) -> Result<Self> {
        Ok(time_density_auto(state, config)?.grid)
    }
}

/// Parameters of the doubling search behind [`TimeGrid::auto`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutoGrid {
    /// Node spacing; defaults to π / (8 · energy span).
    pub spacing: Option<f64>,
    /// Starting half width; defaults to 128 spacings.
    pub initial_half_width: Option<f64>,
    pub coverage_tol: f64,
    pub max_nodes: usize,
    pub rule: FilonRule,
}

impl Default for AutoGrid {
    fn default() -> Self {
        Self {
            spacing: None,
            initial_half_width: None,
            coverage_tol: DEFAULT_COVERAGE_TOL,
            max_nodes: MAX_TIME_NODES,
            rule: FilonRule::default(),
        }
    }
}

/// p_T on a grid together with the probability the grid captures.
#[derive(Debug, Clone)]
pub struct TimeDistribution {
    grid: TimeGrid,
    density: Vec<f64>,
    slope: Option<Vec<f64>>,
    /// Per panel: integrated with the cubic Hermite rule.
    hermite: Vec<bool>,
    captured_mass: f64,
    cumulative: Vec<f64>,
}

/// Cubic Hermite interpolant on a unit panel: values p0, p1 and scaled
/// slopes d0 = h p'(t0), d1 = h p'(t1).
#[derive(Debug, Clone, Copy)]
struct HermitePanel {
    p0: f64,
    p1: f64,
    d0: f64,
    d1: f64,
}

impl HermitePanel {
    fn value(&self, s: f64) -> f64 {
        let s2 = s * s;
        let s3 = s2 * s;
        self.p0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + self.d0 * (s3 - 2.0 * s2 + s)
            + self.p1 * (3.0 * s2 - 2.0 * s3)
            + self.d1 * (s3 - s2)
    }

    /// ∫_0^s of the interpolant, in units of the panel width.
    fn integral(&self, s: f64) -> f64 {
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        self.p0 * (s - s3 + 0.5 * s4)
            + self.d0 * (0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4)
            + self.p1 * (s3 - 0.5 * s4)
            + self.d1 * (0.25 * s4 - s3 / 3.0)
    }

    fn is_nonnegative(&self) -> bool {
        (0..=16).all(|k| self.value(k as f64 / 16.0) >= 0.0)
    }
}

/// A cumulative probability with its error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfValue {
    pub value: f64,
    pub error: f64,
}

impl TimeDistribution {
    /// Wraps a tabulated density without a coverage check; the cumulative
    /// is the running trapezoid sum.
    pub fn from_parts(grid: TimeGrid, density: Vec<f64>) -> Result<Self> {
        Self::build(grid, density, None)
    }

    /// Like [`Self::from_parts`] with the derivative p'(t) at every node.
    ///
    /// Panels are then integrated with the cubic Hermite interpolant
    /// (fourth order), except where that interpolant would turn negative,
    /// which fall back to the trapezoid.
    pub fn from_parts_with_slope(grid: TimeGrid, density: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        if slope.len() != grid.len() || slope.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("slope must be finite and match the grid".into()));
        }
        Self::build(grid, density, Some(slope))
    }

    fn build(grid: TimeGrid, density: Vec<f64>, slope: Option<Vec<f64>>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidArgument("density length differs from grid length".into()));
        }
        if density.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::InvalidArgument("density must be nonnegative".into()));
        }
        let ts = grid.nodes();
        let (hermite, cumulative) = match &slope {
            None => (vec![false; ts.len() - 1], cumulative_trapezoid(ts, &density)),
            Some(dp) => {
                let mut flags = Vec::with_capacity(ts.len() - 1);
                let mut cum = Vec::with_capacity(ts.len());
                cum.push(0.0);
                let mut acc = 0.0;
                for i in 0..ts.len() - 1 {
                    let h = ts[i + 1] - ts[i];
                    let panel = HermitePanel { p0: density[i], p1: density[i + 1], d0: h * dp[i], d1: h * dp[i + 1] };
                    let ok = panel.is_nonnegative();
                    flags.push(ok);
                    acc += h * if ok { panel.integral(1.0) } else { 0.5 * (panel.p0 + panel.p1) };
                    cum.push(acc);
                }
                (flags, cum)
            }
        };
        let captured_mass = *cumulative.last().expect("grid has nodes");
        Ok(Self { grid, density, slope, hermite, captured_mass, cumulative })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn captured_mass(&self) -> f64 {
        self.captured_mass
    }

    /// 1 − captured mass.
    pub fn coverage_deficit(&self) -> f64 {
        1.0 - self.captured_mass
    }

    pub fn meets_coverage(&self) -> bool {
        self.captured_mass >= 1.0 - self.grid.coverage_tol
    }

    /// p'(t) at the nodes, when known.
    pub fn slope(&self) -> Option<&[f64]> {
        self.slope.as_deref()
    }

    /// Running integral from the first node.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn to_distribution(&self) -> Distribution {
        Distribution::density(self.grid.nodes.clone(), self.grid.weights.clone(), self.density.clone())
            .expect("time density is nonnegative")
    }

    fn center(&self) -> f64 {
        0.5 * (self.grid.t_min() + self.grid.t_max())
    }

    /// Estimated probability left of and right of the grid.
    ///
    /// The coverage deficit is shared in proportion to p(t_end)·|t_end − c|
    /// on each side (c the grid center), the mass beyond a power-law tail.
    pub fn tail_masses(&self) -> (f64, f64) {
        let deficit = self.coverage_deficit().max(0.0);
        let c = self.center();
        let n = self.density.len();
        let wl = self.density[0] * (self.grid.t_min() - c).abs();
        let wr = self.density[n - 1] * (self.grid.t_max() - c).abs();
        if wl + wr > 0.0 {
            (deficit * wl / (wl + wr), deficit * wr / (wl + wr))
        } else {
            (0.5 * deficit, 0.5 * deficit)
        }
    }

    /// Cumulative at `x`, clamped to the grid. Inside a Hermite panel the
    /// interpolant is integrated exactly; elsewhere the cumulative is
    /// interpolated linearly.
    fn grid_cumulative(&self, x: f64) -> f64 {
        let ts = self.grid.nodes();
        if x <= ts[0] {
            return 0.0;
        }
        if x >= ts[ts.len() - 1] {
            return self.captured_mass;
        }
        let i = ts.partition_point(|&t| t <= x) - 1;
        let h = ts[i + 1] - ts[i];
        let f = (x - ts[i]) / h;
        match &self.slope {
            Some(dp) if self.hermite[i] => {
                let panel =
                    HermitePanel { p0: self.density[i], p1: self.density[i + 1], d0: h * dp[i], d1: h * dp[i + 1] };
                self.cumulative[i] + h * panel.integral(f)
            }
            _ => self.cumulative[i] + f * (self.cumulative[i + 1] - self.cumulative[i]),
        }
    }

    /// Probability of T < x, including the estimated left tail.
    pub fn mass_below(&self, x: f64) -> f64 {
        let (left, right) = self.tail_masses();
        let c = self.center();
        if x < self.grid.t_min() {
            left * (self.grid.t_min() - c).abs() / (x - c).abs()
        } else if x > self.grid.t_max() {
            left + self.captured_mass + right * (1.0 - (self.grid.t_max() - c).abs() / (x - c).abs())
        } else {
            left + self.grid_cumulative(x)
        }
    }

    /// Probability of T > x, the complement of [`Self::mass_below`].
    pub fn mass_above(&self, x: f64) -> f64 {
        1.0 - self.mass_below(x)
    }

    /// Half the largest single-panel mass plus the absolute coverage deficit.
    pub fn cdf_error_bar(&self) -> f64 {
        let panel = self.cumulative.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        self.coverage_deficit().abs() + 0.5 * panel
    }

    pub fn cdf(&self, x: f64) -> CdfValue {
        CdfValue { value: self.mass_below(x), error: self.cdf_error_bar() }
    }

    /// Σ w g(t) p(t) over the grid.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.density).map(|((t, w), p)| w * g(*t) * p).sum()
    }

    /// Decay exponent β of the density envelope, p ~ |t|^{-β}, on the slower
    /// side, along with the envelope level and radius used for it.
    fn tail_profile(&self) -> Vec<(f64, f64, f64)> {
        let c = self.center();
        let ts = self.grid.nodes();
        let mut sides = Vec::with_capacity(2);
        for sign in [-1.0, 1.0] {
            let radius = if sign < 0.0 { c - ts[0] } else { ts[ts.len() - 1] - c };
            let window_max = |lo: f64, hi: f64| {
                ts.iter()
                    .zip(&self.density)
                    .filter(|(t, _)| {
                        let r = sign * (**t - c);
                        r >= lo && r <= hi
                    })
                    .map(|(_, p)| *p)
                    .fold(0.0, f64::max)
            };
            let inner = window_max(radius / 4.0, radius / 2.0);
            let outer = window_max(radius / 2.0, radius);
            let beta = if outer > 0.0 && inner > 0.0 { (inner / outer).log2() } else { f64::INFINITY };
            sides.push((beta, outer, radius));
        }
        sides
    }

    /// ∫ t^order p(t) dt, guarded against heavy tails.
    ///
    /// Fails with `MomentDivergence` when the density decays like
    /// |t|^{-(order+1)} or slower and the tail still carries weight.
    pub fn moment(&self, order: u32) -> Result<f64> {
        if order > 0 {
            let threshold = order as f64 + 1.0 + EXPONENT_MARGIN;
            for (beta, level, radius) in self.tail_profile() {
                let contribution = level * radius.powi(order as i32 + 1);
                if beta <= threshold && contribution > NEGLIGIBLE_TAIL {
                    return Err(Error::MomentDivergence { order, exponent: beta });
                }
            }
        }
        Ok(self.integrate(|t| t.powi(order as i32)))
    }

    /// Decay exponent of the slower tail (for reports).
    pub fn tail_exponent(&self) -> f64 {
        self.tail_profile().into_iter().map(|s| s.0).fold(f64::INFINITY, f64::min)
    }
}

fn require_continuous(state: &EnergyState) -> Result<()> {
    match state.spectrum().kind() {
        SpectrumKind::Continuous => Ok(()),
        SpectrumKind::Discrete => {
            if state.occupied_levels() <= 1 {
                Err(Error::NarrowSpectrum)
            } else {
                Err(Error::UnsupportedSpectrum)
            }
        }
    }
}

fn plan_for(state: &EnergyState) -> FilonPlan {
    let blocks = (0..state.spectrum().degeneracy()).map(|j| state.block(j).to_vec()).collect();
    FilonPlan::new(state.spectrum().energies(), blocks)
}

/// a_j(t) = (2π)^{-1/2} ∫ e^{iEt} ψ_j(E) dE at each time, indexed `[j][t]`.
pub fn time_amplitudes(state: &EnergyState, times: &[f64]) -> Result<Vec<Vec<Complex64>>> {
    time_amplitudes_with(state, times, &FilonRule::default())
}

pub fn time_amplitudes_with(state: &EnergyState, times: &[f64], rule: &FilonRule) -> Result<Vec<Vec<Complex64>>> {
    require_continuous(state)?;
    let plan = plan_for(state);
    let d = plan.block_count();
    let elapsed = state.elapsed();
    let norm = inv_sqrt_2pi();
    let per_time: Vec<Vec<Complex64>> = times
        .par_iter()
        .map(|&t| {
            let mut v = plan.transform(t - elapsed, rule)?;
            v.iter_mut().for_each(|a| *a *= norm);
            Ok(v)
        })
        .collect::<Result<_>>()?;
    Ok((0..d).map(|j| per_time.iter().map(|v| v[j]).collect()).collect())
}

/// Plan over ψ_j followed by iEψ_j, the latter giving ∂_t a_j.
fn plan_with_derivative(state: &EnergyState) -> FilonPlan {
    let d = state.spectrum().degeneracy();
    let energies = state.spectrum().energies();
    let mut blocks: Vec<Vec<Complex64>> = (0..d).map(|j| state.block(j).to_vec()).collect();
    for j in 0..d {
        blocks.push(state.block(j).iter().zip(energies).map(|(a, e)| a * Complex64::new(0.0, *e)).collect());
    }
    FilonPlan::new(energies, blocks)
}

fn density_on(state: &EnergyState, grid: &TimeGrid, rule: &FilonRule) -> Result<TimeDistribution> {
    require_continuous(state)?;
    let d = state.spectrum().degeneracy();
    let plan = plan_with_derivative(state);
    let elapsed = state.elapsed();
    let scale = 1.0 / (2.0 * PI);
    let values: Vec<(f64, f64)> = grid
        .nodes()
        .par_iter()
        .map(|&t| {
            let v = plan.transform(t - elapsed, rule)?;
            let p = v[..d].iter().map(|a| a.norm_sqr()).sum::<f64>() * scale;
            let dp = v[..d].iter().zip(&v[d..]).map(|(a, b)| (a.conj() * b).re).sum::<f64>() * 2.0 * scale;
            Ok((p, dp))
        })
        .collect::<Result<_>>()?;
    let (density, slope) = values.into_iter().unzip();
    TimeDistribution::from_parts_with_slope(grid.clone(), density, slope)
}

/// p_T(t) = Σ_j |a_j(t)|² on `grid`; fails if the grid misses more than its
/// coverage tolerance.
pub fn time_density(state: &EnergyState, grid: &TimeGrid) -> Result<TimeDistribution> {
    time_density_with(state, grid, &FilonRule::default())
}

pub fn time_density_with(state: &EnergyState, grid: &TimeGrid, rule: &FilonRule) -> Result<TimeDistribution> {
    let dist = density_on(state, grid, rule)?;
    if !dist.meets_coverage() {
        return Err(Error::Coverage { captured: dist.captured_mass, tol: grid.coverage_tol });
    }
    Ok(dist)
}

/// Density on an automatically widened symmetric grid.
pub fn time_density_auto(state: &EnergyState, config: &AutoGrid) -> Result<TimeDistribution> {
    require_continuous(state)?;
    let span = state.spectrum().e_max() - state.spectrum().e_min();
    let dt = config.spacing.unwrap_or(PI / (8.0 * span));
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("time spacing {dt} must be positive")));
    }
    let mut half_width = config.initial_half_width.unwrap_or(128.0 * dt);
    let mut last_deficit = f64::INFINITY;
    loop {
        let half_nodes = (half_width / dt).round().max(1.0) as usize;
        let nodes = 2 * half_nodes + 1;
        if nodes > config.max_nodes {
            return Err(Error::Coverage { captured: 1.0 - last_deficit, tol: config.coverage_tol });
        }
        let grid = TimeGrid::symmetric(half_nodes as f64 * dt, nodes)?.with_coverage_tol(config.coverage_tol)?;
        let dist = density_on(state, &grid, &config.rule)?;
        if dist.meets_coverage() {
            return Ok(dist);
        }
        // Any density tail decaying faster than 1/t at least halves the
        // missing mass per doubling; a stalled deficit is energy-grid error,
        // which widening cannot fix.
        let deficit = dist.coverage_deficit();
        if deficit > STALL_RATIO * last_deficit {
            return Err(Error::Coverage { captured: dist.captured_mass, tol: config.coverage_tol });
        }
        last_deficit = deficit;
        half_width *= 2.0;
    }
}

/// max_t |p_T(t | evolve(ψ, s)) − p_T(t − s | ψ)| over the grid.
pub fn covariance_residual(state: &EnergyState, shift: f64, grid: &TimeGrid) -> Result<f64> {
    let moved = time_density(&state.evolve(shift), grid)?;
    let reference = time_density(state, &grid.shifted(-shift))?;
    Ok(moved.density().iter().zip(reference.density()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// ⟨T⟩ = ∫ t p_T(t) dt.
pub fn mean_time(dist: &TimeDistribution) -> Result<f64> {
    dist.moment(1)
}
