//! The arrow-of-time operator M_F and functionals ⟨g(T)⟩ of canonical time.
//!
//! Two independent routes are provided. The CDF route reads
//! ⟨M_F⟩(t) = P(T < −t | ψ_0) off the cumulative time distribution; the
//! matrix route builds sgn T on the energy grid from the principal-value
//! kernel −2i / (E − E') and forms M_F = (1 − sgn T) / 2.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{EnergyState, SpectrumSpec};
use crate::timekernel::{time_density, CdfValue, TimeDistribution, TimeGrid};

/// Largest increase of ⟨M_F⟩ between consecutive times tolerated as
/// round-off.
pub const MONOTONICITY_TOL: f64 = 1e-12;

/// ⟨M_F⟩ at evolution time `t` from the time density of ψ_0.
pub fn mf_from_distribution(dist: &TimeDistribution, t: f64) -> CdfValue {
    dist.cdf(-t)
}

/// ⟨sgn T⟩ at evolution time `t`, sharing the cumulative with
/// [`mf_from_distribution`] so that ⟨M_F⟩ = (1 − ⟨sgn T⟩)/2 holds exactly.
pub fn sgn_from_distribution(dist: &TimeDistribution, t: f64) -> f64 {
    let below = dist.mass_below(-t);
    dist.mass_above(-t) - below
}

/// ⟨ψ_t|M_F|ψ_t⟩ for ψ_t = evolve(ψ_0, t), by the CDF route.
pub fn mf_expectation(state0: &EnergyState, t: f64, grid: &TimeGrid) -> Result<f64> {
    Ok(mf_expectation_with_error(state0, t, grid)?.value)
}

pub fn mf_expectation_with_error(state0: &EnergyState, t: f64, grid: &TimeGrid) -> Result<CdfValue> {
    Ok(mf_from_distribution(&time_density(state0, grid)?, t))
}

/// ∫ sgn(t) p_T(t | ψ) dt.
pub fn sgn_expectation(state: &EnergyState, grid: &TimeGrid) -> Result<f64> {
    Ok(sgn_from_distribution(&time_density(state, grid)?, 0.0))
}

/// Built-in functions of time for [`g_expectation`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFunction {
    One,
    Sign,
    /// g(t) = −t.
    NegTime,
    /// g(t) = −arctan t.
    NegArctan,
    /// g(t) = 1 for t < at, else 0.
    Step {
        at: f64,
    },
    /// Linear interpolation through `(times, values)`, constant beyond the ends.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl TimeFunction {
    fn validate(&self) -> Result<()> {
        if let TimeFunction::Tabulated { times, values } = self {
            if times.len() != values.len() || times.is_empty() {
                return Err(Error::InvalidArgument("tabulated g needs matching, nonempty times and values".into()));
            }
            if !crate::quadrature::strictly_increasing(times) && times.len() > 1 {
                return Err(Error::InvalidArgument("tabulated g times must be strictly increasing".into()));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("tabulated g values must be finite".into()));
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeFunction::One => 1.0,
            TimeFunction::Sign => {
                if t > 0.0 {
                    1.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            TimeFunction::NegTime => -t,
            TimeFunction::NegArctan => -t.atan(),
            TimeFunction::Step { at } => {
                if t < *at {
                    1.0
                } else {
                    0.0
                }
            }
            TimeFunction::Tabulated { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let i = times.partition_point(|&x| x <= t) - 1;
                let f = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + f * (values[i + 1] - values[i])
            }
        }
    }
}

/// ∫ g(t) p_T(t) dt on a precomputed density.
///
/// Sign and step functions go through the interpolated cumulative, so they
/// agree with the CDF route; −t goes through the guarded first moment.
pub fn g_expectation_on(dist: &TimeDistribution, g: &TimeFunction) -> Result<f64> {
    g.validate()?;
    Ok(match g {
        TimeFunction::One => dist.captured_mass(),
        TimeFunction::Sign => sgn_from_distribution(dist, 0.0),
        TimeFunction::Step { at } => dist.mass_below(*at),
        TimeFunction::NegTime => -dist.moment(1)?,
        TimeFunction::NegArctan | TimeFunction::Tabulated { .. } => dist.integrate(|t| g.eval(t)),
    })
}

pub fn g_expectation(state: &EnergyState, g: &TimeFunction, grid: &TimeGrid) -> Result<f64> {
    g_expectation_on(&time_density(state, grid)?, g)
}

/// ⟨M_F⟩ and ⟨sgn T⟩ along a sequence of evolution times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCurve {
    pub times: Vec<f64>,
    pub mf_values: Vec<f64>,
    pub sgn_values: Vec<f64>,
    pub errors: Vec<f64>,
}

impl LyapunovCurve {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smallest decrease mf[i] − mf[i+1]; `+∞` for fewer than two points.
    pub fn min_decrement(&self) -> f64 {
        self.mf_values.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.min_decrement() > 0.0
    }
}

/// Evaluates the curve on one density; `times` must be strictly increasing.
pub fn lyapunov_curve_on(dist: &TimeDistribution, times: &[f64]) -> Result<LyapunovCurve> {
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("times must be finite and strictly increasing".into()));
    }
    let mut curve = LyapunovCurve {
        times: times.to_vec(),
        mf_values: Vec::with_capacity(times.len()),
        sgn_values: Vec::with_capacity(times.len()),
        errors: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let mf = mf_from_distribution(dist, t);
        curve.mf_values.push(mf.value);
        curve.sgn_values.push(sgn_from_distribution(dist, t));
        curve.errors.push(mf.error);
    }
    for (i, w) in curve.mf_values.windows(2).enumerate() {
        let increase = w[1] - w[0];
        if increase > MONOTONICITY_TOL {
            return Err(Error::MonotonicityViolation { from: times[i], to: times[i + 1], increase });
        }
    }
    Ok(curve)
}

pub fn lyapunov_curve(state0: &EnergyState, times: &[f64], grid: &TimeGrid) -> Result<LyapunovCurve> {
    let dist = time_density(state0, grid)?;
    lyapunov_curve_on(&dist, times)
}

/// A Hermitian matrix on the quadrature-weighted energy basis.
///
/// Vectors are v_{jk} = √w_k ψ_j(E_k), so the Euclidean inner product is the
/// quadrature inner product and ⟨ψ|A|ψ⟩ = v† A v.
#[derive(Debug, Clone)]
pub struct HermitianMatrixObservable {
    spectrum: Arc<SpectrumSpec>,
    matrix: DMatrix<Complex64>,
}

impl HermitianMatrixObservable {
    pub fn new(spectrum: Arc<SpectrumSpec>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = spectrum.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, basis has dimension {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { spectrum, matrix })
    }

    pub fn spectrum(&self) -> &SpectrumSpec {
        &self.spectrum
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// max |A − A†|.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for k in i..n {
                worst = worst.max((self.matrix[(i, k)] - self.matrix[(k, i)].conj()).norm());
            }
        }
        worst
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// v† A v for the weighted amplitudes of `state`.
    pub fn expectation(&self, state: &EnergyState) -> Result<f64> {
        if state.spectrum() != self.spectrum.as_ref() {
            return Err(Error::InvalidArgument("state lives on a different spectrum".into()));
        }
        let v = weighted_vector(state);
        let av = &self.matrix * &v;
        Ok(v.iter().zip(av.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>().re)
    }
}

fn weighted_vector(state: &EnergyState) -> nalgebra::DVector<Complex64> {
    let w = state.spectrum().weights();
    let n = w.len();
    let amps = state.amplitudes();
    nalgebra::DVector::from_iterator(amps.len(), amps.iter().enumerate().map(|(i, a)| a * w[i % n].sqrt()))
}

/// sgn T on a uniform grid: K_kl = (2π)^{-1} (−2i) h / (E_k − E_l) off the
/// diagonal, zero on it, block diagonal in j.
pub fn sgn_t_matrix(spectrum: Arc<SpectrumSpec>) -> Result<HermitianMatrixObservable> {
    let h = spectrum.uniform_spacing()?;
    let n = spectrum.len();
    let d = spectrum.degeneracy();
    let e = spectrum.energies();
    let mut m = DMatrix::<Complex64>::zeros(d * n, d * n);
    let c = -2.0 * h / (2.0 * PI);
    for k in 0..n {
        for l in 0..n {
            if k != l {
                let v = Complex64::new(0.0, c / (e[k] - e[l]));
                for j in 0..d {
                    m[(j * n + k, j * n + l)] = v;
                }
            }
        }
    }
    HermitianMatrixObservable::new(spectrum, m)
}

/// M_F = (I − sgn T)/2.
pub fn mf_matrix(spectrum: Arc<SpectrumSpec>) -> Result<HermitianMatrixObservable> {
    let sgn = sgn_t_matrix(spectrum.clone())?;
    let n = sgn.dim();
    let m = (DMatrix::<Complex64>::identity(n, n) - sgn.matrix) * Complex64::new(0.5, 0.0);
    HermitianMatrixObservable::new(spectrum, m)
}
