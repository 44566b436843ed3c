//! Filon-type quadrature for ∫ f(E) e^{iωE} dE over a tabulated f.
//!
//! On every panel f is replaced by a local interpolant (the chord, or the
//! chord plus a cubic bend from the neighbouring nodes) and the product with
//! the exponential is integrated exactly, so the error is bounded by
//! ∫|f − f_interp| dE regardless of ω.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 0.5;
const MOMENT_SERIES_CUTOFF: f64 = 1.0;
const CURVATURE_FLOOR: f64 = 1e-12;
/// Width differences within this many ulps of the node position count as
/// round-off of a uniform grid.
const SAME_WIDTH_ULPS: f64 = 4.0;
/// Panels between exact recomputations of the running phase.
const RESYNC: usize = 32;

/// Per-panel interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Chord through the panel ends.
    Linear,
    /// Local cubic Lagrange interpolant (quadratic on the end panels).
    Cubic,
}

/// Options for the oscillatory rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilonRule {
    pub interpolation: Interpolation,
    /// Largest phase advance ω·h allowed on a panel whose data is not
    /// locally linear (linear interpolation only).
    pub max_panel_phase: f64,
    /// Subdivide offending panels using the cubic reconstruction of the data
    /// instead of failing with `OscillatoryAccuracy`.
    pub refine: bool,
}

impl Default for FilonRule {
    fn default() -> Self {
        Self { interpolation: Interpolation::Cubic, max_panel_phase: PI, refine: true }
    }
}

impl FilonRule {
    pub fn linear() -> Self {
        Self { interpolation: Interpolation::Linear, ..Self::default() }
    }
}

/// Exact weights `(w0, w1)` with ∫_0^1 [f0 (1-u) + f1 u] e^{iθu} du = w0 f0 + w1 f1.
///
/// `e` must equal e^{iθ}.
#[inline]
pub fn filon_weights(theta: f64, e: Complex64) -> (Complex64, Complex64) {
    if theta.abs() < SERIES_CUTOFF {
        // I0 = Σ (iθ)^n/(n+1)!,  I1 = Σ (iθ)^n/(n!(n+2))
        let x = Complex64::new(0.0, theta);
        let mut term = Complex64::new(1.0, 0.0);
        let mut i0 = Complex64::new(0.0, 0.0);
        let mut i1 = Complex64::new(0.0, 0.0);
        for n in 0..18 {
            let nf = n as f64;
            i0 += term / (nf + 1.0);
            i1 += term / (nf + 2.0);
            term = term * x / (nf + 1.0);
        }
        (i0 - i1, i1)
    } else {
        let inv = Complex64::new(0.0, -1.0 / theta);
        let i0 = (e - 1.0) * inv;
        let i1 = (e - i0) * inv;
        (i0 - i1, i1)
    }
}

/// Moments I_n = ∫_0^1 u^n e^{iθu} du for n = 0..3; `e` must equal e^{iθ}.
#[inline]
pub fn cubic_moments(theta: f64, e: Complex64) -> [Complex64; 4] {
    let mut m = [Complex64::new(0.0, 0.0); 4];
    if theta.abs() < MOMENT_SERIES_CUTOFF {
        // I_n = Σ_k (iθ)^k / (k! (n+k+1))
        let x = Complex64::new(0.0, theta);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..24 {
            let kf = k as f64;
            for (n, slot) in m.iter_mut().enumerate() {
                *slot += term / (n as f64 + kf + 1.0);
            }
            term = term * x / (kf + 1.0);
        }
    } else {
        let inv = Complex64::new(0.0, -1.0 / theta);
        m[0] = (e - 1.0) * inv;
        for n in 1..4 {
            m[n] = (e - m[n - 1] * n as f64) * inv;
        }
    }
    m
}

/// Tabulated blocks of data on a shared grid, ready for repeated
/// transforms at different ω.
#[derive(Debug, Clone)]
pub struct FilonPlan {
    nodes: Vec<f64>,
    widths: Vec<f64>,
    blocks: Vec<Vec<Complex64>>,
    /// Per block, per panel: (α, β) with the cubic deviation from the chord
    /// u(1-u)(α + βu).
    bends: Vec<Vec<(Complex64, Complex64)>>,
    curved: Vec<bool>,
}

impl FilonPlan {
    pub fn new(nodes: &[f64], blocks: Vec<Vec<Complex64>>) -> Self {
        let n = nodes.len();
        assert!(n >= 2, "Filon plan needs at least two nodes");
        assert!(blocks.iter().all(|b| b.len() == n));
        let widths: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let scale = blocks.iter().flat_map(|b| b.iter().map(|v| v.norm())).fold(0.0, f64::max);
        let bends: Vec<Vec<_>> = blocks.iter().map(|b| panel_bends(nodes, b)).collect();
        let curved =
            (0..n - 1).map(|k| bends.iter().any(|b| b[k].0.norm() + b[k].1.norm() > CURVATURE_FLOOR * scale)).collect();
        Self { nodes: nodes.to_vec(), widths, blocks, bends, curved }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// ∫ f_b(E) e^{iωE} dE for every block b, written into `out`.
    pub fn transform_into(&self, omega: f64, rule: &FilonRule, out: &mut [Complex64]) -> Result<()> {
        match rule.interpolation {
            Interpolation::Cubic => {
                self.cubic_into(omega, out);
                Ok(())
            }
            Interpolation::Linear => self.linear_into(omega, rule, out),
        }
    }

    fn cubic_into(&self, omega: f64, out: &mut [Complex64]) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        let mut e_prev = Complex64::cis(omega * self.nodes[0]);
        // moments and phase step of the last panel width, reused while the
        // grid stays uniform; the running phase is resynchronized regularly
        let mut cached: Option<(f64, [Complex64; 4], Complex64)> = None;
        for k in 0..self.widths.len() {
            let h = self.widths[k];
            let (m, e_next) = match cached {
                Some((hc, m, step))
                    if (h - hc).abs() <= SAME_WIDTH_ULPS * f64::EPSILON * self.nodes[k + 1].abs()
                        && k % RESYNC != 0 =>
                {
                    (m, e_prev * step)
                }
                _ => {
                    let theta = omega * h;
                    let step = Complex64::cis(theta);
                    let m = cubic_moments(theta, step);
                    cached = Some((h, m, step));
                    (m, Complex64::cis(omega * self.nodes[k + 1]))
                }
            };
            let scale = e_prev * h;
            let (w0, w1) = ((m[0] - m[1]) * scale, m[1] * scale);
            if self.curved[k] {
                let (wa, wb) = ((m[1] - m[2]) * scale, (m[2] - m[3]) * scale);
                for (b, o) in out.iter_mut().enumerate() {
                    let (alpha, beta) = self.bends[b][k];
                    *o += w0 * self.blocks[b][k] + w1 * self.blocks[b][k + 1] + wa * alpha + wb * beta;
                }
            } else {
                for (b, o) in out.iter_mut().enumerate() {
                    *o += w0 * self.blocks[b][k] + w1 * self.blocks[b][k + 1];
                }
            }
            e_prev = e_next;
        }
    }

    fn linear_into(&self, omega: f64, rule: &FilonRule, out: &mut [Complex64]) -> Result<()> {
        let d = self.blocks.len();
        debug_assert_eq!(out.len(), d);
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        let mut e_prev = Complex64::cis(omega * self.nodes[0]);
        for k in 0..self.widths.len() {
            let e_next = Complex64::cis(omega * self.nodes[k + 1]);
            let h = self.widths[k];
            let theta = omega * h;
            if self.curved[k] && theta.abs() > rule.max_panel_phase {
                if !rule.refine {
                    return Err(Error::OscillatoryAccuracy { phase: theta.abs(), limit: rule.max_panel_phase });
                }
                let m = (theta.abs() / rule.max_panel_phase).ceil() as usize;
                let sub = theta / m as f64;
                let step = Complex64::cis(sub);
                let (w0, w1) = filon_weights(sub, step);
                let hs = h / m as f64;
                for (b, o) in out.iter_mut().enumerate() {
                    let (f0, f1) = (self.blocks[b][k], self.blocks[b][k + 1]);
                    let (alpha, beta) = self.bends[b][k];
                    let value = |u: f64| f0 * (1.0 - u) + f1 * u + (alpha + beta * u) * (u * (1.0 - u));
                    let mut phase = e_prev;
                    let mut left = f0;
                    for i in 0..m {
                        let right = if i + 1 == m { f1 } else { value((i + 1) as f64 / m as f64) };
                        *o += phase * (w0 * left + w1 * right) * hs;
                        phase *= step;
                        left = right;
                    }
                }
            } else {
                let step = e_next * e_prev.conj();
                let (w0, w1) = filon_weights(theta, step);
                let (w0, w1) = (w0 * e_prev * h, w1 * e_prev * h);
                for (b, o) in out.iter_mut().enumerate() {
                    *o += w0 * self.blocks[b][k] + w1 * self.blocks[b][k + 1];
                }
            }
            e_prev = e_next;
        }
        Ok(())
    }

    pub fn transform(&self, omega: f64, rule: &FilonRule) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.blocks.len()];
        self.transform_into(omega, rule, &mut out)?;
        Ok(out)
    }
}

/// Deviation of the local Lagrange interpolant from the chord on each panel.
fn panel_bends(nodes: &[f64], f: &[Complex64]) -> Vec<(Complex64, Complex64)> {
    let n = nodes.len();
    let zero = Complex64::new(0.0, 0.0);
    if n < 3 {
        return vec![(zero, zero); n - 1];
    }
    (0..n - 1)
        .map(|k| {
            let stencil: Vec<usize> = if n >= 4 && k >= 1 && k + 2 < n {
                vec![k - 1, k, k + 1, k + 2]
            } else if k == 0 {
                vec![0, 1, 2]
            } else {
                vec![n - 3, n - 2, n - 1]
            };
            let h = nodes[k + 1] - nodes[k];
            let chord = |u: f64| f[k] * (1.0 - u) + f[k + 1] * u;
            let g = |u: f64| lagrange(nodes, f, &stencil, nodes[k] + u * h) - chord(u);
            if stencil.len() == 3 {
                (g(0.5) * 4.0, zero)
            } else {
                let (g1, g2) = (g(1.0 / 3.0), g(2.0 / 3.0));
                (g1 * 9.0 - g2 * 4.5, (g2 - g1) * 13.5)
            }
        })
        .collect()
}

fn lagrange(nodes: &[f64], f: &[Complex64], stencil: &[usize], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &i in stencil {
        let mut l = 1.0;
        for &m in stencil {
            if m != i {
                l *= (x - nodes[m]) / (nodes[i] - nodes[m]);
            }
        }
        acc += f[i] * l;
    }
    acc
}
