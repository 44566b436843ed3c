use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weights;

/// Whether the values are a density against quadrature weights or a set of
/// point masses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Density,
    PointMass,
}

/// A nonnegative distribution tabulated on a grid.
#[derive(Debug, Clone)]
pub struct Distribution {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
    measure: Measure,
}

impl Distribution {
    pub fn density(nodes: Vec<f64>, weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "distribution arrays differ in length ({}, {}, {})",
                nodes.len(),
                weights.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| v.is_nan() || *v < 0.0) {
            return Err(Error::InvalidArgument("density must be nonnegative".into()));
        }
        Ok(Self { nodes, weights, values, measure: Measure::Density })
    }

    /// Density on `nodes` with trapezoid weights.
    pub fn trapezoid(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let weights = trapezoid_weights(&nodes);
        Self::density(nodes, weights, values)
    }

    pub fn point_masses(nodes: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if nodes.len() != masses.len() {
            return Err(Error::InvalidArgument("point-mass arrays differ in length".into()));
        }
        let weights = vec![1.0; nodes.len()];
        Ok(Self { nodes, weights, values: masses, measure: Measure::PointMass })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Same values on a grid translated by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        Self { nodes: self.nodes.iter().map(|x| x + shift).collect(), ..self.clone() }
    }
}
