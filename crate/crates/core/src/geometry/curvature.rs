use super::space::DiscreteSpace;
use crate::error::{invalid, Result};
use serde::{Deserialize, Serialize};

/// Nonnegative per-vertex potential (curvature units, 1/length²).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    values: Vec<f64>,
}

impl PotentialField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !(*v >= 0.0) || !v.is_finite()) {
            return invalid(format!("potential entry {i} is negative or not finite"));
        }
        Ok(PotentialField { values })
    }

    pub fn zero(n: usize) -> Self {
        PotentialField { values: vec![0.0; n] }
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// The potential matching `rescale(space, ε)`: a Ricci density scales by ε².
    pub fn rescaled(&self, eps: f64) -> Self {
        PotentialField { values: self.values.iter().map(|v| v * eps * eps).collect() }
    }

    pub fn sum(&self, other: &PotentialField) -> Self {
        PotentialField { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }

    pub fn powf(&self, p: f64) -> Self {
        PotentialField { values: self.values.iter().map(|v| v.powf(p)).collect() }
    }
}

/// Pointwise Gaussian curvature density `K_i = (2π − Σ angles)/μ_i`.
pub fn gaussian_curvature(space: &DiscreteSpace) -> Result<Vec<f64>> {
    let Some(mesh) = space.mesh() else {
        return invalid("angle defect requires a mesh space");
    };
    let mut sums = vec![0.0; space.vertex_count()];
    for (f, t) in mesh.surface.faces.iter().enumerate() {
        for k in 0..3 {
            sums[t[k]] += mesh.faces[f].angles[k];
        }
    }
    Ok(sums
        .iter()
        .zip(space.measure())
        .map(|(s, m)| (2.0 * std::f64::consts::PI - s) / m)
        .collect())
}

/// Negative part of the Ricci curvature for surfaces: `V = max(−K, 0)`.
pub fn angle_defect_ric_minus(space: &DiscreteSpace) -> Result<PotentialField> {
    let k = gaussian_curvature(space)?;
    PotentialField::new(k.iter().map(|&x| (-x).max(0.0)).collect())
}
