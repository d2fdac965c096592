use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

const SYMMETRY_TOL: f64 = 1e-12;

/// Covariance `Σ` with its cached inverse, determinant and eigenvalue range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub sigma: Vec<Vec<f64>>,
    pub inverse: Vec<Vec<f64>>,
    pub det: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl KernelParams {
    pub fn new(sigma: Vec<Vec<f64>>) -> Result<Self, AnalysisError> {
        let d = sigma.len();
        if d == 0 || sigma.iter().any(|r| r.len() != d) {
            return Err(AnalysisError::DimensionMismatch {
                expected: d,
                found: sigma.iter().map(|r| r.len()).find(|&l| l != d).unwrap_or(0),
            });
        }
        let m = DMatrix::from_fn(d, d, |i, j| sigma[i][j]);
        if (&m - m.transpose()).amax() > SYMMETRY_TOL * m.amax().max(1.0) {
            return Err(AnalysisError::NotSymmetric);
        }
        let chol = m.clone().cholesky().ok_or(AnalysisError::NotPositiveDefinite)?;
        let inv = chol.inverse();
        let det = chol.determinant();
        let eig = m.symmetric_eigen().eigenvalues;
        let lambda_min = eig.min();
        if !(det > 0.0 && lambda_min > 0.0) {
            return Err(AnalysisError::NotPositiveDefinite);
        }
        Ok(KernelParams {
            sigma,
            inverse: (0..d).map(|i| (0..d).map(|j| inv[(i, j)]).collect()).collect(),
            det,
            lambda_min,
            lambda_max: eig.max(),
        })
    }

    pub fn identity(d: usize) -> Self {
        let sigma = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self::new(sigma).expect("identity is positive definite")
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `⟨x, Σ^{-1}x⟩`.
    pub fn quad(&self, x: &[f64]) -> f64 {
        self.inverse
            .iter()
            .zip(x)
            .map(|(row, xi)| xi * row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .sum()
    }

    /// Largest `|∇k_t^Σ|`: `k_t(0)·e^{-1/2}/√(λ_min t)`.
    pub fn lipschitz(&self, t: f64) -> Result<f64, AnalysisError> {
        let zero = vec![0.0; self.dim()];
        let k0 = gaussian_kernel(self, t, &zero)?;
        Ok(k0 * (-0.5f64).exp() / (self.lambda_min * t).sqrt())
    }
}

/// `k_t^Σ(x) = (2πt)^{-d/2} (det Σ)^{-1/2} exp(−⟨x, Σ^{-1}x⟩/(2t))`.
pub fn gaussian_kernel(params: &KernelParams, t: f64, x: &[f64]) -> Result<f64, AnalysisError> {
    if !(t > 0.0) {
        return Err(AnalysisError::NonPositiveTime(t));
    }
    let d = params.dim();
    if x.len() != d {
        return Err(AnalysisError::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    let norm = (2.0 * std::f64::consts::PI * t).powf(-(d as f64) / 2.0) / params.det.sqrt();
    Ok(norm * (-params.quad(x) / (2.0 * t)).exp())
}
