use serde::{Deserialize, Serialize};

use super::{gaussian_kernel, AnalysisError, KernelParams};
use crate::diffusion::EmpiricalDensity;
use crate::medium::ClusterModel;
use crate::point::{norm, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltEntry {
    pub t: f64,
    pub x: Vec<f64>,
    pub density: f64,
    pub kernel: f64,
    /// `ε^{-d}p̂(g(x/ε)) − k_t^Σ(x)`.
    pub error: f64,
    pub se: f64,
}

/// Local-CLT error over the `(t, x)` grid at one `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRow {
    pub epsilon: f64,
    pub entries: Vec<CltEntry>,
    pub sup_error: f64,
    pub argmax_t: f64,
    pub argmax_x: Vec<f64>,
    /// `3·SE` at the argmax.
    pub noise_floor: f64,
    /// Kernel modulus over half a bin diagonal, maximized over the times.
    pub discretization_bound: f64,
}

/// Compares `ε^{-d}p̂(g(x/ε))` with `k_t^Σ(x)` for every bin center `|x| < R`
/// and every density (one per `t`) in `densities`.
pub fn clt_error<const D: usize>(
    cluster: &ClusterModel<D>,
    densities: &[EmpiricalDensity<D>],
    params: &KernelParams,
    r: f64,
) -> Result<CltRow, AnalysisError> {
    let first = densities
        .first()
        .ok_or_else(|| AnalysisError::InvalidParameter("no densities given".into()))?;
    if params.dim() != D {
        return Err(AnalysisError::DimensionMismatch {
            expected: D,
            found: params.dim(),
        });
    }
    if densities.iter().any(|d| d.epsilon != first.epsilon || d.dx != first.dx) {
        return Err(AnalysisError::InvalidParameter("densities mix epsilon or bin width".into()));
    }
    let grid: Vec<Point<D>> = (0..first.bin_count())
        .map(|b| first.bin_center(b))
        .filter(|x| norm(x) < r)
        .collect();
    let mut entries = Vec::with_capacity(grid.len() * densities.len());
    let mut discretization_bound = 0.0f64;
    for d in densities {
        discretization_bound =
            discretization_bound.max(params.lipschitz(d.t)? * d.dx * (D as f64).sqrt() / 2.0);
        for x in &grid {
            let (density, se) = d.value_at(cluster, x).ok_or_else(|| AnalysisError::MissingGridPoint {
                t: d.t,
                x: x.to_vec(),
            })?;
            let kernel = gaussian_kernel(params, d.t, x)?;
            entries.push(CltEntry {
                t: d.t,
                x: x.to_vec(),
                density,
                kernel,
                error: density - kernel,
                se,
            });
        }
    }
    let best = entries
        .iter()
        .fold(None::<&CltEntry>, |b, e| match b {
            Some(b) if b.error.abs() >= e.error.abs() => Some(b),
            _ => Some(e),
        })
        .ok_or_else(|| AnalysisError::InvalidParameter(format!("no bin centers with |x| < {r}")))?;
    Ok(CltRow {
        epsilon: first.epsilon,
        sup_error: best.error.abs(),
        argmax_t: best.t,
        argmax_x: best.x.clone(),
        noise_floor: 3.0 * best.se,
        discretization_bound,
        entries,
    })
}
