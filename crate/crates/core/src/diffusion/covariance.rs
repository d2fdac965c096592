use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::{check_start, run_path};
use super::{DiffusionError, PathState, StepStats};
use crate::point::{sub, to_vec, Point};
use crate::rng::{stream, Purpose};
use crate::medium::ClusterModel;

/// `Σ̂ = (1/(N·T)) Σ_i (X_T − x0)(X_T − x0)ᵀ` with entrywise standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub sigma: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    pub t: f64,
    pub n_paths: u64,
    pub start: Vec<f64>,
}

impl CovarianceEstimate {
    /// Largest `|σ_ij − target_ij| / se_ij` (∞ if an entry has zero SE but differs).
    pub fn max_z(&self, target: &[Vec<f64>]) -> f64 {
        let mut z = 0.0f64;
        for (i, row) in self.sigma.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                let diff = (s - target[i][j]).abs();
                let se = self.se[i][j];
                z = z.max(if se > 0.0 { diff / se } else if diff > 0.0 { f64::INFINITY } else { 0.0 });
            }
        }
        z
    }
}

pub fn estimate_covariance<const D: usize>(
    cluster: &ClusterModel<D>,
    x0: &Point<D>,
    t: f64,
    dt: f64,
    n_paths: u64,
    seed: u64,
) -> Result<(CovarianceEstimate, StepStats), DiffusionError> {
    check_start(cluster, x0, dt)?;
    if !(t > 0.0 && t.is_finite()) || n_paths < 2 {
        return Err(DiffusionError::InvalidParameter(format!(
            "covariance needs t > 0 and at least 2 paths (got {t}, {n_paths})"
        )));
    }
    let results: Vec<(Point<D>, StepStats)> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Covariance, i);
            let mut state = PathState {
                position: *x0,
                elapsed: 0.0,
                stream: i,
            };
            let mut stats = StepStats::default();
            let mut out = Vec::with_capacity(1);
            run_path(cluster, &mut state, &[t], dt, &mut rng, &mut stats, &mut out);
            (sub(&out[0], x0), stats)
        })
        .collect();
    let mut stats = StepStats::default();
    let n = n_paths as f64;
    let mut sum = [[0.0f64; D]; D];
    let mut sum2 = [[0.0f64; D]; D];
    for (z, s) in &results {
        stats.merge(s);
        for i in 0..D {
            for j in 0..D {
                let v = z[i] * z[j] / t;
                sum[i][j] += v;
                sum2[i][j] += v * v;
            }
        }
    }
    let sigma: Vec<Vec<f64>> = (0..D).map(|i| (0..D).map(|j| sum[i][j] / n).collect()).collect();
    let se = (0..D)
        .map(|i| {
            (0..D)
                .map(|j| {
                    let m = sum[i][j] / n;
                    let var = ((sum2[i][j] - n * m * m) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                })
                .collect()
        })
        .collect();
    Ok((
        CovarianceEstimate {
            sigma,
            se,
            t,
            n_paths,
            start: to_vec(x0),
        },
        stats,
    ))
}
