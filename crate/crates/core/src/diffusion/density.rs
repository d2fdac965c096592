use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::path::{check_start, run_path};
use super::{DiffusionError, PathState, StepStats};
use crate::geometry::closest_point;
use crate::medium::ClusterModel;
use crate::point::{scale, to_vec, zero, Point};
use crate::raster::bin_volume;
use crate::rng::{derive_seed, stream, Purpose};
use crate::stats::{fmt17, Estimate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityParams {
    pub dt: f64,
    pub n_paths: u64,
    /// Bin width in rescaled coordinates.
    pub dx: f64,
    /// Rescaled half-extent of the bin grid.
    pub r_grid: f64,
    /// Monte Carlo samples per bin volume.
    pub volume_samples: u64,
}

impl Default for DensityParams {
    fn default() -> Self {
        DensityParams {
            dt: 1.0 / 36.0,
            n_paths: 100_000,
            dx: 0.25,
            r_grid: 2.0,
            volume_samples: 20_000,
        }
    }
}

/// Volume-corrected endpoint histogram at one `(t, ε)`.
///
/// Bins are cubes of side `dx` centered on the rescaled lattice `dx·ℤ^D`
/// with `|k_i| ≤ k_max`; endpoints beyond the grid are kept in `overflow`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDensity<const D: usize> {
    pub t: f64,
    pub epsilon: f64,
    pub dx: f64,
    pub k_max: usize,
    pub n_paths: u64,
    pub start: Vec<f64>,
    pub counts: Vec<u64>,
    pub overflow: u64,
    /// `|bin ∩ W′|` in unscaled coordinates.
    pub volumes: Vec<Estimate>,
    /// `p̂ = (count/N)/|bin ∩ W′|`.
    pub density: Vec<f64>,
    /// `ε^{-D}·p̂`.
    pub rescaled: Vec<f64>,
    /// Standard error of `rescaled` (binomial and volume parts).
    pub se: Vec<f64>,
    /// Bins with a nonzero count whose volume interval reaches 0.
    pub empty_volume_bins: Vec<usize>,
}

fn side(k_max: usize) -> usize {
    2 * k_max + 1
}

fn bin_multi<const D: usize>(k_max: usize, mut idx: usize) -> [i64; D] {
    let s = side(k_max);
    std::array::from_fn(|_| {
        let k = (idx % s) as i64 - k_max as i64;
        idx /= s;
        k
    })
}

fn bin_flat<const D: usize>(k_max: usize, z: &Point<D>, dx: f64) -> Option<usize> {
    let s = side(k_max);
    let mut idx = 0usize;
    for k in (0..D).rev() {
        let q = (z[k] / dx).round();
        if !(q.abs() <= k_max as f64) {
            return None;
        }
        idx = idx * s + (q as i64 + k_max as i64) as usize;
    }
    Some(idx)
}

impl<const D: usize> EmpiricalDensity<D> {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    /// Rescaled center of bin `idx`.
    pub fn bin_center(&self, idx: usize) -> Point<D> {
        let k = bin_multi::<D>(self.k_max, idx);
        std::array::from_fn(|i| k[i] as f64 * self.dx)
    }

    /// Bin containing the rescaled point `z`.
    pub fn bin_of(&self, z: &Point<D>) -> Option<usize> {
        bin_flat(self.k_max, z, self.dx)
    }

    /// Every path is either in a bin or in `overflow`.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }

    /// Bin assigned to the rescaled point `x`: the one containing `ε·g(x/ε)`.
    pub fn bin_for(&self, cluster: &ClusterModel<D>, x: &Point<D>) -> Option<usize> {
        let g = closest_point(cluster, &scale(x, 1.0 / self.epsilon)).ok()?;
        self.bin_of(&scale(&g, self.epsilon))
    }

    /// `(ε^{-D} p̂(g(x/ε)), SE)`.
    pub fn value_at(&self, cluster: &ClusterModel<D>, x: &Point<D>) -> Option<(f64, f64)> {
        self.bin_for(cluster, x).map(|b| (self.rescaled[b], self.se[b]))
    }

    pub fn csv_header() -> String {
        let xs: Vec<String> = (1..=D).map(|k| format!("bin_center_x{k}")).collect();
        format!(
            "t,epsilon,{},count,bin_volume,density,rescaled_density,se\n",
            xs.join(",")
        )
    }

    pub fn csv_rows(&self) -> String {
        let mut s = String::new();
        for b in 0..self.bin_count() {
            let c = self.bin_center(b);
            let xs: Vec<String> = c.iter().map(|&v| fmt17(v)).collect();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                fmt17(self.t),
                fmt17(self.epsilon),
                xs.join(","),
                self.counts[b],
                fmt17(self.volumes[b].value),
                fmt17(self.density[b]),
                fmt17(self.rescaled[b]),
                fmt17(self.se[b])
            ));
        }
        s
    }
}

fn check_params(p: &DensityParams, epsilon: f64, ts: &[f64]) -> Result<usize, DiffusionError> {
    if p.n_paths == 0 || p.volume_samples == 0 {
        return Err(DiffusionError::InvalidParameter("n_paths and volume_samples must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite() && p.dx > 0.0 && p.r_grid > 0.0) {
        return Err(DiffusionError::InvalidParameter(format!(
            "need epsilon, dx, r_grid > 0 (got {epsilon}, {}, {})",
            p.dx, p.r_grid
        )));
    }
    if ts.is_empty() || ts[0] <= 0.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DiffusionError::InvalidParameter("times must be positive and increasing".into()));
    }
    Ok((p.r_grid / p.dx).round() as usize)
}

/// Densities at several times `t` (rescaled) from one set of `N` paths
/// started at `g(0)` and observed at `t/ε²`.
pub fn empirical_densities<const D: usize>(
    cluster: &ClusterModel<D>,
    params: &DensityParams,
    ts: &[f64],
    epsilon: f64,
    seed: u64,
) -> Result<(Vec<EmpiricalDensity<D>>, StepStats), DiffusionError> {
    let k_max = check_params(params, epsilon, ts)?;
    let x0 = closest_point(cluster, &zero())?;
    check_start(cluster, &x0, params.dt)?;
    let horizons: Vec<f64> = ts.iter().map(|t| t / (epsilon * epsilon)).collect();

    let paths: Vec<(Vec<Point<D>>, StepStats)> = (0..params.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Purpose::Path, i);
            let mut state = PathState {
                position: x0,
                elapsed: 0.0,
                stream: i,
            };
            let mut stats = StepStats::default();
            let mut out = Vec::with_capacity(horizons.len());
            run_path(cluster, &mut state, &horizons, params.dt, &mut rng, &mut stats, &mut out);
            (out, stats)
        })
        .collect();
    let mut stats = StepStats::default();
    for (_, s) in &paths {
        stats.merge(s);
    }

    let nb = side(k_max).pow(D as u32);
    let volume_seed = derive_seed(seed, Purpose::BinVolume, epsilon.to_bits());
    let volumes: Vec<Estimate> = (0..nb)
        .map(|b| {
            let k = bin_multi::<D>(k_max, b);
            let lo: Point<D> = std::array::from_fn(|i| (k[i] as f64 - 0.5) * params.dx / epsilon);
            let hi: Point<D> = std::array::from_fn(|i| (k[i] as f64 + 0.5) * params.dx / epsilon);
            bin_volume(cluster, &lo, &hi, params.volume_samples, derive_seed(volume_seed, Purpose::BinVolume, b as u64))
        })
        .collect::<Result<_, _>>()?;

    let n = params.n_paths as f64;
    let scale_d = epsilon.powi(-(D as i32));
    let out = ts
        .iter()
        .enumerate()
        .map(|(ti, &t)| {
            let mut counts = vec![0u64; nb];
            let mut overflow = 0u64;
            for (ends, _) in &paths {
                match bin_flat(k_max, &scale(&ends[ti], epsilon), params.dx) {
                    Some(b) => counts[b] += 1,
                    None => overflow += 1,
                }
            }
            let mut density = vec![0.0; nb];
            let mut rescaled = vec![0.0; nb];
            let mut se = vec![0.0; nb];
            let mut empty_volume_bins = Vec::new();
            for b in 0..nb {
                let v = &volumes[b];
                if counts[b] > 0 && v.lo <= 0.0 {
                    empty_volume_bins.push(b);
                }
                // A zero volume estimate falls back to its upper bound.
                let vol = if v.value > 0.0 { v.value } else { v.hi };
                if vol <= 0.0 {
                    continue;
                }
                let q = counts[b] as f64 / n;
                let p = q / vol;
                let var = (q * (1.0 - q) / n) / (vol * vol) + (p * v.se / vol).powi(2);
                density[b] = p;
                rescaled[b] = scale_d * p;
                se[b] = scale_d * var.sqrt();
            }
            EmpiricalDensity {
                t,
                epsilon,
                dx: params.dx,
                k_max,
                n_paths: params.n_paths,
                start: to_vec(&x0),
                counts,
                overflow,
                volumes: volumes.clone(),
                density,
                rescaled,
                se,
                empty_volume_bins,
            }
        })
        .collect();
    Ok((out, stats))
}

/// Density at a single rescaled time `t`.
pub fn empirical_density<const D: usize>(
    cluster: &ClusterModel<D>,
    params: &DensityParams,
    t: f64,
    epsilon: f64,
    seed: u64,
) -> Result<(EmpiricalDensity<D>, StepStats), DiffusionError> {
    let (mut v, stats) = empirical_densities(cluster, params, &[t], epsilon, seed)?;
    Ok((v.remove(0), stats))
}
