use rand::Rng;
use rayon::prelude::*;

use super::RasterError;
use crate::medium::ClusterModel;
use crate::point::Point;
use crate::rng::{stream, Purpose};
use crate::stats::Estimate;

const BLOCK: u64 = 4096;

/// Monte Carlo estimate of `|[lo, hi] ∩ W′|`.
pub fn bin_volume<const D: usize>(
    cluster: &ClusterModel<D>,
    lo: &Point<D>,
    hi: &Point<D>,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate, RasterError> {
    if (0..D).any(|k| !(hi[k] > lo[k])) || n_samples == 0 {
        return Err(RasterError::InvalidParameter(format!(
            "bin must be nonempty and n_samples > 0 (lo {lo:?}, hi {hi:?}, n {n_samples})"
        )));
    }
    let vol: f64 = (0..D).map(|k| hi[k] - lo[k]).product();
    let hits: u64 = (0..n_samples.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, Purpose::BinVolume, b);
            let n = BLOCK.min(n_samples - b * BLOCK);
            (0..n)
                .filter(|_| {
                    let p: Point<D> = std::array::from_fn(|k| rng.random_range(lo[k]..hi[k]));
                    cluster.contains(&p)
                })
                .count() as u64
        })
        .sum();
    Ok(Estimate::binomial(hits, n_samples, vol))
}
