use rand::Rng;
use rayon::prelude::*;

use super::{GeometryError, SourceDistances};
use crate::medium::ClusterModel;
use crate::point::{norm2, to_vec, unit_ball_volume, Point};
use crate::rng::{stream, Purpose};
use crate::stats::Estimate;

pub(crate) const BLOCK: u64 = 4096;

/// Uniform point in the open Euclidean ball `B(center, r)`.
pub fn uniform_in_ball<const D: usize, R: Rng>(rng: &mut R, center: &Point<D>, r: f64) -> Point<D> {
    loop {
        let u: Point<D> = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if norm2(&u) < 1.0 {
            return std::array::from_fn(|k| center[k] + r * u[k]);
        }
    }
}

/// Monte Carlo estimate of `|B_W′(x, r)|` using the center-graph distance.
///
/// Biased low: the graph distance only bounds `d_W′` from above.
pub fn ball_volume<const D: usize>(
    cluster: &ClusterModel<D>,
    x: &Point<D>,
    r: f64,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate, GeometryError> {
    if !(r > 0.0 && r.is_finite()) || n_samples == 0 {
        return Err(GeometryError::InvalidParameter(format!(
            "ball_volume needs r > 0 and n_samples > 0 (got {r}, {n_samples})"
        )));
    }
    if !cluster.contains(x) {
        return Err(GeometryError::NotInCluster(to_vec(x)));
    }
    let src = SourceDistances::new(cluster, x, r)?;
    Ok(ball_volume_from(cluster, &src, x, r, n_samples, seed))
}

pub(crate) fn ball_volume_from<const D: usize>(
    cluster: &ClusterModel<D>,
    src: &SourceDistances<'_, D>,
    x: &Point<D>,
    r: f64,
    n_samples: u64,
    seed: u64,
) -> Estimate {
    let blocks = n_samples.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream(seed, Purpose::BallVolume, b);
            let n = BLOCK.min(n_samples - b * BLOCK);
            let mut h = 0u64;
            for _ in 0..n {
                let y = uniform_in_ball(&mut rng, x, r);
                if cluster.contains(&y) && src.to(&y).is_ok_and(|d| d < r) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    Estimate::binomial(hits, n_samples, unit_ball_volume(D) * r.powi(D as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_inside_single_ball_is_euclidean() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0]], 5.0).unwrap();
        let e = ball_volume(&c, &[0.0, 0.0], 2.0, 20_000, 3).unwrap();
        assert_eq!(e.value, 4.0 * PI);
        assert_eq!(e.se, 0.0);
    }

    #[test]
    fn saturates_at_cluster_volume() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0]], 1.0).unwrap();
        let e = ball_volume(&c, &[0.0, 0.0], 3.0, 40_000, 4).unwrap();
        assert!(e.value - 3.0 * e.se < PI && PI < e.value + 3.0 * e.se, "{e:?}");
    }

    #[test]
    fn reproducible_from_seed() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0], [1.5, 0.0]], 1.0).unwrap();
        let a = ball_volume(&c, &[0.0, 0.0], 2.0, 10_000, 9).unwrap();
        let b = ball_volume(&c, &[0.0, 0.0], 2.0, 10_000, 9).unwrap();
        assert_eq!(a, b);
    }
}
