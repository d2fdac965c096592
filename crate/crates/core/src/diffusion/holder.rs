use serde::{Deserialize, Serialize};

use super::EmpiricalDensity;
use crate::medium::ClusterModel;
use crate::point::{dist, norm, Point};

/// Equicontinuity statistic `sup |ε^{-d}p̂(g(x/ε)) − ε^{-d}p̂(g(y/ε))|` over
/// grid pairs with `|x − y| < r0` and the stored times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderRow {
    pub epsilon: f64,
    pub r0: f64,
    pub statistic: f64,
    /// `2·√(se_x² + se_y²)` at the maximizing pair.
    pub noise_floor: f64,
    pub argmax_t: f64,
    pub argmax_x: Vec<f64>,
    pub argmax_y: Vec<f64>,
}

/// Evaluates the statistic for every `r0` on the bin-center grid `|x| < r`
/// of `densities` (all at one `ε`).
pub fn holder_density_check<const D: usize>(
    cluster: &ClusterModel<D>,
    densities: &[EmpiricalDensity<D>],
    r: f64,
    r0s: &[f64],
) -> Vec<HolderRow> {
    let Some(first) = densities.first() else {
        return Vec::new();
    };
    let grid: Vec<(Point<D>, usize)> = (0..first.bin_count())
        .map(|b| first.bin_center(b))
        .filter(|x| norm(x) < r)
        .filter_map(|x| first.bin_for(cluster, &x).map(|b| (x, b)))
        .collect();
    r0s.iter()
        .map(|&r0| {
            let mut best = HolderRow {
                epsilon: first.epsilon,
                r0,
                statistic: 0.0,
                noise_floor: 0.0,
                argmax_t: first.t,
                argmax_x: grid.first().map(|g| g.0.to_vec()).unwrap_or_default(),
                argmax_y: grid.first().map(|g| g.0.to_vec()).unwrap_or_default(),
            };
            for d in densities {
                for (x, bx) in &grid {
                    for (y, by) in &grid {
                        if dist(x, y) >= r0 {
                            continue;
                        }
                        let v = (d.rescaled[*bx] - d.rescaled[*by]).abs();
                        if v > best.statistic {
                            best.statistic = v;
                            best.noise_floor = 2.0 * d.se[*bx].hypot(d.se[*by]);
                            best.argmax_t = d.t;
                            best.argmax_x = x.to_vec();
                            best.argmax_y = y.to_vec();
                        }
                    }
                }
            }
            best
        })
        .collect()
}
