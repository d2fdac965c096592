use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::medium::ClusterModel;
use crate::point::{axpy, lex_cmp_snapped, norm, sub, Point};

/// `g(x)`: the lexicographically first closest point of the closure of W′.
pub fn closest_point<const D: usize>(
    cluster: &ClusterModel<D>,
    x: &Point<D>,
) -> Result<Point<D>, GeometryError> {
    if cluster.contains(x) {
        return Ok(*x);
    }
    let (d, ties) = cluster.nearest_centers(x);
    if ties.is_empty() {
        return Err(GeometryError::EmptyCluster);
    }
    let rp = cluster.rho_prime();
    if d <= rp {
        return Ok(*x);
    }
    ties.iter()
        .map(|&i| {
            let c = &cluster.centers()[i];
            let v = sub(x, c);
            axpy(c, rp / norm(&v), &v)
        })
        .min_by(lex_cmp_snapped)
        .ok_or(GeometryError::EmptyCluster)
}

/// Euclidean distance from `x` to the closure of W′.
pub fn euclidean_gap<const D: usize>(
    cluster: &ClusterModel<D>,
    x: &Point<D>,
) -> Result<f64, GeometryError> {
    if cluster.contains(x) {
        return Ok(0.0);
    }
    let (d, ties) = cluster.nearest_centers(x);
    if ties.is_empty() {
        return Err(GeometryError::EmptyCluster);
    }
    Ok((d - cluster.rho_prime()).max(0.0))
}

/// Certified bracket `lower ≤ h_W(R) ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoleBracket {
    pub r: f64,
    pub pitch: f64,
    pub lower: f64,
    pub upper: f64,
    pub lattice_points: usize,
}

/// Maximal hole size over `B_Euc(0, R)` on the lattice `pitch·ℤ^D`.
///
/// `lower` is the largest gap seen at lattice points inside the ball.
/// Every point of the ball is within `pitch·√D/2` of a lattice point of the
/// enlarged ball, and the gap is 1-Lipschitz, so the largest gap over the
/// enlarged set plus that radius is an upper bound.
pub fn hole_size<const D: usize>(
    cluster: &ClusterModel<D>,
    r: f64,
    pitch: f64,
) -> Result<HoleBracket, GeometryError> {
    if !(r > 0.0 && pitch > 0.0) {
        return Err(GeometryError::InvalidParameter(format!(
            "hole_size needs R > 0 and pitch > 0 (got {r}, {pitch})"
        )));
    }
    if cluster.is_empty() {
        return Err(GeometryError::EmptyCluster);
    }
    let cover = pitch * (D as f64).sqrt() / 2.0;
    let outer = r + cover;
    let m = (outer / pitch).ceil() as i64;
    let rows: Vec<(f64, f64, usize)> = (-m..=m)
        .into_par_iter()
        .map(|i0| {
            let mut inner_max = 0.0f64;
            let mut outer_max = 0.0f64;
            let mut count = 0usize;
            let mut idx = [0i64; D];
            idx[0] = i0;
            for k in 1..D {
                idx[k] = -m;
            }
            loop {
                let x: Point<D> = std::array::from_fn(|k| idx[k] as f64 * pitch);
                let n = norm(&x);
                if n < outer {
                    let g = euclidean_gap(cluster, &x).unwrap_or(0.0);
                    outer_max = outer_max.max(g);
                    if n < r {
                        inner_max = inner_max.max(g);
                    }
                    count += 1;
                }
                let mut k = 1;
                loop {
                    if k >= D {
                        return (inner_max, outer_max, count);
                    }
                    idx[k] += 1;
                    if idx[k] <= m {
                        break;
                    }
                    idx[k] = -m;
                    k += 1;
                }
            }
        })
        .collect();
    let lower = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let upper = rows.iter().map(|r| r.1).fold(0.0, f64::max) + cover;
    Ok(HoleBracket {
        r,
        pitch,
        lower,
        upper,
        lattice_points: rows.iter().map(|r| r.2).sum(),
    })
}
