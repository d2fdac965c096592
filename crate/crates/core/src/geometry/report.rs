use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::volume::{ball_volume_from, uniform_in_ball};
use super::{closest_point, hole_size, isoperimetric_probe, GeometryError, HoleBracket, IsoProbe, SourceDistances};
use crate::medium::ClusterModel;
use crate::point::{dist, sub, axpy, norm, to_vec, zero, Point};
use crate::rng::{derive_seed, stream, Purpose};
use crate::stats::{fmt17, linear_fit, Estimate, LinearFit};

/// Smallest exponent reported; fitted slopes at or below zero are clamped here.
pub const EXPONENT_FLOOR: f64 = 1e-3;
/// Minimum number of observations in any cell of a fit.
pub const MIN_CELL: usize = 10;
/// Relative band within which `C_V(R)` must stay for `R̂_θ`.
pub const STABILITY_BAND: f64 = 0.1;
const UPSILON_GRID: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularityParams {
    pub r_values: Vec<f64>,
    /// Sampled centers `x ∈ B_W′(g(0), R)` per radius.
    pub x_samples: usize,
    pub volume_samples: u64,
    pub hole_pitch: f64,
    pub iso_cuts: usize,
    pub iso_pitch: f64,
}

impl Default for RegularityParams {
    fn default() -> Self {
        RegularityParams {
            r_values: vec![2.0, 4.0, 8.0, 16.0],
            x_samples: 12,
            volume_samples: 4000,
            hole_pitch: 0.05,
            iso_cuts: 16,
            iso_pitch: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub r: f64,
    pub c_v: f64,
    pub volume_min: Estimate,
    pub volume_max: Estimate,
    pub x_count: usize,
    pub pair_count: usize,
    pub hole: HoleBracket,
    /// Hole exponent fitted on radii up to and including this one.
    pub gamma_running: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpsilonPoint {
    pub upsilon: f64,
    /// Smallest `C_W` with `d_W ≤ C_W·d_Euc ∨ R^Υ` on every sampled pair.
    pub c_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub base: Vec<f64>,
    pub rows: Vec<RadiusRow>,
    /// Max of `C_V(R)` over `R ≥ R̂_θ` (all radii when `R̂_θ` is undefined).
    pub c_v: f64,
    pub r_hat: Option<f64>,
    pub gamma_hat: f64,
    pub c_hole: f64,
    pub hole_fit: LinearFit,
    pub c_w: f64,
    pub upsilon_hat: f64,
    /// False when no grid exponent below 1 fits every pair with `C_W`.
    pub upsilon_holds: bool,
    pub upsilon_frontier: Vec<UpsilonPoint>,
    /// `(R, d_Euc, d_W upper)` for every sampled pair.
    pub pairs: Vec<(f64, f64, f64)>,
    pub iso: IsoProbe,
    /// Same probe with `ρ′ = ρ`.
    pub iso_unmodified: IsoProbe,
    pub r_range: (f64, f64),
    pub x_samples: usize,
    pub volume_samples: u64,
}

impl GeometryReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("R,C_V,h_lower,h_upper,gamma_running\n");
        for row in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt17(row.r),
                fmt17(row.c_v),
                fmt17(row.hole.lower),
                fmt17(row.hole.upper),
                row.gamma_running.map(fmt17).unwrap_or_default()
            ));
        }
        s
    }
}

/// A point of W′ next to `g(x)`: the projection itself when it lies in the
/// open set, otherwise nudged 1e−9 toward the nearest center.
pub(crate) fn interior_anchor<const D: usize>(
    cluster: &ClusterModel<D>,
    x: &Point<D>,
) -> Result<Point<D>, GeometryError> {
    let g = closest_point(cluster, x)?;
    if cluster.contains(&g) {
        return Ok(g);
    }
    let (_, ties) = cluster.nearest_centers(&g);
    let c = cluster.centers()[ties[0]];
    let v = sub(&c, &g);
    Ok(axpy(&g, 1e-9 / norm(&v), &v))
}

fn check_params(p: &RegularityParams) -> Result<(), GeometryError> {
    let r = &p.r_values;
    if r.len() < 2 || r[0] <= 0.0 || r.windows(2).any(|w| w[1] <= w[0]) {
        return Err(GeometryError::InvalidParameter(
            "r_values must be ≥ 2 positive increasing radii".into(),
        ));
    }
    if p.x_samples < MIN_CELL || (p.volume_samples as usize) < MIN_CELL {
        return Err(GeometryError::InsufficientSamples(format!(
            "x_samples and volume_samples must be at least {MIN_CELL}"
        )));
    }
    if !(p.hole_pitch > 0.0 && p.iso_pitch > 0.0) || p.iso_cuts == 0 {
        return Err(GeometryError::InvalidParameter(
            "pitches must be positive and iso_cuts ≥ 1".into(),
        ));
    }
    Ok(())
}

/// Volume regularity, hole-size and distance-comparison fits plus the
/// isoperimetric probe, around the projection of the origin.
pub fn regularity_report<const D: usize>(
    cluster: &ClusterModel<D>,
    params: &RegularityParams,
    seed: u64,
) -> Result<GeometryReport, GeometryError> {
    check_params(params)?;
    let base = interior_anchor(cluster, &zero())?;
    let r_max = *params.r_values.last().unwrap_or(&1.0);
    let from_base = SourceDistances::new(cluster, &base, r_max)?;
    let d = D as i32;

    let mut rows = Vec::new();
    let mut pairs = Vec::new();
    for (ri, &r) in params.r_values.iter().enumerate() {
        let mut rng = stream(seed, Purpose::GeometrySample, ri as u64);
        let mut xs = vec![base];
        let mut attempts = 0usize;
        while xs.len() < params.x_samples && attempts < 1000 * params.x_samples {
            attempts += 1;
            let y = uniform_in_ball(&mut rng, &base, r);
            if cluster.contains(&y) && from_base.to(&y).is_ok_and(|v| v < r) {
                xs.push(y);
            }
        }
        if xs.len() < MIN_CELL {
            return Err(GeometryError::InsufficientSamples(format!(
                "only {} points of B_W(g(0), {r}) found",
                xs.len()
            )));
        }
        let sources: Vec<SourceDistances<'_, D>> = xs
            .par_iter()
            .map(|x| SourceDistances::new(cluster, x, f64::INFINITY))
            .collect::<Result<_, _>>()?;
        let volumes: Vec<Estimate> = xs
            .iter()
            .zip(&sources)
            .enumerate()
            .map(|(j, (x, src))| {
                let s = derive_seed(seed, Purpose::BallVolume, (ri * params.x_samples + j) as u64);
                ball_volume_from(cluster, src, x, r, params.volume_samples, s)
            })
            .collect();
        let rd = r.powi(d);
        // A zero estimate is replaced by its upper confidence bound, which
        // keeps C_V finite and still a lower bound for the true ratio.
        let c_v = volumes
            .iter()
            .map(|v| if v.value > 0.0 { v.value } else { v.hi })
            .map(|v| (v / rd).max(rd / v))
            .fold(1.0, f64::max);
        let mut pair_count = 0;
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                let de = dist(&xs[i], &xs[j]);
                let dw = sources[i].to(&xs[j])?;
                if !dw.is_finite() {
                    return Err(GeometryError::Unreachable);
                }
                pairs.push((r, de, dw));
                pair_count += 1;
            }
        }
        let hole = hole_size(cluster, r, params.hole_pitch)?;
        let by_value = |a: &&Estimate, b: &&Estimate| a.value.total_cmp(&b.value);
        rows.push(RadiusRow {
            r,
            c_v,
            volume_min: *volumes.iter().min_by(by_value).expect("nonempty"),
            volume_max: *volumes.iter().max_by(by_value).expect("nonempty"),
            x_count: xs.len(),
            pair_count,
            hole,
            gamma_running: None,
        });
    }

    let log_r: Vec<f64> = rows.iter().map(|r| r.r.ln()).collect();
    let log_h: Vec<f64> = rows.iter().map(|r| r.hole.upper.ln()).collect();
    for k in 2..=rows.len() {
        rows[k - 1].gamma_running = linear_fit(&log_r[..k], &log_h[..k]).map(|f| f.slope);
    }
    let hole_fit = linear_fit(&log_r, &log_h)
        .ok_or_else(|| GeometryError::InsufficientSamples("hole fit".into()))?;
    let gamma_hat = hole_fit.slope.clamp(EXPONENT_FLOOR, 1.0);
    let c_hole = rows
        .iter()
        .map(|r| r.hole.upper / r.r.powf(gamma_hat))
        .fold(0.0, f64::max);

    let far: Vec<f64> = pairs
        .iter()
        .filter(|(r, de, _)| *de >= r / 2.0)
        .map(|(_, de, dw)| dw / de)
        .collect();
    let ratio_pool: Vec<f64> = if far.is_empty() {
        pairs.iter().filter(|p| p.1 > 0.0).map(|(_, de, dw)| dw / de).collect()
    } else {
        far
    };
    let c_w = ratio_pool.into_iter().fold(1.0, f64::max);
    let grid: Vec<f64> = (1..=UPSILON_GRID).map(|k| k as f64 / UPSILON_GRID as f64).collect();
    let satisfied = |ups: f64, cw: f64| {
        pairs
            .iter()
            .all(|(r, de, dw)| *dw <= (cw * de).max(r.powf(ups)) * (1.0 + 1e-12))
    };
    let upsilon_frontier: Vec<UpsilonPoint> = grid
        .iter()
        .map(|&ups| UpsilonPoint {
            upsilon: ups,
            c_w: pairs
                .iter()
                .filter(|(r, _, dw)| *dw > r.powf(ups))
                .map(|(_, de, dw)| dw / de)
                .fold(1.0, f64::max),
        })
        .collect();
    let found = grid.iter().copied().find(|&u| satisfied(u, c_w));
    let (upsilon_hat, upsilon_holds) = match found {
        Some(u) => (u, true),
        None => (1.0, false),
    };

    let r_hat = (0..rows.len().saturating_sub(1))
        .find(|&i| {
            let c0 = rows[i].c_v;
            rows[i..].iter().all(|r| (r.c_v - c0).abs() <= STABILITY_BAND * c0)
        })
        .map(|i| rows[i].r);
    let c_v = rows
        .iter()
        .filter(|r| r_hat.is_none_or(|h| r.r >= h))
        .map(|r| r.c_v)
        .fold(1.0, f64::max);

    let iso = isoperimetric_probe(cluster, r_max, params.iso_cuts, params.iso_pitch, seed)?;
    let unmodified = cluster
        .with_rho_prime(cluster.rho())
        .map_err(|e| GeometryError::InvalidParameter(e.to_string()))?;
    let iso_unmodified = isoperimetric_probe(&unmodified, r_max, params.iso_cuts, params.iso_pitch, seed)?;

    Ok(GeometryReport {
        base: to_vec(&base),
        c_v,
        r_hat,
        gamma_hat,
        c_hole,
        hole_fit,
        c_w,
        upsilon_hat,
        upsilon_holds,
        upsilon_frontier,
        pairs,
        iso,
        iso_unmodified,
        r_range: (params.r_values[0], r_max),
        x_samples: params.x_samples,
        volume_samples: params.volume_samples,
        rows,
    })
}
