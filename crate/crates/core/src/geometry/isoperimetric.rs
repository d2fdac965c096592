use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::medium::ClusterModel;
use crate::point::{dot, norm, Point};
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutKind {
    HalfSpace,
    Slab,
}

/// A test set `O`: `{⟨x,n⟩ < offset}` for half-spaces,
/// `{offset < ⟨x,n⟩ < offset + width}` for slabs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub kind: CutKind,
    pub normal: Vec<f64>,
    pub offset: f64,
    pub width: f64,
}

impl Cut {
    pub fn half_space(normal: Vec<f64>, offset: f64) -> Self {
        let n = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        Cut {
            kind: CutKind::HalfSpace,
            normal: normal.iter().map(|v| v / n).collect(),
            offset,
            width: 0.0,
        }
    }

    pub fn slab(axis: usize, d: usize, lower: f64, width: f64) -> Self {
        let mut normal = vec![0.0; d];
        normal[axis] = 1.0;
        Cut {
            kind: CutKind::Slab,
            normal,
            offset: lower,
            width,
        }
    }

    fn inside(&self, s: f64) -> bool {
        match self.kind {
            CutKind::HalfSpace => s < self.offset,
            CutKind::Slab => self.offset < s && s < self.offset + self.width,
        }
    }

    fn planes(&self) -> Vec<f64> {
        match self.kind {
            CutKind::HalfSpace => vec![self.offset],
            CutKind::Slab => vec![self.offset, self.offset + self.width],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRatio {
    pub cut: Cut,
    /// `ℋ_{d−1}(W′ ∩ box ∩ ∂O)`.
    pub surface: f64,
    /// Volume of the smaller side within `W′ ∩ box`.
    pub volume: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoProbe {
    pub r: f64,
    pub rho_prime: f64,
    pub pitch: f64,
    pub ratios: Vec<CutRatio>,
    /// Cuts with an empty side (ratio 0/0).
    pub skipped: usize,
    pub min_ratio: Option<f64>,
}

/// Discretized `W′ ∩ [−R, R]^D`: weighted sample points of the region.
struct Domain<'a, const D: usize> {
    cluster: &'a ClusterModel<D>,
    r: f64,
    pitch: f64,
    points: Vec<Point<D>>,
    weight: f64,
}

const MC_POINTS_3D: u64 = 400_000;

impl<'a, const D: usize> Domain<'a, D> {
    fn new(cluster: &'a ClusterModel<D>, r: f64, pitch: f64, seed: u64) -> Self {
        let points: Vec<Point<D>> = if D == 2 {
            let m = (2.0 * r / pitch).round().max(1.0) as i64;
            let h = 2.0 * r / m as f64;
            (0..m)
                .into_par_iter()
                .flat_map_iter(|i| {
                    (0..m).filter_map(move |j| {
                        let p: Point<D> = std::array::from_fn(|k| {
                            let idx = if k == 0 { i } else { j };
                            -r + (idx as f64 + 0.5) * h
                        });
                        cluster.contains(&p).then_some(p)
                    })
                })
                .collect()
        } else {
            (0..MC_POINTS_3D.div_ceil(4096))
                .into_par_iter()
                .flat_map_iter(|b| {
                    let mut rng = stream(seed, Purpose::Cut, (1 << 40) + b);
                    let n = 4096.min(MC_POINTS_3D - b * 4096);
                    (0..n)
                        .map(move |_| std::array::from_fn(|_| rng.random_range(-r..r)))
                        .filter(|p: &Point<D>| cluster.contains(p))
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        let weight = if D == 2 {
            let m = (2.0 * r / pitch).round().max(1.0);
            (2.0 * r / m).powi(2)
        } else {
            (2.0 * r).powi(D as i32) / MC_POINTS_3D as f64
        };
        let pitch = if D == 2 {
            2.0 * r / (2.0 * r / pitch).round().max(1.0)
        } else {
            pitch
        };
        Domain {
            cluster,
            r,
            pitch,
            points,
            weight,
        }
    }

    fn total(&self) -> f64 {
        self.points.len() as f64 * self.weight
    }

    fn surface(&self, normal: &Point<D>, offset: f64) -> f64 {
        if D == 2 {
            let t: Point<D> = std::array::from_fn(|k| if k == 0 { -normal[1] } else { normal[0] });
            let h = self.pitch;
            let m = ((2f64.sqrt() * self.r) / h).ceil() as i64;
            let count = (-m..m)
                .filter(|&j| {
                    let s = (j as f64 + 0.5) * h;
                    let p: Point<D> = std::array::from_fn(|k| offset * normal[k] + s * t[k]);
                    p.iter().all(|c| c.abs() <= self.r) && self.cluster.contains(&p)
                })
                .count();
            count as f64 * h
        } else {
            let eta = self.pitch;
            let count = self
                .points
                .iter()
                .filter(|p| (dot(p, normal) - offset).abs() < eta)
                .count();
            count as f64 * self.weight / (2.0 * eta)
        }
    }

    fn ratio(&self, cut: &Cut) -> Option<CutRatio> {
        let normal: Point<D> = std::array::from_fn(|k| cut.normal[k]);
        let side = self
            .points
            .iter()
            .filter(|p| cut.inside(dot(p, &normal)))
            .count() as f64
            * self.weight;
        let volume = side.min(self.total() - side);
        if volume <= 0.0 {
            return None;
        }
        let surface: f64 = cut.planes().iter().map(|&o| self.surface(&normal, o)).sum();
        let ratio = surface / volume.powf((D as f64 - 1.0) / D as f64);
        Some(CutRatio {
            cut: cut.clone(),
            surface,
            volume,
            ratio,
        })
    }
}

fn check<const D: usize>(cluster: &ClusterModel<D>, r: f64, pitch: f64) -> Result<(), GeometryError> {
    if cluster.is_empty() {
        return Err(GeometryError::EmptyCluster);
    }
    if !(r > 0.0 && pitch > 0.0 && pitch < r) {
        return Err(GeometryError::InvalidParameter(format!(
            "isoperimetric probe needs 0 < pitch < R (got pitch {pitch}, R {r})"
        )));
    }
    Ok(())
}

/// Ratio for one explicit cut of `W′ ∩ [−R, R]^D`; `None` if a side is empty.
pub fn cut_ratio<const D: usize>(
    cluster: &ClusterModel<D>,
    r: f64,
    cut: &Cut,
    pitch: f64,
    seed: u64,
) -> Result<Option<CutRatio>, GeometryError> {
    check(cluster, r, pitch)?;
    if cut.normal.len() != D {
        return Err(GeometryError::InvalidParameter(format!(
            "cut normal has dimension {}, expected {D}",
            cut.normal.len()
        )));
    }
    Ok(Domain::new(cluster, r, pitch, seed).ratio(cut))
}

/// Surface-to-volume ratios over random half-space and axis-slab cuts.
///
/// Each ratio bounds the isoperimetric infimum from above; a small minimum
/// exposes a bottleneck, a large one certifies nothing.
pub fn isoperimetric_probe<const D: usize>(
    cluster: &ClusterModel<D>,
    r: f64,
    n_cuts: usize,
    pitch: f64,
    seed: u64,
) -> Result<IsoProbe, GeometryError> {
    check(cluster, r, pitch)?;
    if n_cuts == 0 {
        return Err(GeometryError::InvalidParameter("n_cuts must be ≥ 1".into()));
    }
    let domain = Domain::new(cluster, r, pitch, seed);
    let cuts: Vec<Cut> = (0..n_cuts)
        .map(|i| {
            let mut rng = stream(seed, Purpose::Cut, i as u64);
            if i % 2 == 0 {
                let n: Point<D> = loop {
                    let g: Point<D> = std::array::from_fn(|_| rng.sample(StandardNormal));
                    if norm(&g) > 1e-12 {
                        break g;
                    }
                };
                Cut::half_space(n.to_vec(), rng.random_range(-r / 2.0..=r / 2.0))
            } else {
                let axis = rng.random_range(0..D);
                let width = rng.random_range(r / 4.0..=r / 2.0);
                let lower = rng.random_range(-r..=r - width);
                Cut::slab(axis, D, lower, width)
            }
        })
        .collect();
    let results: Vec<Option<CutRatio>> = cuts.par_iter().map(|c| domain.ratio(c)).collect();
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let ratios: Vec<CutRatio> = results.into_iter().flatten().collect();
    let min_ratio = ratios.iter().map(|c| c.ratio).min_by(f64::total_cmp);
    Ok(IsoProbe {
        r,
        rho_prime: cluster.rho_prime(),
        pitch: domain.pitch,
        ratios,
        skipped,
        min_ratio,
    })
}
