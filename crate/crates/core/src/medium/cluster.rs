use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::{sample_poisson, MediumError, PointConfiguration, SpatialGrid, Window};
use crate::point::{dist, dist2, Point};
use crate::rng::{derive_seed, Purpose};

/// Pairs whose distance is within this of `2ρ` count as overlapping.
pub const TIE_TOL: f64 = 1e-12;

/// Cap on fresh media drawn while conditioning on the origin being covered.
pub const MAX_RESAMPLE_ATTEMPTS: u32 = 1000;

/// Finite-volume stand-in for the unbounded component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SelectionPolicy {
    /// Component with the most centers.
    #[default]
    Largest,
    /// Largest among components touching two opposite window faces.
    Spanning,
}

/// Connected components of the overlap graph of `B(x, ρ)`, `x ∈ ω`.
#[derive(Debug, Clone)]
pub struct ClusterDecomposition<const D: usize> {
    config: PointConfiguration<D>,
    rho: f64,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    grid: SpatialGrid<D>,
}

impl<const D: usize> ClusterDecomposition<D> {
    pub fn config(&self) -> &PointConfiguration<D> {
        &self.config
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Component label of each point, numbered by first appearance.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn component_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn grid(&self) -> &SpatialGrid<D> {
        &self.grid
    }

    pub fn members(&self, label: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// Whether a component touches two opposite faces of the window along
    /// some axis, each within `ρ`.
    pub fn is_spanning(&self, label: usize) -> bool {
        let w = self.config.window();
        let mut lo = [f64::INFINITY; D];
        let mut hi = [f64::NEG_INFINITY; D];
        for (p, &l) in self.config.points().iter().zip(&self.labels) {
            if l == label {
                for k in 0..D {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        (0..D).any(|k| lo[k] - w.lo()[k] <= self.rho && w.hi()[k] - hi[k] <= self.rho)
    }

    pub fn has_spanning_component(&self) -> bool {
        (0..self.sizes.len()).any(|l| self.is_spanning(l))
    }
}

/// Union–find over the ρ-overlap graph, using a `2ρ` spatial hash.
pub fn build_clusters<const D: usize>(
    config: PointConfiguration<D>,
    rho: f64,
) -> Result<ClusterDecomposition<D>, MediumError> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(MediumError::InvalidRadius(rho));
    }
    let points = config.points();
    let reach = 2.0 * rho + TIE_TOL;
    let grid = SpatialGrid::new(points, reach);
    let mut uf = UnionFind::<usize>::new(points.len());
    for (i, p) in points.iter().enumerate() {
        grid.for_each_near(p, |j| {
            if j > i && dist2(p, &points[j]) < reach * reach {
                uf.union(i, j);
            }
        });
    }
    let mut root_label = vec![usize::MAX; points.len()];
    let mut labels = Vec::with_capacity(points.len());
    let mut sizes = Vec::new();
    for i in 0..points.len() {
        let r = uf.find_mut(i);
        if root_label[r] == usize::MAX {
            root_label[r] = sizes.len();
            sizes.push(0);
        }
        labels.push(root_label[r]);
        sizes[root_label[r]] += 1;
    }
    Ok(ClusterDecomposition {
        config,
        rho,
        labels,
        sizes,
        grid,
    })
}

/// The selected cluster `W′ = ⋃ B(c, ρ′)` over its centers.
#[derive(Debug, Clone)]
pub struct ClusterModel<const D: usize> {
    centers: Vec<Point<D>>,
    rho: f64,
    rho_prime: f64,
    window: Window<D>,
    policy: SelectionPolicy,
    seed: Option<u64>,
    grid: SpatialGrid<D>,
}

impl<const D: usize> ClusterModel<D> {
    /// Builds a cluster from explicit centers. Connectivity is not checked;
    /// see [`ClusterModel::is_connected`].
    pub fn from_centers(
        centers: Vec<Point<D>>,
        rho: f64,
        rho_prime: f64,
        window: Window<D>,
        policy: SelectionPolicy,
        seed: Option<u64>,
    ) -> Result<Self, MediumError> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(MediumError::InvalidRadius(rho));
        }
        if !(rho_prime.is_finite() && rho_prime >= rho) {
            return Err(MediumError::InvalidInflatedRadius { rho, rho_prime });
        }
        let grid = SpatialGrid::new(&centers, 2.0 * rho_prime);
        Ok(ClusterModel {
            centers,
            rho,
            rho_prime,
            window,
            policy,
            seed,
            grid,
        })
    }

    /// Test helper: balls of radius `r` (ρ = ρ′ = r) in a window that
    /// comfortably contains them.
    pub fn from_balls(centers: Vec<Point<D>>, r: f64) -> Result<Self, MediumError> {
        let mut lo = [-1.0f64; D];
        let mut hi = [1.0f64; D];
        for c in &centers {
            for k in 0..D {
                lo[k] = lo[k].min(c[k] - 2.0 * r);
                hi[k] = hi[k].max(c[k] + 2.0 * r);
            }
        }
        let window = Window::new(lo, hi)?;
        Self::from_centers(centers, r, r, window, SelectionPolicy::Largest, None)
    }

    pub fn centers(&self) -> &[Point<D>] {
        &self.centers
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn rho_prime(&self) -> f64 {
        self.rho_prime
    }

    pub fn window(&self) -> &Window<D> {
        &self.window
    }

    pub fn policy(&self) -> SelectionPolicy {
        self.policy
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn grid(&self) -> &SpatialGrid<D> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Same centers with a different inflated radius (e.g. `ρ′ = ρ` to look
    /// at the unmodified cluster W).
    pub fn with_rho_prime(&self, rho_prime: f64) -> Result<Self, MediumError> {
        Self::from_centers(
            self.centers.clone(),
            self.rho,
            rho_prime,
            self.window,
            self.policy,
            self.seed,
        )
    }

    /// Membership in the open ball union.
    #[inline]
    pub fn contains(&self, x: &Point<D>) -> bool {
        self.covering_ball(x).is_some()
    }

    /// Some center `c` with `|x − c| < ρ′`.
    #[inline]
    pub fn covering_ball(&self, x: &Point<D>) -> Option<usize> {
        let r2 = self.rho_prime * self.rho_prime;
        let mut hit = None;
        self.grid.any_near(x, |i| {
            if dist2(x, &self.centers[i]) < r2 {
                hit = Some(i);
                true
            } else {
                false
            }
        });
        hit
    }

    /// Visits centers within `2ρ′` of `x` (and possibly a few more).
    #[inline]
    pub fn for_each_center_near(&self, x: &Point<D>, f: impl FnMut(usize)) {
        self.grid.for_each_near(x, f)
    }

    /// Distance to the nearest center and all centers attaining it.
    pub fn nearest_centers(&self, x: &Point<D>) -> (f64, Vec<usize>) {
        self.grid.nearest(&self.centers, x, TIE_TOL)
    }

    /// Whether the ρ-overlap graph of the centers is connected.
    pub fn is_connected(&self) -> bool {
        if self.centers.is_empty() {
            return true;
        }
        let reach = 2.0 * self.rho + TIE_TOL;
        let mut uf = UnionFind::<usize>::new(self.centers.len());
        for (i, p) in self.centers.iter().enumerate() {
            self.grid.for_each_near(p, |j| {
                if j > i && dist(p, &self.centers[j]) < reach {
                    uf.union(i, j);
                }
            });
        }
        let r0 = uf.find_mut(0);
        (1..self.centers.len()).all(|i| uf.find_mut(i) == r0)
    }
}

/// Picks the component prescribed by `policy` and inflates it to `ρ′`.
pub fn select_cluster<const D: usize>(
    decomp: &ClusterDecomposition<D>,
    rho_prime: f64,
    policy: SelectionPolicy,
    require_origin: bool,
) -> Result<ClusterModel<D>, MediumError> {
    if decomp.component_count() == 0 {
        return Err(MediumError::NoComponents);
    }
    let label = match policy {
        SelectionPolicy::Largest => {
            largest_label(decomp, |_| true).ok_or(MediumError::NoComponents)?
        }
        SelectionPolicy::Spanning => largest_label(decomp, |l| decomp.is_spanning(l))
            .ok_or(MediumError::NoSpanningCluster)?,
    };
    let centers: Vec<Point<D>> = decomp
        .members(label)
        .into_iter()
        .map(|i| decomp.config().points()[i])
        .collect();
    let cluster = ClusterModel::from_centers(
        centers,
        decomp.rho(),
        rho_prime,
        *decomp.config().window(),
        policy,
        decomp.config().seed(),
    )?;
    if require_origin && !cluster.contains(&[0.0; D]) {
        return Err(MediumError::OriginNotCovered { attempts: 1 });
    }
    Ok(cluster)
}

/// Largest component among those accepted by `keep`; ties go to the lower label.
fn largest_label<const D: usize>(
    decomp: &ClusterDecomposition<D>,
    keep: impl Fn(usize) -> bool,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (l, &s) in decomp.sizes().iter().enumerate() {
        if keep(l) && best.is_none_or(|b| s > decomp.sizes()[b]) {
            best = Some(l);
        }
    }
    best
}

/// Parameters of a Poisson Boolean medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams<const D: usize> {
    pub intensity: f64,
    pub window: Window<D>,
    pub rho: f64,
    pub rho_prime: f64,
    pub policy: SelectionPolicy,
    pub require_origin: bool,
}

/// A sampled cluster and the number of media drawn to obtain it.
#[derive(Debug, Clone)]
pub struct SampledCluster<const D: usize> {
    pub cluster: ClusterModel<D>,
    pub attempts: u32,
}

/// Samples media until the selected cluster covers the origin (when
/// required). Attempt `k ≥ 1` uses a seed derived from `(seed, k)`.
pub fn sample_cluster<const D: usize>(
    params: &MediumParams<D>,
    seed: u64,
) -> Result<SampledCluster<D>, MediumError> {
    for attempt in 0..MAX_RESAMPLE_ATTEMPTS {
        let s = if attempt == 0 {
            seed
        } else {
            derive_seed(seed, Purpose::Resample, attempt as u64)
        };
        let config = sample_poisson(params.intensity, &params.window, s)?;
        let decomp = build_clusters(config, params.rho)?;
        match select_cluster(&decomp, params.rho_prime, params.policy, params.require_origin) {
            Ok(cluster) => {
                return Ok(SampledCluster {
                    cluster,
                    attempts: attempt + 1,
                })
            }
            Err(MediumError::OriginNotCovered { .. })
            | Err(MediumError::NoComponents)
            | Err(MediumError::NoSpanningCluster)
                if params.require_origin => {}
            Err(e) => return Err(e),
        }
    }
    Err(MediumError::OriginNotCovered {
        attempts: MAX_RESAMPLE_ATTEMPTS,
    })
}
