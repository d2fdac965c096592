use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::GeometryError;
use crate::medium::{ClusterModel, TIE_TOL};
use crate::point::{dist, to_vec, Point};

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Center-graph distances from one source point.
///
/// Nodes are the centers; centers of overlapping balls are joined with their
/// Euclidean distance and the source is attached to every ball containing
/// it. Every edge segment lies in W′, so path lengths bound `d_W′` above.
#[derive(Debug, Clone)]
pub struct SourceDistances<'a, const D: usize> {
    cluster: &'a ClusterModel<D>,
    source: Point<D>,
    cutoff: f64,
    dist: Vec<f64>,
}

impl<'a, const D: usize> SourceDistances<'a, D> {
    /// Runs Dijkstra from `x`, settling every center at distance `≤ cutoff`.
    pub fn new(cluster: &'a ClusterModel<D>, x: &Point<D>, cutoff: f64) -> Result<Self, GeometryError> {
        Self::run(cluster, x, cutoff, None)
    }

    fn run(
        cluster: &'a ClusterModel<D>,
        x: &Point<D>,
        cutoff: f64,
        target: Option<&[(usize, f64)]>,
    ) -> Result<Self, GeometryError> {
        if !cluster.contains(x) {
            return Err(GeometryError::NotInCluster(to_vec(x)));
        }
        let centers = cluster.centers();
        let rp = cluster.rho_prime();
        let reach = 2.0 * rp + TIE_TOL;
        let mut d = vec![f64::INFINITY; centers.len()];
        let mut done = vec![false; centers.len()];
        let mut heap = BinaryHeap::new();
        cluster.for_each_center_near(x, |i| {
            let w = dist(x, &centers[i]);
            if w < rp && w < d[i] {
                d[i] = w;
                heap.push(Entry(w, i));
            }
        });
        let mut best_target = f64::INFINITY;
        while let Some(Entry(du, u)) = heap.pop() {
            if du > cutoff || du >= best_target {
                break;
            }
            if done[u] {
                continue;
            }
            done[u] = true;
            if let Some(&(_, w)) = target.and_then(|t| t.iter().find(|t| t.0 == u)) {
                best_target = best_target.min(du + w);
            }
            let cu = centers[u];
            cluster.for_each_center_near(&cu, |v| {
                if done[v] {
                    return;
                }
                let w = dist(&cu, &centers[v]);
                if w < reach && du + w < d[v] {
                    d[v] = du + w;
                    heap.push(Entry(du + w, v));
                }
            });
        }
        for (i, f) in done.iter().enumerate() {
            if !f {
                d[i] = f64::INFINITY;
            }
        }
        Ok(SourceDistances {
            cluster,
            source: *x,
            cutoff,
            dist: d,
        })
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Settled distance to center `i` (∞ if beyond the cutoff).
    pub fn center(&self, i: usize) -> f64 {
        self.dist[i]
    }

    /// Upper bound on `d_W′(source, y)`; exact for the graph whenever the
    /// result is `≤ cutoff`, and `> cutoff` otherwise.
    pub fn to(&self, y: &Point<D>) -> Result<f64, GeometryError> {
        if *y == self.source {
            return Ok(0.0);
        }
        let rp = self.cluster.rho_prime();
        let centers = self.cluster.centers();
        let mut found = false;
        let mut best = f64::INFINITY;
        self.cluster.for_each_center_near(y, |i| {
            let w = dist(y, &centers[i]);
            if w < rp {
                found = true;
                best = best.min(self.dist[i] + w);
            }
        });
        if !found {
            return Err(GeometryError::NotInCluster(to_vec(y)));
        }
        Ok(best)
    }
}

/// Upper bound on the intrinsic distance between two points of W′.
pub fn intrinsic_distance_upper<const D: usize>(
    cluster: &ClusterModel<D>,
    x: &Point<D>,
    y: &Point<D>,
) -> Result<f64, GeometryError> {
    if !cluster.contains(y) {
        return Err(GeometryError::NotInCluster(to_vec(y)));
    }
    if x == y {
        return if cluster.contains(x) {
            Ok(0.0)
        } else {
            Err(GeometryError::NotInCluster(to_vec(x)))
        };
    }
    let rp = cluster.rho_prime();
    let mut attach = Vec::new();
    cluster.for_each_center_near(y, |i| {
        let w = dist(y, &cluster.centers()[i]);
        if w < rp {
            attach.push((i, w));
        }
    });
    let src = SourceDistances::run(cluster, x, f64::INFINITY, Some(&attach))?;
    let d = src.to(y)?;
    if d.is_finite() {
        Ok(d)
    } else {
        Err(GeometryError::Unreachable)
    }
}
