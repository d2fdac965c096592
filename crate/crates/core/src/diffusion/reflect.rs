use serde::{Deserialize, Serialize};

use crate::geometry::closest_point;
use crate::medium::ClusterModel;
use crate::point::{axpy, dist, dot, norm, norm2, scale, sub, Point};

/// Reflections allowed in one step before falling back to projection.
pub const MAX_REFLECTIONS: u32 = 32;
/// Covered intervals closer than this (in length units) are chained.
const CHAIN_TOL: f64 = 1e-12;

/// Counters accumulated over steps; merging is associative.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub steps: u64,
    pub reflections: u64,
    /// Steps that hit the reflection cap and were projected instead.
    pub cap_exceeded: u64,
    /// Gaussian increments redrawn because `|v| ≥ ρ′`.
    pub redraws: u64,
    /// Largest `|polyline length − |v||` over reflected steps.
    pub max_length_error: f64,
    /// Largest Euclidean gap of a recorded endpoint to the closure of W′.
    pub max_endpoint_gap: f64,
}

impl StepStats {
    pub fn merge(&mut self, o: &StepStats) {
        self.steps += o.steps;
        self.reflections += o.reflections;
        self.cap_exceeded += o.cap_exceeded;
        self.redraws += o.redraws;
        self.max_length_error = self.max_length_error.max(o.max_length_error);
        self.max_endpoint_gap = self.max_endpoint_gap.max(o.max_endpoint_gap);
    }
}

/// `w − 2⟨w, n⟩n` for a unit normal `n`.
#[inline]
pub fn specular<const D: usize>(w: &Point<D>, n: &Point<D>) -> Point<D> {
    axpy(w, -2.0 * dot(w, n), n)
}

/// Parameter in `[0, 1]` where the segment `p → p + w` first leaves W′,
/// with the ball it leaves through; `None` if the segment stays inside.
fn first_exit<const D: usize>(cluster: &ClusterModel<D>, p: &Point<D>, w: &Point<D>) -> Option<(f64, usize)> {
    let len = norm(w);
    let a = norm2(w);
    let rp2 = cluster.rho_prime() * cluster.rho_prime();
    let centers = cluster.centers();
    let mut intervals: Vec<(f64, f64, usize)> = Vec::with_capacity(16);
    cluster.for_each_center_near(p, |i| {
        let q = sub(p, &centers[i]);
        let b = dot(&q, w);
        let c = norm2(&q) - rp2;
        let disc = b * b - a * c;
        if disc <= 0.0 {
            return;
        }
        let s = disc.sqrt();
        // Stable roots of a t² + 2b t + c = 0.
        let (t0, t1) = if b >= 0.0 {
            let r = -b - s;
            (r / a, c / r)
        } else {
            let r = -b + s;
            (c / r, r / a)
        };
        if t1 > 0.0 {
            intervals.push((t0, t1, i));
        }
    });
    let tol = CHAIN_TOL / len;
    let mut cur = 0.0;
    let mut ball = usize::MAX;
    loop {
        let mut best = cur;
        let mut best_ball = ball;
        for &(t0, t1, i) in &intervals {
            if t0 <= cur + tol && t1 > best {
                best = t1;
                best_ball = i;
            }
        }
        if best <= cur {
            break;
        }
        cur = best;
        ball = best_ball;
        if cur >= 1.0 {
            return None;
        }
    }
    if ball == usize::MAX {
        // Not covered at the start: exit immediately through the nearest ball.
        let (_, ties) = cluster.nearest_centers(p);
        return ties.first().map(|&i| (0.0, i));
    }
    Some((cur, ball))
}

/// One displacement `v` from `x` with specular reflection at ∂W′.
pub fn reflect_step<const D: usize>(
    cluster: &ClusterModel<D>,
    x: &Point<D>,
    v: &Point<D>,
    stats: &mut StepStats,
) -> Point<D> {
    stats.steps += 1;
    let target = axpy(x, 1.0, v);
    if let Some(b) = cluster.covering_ball(&target) {
        if dist(x, &cluster.centers()[b]) < cluster.rho_prime() {
            return target;
        }
    }
    let total = norm(v);
    let mut pos = *x;
    let mut w = *v;
    let mut travelled = 0.0;
    for _ in 0..=MAX_REFLECTIONS {
        let len = norm(&w);
        if len <= CHAIN_TOL {
            return pos;
        }
        match first_exit(cluster, &pos, &w) {
            None => {
                let err = (travelled + len - total).abs();
                stats.max_length_error = stats.max_length_error.max(err);
                debug_assert!(err <= 1e-12 * total.max(1.0), "length error {err}");
                return axpy(&pos, 1.0, &w);
            }
            Some((s, ball)) => {
                stats.reflections += 1;
                let q = axpy(&pos, s, &w);
                travelled += s * len;
                let c = cluster.centers()[ball];
                let nq = sub(&q, &c);
                let n = scale(&nq, 1.0 / norm(&nq));
                w = specular(&scale(&w, 1.0 - s), &n);
                pos = q;
            }
        }
    }
    stats.cap_exceeded += 1;
    closest_point(cluster, &axpy(&pos, 1.0, &w)).unwrap_or(pos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::euclidean_gap;
    use rand::{Rng, SeedableRng};

    #[test]
    fn interior_step() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0]], 1.0).unwrap();
        let mut st = StepStats::default();
        assert_eq!(reflect_step(&c, &[0.1, 0.1], &[0.2, -0.1], &mut st), [0.1 + 0.2, 0.0]);
        assert_eq!(st.reflections, 0);
    }

    #[test]
    fn radial_reflection() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0]], 1.0).unwrap();
        let mut st = StepStats::default();
        let y = reflect_step(&c, &[0.9, 0.0], &[0.2, 0.0], &mut st);
        assert!(dist(&y, &[0.9, 0.0]) < 1e-15, "{y:?}");
        assert_eq!(st.reflections, 1);
    }

    #[test]
    fn tangential_reflection_is_identity() {
        let w = [0.3, 0.0];
        assert_eq!(specular(&w, &[0.0, 1.0]), w);
        let w = [0.3, 0.4];
        let r = specular(&w, &[0.0, 1.0]);
        assert_eq!(r, [0.3, -0.4]);
    }

    #[test]
    fn passes_through_overlap_without_reflecting() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0], [1.5, 0.0]], 1.0).unwrap();
        let mut st = StepStats::default();
        let y = reflect_step(&c, &[0.6, 0.0], &[0.6, 0.0], &mut st);
        assert!(dist(&y, &[1.2, 0.0]) < 1e-15);
        assert_eq!(st.reflections, 0);
    }

    #[test]
    fn random_steps_stay_inside_and_preserve_length() {
        let centers: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.5, 0.3], [2.4, 1.4], [0.7, -1.3], [-1.2, 0.8]];
        let c = ClusterModel::from_balls(centers, 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut st = StepStats::default();
        let mut x = [0.0, 0.0];
        for _ in 0..200_000 {
            let v: [f64; 2] = loop {
                let v = [rng.random_range(-0.9..0.9), rng.random_range(-0.9..0.9)];
                if norm(&v) < 0.95 {
                    break v;
                }
            };
            x = reflect_step(&c, &x, &v, &mut st);
            assert!(euclidean_gap(&c, &x).unwrap() <= 1e-9, "{x:?}");
        }
        assert!(st.reflections > 1000);
        assert!(st.max_length_error <= 1e-12, "{}", st.max_length_error);
    }
}
