use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DiffusionError, StepStats, reflect_step};
use crate::geometry::euclidean_gap;
use crate::medium::ClusterModel;
use crate::point::{norm2, to_vec, Point};
use crate::rng::{stream, Purpose};

/// Safety factor in the step rule `6·√dt ≤ ρ′`.
pub const STEP_RULE: f64 = 6.0;
/// Tolerance for the closure of W′ at a start point.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Position of one path together with its clock and stream id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathState<const D: usize> {
    #[serde(with = "point_serde")]
    pub position: Point<D>,
    pub elapsed: f64,
    pub stream: u64,
}

mod point_serde {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer, const D: usize>(p: &[f64; D], s: S) -> Result<S::Ok, S::Error> {
        p.as_slice().serialize(s)
    }

    pub fn deserialize<'de, De: Deserializer<'de>, const D: usize>(d: De) -> Result<[f64; D], De::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        v.try_into()
            .map_err(|_| serde::de::Error::custom(format!("expected {D} coordinates")))
    }
}

pub(crate) fn check_start<const D: usize>(
    cluster: &ClusterModel<D>,
    x0: &Point<D>,
    dt: f64,
) -> Result<(), DiffusionError> {
    let limit = (cluster.rho_prime() / STEP_RULE).powi(2);
    if !(dt > 0.0 && dt <= limit) {
        return Err(DiffusionError::InvalidTimeStep { dt, limit });
    }
    let gap = euclidean_gap(cluster, x0).map_err(DiffusionError::Geometry)?;
    if gap > CLOSURE_TOL {
        return Err(DiffusionError::NotInCluster(to_vec(x0)));
    }
    Ok(())
}

/// Number of equal steps covering `span` with steps no longer than `dt`.
pub(crate) fn step_count(span: f64, dt: f64) -> u64 {
    if span <= 0.0 {
        0
    } else {
        ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as u64
    }
}

/// Advances `state` to each time in `checkpoints` (increasing), recording the
/// position there. Each interval between checkpoints is split into equal
/// steps no longer than `dt`, so every checkpoint is hit exactly.
pub(crate) fn run_path<const D: usize, R: Rng>(
    cluster: &ClusterModel<D>,
    state: &mut PathState<D>,
    checkpoints: &[f64],
    dt: f64,
    rng: &mut R,
    stats: &mut StepStats,
    out: &mut Vec<Point<D>>,
) {
    let rp2 = cluster.rho_prime() * cluster.rho_prime();
    for &t in checkpoints {
        let n = step_count(t - state.elapsed, dt);
        if n > 0 {
            let h = (t - state.elapsed) / n as f64;
            let sd = h.sqrt();
            for _ in 0..n {
                let v: Point<D> = loop {
                    let v: Point<D> = std::array::from_fn(|_| sd * rng.sample::<f64, _>(StandardNormal));
                    if norm2(&v) < rp2 {
                        break v;
                    }
                    stats.redraws += 1;
                };
                state.position = reflect_step(cluster, &state.position, &v, stats);
            }
            state.elapsed = t;
        }
        let gap = euclidean_gap(cluster, &state.position).unwrap_or(f64::INFINITY);
        stats.max_endpoint_gap = stats.max_endpoint_gap.max(gap);
        out.push(state.position);
    }
}

/// Endpoint at time `t` of reflecting Brownian motion (generator `½Δ`)
/// started at `x0`, using path stream 0 of `seed`.
pub fn simulate_path<const D: usize>(
    cluster: &ClusterModel<D>,
    x0: &Point<D>,
    t: f64,
    dt: f64,
    seed: u64,
) -> Result<(Point<D>, StepStats), DiffusionError> {
    check_start(cluster, x0, dt)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DiffusionError::InvalidParameter(format!("time must be ≥ 0, got {t}")));
    }
    let mut rng = stream(seed, Purpose::Path, 0);
    let mut state = PathState {
        position: *x0,
        elapsed: 0.0,
        stream: 0,
    };
    let mut stats = StepStats::default();
    let mut out = Vec::with_capacity(1);
    run_path(cluster, &mut state, &[t], dt, &mut rng, &mut stats, &mut out);
    Ok((out[0], stats))
}
