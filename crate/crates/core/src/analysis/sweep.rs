use serde::{Deserialize, Serialize};

use super::{clt_error, gaussian_kernel, AnalysisError, CltRow, KernelParams};
use crate::diffusion::{empirical_densities, holder_density_check, DensityParams, HolderRow, StepStats};
use crate::medium::ClusterModel;
use crate::point::{dist, from_slice, zero, Point};
use crate::rng::{derive_seed, Purpose};
use crate::stats::{fmt17, kendall_trend};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    /// Strictly decreasing scaling parameters.
    pub epsilons: Vec<f64>,
    /// Strictly increasing rescaled times.
    pub ts: Vec<f64>,
    /// Grid radius for the sup (`|x| < r`).
    pub r: f64,
    pub density: DensityParams,
    /// Radius of the ball for the integrated error `J`.
    pub j_radius: f64,
    pub j_center: Vec<f64>,
    pub holder_r0s: Vec<f64>,
}

impl SweepParams {
    pub fn with_dimension(d: usize) -> Self {
        SweepParams {
            epsilons: vec![1.0, 0.7, 0.5, 0.35],
            ts: vec![0.5, 1.0, 2.0],
            r: 2.0,
            density: DensityParams::default(),
            j_radius: 0.5,
            j_center: vec![0.0; d],
            holder_r0s: vec![0.25, 0.5, 1.0],
        }
    }
}

/// `J(t, ε)`: the error integrated over the bins centered in `B(center, radius)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratedError {
    pub epsilon: f64,
    pub t: f64,
    pub j: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltSweepResult {
    pub sigma: Vec<Vec<f64>>,
    pub epsilons: Vec<f64>,
    pub ts: Vec<f64>,
    pub r: f64,
    pub dx: f64,
    pub rows: Vec<CltRow>,
    pub integrated: Vec<IntegratedError>,
    pub holder: Vec<HolderRow>,
    /// Histogram mass (binned plus overflow) per `(ε, t)`, in sweep order.
    pub totals: Vec<u64>,
    /// Kendall τ of the sup errors in sweep order (decreasing ε).
    pub trend_tau: f64,
    /// One-sided `P(τ ≤ τ_obs)` under no trend.
    pub trend_p_value: f64,
    pub stats: StepStats,
}

#[derive(Serialize)]
struct SupSummary {
    epsilon: f64,
    sup_error: f64,
    noise_floor: f64,
    argmax_t: f64,
    argmax_x: Vec<f64>,
}

#[derive(Serialize)]
struct Summary<'a> {
    sup_error: Vec<SupSummary>,
    noise_floor: Vec<f64>,
    trend_tau: f64,
    trend_p_value: f64,
    integrated: &'a [IntegratedError],
    holder: &'a [HolderRow],
    sigma: &'a [Vec<f64>],
    stats: &'a StepStats,
}

impl CltSweepResult {
    pub fn sup_errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    /// `sup_{k+1} ≤ sup_k + max(floor_k, floor_{k+1})` for consecutive ε.
    pub fn nonincreasing_within_floor(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].sup_error <= w[0].sup_error + w[0].noise_floor.max(w[1].noise_floor))
    }

    /// Long-format table `epsilon,t,x1,..,error,se`.
    pub fn to_csv(&self) -> String {
        let d = self.sigma.len();
        let xs: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        let mut s = format!("epsilon,t,{},error,se\n", xs.join(","));
        for row in &self.rows {
            for e in &row.entries {
                let xv: Vec<String> = e.x.iter().map(|&v| fmt17(v)).collect();
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt17(row.epsilon),
                    fmt17(e.t),
                    xv.join(","),
                    fmt17(e.error),
                    fmt17(e.se)
                ));
            }
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let s = Summary {
            sup_error: self
                .rows
                .iter()
                .map(|r| SupSummary {
                    epsilon: r.epsilon,
                    sup_error: r.sup_error,
                    noise_floor: r.noise_floor,
                    argmax_t: r.argmax_t,
                    argmax_x: r.argmax_x.clone(),
                })
                .collect(),
            noise_floor: self.rows.iter().map(|r| r.noise_floor).collect(),
            trend_tau: self.trend_tau,
            trend_p_value: self.trend_p_value,
            integrated: &self.integrated,
            holder: &self.holder,
            sigma: &self.sigma,
            stats: &self.stats,
        };
        serde_json::to_string_pretty(&s).expect("summary serializes")
    }
}

fn validate<const D: usize>(
    cluster: &ClusterModel<D>,
    kernel: &KernelParams,
    p: &SweepParams,
) -> Result<Point<D>, AnalysisError> {
    if kernel.dim() != D {
        return Err(AnalysisError::DimensionMismatch {
            expected: D,
            found: kernel.dim(),
        });
    }
    let e = &p.epsilons;
    if e.is_empty() || e.iter().any(|&v| !(v > 0.0)) || e.windows(2).any(|w| w[1] >= w[0]) {
        return Err(AnalysisError::InvalidParameter(
            "epsilons must be positive and strictly decreasing".into(),
        ));
    }
    if p.ts.is_empty() || p.ts[0] <= 0.0 || p.ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(AnalysisError::InvalidParameter(
            "times must be positive and strictly increasing".into(),
        ));
    }
    if !(p.r > 0.0 && p.j_radius > 0.0) {
        return Err(AnalysisError::InvalidParameter("r and j_radius must be positive".into()));
    }
    let center = from_slice::<D>(&p.j_center).ok_or(AnalysisError::DimensionMismatch {
        expected: D,
        found: p.j_center.len(),
    })?;
    let t_max = p.ts[p.ts.len() - 1] / (e[e.len() - 1] * e[e.len() - 1]);
    let needed = 4.0 * t_max.sqrt() + cluster.rho_prime();
    let origin: Point<D> = zero();
    let available = if cluster.window().contains(&origin) {
        cluster.window().distance_to_boundary(&origin)
    } else {
        0.0
    };
    if available < needed {
        return Err(AnalysisError::WindowTooSmall { needed, available });
    }
    Ok(center)
}

/// Runs the quenched sweep on one medium: densities at every `(ε, t)`, the
/// sup error per `ε`, the integrated error `J` and the equicontinuity table.
pub fn clt_sweep<const D: usize>(
    cluster: &ClusterModel<D>,
    kernel: &KernelParams,
    params: &SweepParams,
    seed: u64,
) -> Result<CltSweepResult, AnalysisError> {
    let center = validate(cluster, kernel, params)?;
    let mut rows = Vec::new();
    let mut integrated = Vec::new();
    let mut holder = Vec::new();
    let mut totals = Vec::new();
    let mut stats = StepStats::default();
    for (i, &eps) in params.epsilons.iter().enumerate() {
        let s = derive_seed(seed, Purpose::Sweep, i as u64);
        let (ds, st) = empirical_densities(cluster, &params.density, &params.ts, eps, s)?;
        stats.merge(&st);
        totals.extend(ds.iter().map(|d| d.total()));
        rows.push(clt_error(cluster, &ds, kernel, params.r)?);
        for d in &ds {
            let cell = d.dx.powi(D as i32);
            let mut j = 0.0;
            let mut var = 0.0;
            for b in 0..d.bin_count() {
                let x = d.bin_center(b);
                if dist(&x, &center) < params.j_radius {
                    let (v, se) = d
                        .value_at(cluster, &x)
                        .ok_or_else(|| AnalysisError::MissingGridPoint { t: d.t, x: x.to_vec() })?;
                    j += (v - gaussian_kernel(kernel, d.t, &x)?) * cell;
                    var += (se * cell).powi(2);
                }
            }
            integrated.push(IntegratedError {
                epsilon: eps,
                t: d.t,
                j,
                se: var.sqrt(),
            });
        }
        holder.extend(holder_density_check(cluster, &ds, params.r, &params.holder_r0s));
    }
    let sups: Vec<f64> = rows.iter().map(|r| r.sup_error).collect();
    let (trend_tau, trend_p_value) = kendall_trend(&sups);
    Ok(CltSweepResult {
        sigma: kernel.sigma.clone(),
        epsilons: params.epsilons.clone(),
        ts: params.ts.clone(),
        r: params.r,
        dx: params.density.dx,
        rows,
        integrated,
        holder,
        totals,
        trend_tau,
        trend_p_value,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big_ball() -> ClusterModel<2> {
        ClusterModel::from_balls(vec![[0.0, 0.0]], 30.0).unwrap()
    }

    fn quick() -> SweepParams {
        SweepParams {
            epsilons: vec![1.0, 0.7],
            ts: vec![0.5, 1.0],
            r: 1.0,
            density: DensityParams {
                dt: 0.05,
                n_paths: 20_000,
                dx: 0.25,
                r_grid: 1.5,
                volume_samples: 100,
            },
            j_radius: 0.5,
            j_center: vec![0.0, 0.0],
            holder_r0s: vec![0.3, 0.6],
        }
    }

    #[test]
    fn rejects_increasing_epsilons() {
        let mut p = quick();
        p.epsilons = vec![0.5, 0.7];
        assert!(matches!(
            clt_sweep(&big_ball(), &KernelParams::identity(2), &p, 1),
            Err(AnalysisError::InvalidParameter(_))
        ));
    }

    #[test]
    fn window_buffer_enforced() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0]], 2.0).unwrap();
        assert!(matches!(
            clt_sweep(&c, &KernelParams::identity(2), &quick(), 1),
            Err(AnalysisError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn free_space_errors_at_noise_level() {
        let r = clt_sweep(&big_ball(), &KernelParams::identity(2), &quick(), 3).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            let max = row.entries.iter().map(|e| e.error.abs()).fold(0.0, f64::max);
            assert_eq!(max, row.sup_error);
            // Bin averaging of the Gaussian plus sampling noise.
            assert!(row.sup_error <= row.noise_floor + 2.0 * row.discretization_bound, "{row:?}");
        }
        for j in &r.integrated {
            assert!(j.j.abs() <= 4.0 * j.se + 0.01, "{j:?}");
        }
        assert_eq!(r.to_csv().lines().count(), 1 + 2 * 2 * 45);
    }
}
