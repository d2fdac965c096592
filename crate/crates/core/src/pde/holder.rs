use serde::{Deserialize, Serialize};

use super::field::CoefficientField;
use super::heat::{heat_solve, stable_dt, HeatField, InitialDatum, SolveOptions};
use super::PdeError;
use crate::raster::{any_angle_distance, Connectivity, RasterMask};
use crate::stats::{fmt17, linear_fit, LinearFit};

/// `osc(u, Q_k)` for `Q_k = [t₀ − r_k², t₀] × B(x₀, r_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscLevel {
    pub k: usize,
    pub r_k: f64,
    pub osc: f64,
    pub cells: usize,
    pub times: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub x0: (usize, usize),
    pub t0: f64,
    pub r0: f64,
    pub pitch: f64,
    pub levels: Vec<OscLevel>,
    /// Some oscillation vanished, so no decay rate exists.
    pub degenerate: bool,
    /// Least-squares fit of `ln osc` against `k`.
    pub fit: Option<LinearFit>,
    /// `α̂ = −slope / ln 2`.
    pub alpha: Option<f64>,
    pub alpha_ci95: Option<(f64, f64)>,
    /// Per-level contraction `2^{−α̂}`.
    pub rate: Option<f64>,
}

impl HolderReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,r_k,osc,cells,times\n");
        for l in &self.levels {
            s.push_str(&format!("{},{},{},{},{}\n", l.k, fmt17(l.r_k), fmt17(l.osc), l.cells, l.times));
        }
        s
    }
}

/// Oscillation over nested cylinders with `r_k = 2^{−k} r₀`, keeping the
/// levels with `r_k ≥ 4h` (at most `max_levels`).
pub fn holder_oscillation(
    field: &HeatField,
    x0: (usize, usize),
    t0: f64,
    r0: f64,
    max_levels: usize,
) -> Result<HolderReport, PdeError> {
    if !(r0 > 0.0 && r0.is_finite() && t0.is_finite()) {
        return Err(PdeError::InvalidParameter(format!("need r0 > 0 and finite t0 (got {r0}, {t0})")));
    }
    let (first, last) = match (field.times.first(), field.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(PdeError::InvalidParameter("heat field has no snapshots".into())),
    };
    let tol = 1e-9 * t0.abs().max(1.0);
    if first > t0 - r0 * r0 + tol || last < t0 - tol {
        return Err(PdeError::InvalidParameter(format!(
            "snapshots cover [{first}, {last}] but Q_0 needs [{}, {t0}]",
            t0 - r0 * r0
        )));
    }
    let mask = field.mask();
    let h = mask.pitch();
    let d = any_angle_distance(mask, x0)?;
    let mut levels = Vec::new();
    let mut scale: f64 = 0.0;
    for k in 0..max_levels {
        let r_k = r0 / 2f64.powi(k as i32);
        if r_k < 4.0 * h {
            break;
        }
        let cells: Vec<usize> = (0..mask.len()).filter(|&c| d.values[c] < r_k).collect();
        let ks: Vec<usize> = field
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= t0 - r_k * r_k - tol && t <= t0 + tol)
            .map(|(i, _)| i)
            .collect();
        if cells.is_empty() || ks.is_empty() {
            break;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &t in &ks {
            for &c in &cells {
                if let Some(v) = field.at(t, c) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        scale = scale.max(lo.abs()).max(hi.abs());
        levels.push(OscLevel {
            k,
            r_k,
            osc: hi - lo,
            cells: cells.len(),
            times: ks.len(),
        });
    }
    if levels.len() < 3 {
        return Err(PdeError::TooFewLevels { usable: levels.len() });
    }
    let degenerate = levels.iter().any(|l| l.osc <= 1e-13 * scale);
    let fit = if degenerate {
        None
    } else {
        let xs: Vec<f64> = levels.iter().map(|l| l.k as f64).collect();
        let ys: Vec<f64> = levels.iter().map(|l| l.osc.ln()).collect();
        linear_fit(&xs, &ys)
    };
    let ln2 = std::f64::consts::LN_2;
    let alpha = fit.as_ref().map(|f| -f.slope / ln2);
    let alpha_ci95 = fit.as_ref().map(|f| (-f.slope_ci95.1 / ln2, -f.slope_ci95.0 / ln2));
    Ok(HolderReport {
        x0,
        t0,
        r0,
        pitch: h,
        levels,
        degenerate,
        fit,
        alpha,
        alpha_ci95,
        rate: alpha.map(|a| 2f64.powf(-a)),
    })
}

/// Solves from `datum` up to `t0` on the face-connected component of the
/// cell containing `x0`, with snapshots dense enough for the smallest
/// usable cylinder (at least 8 per window), then measures oscillations.
#[allow(clippy::too_many_arguments)]
pub fn holder_study(
    mask: &RasterMask,
    field: &CoefficientField,
    datum: &InitialDatum,
    x0: [f64; 2],
    t0: f64,
    r0: f64,
    max_levels: usize,
    opts: &SolveOptions,
) -> Result<HolderReport, PdeError> {
    if !(t0 >= r0 * r0 && r0 > 0.0 && t0.is_finite()) {
        return Err(PdeError::InvalidParameter(format!("need r0 > 0 and t0 ≥ r0² (got {t0}, {r0})")));
    }
    let cell = mask
        .cell_of(&x0)
        .ok_or_else(|| PdeError::InvalidParameter(format!("x0 {x0:?} is off the raster")))?;
    let comp = mask.component_of(cell, Connectivity::Four)?;
    let h = comp.pitch();
    let usable = (0..max_levels)
        .take_while(|&k| r0 / 2f64.powi(k as i32) >= 4.0 * h)
        .count()
        .max(1);
    let r_min = r0 / 2f64.powi(usable as i32 - 1);
    let limit = stable_dt(&comp, field, opts);
    let n_steps = (t0 / limit * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = t0 / n_steps as f64;
    let per = ((r_min * r_min / 8.0 / dt).floor() as usize).max(1);
    let from = ((t0 - r0 * r0) / dt).floor() as usize / per * per;
    let solve = SolveOptions {
        snapshot_every: per,
        record_from: from,
        ..opts.clone()
    };
    let hf = heat_solve(&comp, field, &datum.rasterize(&comp), dt, n_steps, &solve)?;
    holder_oscillation(&hf, cell, t0, r0, max_levels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::{heat_solve, CoefficientField, InitialDatum, SolveOptions};
    use crate::raster::RasterMask;

    fn solve(u0: &InitialDatum) -> HeatField {
        let m = RasterMask::full([-1.0, -1.0], 1.0 / 32.0, 64, 64).unwrap();
        let f = CoefficientField::identity(64, 64);
        let dt = 1.0 / 4096.0 / 4.0;
        let opts = SolveOptions {
            snapshot_every: 4,
            ..Default::default()
        };
        heat_solve(&m, &f, &u0.rasterize(&m), dt, 4096 * 2, &opts).unwrap()
    }

    #[test]
    fn constant_is_degenerate() {
        let hf = solve(&InitialDatum::constant(1.0));
        let rep = holder_oscillation(&hf, (32, 32), 0.5, 0.5, 6).unwrap();
        assert!(rep.degenerate && rep.alpha.is_none());
        assert!(rep.levels.iter().all(|l| l.osc.abs() < 1e-13));
    }

    #[test]
    fn smooth_data_decay() {
        let hf = solve(&InitialDatum::random([-1.0, -1.0], [1.0, 1.0], 21, 0));
        let rep = holder_oscillation(&hf, (32, 32), 0.5, 0.5, 6).unwrap();
        assert_eq!(rep.levels.len(), 3);
        for w in rep.levels.windows(2) {
            assert!(w[1].osc <= w[0].osc);
        }
        let (lo, _) = rep.alpha_ci95.unwrap();
        assert!(rep.alpha.unwrap() > 0.0 && lo > 0.0, "{rep:?}");
        assert!(rep.to_csv().starts_with("k,r_k,osc,cells,times\n0,"));
    }

    #[test]
    fn study_matches_manual_grid() {
        let m = RasterMask::full([-1.0, -1.0], 1.0 / 32.0, 64, 64).unwrap();
        let f = CoefficientField::identity(64, 64);
        let datum = InitialDatum::random([-1.0, -1.0], [1.0, 1.0], 21, 0);
        let rep = holder_study(&m, &f, &datum, [0.0, 0.0], 0.5, 0.5, 6, &SolveOptions::default()).unwrap();
        assert_eq!(rep.levels.len(), 3);
        assert!(rep.levels.iter().all(|l| l.times >= 8));
        assert!(rep.alpha.unwrap() > 0.0);
    }

    #[test]
    fn too_few_levels() {
        let hf = solve(&InitialDatum::constant(1.0));
        assert!(matches!(
            holder_oscillation(&hf, (32, 32), 0.5, 0.2, 6),
            Err(PdeError::TooFewLevels { usable: 1 })
        ));
    }
}
