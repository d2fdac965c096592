use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cylinders::ParabolicCylinders;
use super::field::CoefficientField;
use super::heat::{heat_solve, stable_dt, HeatField, InitialDatum, SolveOptions};
use super::PdeError;
use crate::raster::{Connectivity, RasterMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    pub pitch: f64,
    pub ratio: f64,
}

/// Measured `sup_{Q−} u / inf_{Q+} u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackReport {
    pub ratio: f64,
    pub sup_minus: f64,
    pub inf_plus: f64,
    pub r: f64,
    pub s: f64,
    pub tau: f64,
    pub delta: f64,
    pub pitch: f64,
    pub cells_minus: usize,
    pub cells_plus: usize,
    /// `Some(true)` when `r` is below the supplied operational radius.
    pub below_r_hat: Option<bool>,
    /// Coarsest grid first.
    pub refinement: Vec<RefinementPoint>,
    /// Largest relative change of the ratio between successive grids.
    pub drift: f64,
}

pub fn harnack_ratio(field: &HeatField, cyl: &ParabolicCylinders) -> Result<HarnackReport, PdeError> {
    let tol = 1e-9 * cyl.s.abs().max(1.0);
    let (first, last) = match (field.times.first(), field.times.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(PdeError::InvalidParameter("heat field has no snapshots".into())),
    };
    if first > cyl.q.t_lo + tol || last < cyl.s - tol {
        return Err(PdeError::InvalidParameter(format!(
            "snapshots cover [{first}, {last}] but Q needs [{}, {}]",
            cyl.q.t_lo, cyl.s
        )));
    }
    let (q_min, _) = cyl
        .q
        .extremes(field)
        .ok_or_else(|| PdeError::EmptyCylinder("Q".into()))?;
    if q_min <= 0.0 {
        return Err(PdeError::NonPositiveField(q_min));
    }
    let (_, sup_minus) = cyl
        .q_minus
        .extremes(field)
        .ok_or_else(|| PdeError::EmptyCylinder("Q−".into()))?;
    let (inf_plus, _) = cyl
        .q_plus
        .extremes(field)
        .ok_or_else(|| PdeError::EmptyCylinder("Q+".into()))?;
    let ratio = sup_minus / inf_plus;
    let pitch = field.mask().pitch();
    Ok(HarnackReport {
        ratio,
        sup_minus,
        inf_plus,
        r: cyl.r,
        s: cyl.s,
        tau: cyl.tau,
        delta: cyl.delta,
        pitch,
        cells_minus: cyl.q_minus.cells.len(),
        cells_plus: cyl.q_plus.cells.len(),
        below_r_hat: None,
        refinement: vec![RefinementPoint { pitch, ratio }],
        drift: 0.0,
    })
}

/// Cylinder geometry and time grid for a Harnack measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnackSetup {
    pub center: [f64; 2],
    pub r: f64,
    pub tau: f64,
    pub delta: f64,
    /// Top of the cylinder; `None` means `τr²`, so `Q` starts at `t = 0`.
    pub s: Option<f64>,
    /// Snapshot intervals on `[0, s]`.
    pub intervals: usize,
    pub r_hat: Option<f64>,
    pub solve: SolveOptions,
}

impl Default for HarnackSetup {
    fn default() -> Self {
        HarnackSetup {
            center: [0.0, 0.0],
            r: 1.0,
            tau: 1.0,
            delta: 0.5,
            s: None,
            intervals: 64,
            r_hat: None,
            solve: SolveOptions::default(),
        }
    }
}

impl HarnackSetup {
    pub fn top(&self) -> f64 {
        self.s.unwrap_or(self.tau * self.r * self.r)
    }
}

fn solve_on(
    mask: &RasterMask,
    field_for: &(impl Fn(&RasterMask) -> Result<CoefficientField, PdeError> + ?Sized),
    datum: &InitialDatum,
    setup: &HarnackSetup,
) -> Result<HarnackReport, PdeError> {
    let s = setup.top();
    if !(s >= setup.tau * setup.r * setup.r) || setup.intervals == 0 {
        return Err(PdeError::InvalidParameter(format!(
            "need s ≥ τr² and intervals > 0 (got s={s}, intervals={})",
            setup.intervals
        )));
    }
    let center = mask
        .cell_of(&setup.center)
        .ok_or_else(|| PdeError::InvalidParameter(format!("center {:?} is off the raster", setup.center)))?;
    let comp = mask.component_of(center, Connectivity::Four)?;
    let field = field_for(&comp)?;
    let limit = stable_dt(&comp, &field, &setup.solve);
    let per = (s / (setup.intervals as f64 * limit) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let n_steps = per * setup.intervals;
    let opts = SolveOptions {
        snapshot_every: per,
        ..setup.solve.clone()
    };
    let hf = heat_solve(&comp, &field, &datum.rasterize(&comp), s / n_steps as f64, n_steps, &opts)?;
    let cyl = ParabolicCylinders::new(&comp, center, setup.r, s, setup.tau, setup.delta)?;
    let mut rep = harnack_ratio(&hf, &cyl)?;
    rep.below_r_hat = setup.r_hat.map(|rh| setup.r < rh);
    Ok(rep)
}

/// Harnack ratio of one initial datum on a ladder of rasters (coarsest
/// first). Each raster is restricted to the face-connected component of the
/// center cell before solving.
pub fn harnack_study(
    masks: &[RasterMask],
    field_for: &(impl Fn(&RasterMask) -> Result<CoefficientField, PdeError> + ?Sized),
    datum: &InitialDatum,
    setup: &HarnackSetup,
) -> Result<HarnackReport, PdeError> {
    if masks.is_empty() {
        return Err(PdeError::InvalidParameter("no rasters given".into()));
    }
    let mut reports = masks
        .iter()
        .map(|m| solve_on(m, field_for, datum, setup))
        .collect::<Result<Vec<_>, _>>()?;
    let refinement: Vec<RefinementPoint> = reports.iter().map(|r| r.refinement[0]).collect();
    let drift = refinement
        .windows(2)
        .map(|w| ((w[1].ratio - w[0].ratio) / w[0].ratio).abs())
        .fold(0.0, f64::max);
    let mut first = reports.swap_remove(0);
    first.refinement = refinement;
    first.drift = drift;
    Ok(first)
}

/// Reports for `n_data` random positive initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnackSample {
    pub reports: Vec<HarnackReport>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub max_drift: f64,
}

pub fn harnack_sample(
    masks: &[RasterMask],
    field_for: &(impl Fn(&RasterMask) -> Result<CoefficientField, PdeError> + Sync + ?Sized),
    setup: &HarnackSetup,
    n_data: usize,
    seed: u64,
) -> Result<HarnackSample, PdeError> {
    let base = masks
        .first()
        .ok_or_else(|| PdeError::InvalidParameter("no rasters given".into()))?;
    if n_data == 0 {
        return Err(PdeError::InvalidParameter("n_data must be positive".into()));
    }
    let lo = base.origin();
    let (nx, ny) = base.shape();
    let hi = [lo[0] + nx as f64 * base.pitch(), lo[1] + ny as f64 * base.pitch()];
    let reports = (0..n_data as u64)
        .into_par_iter()
        .map(|i| harnack_study(masks, field_for, &InitialDatum::random(lo, hi, seed, i), setup))
        .collect::<Result<Vec<_>, _>>()?;
    let max_ratio = reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max_drift = reports.iter().map(|r| r.drift).fold(0.0, f64::max);
    Ok(HarnackSample {
        reports,
        max_ratio,
        min_ratio,
        max_drift,
    })
}
