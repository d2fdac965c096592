use rand::Rng;
use serde::{Deserialize, Serialize};

use super::field::{CoefficientField, FaceMean};
use super::operator::{cg, Operator};
use super::PdeError;
use crate::raster::RasterMask;
use crate::rng::{stream, Purpose};

/// Relative mass drift tolerated by every solve.
pub const MASS_TOL: f64 = 1e-10;

const CG_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Auto,
    Explicit,
    Implicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub scheme: Scheme,
    /// Let `Auto` fall back to backward Euler when `dt` is too large.
    pub allow_implicit: bool,
    /// Use `a` as given instead of `a/Λ`.
    pub raw: bool,
    pub face_mean: FaceMean,
    /// Keep every `snapshot_every`-th step (the last step is always kept).
    pub snapshot_every: usize,
    /// Drop snapshots before this step.
    pub record_from: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            scheme: Scheme::Auto,
            allow_implicit: true,
            raw: false,
            face_mean: FaceMean::Harmonic,
            snapshot_every: 1,
            record_from: 0,
        }
    }
}

/// Time-indexed solution on the inside cells of a mask.
#[derive(Debug, Clone)]
pub struct HeatField {
    mask: RasterMask,
    field: CoefficientField,
    cells: Vec<usize>,
    slot: Vec<usize>,
    pub dt: f64,
    pub scheme: Scheme,
    pub times: Vec<f64>,
    snapshots: Vec<Vec<f64>>,
    /// `max_k |mass_k − mass_0| / mass_0` over every step taken.
    pub mass_drift: f64,
}

impl HeatField {
    pub fn mask(&self) -> &RasterMask {
        &self.mask
    }

    pub fn field(&self) -> &CoefficientField {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Value at snapshot `k` in grid cell `idx` (`None` outside the mask).
    pub fn at(&self, k: usize, idx: usize) -> Option<f64> {
        let s = self.slot[idx];
        (s != usize::MAX).then(|| self.snapshots[k][s])
    }

    /// Snapshot `k` on the full grid, zero outside.
    pub fn grid(&self, k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.mask.len()];
        for (s, &c) in self.cells.iter().enumerate() {
            out[c] = self.snapshots[k][s];
        }
        out
    }

    /// `∫ u` at snapshot `k`.
    pub fn mass(&self, k: usize) -> f64 {
        let h = self.mask.pitch();
        self.snapshots[k].iter().sum::<f64>() * h * h
    }

    pub fn min_max(&self, k: usize) -> (f64, f64) {
        self.snapshots[k]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    /// Binary PGM of snapshot `k`, linearly scaled from its min to its max;
    /// outside cells are black, row 0 at the top.
    pub fn snapshot_pgm(&self, k: usize) -> Vec<u8> {
        let (nx, ny) = self.mask.shape();
        let (lo, hi) = self.min_max(k);
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = format!("P5\n{nx} {ny}\n255\n").into_bytes();
        for j in (0..ny).rev() {
            for i in 0..nx {
                let v = self.at(k, self.mask.index(i, j));
                out.push(v.map_or(0, |v| (1.0 + 254.0 * (v - lo) / span).round() as u8));
            }
        }
        out
    }
}

/// Largest explicit step keeping every update a convex combination
/// (`1 / max_p Σ_q w_pq`) on the inside cells of `mask`.
pub fn stable_dt(mask: &RasterMask, field: &CoefficientField, opts: &SolveOptions) -> f64 {
    let scale = if opts.raw { 1.0 } else { 1.0 / field.big_lambda() };
    1.0 / Operator::new(mask, field, mask.flags(), scale, opts.face_mean).max_diag()
}

/// Solves `∂_t u = (1/Λ) ∇·(a∇u)` with reflecting faces for `n_steps` of
/// size `dt`, starting from `u0` given per grid cell.
pub fn heat_solve(
    mask: &RasterMask,
    field: &CoefficientField,
    u0: &[f64],
    dt: f64,
    n_steps: usize,
    opts: &SolveOptions,
) -> Result<HeatField, PdeError> {
    if field.shape() != mask.shape() {
        return Err(PdeError::InvalidParameter(format!(
            "field shape {:?} differs from mask shape {:?}",
            field.shape(),
            mask.shape()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) || opts.snapshot_every == 0 {
        return Err(PdeError::InvalidParameter(format!(
            "need dt > 0 and snapshot_every > 0 (got {dt}, {})",
            opts.snapshot_every
        )));
    }
    if u0.len() != mask.len() {
        return Err(PdeError::InvalidInitialData(format!("{} values for {} cells", u0.len(), mask.len())));
    }
    for (k, &v) in u0.iter().enumerate() {
        if !v.is_finite() {
            return Err(PdeError::InvalidInitialData(format!("non-finite value in cell {k}")));
        }
        if v != 0.0 && !mask.flags()[k] {
            return Err(PdeError::InvalidInitialData(format!("nonzero value in outside cell {k}")));
        }
    }
    let scale = if opts.raw { 1.0 } else { 1.0 / field.big_lambda() };
    let op = Operator::new(mask, field, mask.flags(), scale, opts.face_mean);
    if op.len() == 0 {
        return Err(PdeError::InvalidParameter("mask has no inside cells".into()));
    }
    let limit = 1.0 / op.max_diag();
    let explicit_ok = dt <= limit * (1.0 + 1e-12);
    let scheme = match opts.scheme {
        Scheme::Explicit | Scheme::Auto if explicit_ok => Scheme::Explicit,
        Scheme::Auto if opts.allow_implicit => Scheme::Implicit,
        Scheme::Implicit => Scheme::Implicit,
        _ => return Err(PdeError::UnstableStep { dt, limit }),
    };

    let mut u: Vec<f64> = op.cells.iter().map(|&c| u0[c]).collect();
    let mass0: f64 = u.iter().sum();
    let mut work = vec![0.0; u.len()];
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut drift: f64 = 0.0;
    let mut keep = |step: usize, u: &Vec<f64>| {
        if step >= opts.record_from && (step % opts.snapshot_every == 0 || step == n_steps) {
            times.push(step as f64 * dt);
            snapshots.push(u.clone());
        }
    };
    keep(0, &u);
    for step in 1..=n_steps {
        match scheme {
            Scheme::Explicit => {
                let total = op.explicit_step(dt, &u, &mut work);
                std::mem::swap(&mut u, &mut work);
                if mass0 != 0.0 {
                    drift = drift.max(((total - mass0) / mass0).abs());
                }
            }
            _ => {
                let b = u.clone();
                cg(|x, o| op.apply_shifted(dt, x, o), &b, &mut u, CG_TOL, 10 * b.len() + 100, false);
                // Backward Euler preserves Σu exactly; restore what the
                // solver tolerance leaves behind.
                let shift = (b.iter().sum::<f64>() - u.iter().sum::<f64>()) / u.len() as f64;
                u.iter_mut().for_each(|x| *x += shift);
                if mass0 != 0.0 {
                    drift = drift.max(((u.iter().sum::<f64>() - mass0) / mass0).abs());
                }
            }
        }
        keep(step, &u);
    }
    Ok(HeatField {
        mask: mask.clone(),
        field: field.clone(),
        cells: op.cells,
        slot: op.slot,
        dt,
        scheme,
        times,
        snapshots,
        mass_drift: drift,
    })
}

/// Strictly positive smooth initial data: a floor plus Gaussian bumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    pub floor: f64,
    /// `(center, width, amplitude)`.
    pub bumps: Vec<([f64; 2], f64, f64)>,
}

impl InitialDatum {
    pub fn constant(value: f64) -> Self {
        InitialDatum {
            floor: value,
            bumps: Vec::new(),
        }
    }

    /// Floor 0.1 and three bumps centered in `[lo, hi]`, widths between 10%
    /// and 30% of the box diagonal, amplitudes in `[0.5, 1.5]`.
    pub fn random(lo: [f64; 2], hi: [f64; 2], seed: u64, index: u64) -> Self {
        let mut rng = stream(seed, Purpose::InitialDatum, index);
        let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
        let bumps = (0..3)
            .map(|_| {
                let c = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
                (c, diag * rng.random_range(0.1..0.3), rng.random_range(0.5..1.5))
            })
            .collect();
        InitialDatum { floor: 0.1, bumps }
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.floor
            + self
                .bumps
                .iter()
                .map(|(c, w, a)| {
                    let r2 = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
                    a * (-r2 / (2.0 * w * w)).exp()
                })
                .sum::<f64>()
    }

    /// Values at inside cell centers, zero elsewhere.
    pub fn rasterize(&self, mask: &RasterMask) -> Vec<f64> {
        (0..mask.len())
            .map(|k| {
                if mask.flags()[k] {
                    let (i, j) = mask.coords(k);
                    self.eval(mask.cell_center(i, j))
                } else {
                    0.0
                }
            })
            .collect()
    }
}
