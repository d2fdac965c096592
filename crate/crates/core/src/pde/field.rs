use serde::{Deserialize, Serialize};

use super::PdeError;
use crate::raster::RasterMask;
use crate::rng::{stream, Purpose};
use rand::Rng;

/// How a face coefficient is formed from the two adjacent cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceMean {
    #[default]
    Harmonic,
    Arithmetic,
}

impl FaceMean {
    pub(crate) fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            FaceMean::Harmonic => 2.0 * a * b / (a + b),
            FaceMean::Arithmetic => 0.5 * (a + b),
        }
    }
}

/// Per-cell symmetric matrices `(a11, a12, a22)` with ellipticity bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    nx: usize,
    ny: usize,
    a: Vec<[f64; 3]>,
    lambda: f64,
    big_lambda: f64,
}

fn eigenvalues(m: &[f64; 3]) -> (f64, f64) {
    let mean = 0.5 * (m[0] + m[2]);
    let half = 0.5 * (m[0] - m[2]);
    let rad = (half * half + m[1] * m[1]).sqrt();
    (mean - rad, mean + rad)
}

impl CoefficientField {
    /// Validates `λ ≤ eig(a) ≤ Λ` cell by cell (relative slack 1e-12).
    pub fn new(nx: usize, ny: usize, a: Vec<[f64; 3]>, lambda: f64, big_lambda: f64) -> Result<Self, PdeError> {
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return Err(PdeError::InvalidParameter(format!("need 0 < λ ≤ Λ < ∞ (got {lambda}, {big_lambda})")));
        }
        if a.len() != nx * ny {
            return Err(PdeError::InvalidParameter(format!("{} matrices for a {nx}×{ny} grid", a.len())));
        }
        for (cell, m) in a.iter().enumerate() {
            let (lo, hi) = eigenvalues(m);
            let ok = m.iter().all(|v| v.is_finite())
                && lo >= lambda * (1.0 - 1e-12)
                && hi <= big_lambda * (1.0 + 1e-12);
            if !ok {
                return Err(PdeError::EllipticityViolated {
                    cell,
                    eig_min: lo,
                    eig_max: hi,
                    lambda,
                    big_lambda,
                });
            }
        }
        Ok(CoefficientField {
            nx,
            ny,
            a,
            lambda,
            big_lambda,
        })
    }

    /// `a = I` everywhere, `λ = Λ = 1`.
    pub fn identity(nx: usize, ny: usize) -> Self {
        CoefficientField {
            nx,
            ny,
            a: vec![[1.0, 0.0, 1.0]; nx * ny],
            lambda: 1.0,
            big_lambda: 1.0,
        }
    }

    /// Field sampled at cell centers of `mask`.
    pub fn from_fn(
        mask: &RasterMask,
        lambda: f64,
        big_lambda: f64,
        f: impl Fn([f64; 2]) -> [f64; 3],
    ) -> Result<Self, PdeError> {
        let (nx, ny) = mask.shape();
        let a = (0..nx * ny)
            .map(|k| {
                let (i, j) = mask.coords(k);
                f(mask.cell_center(i, j))
            })
            .collect();
        Self::new(nx, ny, a, lambda, big_lambda)
    }

    /// Piecewise-constant field on square blocks of `block` world units,
    /// each block a rotated `diag(e1, e2)` with `e1, e2` uniform in `[λ, Λ]`.
    /// Blocks are anchored at the world origin, so refinements agree.
    pub fn random_blocks(mask: &RasterMask, block: f64, lambda: f64, big_lambda: f64, seed: u64) -> Result<Self, PdeError> {
        if !(block > 0.0 && block.is_finite()) {
            return Err(PdeError::InvalidParameter(format!("block size must be positive (got {block})")));
        }
        Self::from_fn(mask, lambda, big_lambda, |p| {
            let bi = (p[0] / block).floor() as i64;
            let bj = (p[1] / block).floor() as i64;
            let id = ((bi as u64) << 24) ^ (bj as u64 & 0xff_ffff);
            let mut rng = stream(seed, Purpose::Coefficient, id);
            let e1 = rng.random_range(lambda..=big_lambda);
            let e2 = rng.random_range(lambda..=big_lambda);
            let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
            let (s, c) = th.sin_cos();
            [e1 * c * c + e2 * s * s, (e1 - e2) * c * s, e1 * s * s + e2 * c * c]
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        self.a[idx]
    }
}
