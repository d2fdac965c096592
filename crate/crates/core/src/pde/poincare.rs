use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cylinders::ball_cells;
use super::field::{CoefficientField, FaceMean};
use super::operator::{cg, Operator};
use super::PdeError;
use crate::raster::RasterMask;
use crate::rng::{stream, Purpose};
use crate::stats::fmt17;

const MAX_OUTER: usize = 500;
const RQ_TOL: f64 = 1e-12;

/// Smallest nonzero Neumann eigenvalue of `−∇·(a∇)` on a cell set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareReport {
    pub r: f64,
    pub mu1: f64,
    /// `1 / (μ₁ r²)`.
    pub c_p: f64,
    pub cells: usize,
    pub iterations: usize,
    pub converged: bool,
}

impl PoincareReport {
    pub fn csv(reports: &[PoincareReport]) -> String {
        let mut s = String::from("r,mu1,c_p,cells\n");
        for p in reports {
            s.push_str(&format!("{},{},{},{}\n", fmt17(p.r), fmt17(p.mu1), fmt17(p.c_p), p.cells));
        }
        s
    }
}

fn rayleigh(op: &Operator, x: &[f64]) -> f64 {
    let mut lx = vec![0.0; x.len()];
    op.apply(x, &mut lx);
    let num: f64 = x.iter().zip(&lx).map(|(a, b)| -a * b).sum();
    num / x.iter().map(|a| a * a).sum::<f64>()
}

/// Inverse power iteration with the constants projected out. The cell set
/// carries reflecting faces on its whole boundary; `r` only scales `C_P`.
pub fn poincare_constant(
    mask: &RasterMask,
    field: &CoefficientField,
    cells: &[usize],
    r: f64,
) -> Result<PoincareReport, PdeError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(PdeError::InvalidParameter(format!("r must be positive (got {r})")));
    }
    if field.shape() != mask.shape() {
        return Err(PdeError::InvalidParameter("field and mask shapes differ".into()));
    }
    let mut member = vec![false; mask.len()];
    for &c in cells {
        if c >= mask.len() || !mask.flags()[c] {
            return Err(PdeError::InvalidParameter(format!("cell {c} is not an inside cell")));
        }
        member[c] = true;
    }
    let op = Operator::new(mask, field, &member, 1.0, FaceMean::Harmonic);
    if op.len() < 2 {
        return Err(PdeError::InvalidParameter("need at least two cells".into()));
    }
    if !op.is_connected() {
        return Err(PdeError::DisconnectedBall);
    }
    let n = op.len();
    let neg = |u: &[f64], out: &mut [f64]| {
        op.apply(u, out);
        out.iter_mut().for_each(|v| *v = -*v);
    };
    let mut rng = stream(0, Purpose::Eigen, n as u64);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let normalize = |x: &mut Vec<f64>| {
        let m = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= m);
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    };
    normalize(&mut x);
    let mut mu = rayleigh(&op, &x);
    let mut converged = false;
    let mut it = 0;
    while it < MAX_OUTER {
        it += 1;
        let mut y = x.clone();
        cg(neg, &x, &mut y, 1e-12, 20 * n + 100, true);
        normalize(&mut y);
        x = y;
        let next = rayleigh(&op, &x);
        let done = (next - mu).abs() <= RQ_TOL * next.abs();
        mu = next;
        if done {
            converged = true;
            break;
        }
    }
    Ok(PoincareReport {
        r,
        mu1: mu,
        c_p: 1.0 / (mu * r * r),
        cells: n,
        iterations: it,
        converged,
    })
}

/// `poincare_constant` on intrinsic balls `B(center, r)` for each radius.
pub fn poincare_sweep(
    mask: &RasterMask,
    field: &CoefficientField,
    center: (usize, usize),
    radii: &[f64],
) -> Result<Vec<PoincareReport>, PdeError> {
    radii
        .iter()
        .map(|&r| poincare_constant(mask, field, &ball_cells(mask, center, r)?, r))
        .collect()
}
