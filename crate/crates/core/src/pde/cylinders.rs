use serde::{Deserialize, Serialize};

use super::heat::HeatField;
use super::PdeError;
use crate::raster::{any_angle_distance, RasterMask};

/// Inside cells whose any-angle distance from `center` is below `r`.
pub fn ball_cells(mask: &RasterMask, center: (usize, usize), r: f64) -> Result<Vec<usize>, PdeError> {
    let d = any_angle_distance(mask, center)?;
    Ok((0..mask.len()).filter(|&k| d.values[k] < r).collect())
}

/// A space-time cylinder `[t_lo, t_hi] × B(x₀, radius)` on a raster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderSet {
    pub t_lo: f64,
    pub t_hi: f64,
    pub radius: f64,
    pub cells: Vec<usize>,
}

impl CylinderSet {
    /// Snapshot indices with `t_lo ≤ t ≤ t_hi` (up to rounding of the time grid).
    pub fn times(&self, field: &HeatField) -> Vec<usize> {
        let tol = 1e-9 * self.t_hi.abs().max(1.0);
        field
            .times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t >= self.t_lo - tol && t <= self.t_hi + tol)
            .map(|(k, _)| k)
            .collect()
    }

    pub fn contains(&self, other: &CylinderSet) -> bool {
        let set: std::collections::HashSet<usize> = self.cells.iter().copied().collect();
        self.t_lo <= other.t_lo && other.t_hi <= self.t_hi && other.cells.iter().all(|c| set.contains(c))
    }

    /// `(min, max)` of the field over the cylinder; `None` if it has no
    /// cells or no snapshot times.
    pub fn extremes(&self, field: &HeatField) -> Option<(f64, f64)> {
        let ks = self.times(field);
        if ks.is_empty() || self.cells.is_empty() {
            return None;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &k in &ks {
            for &c in &self.cells {
                if let Some(v) = field.at(k, c) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        (lo <= hi).then_some((lo, hi))
    }
}

/// The cylinders `Q`, `Q_δ`, `Q−`, `Q−′`, `Q+` around `(s, x₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParabolicCylinders {
    pub center: (usize, usize),
    pub r: f64,
    pub s: f64,
    pub tau: f64,
    pub delta: f64,
    pub q: CylinderSet,
    pub q_delta: CylinderSet,
    pub q_minus: CylinderSet,
    pub q_minus_prime: CylinderSet,
    pub q_plus: CylinderSet,
}

impl ParabolicCylinders {
    pub fn new(mask: &RasterMask, center: (usize, usize), r: f64, s: f64, tau: f64, delta: f64) -> Result<Self, PdeError> {
        if !(r > 0.0 && tau > 0.0 && s.is_finite() && r.is_finite() && tau.is_finite()) || !(delta > 0.0 && delta < 1.0) {
            return Err(PdeError::InvalidParameter(format!(
                "need r > 0, τ > 0, finite s and δ in (0, 1) (got r={r}, τ={tau}, s={s}, δ={delta})"
            )));
        }
        let d = any_angle_distance(mask, center)?;
        let ball = |radius: f64| -> Vec<usize> { (0..mask.len()).filter(|&k| d.values[k] < radius).collect() };
        let big = ball(r);
        let small = ball(delta * r);
        let t = tau * r * r;
        let set = |t_lo: f64, t_hi: f64, radius: f64, cells: &Vec<usize>| CylinderSet {
            t_lo,
            t_hi,
            radius,
            cells: cells.clone(),
        };
        Ok(ParabolicCylinders {
            center,
            r,
            s,
            tau,
            delta,
            q: set(s - t, s, r, &big),
            q_delta: set(s - delta * t, s, delta * r, &small),
            q_minus: set(s - (3.0 + delta) * t / 4.0, s - (3.0 - delta) * t / 4.0, delta * r, &small),
            q_minus_prime: set(s - t, s - (3.0 - delta) * t / 4.0, delta * r, &small),
            q_plus: set(s - (1.0 + delta) * t / 4.0, s, delta * r, &small),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows_and_inclusions() {
        let m = RasterMask::full([-1.0, -1.0], 0.05, 40, 40).unwrap();
        let c = ParabolicCylinders::new(&m, (20, 20), 0.6, 2.0, 1.5, 0.5).unwrap();
        let close = |q: &CylinderSet, lo: f64, hi: f64| (q.t_lo - lo).abs() < 1e-14 && (q.t_hi - hi).abs() < 1e-14;
        assert!(close(&c.q, 1.46, 2.0));
        assert!(close(&c.q_minus, 1.5275, 1.6625));
        assert!(close(&c.q_minus_prime, 1.46, 1.6625));
        assert!(close(&c.q_plus, 1.7975, 2.0));
        assert!(close(&c.q_delta, 1.73, 2.0));
        for sub in [&c.q_delta, &c.q_minus, &c.q_minus_prime, &c.q_plus] {
            assert!(c.q.contains(sub));
        }
        assert!(c.q_minus_prime.contains(&c.q_minus));
        // Ball of radius 0.3 around the center of cell (20, 20): lattice
        // offsets with |k|·h < 0.3, i.e. i² + j² < 36.
        let count = (-6i32..=6)
            .flat_map(|i| (-6i32..=6).map(move |j| i * i + j * j))
            .filter(|&n| n < 36)
            .count();
        assert_eq!(c.q_plus.cells.len(), count);
    }

    #[test]
    fn bad_parameters() {
        let m = RasterMask::full([0.0, 0.0], 0.1, 10, 10).unwrap();
        assert!(ParabolicCylinders::new(&m, (5, 5), 0.5, 1.0, 1.0, 1.0).is_err());
        assert!(ParabolicCylinders::new(&m, (5, 5), -0.5, 1.0, 1.0, 0.5).is_err());
        assert!(matches!(
            ParabolicCylinders::new(&m, (50, 5), 0.5, 1.0, 1.0, 0.5),
            Err(PdeError::Raster(_))
        ));
    }
}
