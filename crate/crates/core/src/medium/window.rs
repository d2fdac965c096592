use serde::{Deserialize, Serialize};

use super::MediumError;
use crate::point::Point;

/// Axis-aligned box standing in for ℝ^d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<const D: usize> {
    lo: Point<D>,
    hi: Point<D>,
}

impl<const D: usize> Window<D> {
    pub fn new(lo: Point<D>, hi: Point<D>) -> Result<Self, MediumError> {
        if !(2..=3).contains(&D) {
            return Err(MediumError::UnsupportedDimension(D));
        }
        let ok = lo
            .iter()
            .zip(&hi)
            .all(|(l, h)| l.is_finite() && h.is_finite() && h > l);
        if !ok {
            return Err(MediumError::DegenerateWindow);
        }
        Ok(Window { lo, hi })
    }

    /// The cube `[-half, half]^D`.
    pub fn centered(half: f64) -> Result<Self, MediumError> {
        Self::new([-half; D], [half; D])
    }

    pub fn lo(&self) -> &Point<D> {
        &self.lo
    }

    pub fn hi(&self) -> &Point<D> {
        &self.hi
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..D).map(|k| self.side(k)).product()
    }

    pub fn contains(&self, p: &Point<D>) -> bool {
        (0..D).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    /// Distance from an interior point to the nearest face.
    pub fn distance_to_boundary(&self, p: &Point<D>) -> f64 {
        (0..D)
            .map(|k| (p[k] - self.lo[k]).min(self.hi[k] - p[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn diagonal(&self) -> f64 {
        (0..D).map(|k| self.side(k).powi(2)).sum::<f64>().sqrt()
    }
}

/// Serialized form `{lo, hi}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl<const D: usize> From<&Window<D>> for WindowSpec {
    fn from(w: &Window<D>) -> Self {
        WindowSpec {
            lo: w.lo.to_vec(),
            hi: w.hi.to_vec(),
        }
    }
}

impl WindowSpec {
    pub fn to_window<const D: usize>(&self) -> Result<Window<D>, MediumError> {
        let lo = crate::point::from_slice::<D>(&self.lo).ok_or(MediumError::DimensionMismatch {
            expected: D,
            found: self.lo.len(),
        })?;
        let hi = crate::point::from_slice::<D>(&self.hi).ok_or(MediumError::DimensionMismatch {
            expected: D,
            found: self.hi.len(),
        })?;
        Window::new(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_windows_are_rejected() {
        assert!(matches!(
            Window::new([0.0, 0.0], [0.0, 0.0]),
            Err(MediumError::DegenerateWindow)
        ));
        assert!(matches!(
            Window::new([0.0, 0.0], [1.0, f64::NAN]),
            Err(MediumError::DegenerateWindow)
        ));
        assert!(matches!(
            Window::<1>::new([0.0], [1.0]),
            Err(MediumError::UnsupportedDimension(1))
        ));
    }

    #[test]
    fn geometry() {
        let w = Window::new([0.0, -1.0], [2.0, 3.0]).unwrap();
        assert_eq!(w.volume(), 8.0);
        assert_eq!(w.distance_to_boundary(&[0.5, 0.0]), 0.5);
        assert!(w.contains(&[2.0, 3.0]));
        assert!(!w.contains(&[2.1, 0.0]));
    }
}
