use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{MediumError, Window};
use crate::point::Point;
use crate::rng::{stream, Purpose};

/// Points closer than this are treated as coincident and redrawn.
pub const DISTINCT_TOL: f64 = 1e-12;

/// A finite point configuration observed in a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration<const D: usize> {
    points: Vec<Point<D>>,
    window: Window<D>,
    seed: Option<u64>,
}

impl<const D: usize> PointConfiguration<D> {
    /// Wraps an externally supplied point list (any point process).
    pub fn from_points(points: Vec<Point<D>>, window: Window<D>) -> Result<Self, MediumError> {
        if let Some(p) = points.iter().find(|p| !window.contains(p)) {
            return Err(MediumError::PointOutsideWindow(p.to_vec()));
        }
        if let Some((i, j)) = first_near_duplicate(&points) {
            return Err(MediumError::DuplicatePoints(i, j));
        }
        Ok(PointConfiguration {
            points,
            window,
            seed: None,
        })
    }

    pub fn points(&self) -> &[Point<D>] {
        &self.points
    }

    pub fn window(&self) -> &Window<D> {
        &self.window
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Homogeneous Poisson process of the given intensity restricted to `window`.
pub fn sample_poisson<const D: usize>(
    intensity: f64,
    window: &Window<D>,
    seed: u64,
) -> Result<PointConfiguration<D>, MediumError> {
    if !intensity.is_finite() || intensity <= 0.0 {
        return Err(MediumError::InvalidIntensity(intensity));
    }
    let mut rng = stream(seed, Purpose::Medium, 0);
    let mean = intensity * window.volume();
    let count = Poisson::new(mean)
        .map_err(|_| MediumError::InvalidIntensity(intensity))?
        .sample(&mut rng) as usize;
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> Point<D> {
        std::array::from_fn(|k| rng.random_range(window.lo()[k]..window.hi()[k]))
    };
    let mut points: Vec<Point<D>> = (0..count).map(|_| draw(&mut rng)).collect();
    // Coincidences have probability zero; redraw the later point of a pair.
    while let Some((_, j)) = first_near_duplicate(&points) {
        points[j] = draw(&mut rng);
    }
    Ok(PointConfiguration {
        points,
        window: *window,
        seed: Some(seed),
    })
}

/// First pair `(i, j)`, `i < j`, with `|p_i − p_j| < DISTINCT_TOL`.
fn first_near_duplicate<const D: usize>(points: &[Point<D>]) -> Option<(usize, usize)> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
    let mut found: Option<(usize, usize)> = None;
    for (pos, &a) in order.iter().enumerate() {
        for &b in &order[pos + 1..] {
            if points[b][0] - points[a][0] >= DISTINCT_TOL {
                break;
            }
            if crate::point::dist(&points[a], &points[b]) < DISTINCT_TOL {
                let pair = (a.min(b), a.max(b));
                if found.is_none_or(|f| pair < f) {
                    found = Some(pair);
                }
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_inputs_same_points() {
        let w = Window::new([0.0, 0.0], [10.0, 10.0]).unwrap();
        let a = sample_poisson(1.0, &w, 42).unwrap();
        let b = sample_poisson(1.0, &w, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_poisson(1.0, &w, 43).unwrap();
        assert_ne!(a.points(), c.points());
    }

    #[test]
    fn rejects_bad_intensity() {
        let w = Window::new([0.0, 0.0], [1.0, 1.0]).unwrap();
        for bad in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                sample_poisson(bad, &w, 1),
                Err(MediumError::InvalidIntensity(_))
            ));
        }
    }

    #[test]
    fn points_lie_in_window() {
        let w = Window::new([-2.0, 1.0, 0.0], [3.0, 2.0, 4.0]).unwrap();
        let cfg = sample_poisson(3.0, &w, 9).unwrap();
        assert!(!cfg.is_empty());
        assert!(cfg.points().iter().all(|p| w.contains(p)));
    }

    #[test]
    fn count_mean_and_variance_match_poisson() {
        let w = Window::new([0.0, 0.0], [10.0, 10.0]).unwrap();
        let n = 2000;
        let counts: Vec<f64> = (0..n)
            .map(|s| sample_poisson(1.0, &w, s).unwrap().len() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / n as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // SE(mean) = √(100/2000) ≈ 0.22; SE(var) ≈ 100·√(2/2000) ≈ 3.2.
        assert!((mean - 100.0).abs() < 1.0, "mean {mean}");
        assert!((var - 100.0).abs() < 13.0, "var {var}");
    }

    #[test]
    fn external_points_validated() {
        let w = Window::new([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert!(matches!(
            PointConfiguration::from_points(vec![[2.0, 0.5]], w),
            Err(MediumError::PointOutsideWindow(_))
        ));
        assert!(matches!(
            PointConfiguration::from_points(vec![[0.5, 0.5], [0.5, 0.5 + 1e-14]], w),
            Err(MediumError::DuplicatePoints(0, 1))
        ));
    }
}
