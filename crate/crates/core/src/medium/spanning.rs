use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_clusters, sample_poisson, MediumError, Window};
use crate::rng::{derive_seed, Purpose};
use crate::stats::Estimate;

/// Fraction of independent media containing a spanning component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpanningEstimate {
    pub rho: f64,
    pub hits: u64,
    pub trials: u64,
    pub estimate: Estimate,
}

pub fn spanning_probability<const D: usize>(
    intensity: f64,
    rho: f64,
    window: &Window<D>,
    trials: u64,
    seed: u64,
) -> Result<SpanningEstimate, MediumError> {
    if trials == 0 {
        return Err(MediumError::NoTrials);
    }
    let outcomes: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let config = sample_poisson(intensity, window, derive_seed(seed, Purpose::Spanning, i))?;
            Ok(build_clusters(config, rho)?.has_spanning_component())
        })
        .collect::<Result<_, MediumError>>()?;
    let hits = outcomes.iter().filter(|&&b| b).count() as u64;
    Ok(SpanningEstimate {
        rho,
        hits,
        trials,
        estimate: Estimate::binomial(hits, trials, 1.0),
    })
}

/// Radius at which the spanning probability crosses `level`, by bisection
/// on `[lo, hi]` with the same trial seeds at every radius.
pub fn spanning_crossing<const D: usize>(
    intensity: f64,
    window: &Window<D>,
    (mut lo, mut hi): (f64, f64),
    level: f64,
    trials: u64,
    iterations: usize,
    seed: u64,
) -> Result<f64, MediumError> {
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        let p = spanning_probability(intensity, mid, window, trials, seed)?.estimate.value;
        if p < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_radius_never_spans() {
        let w = Window::new([0.0, 0.0], [20.0, 20.0]).unwrap();
        let e = spanning_probability(1.0, 1e-3, &w, 50, 3).unwrap();
        assert_eq!(e.hits, 0);
    }

    #[test]
    fn huge_radius_always_spans() {
        let w = Window::new([0.0, 0.0], [5.0, 5.0]).unwrap();
        let e = spanning_probability(1.0, w.diagonal(), &w, 50, 3).unwrap();
        // P(no point) = e^{-25}.
        assert_eq!(e.hits, 50);
    }

    #[test]
    fn zero_trials_rejected() {
        let w = Window::new([0.0, 0.0], [5.0, 5.0]).unwrap();
        assert!(spanning_probability(1.0, 1.0, &w, 0, 3).is_err());
    }
}
