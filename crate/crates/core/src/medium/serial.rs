//! JSON form of a selected cluster.

use serde::{Deserialize, Serialize};

use super::{ClusterModel, MediumError, SelectionPolicy, WindowSpec};
use crate::point::{from_slice, Point};

/// `{d, rho, rho_prime, window: {lo, hi}, centers, policy, seed}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterFile {
    pub d: usize,
    pub rho: f64,
    pub rho_prime: f64,
    pub window: WindowSpec,
    pub centers: Vec<Vec<f64>>,
    pub policy: SelectionPolicy,
    pub seed: Option<u64>,
}

impl<const D: usize> From<&ClusterModel<D>> for ClusterFile {
    fn from(c: &ClusterModel<D>) -> Self {
        ClusterFile {
            d: D,
            rho: c.rho(),
            rho_prime: c.rho_prime(),
            window: c.window().into(),
            centers: c.centers().iter().map(|p| p.to_vec()).collect(),
            policy: c.policy(),
            seed: c.seed(),
        }
    }
}

impl ClusterFile {
    pub fn into_model<const D: usize>(self) -> Result<ClusterModel<D>, MediumError> {
        if self.d != D {
            return Err(MediumError::DimensionMismatch {
                expected: D,
                found: self.d,
            });
        }
        let window = self.window.to_window::<D>()?;
        let centers = self
            .centers
            .iter()
            .map(|v| {
                from_slice::<D>(v).ok_or(MediumError::DimensionMismatch {
                    expected: D,
                    found: v.len(),
                })
            })
            .collect::<Result<Vec<Point<D>>, _>>()?;
        ClusterModel::from_centers(centers, self.rho, self.rho_prime, window, self.policy, self.seed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("cluster file serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, MediumError> {
        serde_json::from_str(s).map_err(|e| MediumError::Json(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{sample_cluster, MediumParams, Window};
    use proptest::prelude::*;

    #[test]
    fn sampled_cluster_round_trips_exactly() {
        let params = MediumParams {
            intensity: 1.5,
            window: Window::centered(6.0).unwrap(),
            rho: 1.0,
            rho_prime: 1.25,
            policy: SelectionPolicy::Largest,
            require_origin: false,
        };
        let c = sample_cluster(&params, 11).unwrap().cluster;
        let file = ClusterFile::from(&c);
        let back = ClusterFile::from_json(&file.to_json()).unwrap();
        assert_eq!(file, back);
        let model: ClusterModel<2> = back.into_model().unwrap();
        assert_eq!(model.centers(), c.centers());
        assert_eq!(model.rho_prime(), 1.25);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let c = ClusterModel::from_balls(vec![[0.0, 0.0]], 1.0).unwrap();
        let file = ClusterFile::from(&c);
        assert!(matches!(
            file.into_model::<3>(),
            Err(MediumError::DimensionMismatch { expected: 3, found: 2 })
        ));
    }

    proptest! {
        #[test]
        fn arbitrary_coordinates_round_trip(xs in prop::collection::vec(-1e6f64..1e6, 2..20)) {
            let centers: Vec<[f64; 2]> = xs.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            let c = ClusterModel::from_balls(centers, 0.7).unwrap();
            let file = ClusterFile::from(&c);
            prop_assert_eq!(ClusterFile::from_json(&file.to_json()).unwrap(), file);
        }
    }
}
