use perclab_core::medium::{build_clusters, sample_poisson, spanning_probability, Window};
use proptest::prelude::*;

/// 0.5-crossing of the spanning probability in ρ by bisection, 500 media per probe.
#[test]
fn spanning_crossing_near_continuum_threshold() {
    let window = Window::new([0.0, 0.0], [20.0, 20.0]).unwrap();
    let p = |rho: f64| spanning_probability(1.0, rho, &window, 500, 77).unwrap().estimate.value;
    let sweep: Vec<f64> = (0..9).map(|k| p(0.4 + 0.05 * k as f64)).collect();
    for w in sweep.windows(2) {
        assert!(w[1] >= w[0] - 0.05, "{sweep:?}");
    }
    assert!(sweep[0] < 0.1 && sweep[8] > 0.9, "{sweep:?}");
    let (mut lo, mut hi) = (0.4, 0.8);
    for _ in 0..8 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossing = 0.5 * (lo + hi);
    // Critical filling factor λπρ² ≈ 1.128 puts the infinite-volume threshold at ρ ≈ 0.599.
    assert!((crossing - 0.599).abs() < 0.05, "{crossing}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(48) })]

    #[test]
    fn labels_partition_matches_all_pairs(seed in any::<u64>(), rho in 0.2..1.2f64, side in 2.0..10.0f64) {
        let window = Window::new([0.0, 0.0], [side, side]).unwrap();
        let config = sample_poisson(1.0, &window, seed).unwrap();
        let n = config.len();
        let pts = config.points().to_vec();
        let dec = build_clusters(config, rho).unwrap();
        let labels = dec.labels();
        // Quadratic oracle: flood fill over the overlap relation.
        let mut oracle = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if oracle[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            oracle[s] = next;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let d = ((pts[u][0] - pts[v][0]).powi(2) + (pts[u][1] - pts[v][1]).powi(2)).sqrt();
                    if oracle[v] == usize::MAX && d < 2.0 * rho + 1e-12 {
                        oracle[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        prop_assert_eq!(dec.component_count(), next);
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(labels[i] == labels[j], oracle[i] == oracle[j]);
            }
        }
        prop_assert_eq!(dec.sizes().iter().sum::<usize>(), n);
    }
}
