use std::f64::consts::PI;

use perclab_core::medium::{ClusterModel, Window};
use perclab_core::pde::{
    ball_cells, heat_solve, poincare_constant, stable_dt, CoefficientField, InitialDatum, Scheme, SolveOptions,
};
use perclab_core::raster::{rasterize, Connectivity, RasterMask};
use proptest::prelude::*;

fn square(side: f64, n: usize) -> RasterMask {
    RasterMask::full([0.0, 0.0], side / n as f64, n, n).unwrap()
}

fn explicit() -> SolveOptions {
    SolveOptions {
        scheme: Scheme::Explicit,
        allow_implicit: false,
        ..SolveOptions::default()
    }
}

/// Neumann heat kernel of `∂_t u = Δu` on `[0, L]` by reflection images.
fn images_1d(x: f64, y: f64, t: f64, l: f64) -> f64 {
    let g = |z: f64| (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt();
    (-6..=6)
        .map(|k| {
            let s = 2.0 * k as f64 * l;
            g(x - y - s) + g(x + y - s)
        })
        .sum()
}

#[test]
fn point_source_matches_image_series() {
    let (l, n) = (2.0, 128);
    let mask = square(l, n);
    let field = CoefficientField::identity(n, n);
    let h = mask.pitch();
    let src = (50, 70);
    let mut u0 = vec![0.0; n * n];
    u0[mask.index(src.0, src.1)] = 1.0 / (h * h);
    let t = 0.02;
    let steps = (t / (0.5 * stable_dt(&mask, &field, &explicit()))).ceil() as usize;
    let sol = heat_solve(&mask, &field, &u0, t / steps as f64, steps, &explicit()).unwrap();
    let last = sol.len() - 1;
    assert!((sol.times[last] - t).abs() < 1e-12);
    let y = mask.cell_center(src.0, src.1);
    let sigma = (2.0 * t).sqrt();
    let mut checked = 0;
    for j in 0..n {
        for i in 0..n {
            let x = mask.cell_center(i, j);
            let r = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
            if r > 2.0 * sigma {
                continue;
            }
            let exact = images_1d(x[0], y[0], t, l) * images_1d(x[1], y[1], t, l);
            let got = sol.at(last, mask.index(i, j)).unwrap();
            assert!((got - exact).abs() < 0.02 * exact, "cell ({i},{j}): {got} vs {exact}");
            checked += 1;
        }
    }
    assert!(checked > 1000);
}

#[test]
fn point_source_near_wall_feels_its_image() {
    let (l, n) = (1.0, 128);
    let mask = square(l, n);
    let field = CoefficientField::identity(n, n);
    let h = mask.pitch();
    let src = (3, 64);
    let mut u0 = vec![0.0; n * n];
    u0[mask.index(src.0, src.1)] = 1.0 / (h * h);
    let t = 0.005;
    let steps = (t / (0.5 * stable_dt(&mask, &field, &explicit()))).ceil() as usize;
    let sol = heat_solve(&mask, &field, &u0, t / steps as f64, steps, &explicit()).unwrap();
    let last = sol.len() - 1;
    let y = mask.cell_center(src.0, src.1);
    for i in 0..12 {
        let x = mask.cell_center(i, src.1);
        let exact = images_1d(x[0], y[0], t, l) * images_1d(x[1], y[1], t, l);
        let got = sol.at(last, mask.index(i, src.1)).unwrap();
        assert!((got - exact).abs() < 0.02 * exact, "cell {i}: {got} vs {exact}");
    }
}

#[test]
fn explicit_converges_in_dt_and_agrees_with_implicit() {
    let n = 48;
    let mask = square(1.0, n);
    let field = CoefficientField::random_blocks(&mask, 0.25, 0.5, 2.0, 3).unwrap();
    let u0 = InitialDatum::random([0.0, 0.0], [1.0, 1.0], 9, 0).rasterize(&mask);
    let t = 0.01;
    let lim = stable_dt(&mask, &field, &explicit());
    let steps = (t / lim).ceil() as usize;
    let coarse = heat_solve(&mask, &field, &u0, t / steps as f64, steps, &explicit()).unwrap();
    let fine = heat_solve(&mask, &field, &u0, t / (4 * steps) as f64, 4 * steps, &explicit()).unwrap();
    let implicit = SolveOptions {
        scheme: Scheme::Implicit,
        ..SolveOptions::default()
    };
    let imp = heat_solve(&mask, &field, &u0, t / (4 * steps) as f64, 4 * steps, &implicit).unwrap();
    let (a, b, c) = (coarse.grid(coarse.len() - 1), fine.grid(fine.len() - 1), imp.grid(imp.len() - 1));
    let scale = a.iter().cloned().fold(0.0, f64::max);
    let d_ab = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let d_bc = b.iter().zip(&c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(d_ab < 1e-2 * scale, "{d_ab}");
    assert!(d_bc < 1e-2 * scale, "{d_bc}");
    assert!(imp.mass_drift < 1e-10 && fine.mass_drift < 1e-10);
}

#[test]
fn mirror_symmetric_problem_has_mirror_symmetric_solution() {
    let n = 40;
    let balls = vec![[-0.6, 0.0], [0.6, 0.0], [0.0, 0.5], [-1.1, 0.7], [1.1, 0.7]];
    let cluster = ClusterModel::from_balls(balls, 0.65).unwrap();
    let mask = rasterize(&cluster, &Window::new([-2.0, -1.0], [2.0, 1.5]).unwrap(), 0.1).unwrap();
    let (nx, ny) = mask.shape();
    assert_eq!(nx, n);
    let field = CoefficientField::from_fn(&mask, 0.2, 2.0, |p| [1.0 + 0.8 * (3.0 * p[0]).cos(), 0.0, 0.6 + p[1].abs().min(1.0)])
        .unwrap();
    let datum = InitialDatum {
        floor: 0.1,
        bumps: vec![([-0.7, 0.1], 0.3, 1.0), ([0.7, 0.1], 0.3, 1.0), ([0.0, 0.6], 0.2, 0.5)],
    };
    let u0 = datum.rasterize(&mask);
    let dt = 0.5 * stable_dt(&mask, &field, &explicit());
    for opts in [explicit(), SolveOptions { scheme: Scheme::Implicit, ..SolveOptions::default() }] {
        let sol = heat_solve(&mask, &field, &u0, dt, 200, &opts).unwrap();
        let k = sol.len() - 1;
        let (_, max) = sol.min_max(k);
        for j in 0..ny {
            for i in 0..nx {
                let a = sol.at(k, mask.index(i, j));
                let b = sol.at(k, mask.index(nx - 1 - i, j));
                match (a, b) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-12 * max, "({i},{j}) {a} {b}"),
                    (None, None) => {}
                    _ => panic!("mask not symmetric at ({i},{j})"),
                }
            }
        }
    }
}

#[test]
fn poincare_on_squares() {
    let field = CoefficientField::identity(128, 128);
    let l1 = square(1.0, 128);
    let all: Vec<usize> = (0..l1.len()).collect();
    let mu1 = poincare_constant(&l1, &field, &all, 1.0).unwrap().mu1;
    assert!((mu1 - PI * PI).abs() < 0.01 * PI * PI, "{mu1}");

    let l2 = square(2.0, 256);
    let field2 = CoefficientField::identity(256, 256);
    let all2: Vec<usize> = (0..l2.len()).collect();
    let mu2 = poincare_constant(&l2, &field2, &all2, 2.0).unwrap().mu1;
    assert!((mu2 / mu1 - 0.25).abs() < 0.02 * 0.25, "{}", mu2 / mu1);
}

#[test]
fn poincare_scales_with_coefficient() {
    let n = 64;
    let mask = square(1.0, n);
    let all: Vec<usize> = (0..mask.len()).collect();
    let base = poincare_constant(&mask, &CoefficientField::identity(n, n), &all, 1.0).unwrap().mu1;
    let doubled = CoefficientField::from_fn(&mask, 1.0, 3.0, |_| [3.0, 0.0, 3.0]).unwrap();
    let mu = poincare_constant(&mask, &doubled, &all, 1.0).unwrap().mu1;
    assert!((mu / base - 3.0).abs() < 1e-8, "{}", mu / base);
}

#[test]
fn disk_balls_have_stable_poincare_constant() {
    let cluster = ClusterModel::from_balls(vec![[0.0, 0.0]], 4.0).unwrap();
    let mask = rasterize(&cluster, &Window::centered(4.0).unwrap(), 1.0 / 32.0).unwrap();
    let (nx, ny) = mask.shape();
    let field = CoefficientField::identity(nx, ny);
    let center = (nx / 2, ny / 2);
    let cps: Vec<f64> = [1.0, 2.0, 3.0]
        .iter()
        .map(|&r| poincare_constant(&mask, &field, &ball_cells(&mask, center, r).unwrap(), r).unwrap().c_p)
        .collect();
    // Neumann disk: μ₁ r² = j′₁₁² ≈ 3.3900.
    for c in &cps {
        assert!((c * 3.3900 - 1.0).abs() < 0.05, "{cps:?}");
    }
}

fn random_mask(centers: &[(f64, f64)], radius: f64) -> RasterMask {
    let balls = centers.iter().map(|&(x, y)| [x, y]).collect();
    let cluster = ClusterModel::from_balls(balls, radius).unwrap();
    let mask = rasterize(&cluster, &Window::centered(3.0).unwrap(), radius / 4.0).unwrap();
    mask.largest_component(Connectivity::Four)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn mass_positivity_and_maximum_principle(
        centers in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..6),
        seed in 0u64..1000,
        implicit in any::<bool>(),
        dt_factor in 0.1..1.0f64,
    ) {
        let mask = random_mask(&centers, 0.9);
        prop_assume!(mask.inside_count() > 10);
        let (nx, ny) = mask.shape();
        let field = CoefficientField::random_blocks(&mask, 0.5, 0.3, 3.0, seed).unwrap();
        prop_assert_eq!(field.shape(), (nx, ny));
        let u0: Vec<f64> = InitialDatum::random([-3.0, -3.0], [3.0, 3.0], seed, 1)
            .rasterize(&mask)
            .iter()
            .enumerate()
            .map(|(k, &v)| if mask.flags()[k] && (k * 7919 + seed as usize) % 5 == 0 { 0.0 } else { v })
            .collect();
        let opts = if implicit {
            SolveOptions { scheme: Scheme::Implicit, ..SolveOptions::default() }
        } else {
            explicit()
        };
        let lim = stable_dt(&mask, &field, &explicit());
        let dt = if implicit { 20.0 * lim * dt_factor } else { lim * dt_factor };
        let sol = heat_solve(&mask, &field, &u0, dt, 60, &opts).unwrap();
        let (lo0, hi0) = sol.min_max(0);
        let m0 = sol.mass(0);
        prop_assert!(sol.mass_drift <= 1e-10);
        for k in 0..sol.len() {
            prop_assert!((sol.mass(k) - m0).abs() <= 1e-10 * m0);
            let (lo, hi) = sol.min_max(k);
            prop_assert!(lo >= 0.0);
            prop_assert!(lo >= lo0 - 1e-12 * hi0 && hi <= hi0 * (1.0 + 1e-12), "{} {} vs {} {}", lo, hi, lo0, hi0);
        }
    }
}
