//! Small statistical helpers shared by the estimators.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// A Monte Carlo estimate with its standard error and a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Estimate {
    /// Scaled binomial proportion `scale * hits / n` with Wilson bounds.
    pub fn binomial(hits: u64, n: u64, scale: f64) -> Self {
        let (lo, hi) = wilson(hits, n);
        let p = hits as f64 / n as f64;
        Estimate {
            value: scale * p,
            se: scale * (p * (1.0 - p) / n as f64).sqrt(),
            lo: scale * lo,
            hi: scale * hi,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Wilson score interval for a binomial proportion at 95%.
pub fn wilson(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if hits == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if p >= 1.0 { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Ordinary least squares `y ≈ intercept + slope·x` with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// 95% confidence interval of the slope (Student t, n−2 dof).
    pub slope_ci95: (f64, f64),
    pub residuals: Vec<f64>,
    pub n: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| y - (intercept + slope * x))
        .collect();
    let (slope_se, half) = if n > 2 {
        let s2 = residuals.iter().map(|r| r * r).sum::<f64>() / (nf - 2.0);
        let se = (s2 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(f64::INFINITY);
        (se, t * se)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Some(LinearFit {
        slope,
        intercept,
        slope_se,
        slope_ci95: (slope - half, slope + half),
        residuals,
        n,
    })
}

/// Kendall's τ of `values` against their position, with the one-sided
/// p-value `P(τ ≤ τ_obs)` under exchangeability.
///
/// The p-value is exact (full permutation enumeration) up to 8 values and
/// uses the normal approximation beyond.
pub fn kendall_trend(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n < 2 {
        return (0.0, 1.0);
    }
    let tau = kendall_tau(values);
    if n <= 8 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0u64;
        let mut below = 0u64;
        permute(&mut perm, 0, &mut |p| {
            let permuted: Vec<f64> = p.iter().map(|&i| values[i]).collect();
            total += 1;
            if kendall_tau(&permuted) <= tau + 1e-12 {
                below += 1;
            }
        });
        (tau, below as f64 / total as f64)
    } else {
        let nf = n as f64;
        let var = 2.0 * (2.0 * nf + 5.0) / (9.0 * nf * (nf - 1.0));
        let z = tau / var.sqrt();
        let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
        (tau, normal.cdf(z))
    }
}

fn kendall_tau(values: &[f64]) -> f64 {
    let n = values.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if values[j] > values[i] {
                s += 1.0;
            } else if values[j] < values[i] {
                s -= 1.0;
            }
        }
    }
    s / (n * (n - 1) / 2) as f64
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Formats a float with 17 significant digits, locale-free.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let fit = linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-12);
    }

    #[test]
    fn kendall_decreasing_sequence_is_significant() {
        let (tau, p) = kendall_trend(&[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(tau, -1.0);
        assert!((p - 1.0 / 24.0).abs() < 1e-12);
        let (tau, p) = kendall_trend(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(tau, 1.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn wilson_brackets_proportion() {
        let (lo, hi) = wilson(50, 100);
        assert!(lo < 0.5 && hi > 0.5);
        let (lo, hi) = wilson(0, 100);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
    }

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
