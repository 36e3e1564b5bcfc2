//! Estimators used by the verification suites.

use nalgebra::DMatrix;
use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{GilbertError, Result};

/// Pairwise summation; the result depends only on the order of `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

pub fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (v.len() as f64 - 1.0)
}

pub fn median(v: &[f64]) -> f64 {
    assert!(!v.is_empty(), "median of an empty sample");
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    let aa: Vec<f64> = a.iter().map(|x| (x - ma) * (x - ma)).collect();
    let bb: Vec<f64> = b.iter().map(|y| (y - mb) * (y - mb)).collect();
    pairwise_sum(&ab) / (pairwise_sum(&aa) * pairwise_sum(&bb)).sqrt()
}

/// `(x − mean) / sd` with the sample moments.
pub fn standardize(v: &[f64]) -> Vec<f64> {
    let m = mean(v);
    let sd = variance(v).sqrt();
    v.iter().map(|x| (x - m) / sd).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub means: Vec<f64>,
    /// Unbiased sample covariance.
    pub covariance: DMatrix<f64>,
    /// Standard errors of the means, `sd / √R`.
    pub std_errors: Vec<f64>,
    /// Standard errors of the covariance entries.
    pub cov_std_errors: DMatrix<f64>,
}

/// Moments of a replications × statistics matrix.
pub fn empirical_moments(rows: &[Vec<f64>]) -> Result<Moments> {
    let r = rows.len();
    if r < 2 {
        return Err(GilbertError::TooFewReplications(r));
    }
    let m = rows[0].len();
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|k| rows.iter().map(|row| row[k]).collect())
        .collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let centred: Vec<Vec<f64>> = cols
        .iter()
        .zip(&means)
        .map(|(c, mu)| c.iter().map(|x| x - mu).collect())
        .collect();
    let mut covariance = DMatrix::zeros(m, m);
    let mut cov_std_errors = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let prod: Vec<f64> = centred[i]
                .iter()
                .zip(&centred[j])
                .map(|(a, b)| a * b)
                .collect();
            let c = pairwise_sum(&prod) / (r as f64 - 1.0);
            let se = (variance(&prod) / r as f64).sqrt();
            covariance[(i, j)] = c;
            covariance[(j, i)] = c;
            cov_std_errors[(i, j)] = se;
            cov_std_errors[(j, i)] = se;
        }
    }
    let std_errors = (0..m)
        .map(|k| (covariance[(k, k)] / r as f64).sqrt())
        .collect();
    Ok(Moments {
        means,
        covariance,
        std_errors,
        cov_std_errors,
    })
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        assert!(samples.iter().all(|x| !x.is_nan()), "NaN in sample");
        samples.sort_by(f64::total_cmp);
        Self { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

/// `sup_x |F̂(x) − F(x)|`. Ties are grouped and both one-sided gaps are
/// checked at every jump, with `F(x−)` read just below `x`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!samples.is_empty(), "KS statistic of an empty sample");
    let ecdf = EmpiricalCdf::new(samples.to_vec());
    let s = ecdf.sorted();
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let mut j = i;
        while j < s.len() && s[j] == x {
            j += 1;
        }
        let below = if x == f64::NEG_INFINITY {
            0.0
        } else {
            cdf(x.next_down())
        };
        d = d
            .max((i as f64 / n - below).abs())
            .max((j as f64 / n - cdf(x)).abs());
        i = j;
    }
    d
}

/// Two-sample statistic `sup_x |F̂_a(x) − F̂_b(x)|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let fa = EmpiricalCdf::new(a.to_vec());
    let fb = EmpiricalCdf::new(b.to_vec());
    let (sa, sb) = (fa.sorted(), fb.sorted());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < sa.len() || j < sb.len() {
        let x = match (sa.get(i), sb.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sided Clopper–Pearson upper limit for a binomial proportion after
/// `k` successes in `n` trials.
pub fn clopper_pearson_upper(k: usize, n: usize, confidence: f64) -> f64 {
    assert!(k <= n && n > 0, "need 0 ≤ k ≤ n and n > 0");
    if k == n {
        return 1.0;
    }
    Beta::new(k as f64 + 1.0, (n - k) as f64)
        .expect("positive shape parameters")
        .inverse_cdf(confidence)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamDomain};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn constant_column_has_zero_variance() {
        let rows: Vec<Vec<f64>> = (0..10).map(|k| vec![3.0, k as f64]).collect();
        let m = empirical_moments(&rows).unwrap();
        assert_eq!(m.covariance[(0, 0)], 0.0);
        assert_eq!(m.covariance[(0, 1)], 0.0);
        assert_eq!(m.means, vec![3.0, 4.5]);
    }

    #[test]
    fn hand_computed_covariance() {
        let rows = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 6.0]];
        let m = empirical_moments(&rows).unwrap();
        // means 2 and 3; deviations (−1,0,1), (−1,−2,3)
        assert_relative_eq!(m.covariance[(0, 0)], 1.0);
        assert_relative_eq!(m.covariance[(0, 1)], 2.0);
        assert_relative_eq!(m.covariance[(1, 1)], 7.0);
        assert_relative_eq!(m.std_errors[1], (7.0f64 / 3.0).sqrt());
        assert!(matches!(
            empirical_moments(&rows[..1]),
            Err(GilbertError::TooFewReplications(1))
        ));
    }

    #[test]
    fn ks_examples() {
        assert_eq!(ks_statistic(&[0.0], standard_normal_cdf), 0.5);
        let step = |x: f64| if x >= 2.0 { 1.0 } else { 0.0 };
        assert_eq!(ks_statistic(&[2.0; 7], step), 0.0);
        let mut rng = stream(8, StreamDomain::Auxiliary, 0, 0);
        let n = 10_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        assert!(ks_statistic(&draws, standard_normal_cdf) <= 1.63 / (n as f64).sqrt());
        let uni: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        assert!(ks_statistic(&uni, |x| x.clamp(0.0, 1.0)) <= 1.63 / (n as f64).sqrt());
    }

    #[test]
    fn two_sample_handles_atoms() {
        let a = [0.0, 0.0, 1.0, 2.0];
        let b = [0.0, 1.0, 1.0, 2.0];
        assert_relative_eq!(ks_two_sample(&a, &b), 0.25);
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&[0.0], &[1.0]), 1.0);
    }

    #[test]
    fn clopper_pearson_closed_forms() {
        for n in [10usize, 100, 20_000] {
            let exact = 1.0 - 0.001f64.powf(1.0 / n as f64);
            assert_relative_eq!(
                clopper_pearson_upper(0, n, 0.999),
                exact,
                max_relative = 1e-8
            );
        }
        assert_eq!(clopper_pearson_upper(5, 5, 0.999), 1.0);
        let u = clopper_pearson_upper(50, 1000, 0.999);
        assert!(u > 0.05 && u < 0.1);
        assert_relative_eq!(clopper_pearson_upper(1, 1, 0.9), 1.0);
    }

    #[test]
    fn slope_and_median() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-0.5)).collect();
        assert_relative_eq!(log_log_slope(&xs, &ys), -0.5, max_relative = 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_relative_eq!(standard_normal_cdf(0.0), 0.5);
        assert_relative_eq!(standard_normal_cdf(1.96), 0.975, max_relative = 1e-4);
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
    }
}
