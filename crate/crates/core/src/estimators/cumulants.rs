use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::util::compensated_sum;

/// Sample cumulants via unbiased k-statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CumulantStats {
    pub samples: usize,
    pub mean: f64,
    /// `k2`, the unbiased variance.
    pub variance: f64,
    pub k3: f64,
    pub k4: f64,
    /// `k3 / k2^{3/2}`; `None` for a degenerate (zero-variance) sample.
    pub skewness: Option<f64>,
    /// `k4 / k2²`; `None` for a degenerate sample.
    pub excess_kurtosis: Option<f64>,
    /// `√(6/R)`.
    pub skewness_se: f64,
    /// `√(24/R)`.
    pub excess_kurtosis_se: f64,
    pub degenerate: bool,
}

pub fn cumulant_stats(samples: &[f64]) -> Result<CumulantStats> {
    let r = samples.len();
    if r < 4 {
        return param("cumulant statistics need at least 4 samples");
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return param("samples must be finite");
    }
    let n = r as f64;
    let mean = compensated_sum(samples.iter().copied()) / n;
    let moment = |p: i32| compensated_sum(samples.iter().map(|v| (v - mean).powi(p))) / n;
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    let k2 = n / (n - 1.0) * m2;
    let k3 = n * n / ((n - 1.0) * (n - 2.0)) * m3;
    let k4 =
        n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0));
    let degenerate = k2 <= 0.0;
    Ok(CumulantStats {
        samples: r,
        mean,
        variance: k2,
        k3,
        k4,
        skewness: (!degenerate).then(|| k3 / k2.powf(1.5)),
        excess_kurtosis: (!degenerate).then(|| k4 / (k2 * k2)),
        skewness_se: (6.0 / n).sqrt(),
        excess_kurtosis_se: (24.0 / n).sqrt(),
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;
    use rand_distr::{Distribution, Exp1, StandardNormal};

    #[test]
    fn constant_sample_is_degenerate() {
        let c = cumulant_stats(&[2.5; 200]).unwrap();
        assert!(c.degenerate);
        assert_eq!(c.variance, 0.0);
        assert_eq!(c.skewness, None);
    }

    #[test]
    fn k_statistics_on_small_sample() {
        // Hand-computed for {1, 2, 3, 4, 10}: m2 = 10, m3 = 36, m4 = 278.8.
        let c = cumulant_stats(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert!((c.variance - 12.5).abs() < 1e-12);
        assert!((c.k3 - 25.0 / 12.0 * 36.0).abs() < 1e-10);
        let k4 = 25.0 * (6.0 * 278.8 - 12.0 * 100.0) / 24.0;
        assert!((c.k4 - k4).abs() < 1e-9);
    }

    /// Delta-method standard errors of skewness and excess kurtosis from the
    /// sample influence functions; valid for any law with eight moments.
    fn influence_se(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let mu = |p: i32| x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / n;
        let (m2, m3, m4) = (mu(2), mu(3), mu(4));
        let g1 = m3 / m2.powf(1.5);
        let sd = |f: &dyn Fn(f64) -> f64| {
            (x.iter().map(|&v| f(v - m).powi(2)).sum::<f64>() / n).sqrt() / n.sqrt()
        };
        let if2 = |c: f64| c * c - m2;
        let se1 =
            sd(&|c| (c.powi(3) - m3 - 3.0 * m2 * c - 1.5 * g1 * m2.sqrt() * if2(c)) / m2.powf(1.5));
        let se2 = sd(&|c| (c.powi(4) - m4 - 4.0 * m3 * c - 2.0 * m4 / m2 * if2(c)) / (m2 * m2));
        (se1, se2)
    }

    #[test]
    fn normal_and_exponential_oracles() {
        let mut rng = RngStream::new(5, 0).rng();
        let r = 100_000;
        let z: Vec<f64> = (0..r).map(|_| StandardNormal.sample(&mut rng)).collect();
        let c = cumulant_stats(&z).unwrap();
        assert_eq!(c.skewness_se, (6.0 / r as f64).sqrt());
        assert!(c.skewness.unwrap().abs() < 3.0 * c.skewness_se);
        assert!(c.excess_kurtosis.unwrap().abs() < 3.0 * c.excess_kurtosis_se);
        // The normal-null errors understate the spread under the exponential
        // law several-fold; check against the law-appropriate errors.
        let e: Vec<f64> = (0..r).map(|_| Exp1.sample(&mut rng)).collect();
        let c = cumulant_stats(&e).unwrap();
        let (se1, se2) = influence_se(&e);
        assert!(se1 > c.skewness_se && se2 > c.excess_kurtosis_se);
        assert!(
            (c.skewness.unwrap() - 2.0).abs() < 3.0 * se1,
            "{:?} {se1}",
            c.skewness
        );
        assert!(
            (c.excess_kurtosis.unwrap() - 6.0).abs() < 3.0 * se2,
            "{:?} {se2}",
            c.excess_kurtosis
        );
    }
}
