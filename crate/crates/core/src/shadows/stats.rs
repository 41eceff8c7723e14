use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Median of the means of `n_batches` consecutive, equally sized batches.
/// With an even batch count the two central means are averaged.
pub fn median_of_means(values: &[f64], n_batches: usize) -> Result<f64> {
    if n_batches == 0 || values.is_empty() || !values.len().is_multiple_of(n_batches) {
        return Err(Error::Divisibility {
            len: values.len(),
            batches: n_batches,
        });
    }
    let size = values.len() / n_batches;
    let mut means: Vec<f64> = values
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let mid = n_batches / 2;
    Ok(if n_batches % 2 == 1 {
        means[mid]
    } else {
        0.5 * (means[mid - 1] + means[mid])
    })
}

/// Unbiased sample variance (Welford update).
pub fn empirical_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::domain("variance needs at least two values"));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    Ok(m2 / (values.len() - 1) as f64)
}

/// Mean and unbiased variance of a sample with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// Standard error of `variance`, from the sample fourth central moment.
    pub se_variance: f64,
}

impl Summary {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        let variance = empirical_variance(values)?;
        let nf = n as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / nf;
        let var_of_var = (m4 - variance * variance * (nf - 3.0) / (nf - 1.0)) / nf;
        Ok(Self {
            count: n,
            mean,
            variance,
            se_mean: (variance / nf).sqrt(),
            se_variance: var_of_var.max(0.0).sqrt(),
        })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Delta-method standard error of the standard deviation.
    pub fn se_std_dev(&self) -> f64 {
        if self.variance > 0.0 {
            self.se_variance / (2.0 * self.variance.sqrt())
        } else {
            0.0
        }
    }
}

/// Parameters of a median-of-means estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub snapshots: usize,
    pub batches: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub constant: f64,
}

impl EstimatorConfig {
    pub fn new(snapshots: usize, batches: usize, epsilon: f64, delta: f64, constant: f64) -> Result<Self> {
        if batches == 0 || snapshots == 0 || !snapshots.is_multiple_of(batches) {
            return Err(Error::Divisibility {
                len: snapshots,
                batches,
            });
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("delta {delta} outside (0, 1)")));
        }
        if !(constant > 0.0 && constant.is_finite()) {
            return Err(Error::domain(format!("constant {constant} must be positive")));
        }
        Ok(Self {
            snapshots,
            batches,
            epsilon,
            delta,
            constant,
        })
    }

    /// Batch count `ceil(8 ln(2/delta))`.
    pub fn default_batches(delta: f64) -> usize {
        (8.0 * (2.0 / delta).ln()).ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_pass_variance(values: &[f64]) -> f64 {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    }

    #[test]
    fn median_of_means_examples() {
        assert_eq!(median_of_means(&[2.5; 12], 4).unwrap(), 2.5);
        let v = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 300.0, 0.0, 0.0];
        assert_eq!(median_of_means(&v, 3).unwrap(), 0.0);
        let w = [1.0, 2.0, 3.0, 10.0];
        assert_eq!(median_of_means(&w, 1).unwrap(), 4.0);
        // even batch count averages the central means {1.5, 6.5}
        assert_eq!(median_of_means(&w, 2).unwrap(), 4.0);
        assert!(matches!(
            median_of_means(&w, 3),
            Err(Error::Divisibility { .. })
        ));
        assert!(median_of_means(&w, 0).is_err());
    }

    #[test]
    fn variance_examples() {
        assert_eq!(empirical_variance(&[4.0; 7]).unwrap(), 0.0);
        assert!((empirical_variance(&[-1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(empirical_variance(&[1.0]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(EstimatorConfig::new(100, 10, 0.1, 0.05, 1.0).is_ok());
        assert!(EstimatorConfig::new(101, 10, 0.1, 0.05, 1.0).is_err());
        assert!(EstimatorConfig::new(100, 10, 1.0, 0.05, 1.0).is_err());
        assert!(EstimatorConfig::new(100, 10, 0.1, 0.0, 1.0).is_err());
        assert_eq!(EstimatorConfig::default_batches(0.1), 24);
    }

    #[test]
    fn summary_of_symmetric_pair() {
        let s = Summary::from_values(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!(s.mean, 0.0);
        assert!((s.variance - 4.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn welford_matches_two_pass(values in prop::collection::vec(-50.0f64..50.0, 2..200)) {
            let a = empirical_variance(&values).unwrap();
            let b = two_pass_variance(&values);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn median_of_means_within_range(values in prop::collection::vec(-10.0f64..10.0, 1..20), batches in 1usize..5) {
            let values: Vec<f64> = values.iter().cycle().take(values.len() * batches).copied().collect();
            let m = median_of_means(&values, batches).unwrap();
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        }
    }
}
