//! Per-IMF statistics and the 20-dimensional EMD feature vector.
//!
//! Four statistics per IMF: mean absolute value, (population) standard
//! deviation, kurtosis, and mean absolute successive difference. The first
//! five IMFs contribute, in layout order (mu1, sigma1, kappa1, S1, ...,
//! mu5, sigma5, kappa5, S5).

use serde::{Deserialize, Serialize};

use crate::emd::ImfSet;

/// Number of IMFs contributing features.
pub const N_IMFS: usize = 5;
/// Statistics per IMF.
pub const STATS_PER_IMF: usize = 4;
/// Total EMD feature dimension.
pub const EMD_DIM: usize = N_IMFS * STATS_PER_IMF;

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("need at least 2 samples for IMF statistics, got {0}")]
    TooShort(usize),
    #[error("empty training matrix")]
    EmptyMatrix,
    #[error("ragged training matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("dimension mismatch: row has {got} columns, normalizer expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

/// The four statistics of one IMF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImfStats {
    /// Mean absolute value.
    pub mu: f64,
    /// Population standard deviation.
    pub sigma: f64,
    /// Kurtosis about the mean; 0 when sigma is 0.
    pub kappa: f64,
    /// Mean absolute successive difference.
    pub s: f64,
}

pub fn imf_stats(d: &[f64]) -> Result<ImfStats, FeatureError> {
    let l = d.len();
    if l < 2 {
        return Err(FeatureError::TooShort(l));
    }
    let lf = l as f64;
    let mu = d.iter().map(|v| v.abs()).sum::<f64>() / lf;
    let mean = d.iter().sum::<f64>() / lf;
    let m2 = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / lf;
    let sigma = m2.sqrt();
    let kappa = if m2 == 0.0 {
        0.0
    } else {
        let m4 = d.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / lf;
        m4 / (m2 * m2)
    };
    let s = d.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (lf - 1.0);
    Ok(ImfStats { mu, sigma, kappa, s })
}

/// 20-dimensional EMD feature vector of one decomposition.
///
/// IMFs beyond the fifth are ignored; missing IMFs contribute four zeros.
pub fn emd_feature_vector(set: &ImfSet) -> [f64; EMD_DIM] {
    let mut out = [0.0; EMD_DIM];
    for (k, imf) in set.imfs.iter().take(N_IMFS).enumerate() {
        let stats = imf_stats(imf.samples()).expect("IMFs keep the source length");
        out[k * STATS_PER_IMF] = stats.mu;
        out[k * STATS_PER_IMF + 1] = stats.sigma;
        out[k * STATS_PER_IMF + 2] = stats.kappa;
        out[k * STATS_PER_IMF + 3] = stats.s;
    }
    out
}

/// Human-readable names for the 20 EMD feature dimensions, layout order.
pub fn emd_feature_names() -> Vec<String> {
    let mut names = Vec::with_capacity(EMD_DIM);
    for k in 1..=N_IMFS {
        for stat in ["mu", "sigma", "kappa", "s"] {
            names.push(format!("{stat}{k}"));
        }
    }
    names
}

/// Per-column min-max map fitted on training data.
///
/// Training columns land exactly in [0, 1]; test rows are mapped by the same
/// affine transform and may leave that range. A constant column maps to 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    mins: Vec<f64>,
    maxs: Vec<f64>,
}

impl Normalizer {
    pub fn fit(train: &[Vec<f64>]) -> Result<Self, FeatureError> {
        if train.is_empty() {
            return Err(FeatureError::EmptyMatrix);
        }
        let p = train[0].len();
        for (row, r) in train.iter().enumerate() {
            if r.len() != p {
                return Err(FeatureError::RaggedMatrix { row, got: r.len(), expected: p });
            }
        }
        let mut mins = vec![f64::INFINITY; p];
        let mut maxs = vec![f64::NEG_INFINITY; p];
        for row in train {
            for (j, &v) in row.iter().enumerate() {
                mins[j] = mins[j].min(v);
                maxs[j] = maxs[j].max(v);
            }
        }
        Ok(Self { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>, FeatureError> {
        if row.len() != self.mins.len() {
            return Err(FeatureError::DimensionMismatch {
                got: row.len(),
                expected: self.mins.len(),
            });
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let range = self.maxs[j] - self.mins[j];
                if range == 0.0 {
                    0.0
                } else {
                    (v - self.mins[j]) / range
                }
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emd::{sift, SiftConfig};
    use crate::signal::TimeSeries;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn stats_alternating() {
        let s = imf_stats(&[1.0, -1.0, 1.0, -1.0]).unwrap();
        assert_relative_eq!(s.mu, 1.0);
        assert_relative_eq!(s.sigma, 1.0);
        assert_relative_eq!(s.kappa, 1.0);
        assert_relative_eq!(s.s, 2.0);
    }

    #[test]
    fn stats_constant() {
        let s = imf_stats(&[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert_relative_eq!(s.mu, 2.0);
        assert_relative_eq!(s.sigma, 0.0);
        assert_relative_eq!(s.kappa, 0.0);
        assert_relative_eq!(s.s, 0.0);
    }

    #[test]
    fn stats_hand_evaluated() {
        // m2 = 0.5, m4 = 0.5 -> kappa = 2.
        let s = imf_stats(&[0.0, 1.0, 0.0, -1.0]).unwrap();
        assert_relative_eq!(s.mu, 0.5);
        assert_relative_eq!(s.sigma, 0.5f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s.kappa, 2.0, epsilon = 1e-12);
        assert_relative_eq!(s.s, 1.0);
    }

    #[test]
    fn stats_too_short_errors() {
        assert!(matches!(imf_stats(&[1.0]), Err(FeatureError::TooShort(1))));
    }

    #[test]
    fn stats_scale_covariance() {
        let d = [0.3, -0.7, 1.1, 0.2, -0.4, 0.9];
        let a = 3.5;
        let scaled: Vec<f64> = d.iter().map(|v| a * v).collect();
        let s0 = imf_stats(&d).unwrap();
        let s1 = imf_stats(&scaled).unwrap();
        assert_relative_eq!(s1.mu, a * s0.mu, epsilon = 1e-12);
        assert_relative_eq!(s1.sigma, a * s0.sigma, epsilon = 1e-12);
        assert_relative_eq!(s1.kappa, s0.kappa, epsilon = 1e-10);
        assert_relative_eq!(s1.s, a * s0.s, epsilon = 1e-12);
    }

    #[test]
    fn feature_vector_padding() {
        let n = 256;
        let x: Vec<f64> = (0..n).map(|i| (2.0 * PI * 8.0 * i as f64 / n as f64).sin()).collect();
        let set = sift(&TimeSeries::new(x, 1.0).unwrap(), &SiftConfig::default()).unwrap();
        assert!(set.imfs.len() < N_IMFS);
        let fv = emd_feature_vector(&set);
        assert!(fv.iter().all(|v| v.is_finite()));
        for k in set.imfs.len()..N_IMFS {
            for j in 0..STATS_PER_IMF {
                assert_eq!(fv[k * STATS_PER_IMF + j], 0.0);
            }
        }
        // Constant input: no IMFs, all-zero vector.
        let set = sift(&TimeSeries::new(vec![1.0; 64], 1.0).unwrap(), &SiftConfig::default())
            .unwrap();
        assert_eq!(emd_feature_vector(&set), [0.0; EMD_DIM]);
    }

    #[test]
    fn normalizer_min_max() {
        let norm = Normalizer::fit(&[vec![2.0], vec![4.0], vec![6.0]]).unwrap();
        assert_eq!(norm.apply(&[2.0]).unwrap(), vec![0.0]);
        assert_eq!(norm.apply(&[4.0]).unwrap(), vec![0.5]);
        assert_eq!(norm.apply(&[6.0]).unwrap(), vec![1.0]);
        // Test data keeps the same affine map and may leave [0, 1].
        assert_eq!(norm.apply(&[8.0]).unwrap(), vec![1.5]);
    }

    #[test]
    fn normalizer_constant_column() {
        let norm = Normalizer::fit(&[vec![3.0], vec![3.0], vec![3.0]]).unwrap();
        assert_eq!(norm.apply(&[3.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn normalizer_training_lands_in_unit_interval() {
        let rows = vec![
            vec![1.0, -5.0, 0.2],
            vec![4.0, 2.0, 0.2],
            vec![-1.0, 0.5, 0.2],
            vec![2.0, 7.0, 0.2],
        ];
        let norm = Normalizer::fit(&rows).unwrap();
        for row in &rows {
            for v in norm.apply(row).unwrap() {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn normalizer_empty_errors() {
        assert!(matches!(Normalizer::fit(&[]), Err(FeatureError::EmptyMatrix)));
    }
}
