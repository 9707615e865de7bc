//! Per-antenna-pair principal component analysis of windowed signals.
//!
//! The model is fitted by SVD of the centred training matrix; up to 30
//! components are retained and every score vector is zero-padded to 30
//! dimensions. Scores are normalized by the training range of the first
//! principal score: dimension 1 is mapped to [0, 1] by min-max, the other
//! dimensions are rescaled by the same ratio (no offset).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Number of principal scores retained.
pub const PCA_DIM: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum PcaError {
    #[error("need at least 2 training rows, got {0}")]
    TooFewRows(usize),
    #[error("ragged matrix: row {row} has {got} columns, expected {expected}")]
    RaggedMatrix { row: usize, got: usize, expected: usize },
    #[error("dimension mismatch: vector has length {got}, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("svd did not converge")]
    SvdFailed,
}

/// Fitted PCA model for one antenna pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// Orthonormal component rows, ordered by decreasing explained variance.
    components: Vec<Vec<f64>>,
    explained_variance: Vec<f64>,
    /// (min, max) of the training scores along the first component.
    score_norm: (f64, f64),
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn score_norm(&self) -> (f64, f64) {
        self.score_norm
    }

    /// Raw (uncentred-input, unnormalized) projection onto the components,
    /// zero-padded to [`PCA_DIM`].
    pub fn raw_scores(&self, x: &[f64]) -> Result<Vec<f64>, PcaError> {
        if x.len() != self.mean.len() {
            return Err(PcaError::DimensionMismatch { got: x.len(), expected: self.mean.len() });
        }
        let centred: Vec<f64> = x.iter().zip(&self.mean).map(|(v, m)| v - m).collect();
        let mut scores = vec![0.0; PCA_DIM];
        for (j, comp) in self.components.iter().enumerate() {
            scores[j] = comp.iter().zip(&centred).map(|(c, v)| c * v).sum();
        }
        Ok(scores)
    }
}

/// Fits a PCA model on an n x T training matrix (rows are measurements).
///
/// Retains min(30, n-1, T) components. The sign convention makes each
/// component's largest-magnitude entry positive.
pub fn pca_fit(train: &[Vec<f64>]) -> Result<PcaModel, PcaError> {
    let n = train.len();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let t = train[0].len();
    for (row, r) in train.iter().enumerate() {
        if r.len() != t {
            return Err(PcaError::RaggedMatrix { row, got: r.len(), expected: t });
        }
    }
    let mut mean = vec![0.0; t];
    for row in train {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centred = DMatrix::from_fn(n, t, |i, j| train[i][j] - mean[j]);
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.ok_or(PcaError::SvdFailed)?;

    let r = PCA_DIM.min(n - 1).min(t);
    // Singular values come out ordered, but make the ordering explicit so the
    // component ranking never depends on backend behaviour.
    let mut order: Vec<usize> = (0..svd.singular_values.len().min(v_t.nrows())).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut components = Vec::with_capacity(r);
    let mut explained_variance = Vec::with_capacity(r);
    for &idx in order.iter().take(r) {
        let mut row: Vec<f64> = (0..t).map(|j| v_t[(idx, j)]).collect();
        // Sign convention: largest-magnitude entry positive.
        let lead = row
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| {
                a.abs().partial_cmp(&b.abs()).unwrap().then(ib.cmp(ia))
            })
            .map(|(_, v)| *v)
            .unwrap_or(0.0);
        if lead < 0.0 {
            for v in &mut row {
                *v = -*v;
            }
        }
        let sv = svd.singular_values[idx];
        explained_variance.push(sv * sv / n as f64);
        components.push(row);
    }

    let mut model = PcaModel { mean, components, explained_variance, score_norm: (0.0, 0.0) };
    let mut min1 = f64::INFINITY;
    let mut max1 = f64::NEG_INFINITY;
    for row in train {
        let s1 = model.raw_scores(row)?[0];
        min1 = min1.min(s1);
        max1 = max1.max(s1);
    }
    if model.components.is_empty() {
        min1 = 0.0;
        max1 = 0.0;
    }
    model.score_norm = (min1, max1);
    Ok(model)
}

/// Normalized 30-dimensional score vector.
///
/// Dimension 1 is min-max mapped by the training range of the first score;
/// dimensions 2..30 are divided by that same range. A degenerate range maps
/// everything to 0.
pub fn pca_scores(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>, PcaError> {
    let mut scores = model.raw_scores(x)?;
    let (min1, max1) = model.score_norm;
    let range = max1 - min1;
    if range == 0.0 {
        return Ok(vec![0.0; PCA_DIM]);
    }
    scores[0] = (scores[0] - min1) / range;
    for s in scores.iter_mut().skip(1) {
        *s /= range;
    }
    Ok(scores)
}
