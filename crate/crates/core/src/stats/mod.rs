//! Per-dimension distributional statistics: standardization and the
//! Gaussian separation distance used to weight categories.

pub mod ks;

use ndarray::Array2;

use crate::data::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::numeric::mean_and_population_variance;

/// Variance floor guarding the ratio terms of the separation distance.
pub const VARIANCE_FLOOR: f64 = 1e-12;

/// Per-dimension moments removed by [`standardize`]. Population convention
/// (divide by n) throughout.
#[derive(Debug, Clone)]
pub struct DimensionStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Mean, population variance, and count of one sample along one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSummary {
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

impl GaussianSummary {
    /// Variance may be zero here; distance computations clamp it to
    /// [`VARIANCE_FLOOR`] and flag the clamp.
    pub fn new(mean: f64, variance: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::SampleTooSmall { n: count, min: 2 });
        }
        if !mean.is_finite() || !variance.is_finite() || variance < 0.0 {
            return Err(Error::InvalidParameter {
                name: "summary",
                reason: format!("mean {mean}, variance {variance}"),
            });
        }
        Ok(GaussianSummary {
            mean,
            variance,
            count,
        })
    }

    pub fn from_values(values: &[f64]) -> Result<Self> {
        let (mean, variance) = mean_and_population_variance(values);
        GaussianSummary::new(mean, variance, values.len())
    }
}

/// Result of the Gaussian separation distance: the distance itself, the sign
/// of the mean gap (for later direction correction), and whether a variance
/// hit the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Separation {
    pub distance: f64,
    pub sign: i8,
    pub clamped: bool,
}

/// Distance between two Gaussians summarized by mean and variance:
///
/// ```text
/// 1/4 ln( 1/4 (vp/vq + vq/vp + 2) ) + 1/4 (mp - mq)^2 / (vp + vq)
/// ```
///
/// Zero iff the summaries share mean and variance; symmetric in its
/// arguments; invariant under a common affine rescaling.
pub fn bhattacharyya_distance(p: &GaussianSummary, q: &GaussianSummary) -> Separation {
    let clamped = p.variance < VARIANCE_FLOOR || q.variance < VARIANCE_FLOOR;
    let vp = p.variance.max(VARIANCE_FLOOR);
    let vq = q.variance.max(VARIANCE_FLOOR);
    let ratio_term = 0.25 * (0.25 * (vp / vq + vq / vp + 2.0)).ln();
    let gap = p.mean - q.mean;
    let mean_term = 0.25 * (gap * gap) / (vp + vq);
    Separation {
        distance: ratio_term + mean_term,
        sign: if gap < 0.0 { -1 } else { 1 },
        clamped,
    }
}

/// Rescales every dimension to zero mean and unit population variance.
///
/// Returns the standardized matrix plus the removed moments. A constant
/// dimension cannot be standardized and is reported by index.
pub fn standardize(embedding: &EmbeddingMatrix) -> Result<(EmbeddingMatrix, DimensionStats)> {
    let values = embedding.values();
    let dims = embedding.dim();
    let mut mean = Vec::with_capacity(dims);
    let mut std = Vec::with_capacity(dims);
    for dim in 0..dims {
        let column = embedding.dimension(dim);
        let (m, var) = mean_and_population_variance(&column);
        if !var.is_finite() || var < f64::MIN_POSITIVE {
            return Err(Error::ConstantDimension { dim });
        }
        mean.push(m);
        std.push(var.sqrt());
    }

    let mut out = Array2::zeros(values.raw_dim());
    for (row_idx, row) in values.outer_iter().enumerate() {
        for (dim, &v) in row.iter().enumerate() {
            out[(row_idx, dim)] = (v - mean[dim]) / std[dim];
        }
    }
    let standardized = EmbeddingMatrix::new(embedding.vocab().clone(), out)?;
    Ok((standardized, DimensionStats { mean, std }))
}
