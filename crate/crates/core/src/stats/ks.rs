//! One-sample Kolmogorov-Smirnov normality screening over embedding
//! dimensions, Bonferroni corrected across dimensions.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::numeric::mean_and_population_variance;

/// Reference normal the empirical CDF is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KsReference {
    /// Standardize each dimension by its own fitted mean and population
    /// standard deviation, then compare to N(0,1). The asymptotic p-value is
    /// conservative in this case (the Lilliefors caveat).
    Fitted,
    /// Compare raw values directly to N(0,1). Appropriate when the data is
    /// standardized or synthesized as standard normal; p-values are exact
    /// asymptotics.
    Standard,
}

#[derive(Debug, Clone, Copy)]
pub struct NormalityOptions {
    pub alpha: f64,
    pub reference: KsReference,
}

impl Default for NormalityOptions {
    fn default() -> Self {
        NormalityOptions {
            alpha: 0.05,
            reference: KsReference::Fitted,
        }
    }
}

/// Per-dimension KS statistics, asymptotic p-values, and Bonferroni verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct NormalityReport {
    pub statistics: Vec<f64>,
    pub p_values: Vec<f64>,
    pub normal: Vec<bool>,
    pub alpha: f64,
    pub corrected_alpha: f64,
    pub sample_size: usize,
    pub reference: KsReference,
}

impl NormalityReport {
    pub fn dims(&self) -> usize {
        self.statistics.len()
    }

    pub fn normal_count(&self) -> usize {
        self.normal.iter().filter(|&&v| v).count()
    }

    pub fn mean_statistic(&self) -> f64 {
        crate::numeric::compensated_sum(self.statistics.iter().copied())
            / self.statistics.len() as f64
    }

    /// CSV rows: `dim,statistic,p_value,normal`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "dim,statistic,p_value,normal")?;
        for dim in 0..self.dims() {
            writeln!(
                w,
                "{dim},{},{},{}",
                self.statistics[dim], self.p_values[dim], self.normal[dim]
            )?;
        }
        Ok(())
    }
}

/// Tests every dimension of `embedding` against a normal reference.
///
/// Statistic: sup-norm difference between the empirical CDF and the normal
/// CDF. P-value: asymptotic Kolmogorov distribution of `sqrt(n) * D`.
/// Verdict: normal iff `p > alpha / D_total` (Bonferroni).
pub fn ks_normality(
    embedding: &EmbeddingMatrix,
    options: &NormalityOptions,
) -> Result<NormalityReport> {
    let n = embedding.len();
    if n < 50 {
        return Err(Error::SampleTooSmall { n, min: 50 });
    }
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{} not in (0,1)", options.alpha),
        });
    }
    let dims = embedding.dim();
    let per_dim: Vec<Result<f64>> = (0..dims)
        .into_par_iter()
        .map(|dim| {
            let mut column = embedding.dimension(dim);
            column.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
            match options.reference {
                KsReference::Fitted => {
                    let (mean, var) = mean_and_population_variance(&column);
                    if !var.is_finite() || var < f64::MIN_POSITIVE {
                        return Err(Error::ConstantDimension { dim });
                    }
                    let std = var.sqrt();
                    for v in &mut column {
                        *v = (*v - mean) / std;
                    }
                    Ok(ks_statistic_standard_normal(&column))
                }
                KsReference::Standard => Ok(ks_statistic_standard_normal(&column)),
            }
        })
        .collect();

    let mut statistics = Vec::with_capacity(dims);
    for r in per_dim {
        statistics.push(r?);
    }
    let corrected_alpha = options.alpha / dims as f64;
    let sqrt_n = (n as f64).sqrt();
    let p_values: Vec<f64> = statistics.iter().map(|&d| kolmogorov_sf(sqrt_n * d)).collect();
    let normal: Vec<bool> = p_values.iter().map(|&p| p > corrected_alpha).collect();

    Ok(NormalityReport {
        statistics,
        p_values,
        normal,
        alpha: options.alpha,
        corrected_alpha,
        sample_size: n,
        reference: options.reference,
    })
}

/// Sup-norm distance between the empirical CDF of an ascending-sorted sample
/// and the standard normal CDF.
pub fn ks_statistic_standard_normal(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = standard_normal_cdf(x);
        let below = cdf - i as f64 / n;
        let above = (i as f64 + 1.0) / n - cdf;
        d = d.max(below).max(above);
    }
    d.max(0.0)
}

pub fn standard_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Survival function of the Kolmogorov distribution: `P(K > z)` where `K` is
/// the limit of `sqrt(n) * D_n`. Alternating series for moderate and large
/// `z`, theta-function inversion for small `z`.
pub fn kolmogorov_sf(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    if z < 0.2 {
        return 1.0;
    }
    if z < 0.755 {
        // 1 - sqrt(2*pi)/z * sum exp(-(2k-1)^2 pi^2 / (8 z^2))
        let f = std::f64::consts::PI * std::f64::consts::PI / (8.0 * z * z);
        let sum = (-f).exp() + (-9.0 * f).exp() + (-25.0 * f).exp();
        return (1.0 - (2.0 * std::f64::consts::PI).sqrt() / z * sum).clamp(0.0, 1.0);
    }
    // 2 * sum_{k>=1} (-1)^{k-1} exp(-2 k^2 z^2)
    let mut sum = 0.0f64;
    let mut sign = 1.0f64;
    for k in 1..100 {
        let term = (-2.0 * (k * k) as f64 * z * z).exp();
        if term < 1e-17 {
            break;
        }
        sum += sign * term;
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
