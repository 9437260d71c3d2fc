//! Weight metric strategies behind a common trait, registered by name and
//! selected at runtime.

use ndarray::Array2;
use rayon::prelude::*;

use crate::data::{CategoryDataset, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::stats::{bhattacharyya_distance, GaussianSummary};
use crate::weights::{CategoryWeightMatrix, WeightState};

/// Which embedding variant a metric's weights multiply against when
/// projecting into the category space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionBasis {
    /// The per-dimension standardized embedding.
    Standardized,
    /// The embedding as loaded.
    Raw,
}

/// A strategy producing a D x K category weight matrix from an embedding and
/// a category dataset.
pub trait WeightMetric: Send + Sync {
    /// Registry name used for CLI and config selection.
    fn name(&self) -> &'static str;

    fn projection_basis(&self) -> ProjectionBasis;

    /// Whether the raw output should be normalized and sign-corrected before
    /// projection.
    fn finalize_for_projection(&self) -> bool;

    fn compute(
        &self,
        embedding: &EmbeddingMatrix,
        cats: &CategoryDataset,
    ) -> Result<CategoryWeightMatrix>;
}

/// Weights each (dimension, category) cell by the Gaussian separation
/// distance between the category's words and the rest of the vocabulary.
pub struct SeparationMetric;

/// Baseline: weights each (dimension, category) cell by the mean value of the
/// category's words in that dimension.
pub struct CategoryCenterMetric;

static REGISTRY: [&dyn WeightMetric; 2] = [&SeparationMetric, &CategoryCenterMetric];

/// All registered metrics, in registration order.
pub fn registered_metrics() -> impl Iterator<Item = &'static dyn WeightMetric> {
    REGISTRY.iter().copied()
}

/// Looks a metric up by its registry name.
pub fn metric_by_name(name: &str) -> Result<&'static dyn WeightMetric> {
    registered_metrics()
        .find(|m| m.name() == name)
        .ok_or_else(|| Error::UnknownMetric {
            name: name.to_string(),
            known: registered_metrics()
                .map(|m| m.name())
                .collect::<Vec<_>>()
                .join(", "),
        })
}

/// Convenience wrapper: compute weights under a named metric.
pub fn compute_weights(
    embedding: &EmbeddingMatrix,
    cats: &CategoryDataset,
    metric: &dyn WeightMetric,
) -> Result<CategoryWeightMatrix> {
    metric.compute(embedding, cats)
}

impl WeightMetric for SeparationMetric {
    fn name(&self) -> &'static str {
        "bhattacharyya"
    }

    fn projection_basis(&self) -> ProjectionBasis {
        ProjectionBasis::Standardized
    }

    fn finalize_for_projection(&self) -> bool {
        true
    }

    fn compute(
        &self,
        embedding: &EmbeddingMatrix,
        cats: &CategoryDataset,
    ) -> Result<CategoryWeightMatrix> {
        cats.check_bound(embedding.len())?;
        let total = embedding.len();
        for cat in cats.categories() {
            if cat.len() < 2 {
                return Err(Error::CategoryTooSmall {
                    name: cat.name.clone(),
                    size: cat.len(),
                    min: 2,
                });
            }
            if total - cat.len() < 2 {
                return Err(Error::InvalidParameter {
                    name: "categories",
                    reason: format!(
                        "category \"{}\" leaves fewer than 2 complement words",
                        cat.name
                    ),
                });
            }
        }

        let dims = embedding.dim();
        let k = cats.len();
        let rows: Vec<(Vec<f64>, Vec<i8>, usize)> = (0..dims)
            .into_par_iter()
            .map(|dim| {
                let column = embedding.dimension(dim);
                let n_total = column.len() as f64;
                let dim_mean = compensated_sum(column.iter().copied()) / n_total;
                // Centered about the dimension mean so complement moments
                // come out of plain differences without cancellation.
                let centered_total = compensated_sum(column.iter().map(|&v| v - dim_mean));
                let centered_ssq_total = compensated_sum(column.iter().map(|&v| {
                    let d = v - dim_mean;
                    d * d
                }));

                let mut weights = Vec::with_capacity(k);
                let mut signs = Vec::with_capacity(k);
                let mut clamped = 0usize;
                for cat in cats.categories() {
                    let n = cat.len() as f64;
                    let m = n_total - n;
                    let cat_sum = compensated_sum(
                        cat.word_indices.iter().map(|&w| column[w as usize] - dim_mean),
                    );
                    let cat_ssq = compensated_sum(cat.word_indices.iter().map(|&w| {
                        let d = column[w as usize] - dim_mean;
                        d * d
                    }));
                    let mean_p = dim_mean + cat_sum / n;
                    let var_p = (cat_ssq / n - (cat_sum / n).powi(2)).max(0.0);
                    let rest_sum = centered_total - cat_sum;
                    let mean_q = dim_mean + rest_sum / m;
                    let var_q =
                        ((centered_ssq_total - cat_ssq) / m - (rest_sum / m).powi(2)).max(0.0);

                    let p = GaussianSummary::new(mean_p, var_p, cat.len())?;
                    let q = GaussianSummary::new(mean_q, var_q, total - cat.len())?;
                    let sep = bhattacharyya_distance(&p, &q);
                    if sep.clamped {
                        clamped += 1;
                    }
                    weights.push(sep.distance);
                    signs.push(sep.sign);
                }
                Ok((weights, signs, clamped))
            })
            .collect::<Result<_>>()?;

        let mut values = Array2::zeros((dims, k));
        let mut signs = Array2::from_elem((dims, k), 1i8);
        let mut clamp_count = 0usize;
        for (dim, (w_row, s_row, clamped)) in rows.into_iter().enumerate() {
            clamp_count += clamped;
            for j in 0..k {
                values[(dim, j)] = w_row[j];
                signs[(dim, j)] = s_row[j];
            }
        }
        if clamp_count > 0 {
            log::warn!("{clamp_count} weight cells hit the variance floor");
        }
        Ok(CategoryWeightMatrix::from_parts(
            values,
            signs,
            WeightState::Raw,
            cats.names().map(String::from).collect(),
            clamp_count,
        ))
    }
}

impl WeightMetric for CategoryCenterMetric {
    fn name(&self) -> &'static str {
        "centers"
    }

    fn projection_basis(&self) -> ProjectionBasis {
        ProjectionBasis::Raw
    }

    fn finalize_for_projection(&self) -> bool {
        false
    }

    fn compute(
        &self,
        embedding: &EmbeddingMatrix,
        cats: &CategoryDataset,
    ) -> Result<CategoryWeightMatrix> {
        cats.check_bound(embedding.len())?;
        let dims = embedding.dim();
        let k = cats.len();
        let rows: Vec<Vec<f64>> = (0..dims)
            .into_par_iter()
            .map(|dim| {
                let column = embedding.dimension(dim);
                cats.categories()
                    .iter()
                    .map(|cat| {
                        compensated_sum(cat.word_indices.iter().map(|&w| column[w as usize]))
                            / cat.len() as f64
                    })
                    .collect()
            })
            .collect();

        let mut values = Array2::zeros((dims, k));
        let mut signs = Array2::from_elem((dims, k), 1i8);
        for (dim, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                values[(dim, j)] = v;
                signs[(dim, j)] = if v < 0.0 { -1 } else { 1 };
            }
        }
        Ok(CategoryWeightMatrix::from_parts(
            values,
            signs,
            WeightState::Centers,
            cats.names().map(String::from).collect(),
            0,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Category, Vocabulary};
    use ndarray::array;

    fn tiny_setup() -> (EmbeddingMatrix, CategoryDataset) {
        // 6 words, 2 dims; words 0..=2 sit high on dim 0.
        let values = array![
            [5.0, 0.1],
            [5.5, -0.2],
            [4.5, 0.0],
            [0.0, 0.3],
            [-0.5, -0.1],
            [0.5, 0.2],
        ];
        let e = EmbeddingMatrix::new(Vocabulary::placeholder(6), values).unwrap();
        let cats = CategoryDataset::new(
            vec![Category {
                name: "high".into(),
                word_indices: vec![0, 1, 2],
            }],
            6,
        )
        .unwrap();
        (e, cats)
    }

    #[test]
    fn separation_metric_matches_direct_summaries() {
        let (e, cats) = tiny_setup();
        let w = metric_by_name("bhattacharyya")
            .unwrap()
            .compute(&e, &cats)
            .unwrap();
        assert_eq!(w.state(), WeightState::Raw);
        assert_eq!(w.dims(), 2);
        assert_eq!(w.num_categories(), 1);

        for dim in 0..2 {
            let col = e.dimension(dim);
            let p: Vec<f64> = [0usize, 1, 2].iter().map(|&i| col[i]).collect();
            let q: Vec<f64> = [3usize, 4, 5].iter().map(|&i| col[i]).collect();
            let expect = bhattacharyya_distance(
                &GaussianSummary::from_values(&p).unwrap(),
                &GaussianSummary::from_values(&q).unwrap(),
            );
            assert!(
                (w.values()[(dim, 0)] - expect.distance).abs() < 1e-12,
                "dim {dim}"
            );
            assert_eq!(w.signs()[(dim, 0)], expect.sign);
        }
        // Dimension 0 separates the category; dimension 1 barely does.
        assert!(w.values()[(0, 0)] > 10.0 * w.values()[(1, 0)]);
    }

    #[test]
    fn centers_metric_is_the_category_mean() {
        let (e, cats) = tiny_setup();
        let w = metric_by_name("centers")
            .unwrap()
            .compute(&e, &cats)
            .unwrap();
        assert_eq!(w.state(), WeightState::Centers);
        assert!((w.values()[(0, 0)] - 5.0).abs() < 1e-12);
        assert!((w.values()[(1, 0)] - (0.1 - 0.2 + 0.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn registry_knows_both_and_rejects_strangers() {
        let names: Vec<_> = registered_metrics().map(|m| m.name()).collect();
        assert_eq!(names, vec!["bhattacharyya", "centers"]);
        let err = match metric_by_name("cosine") {
            Err(e) => e.to_string(),
            Ok(_) => panic!("expected lookup failure"),
        };
        assert!(err.contains("bhattacharyya"), "{err}");
    }

    #[test]
    fn separation_rejects_tiny_categories() {
        let (e, _) = tiny_setup();
        let cats = CategoryDataset::new(
            vec![Category {
                name: "lonely".into(),
                word_indices: vec![0],
            }],
            6,
        )
        .unwrap();
        assert!(matches!(
            SeparationMetric.compute(&e, &cats),
            Err(Error::CategoryTooSmall { .. })
        ));
    }
}
