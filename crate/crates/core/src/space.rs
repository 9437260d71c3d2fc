//! Projection of embeddings into category-labeled semantic spaces, plus
//! structural reports over weight matrices.

use std::io::Write;

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{Category, CategoryDataset, EmbeddingMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::weights::metric::{SeparationMetric, WeightMetric};
use crate::weights::{CategoryWeightMatrix, SparseWeights, WeightState};

/// Anything that pairs a vocabulary with a per-word row of values: loaded
/// embeddings and projected semantic spaces alike.
pub trait WordSpace {
    fn vocab(&self) -> &Vocabulary;
    fn matrix(&self) -> ArrayView2<'_, f64>;
}

impl WordSpace for EmbeddingMatrix {
    fn vocab(&self) -> &Vocabulary {
        self.vocab()
    }

    fn matrix(&self) -> ArrayView2<'_, f64> {
        self.values()
    }
}

/// A V x K matrix whose columns correspond to named categories.
#[derive(Debug, Clone)]
pub struct SemanticSpace {
    vocab: Vocabulary,
    values: Array2<f64>,
    column_labels: Vec<String>,
}

impl SemanticSpace {
    pub fn new(vocab: Vocabulary, values: Array2<f64>, column_labels: Vec<String>) -> Result<Self> {
        if vocab.len() != values.nrows() {
            return Err(Error::VocabMismatch {
                expected: vocab.len(),
                found: values.nrows(),
            });
        }
        if column_labels.len() != values.ncols() {
            return Err(Error::InvalidParameter {
                name: "column_labels",
                reason: format!(
                    "{} labels for {} columns",
                    column_labels.len(),
                    values.ncols()
                ),
            });
        }
        Ok(SemanticSpace {
            vocab,
            values,
            column_labels,
        })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_columns(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    /// Scores of one word across all columns, labeled and sorted descending.
    pub fn word_profile(&self, token: &str) -> Option<Vec<(String, f64)>> {
        let row = self.vocab.position(token)? as usize;
        let mut profile: Vec<(String, f64)> = self
            .column_labels
            .iter()
            .cloned()
            .zip(self.values.row(row).iter().copied())
            .collect();
        profile.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite scores"));
        Some(profile)
    }

    /// CSV with a `word` column followed by one column per category.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "word")?;
        for label in &self.column_labels {
            write!(w, ",{}", crate::report::csv_field(label))?;
        }
        writeln!(w)?;
        for (i, token) in self.vocab.tokens().iter().enumerate() {
            write!(w, "{}", crate::report::csv_field(token))?;
            for v in self.values.row(i) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

impl WordSpace for SemanticSpace {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn matrix(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }
}

/// Plain matrix product of an embedding (V x D) with a dense weight matrix
/// (D x K); columns inherit the category names.
pub fn project(embedding: &EmbeddingMatrix, weights: &CategoryWeightMatrix) -> Result<SemanticSpace> {
    if embedding.dim() != weights.dims() {
        return Err(Error::ShapeMismatch {
            rows_a: embedding.len(),
            cols_a: embedding.dim(),
            rows_b: weights.dims(),
            cols_b: weights.num_categories(),
        });
    }
    let values = embedding.values().dot(&weights.values());
    SemanticSpace::new(
        embedding.vocab().clone(),
        values,
        weights.category_names().to_vec(),
    )
}

/// Projection against sparse per-category weights; only the retained
/// dimensions contribute.
pub fn project_sparse(embedding: &EmbeddingMatrix, weights: &SparseWeights) -> Result<SemanticSpace> {
    if embedding.dim() != weights.dims() {
        return Err(Error::ShapeMismatch {
            rows_a: embedding.len(),
            cols_a: embedding.dim(),
            rows_b: weights.dims(),
            cols_b: weights.num_categories(),
        });
    }
    let rows = embedding.len();
    let k = weights.num_categories();
    let matrix = embedding.values();
    let mut values = Array2::zeros((rows, k));
    values
        .axis_chunks_iter_mut(ndarray::Axis(0), 1024)
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .for_each(|(chunk_idx, mut chunk)| {
            let base = chunk_idx * 1024;
            for (local, mut out_row) in chunk.outer_iter_mut().enumerate() {
                let in_row = matrix.row(base + local);
                for (j, out) in out_row.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for &(dim, weight) in weights.category_entries(j) {
                        acc += in_row[dim as usize] * weight;
                    }
                    *out = acc;
                }
            }
        });
    SemanticSpace::new(
        embedding.vocab().clone(),
        values,
        weights.category_names().to_vec(),
    )
}

/// Total representation strength per category (raw weight column sums),
/// sorted descending, with a random-pseudo-category baseline.
#[derive(Debug, Clone)]
pub struct StrengthReport {
    /// `(category, total)` sorted by descending total.
    pub totals: Vec<(String, f64)>,
    pub baseline: f64,
    pub baseline_words: usize,
    pub resamples: usize,
    pub seed: u64,
}

impl StrengthReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "category,total_strength")?;
        for (name, total) in &self.totals {
            writeln!(w, "{},{total}", crate::report::csv_field(name))?;
        }
        Ok(())
    }
}

/// Sums each raw weight column and compares against pseudo-categories of
/// `baseline_words` uniformly drawn vocabulary words.
pub fn category_strengths(
    weights: &CategoryWeightMatrix,
    embedding: &EmbeddingMatrix,
    baseline_words: usize,
    resamples: usize,
    seed: u64,
) -> Result<StrengthReport> {
    if weights.state() != WeightState::Raw {
        return Err(Error::WeightState {
            expected: WeightState::Raw,
            found: weights.state(),
        });
    }
    if baseline_words < 2 || baseline_words > embedding.len().saturating_sub(2) {
        return Err(Error::InvalidParameter {
            name: "baseline_words",
            reason: format!(
                "{baseline_words} not in 2..={}",
                embedding.len().saturating_sub(2)
            ),
        });
    }
    if resamples == 0 {
        return Err(Error::InvalidParameter {
            name: "resamples",
            reason: "must be positive".into(),
        });
    }

    let sums = weights.column_abs_sums();
    let mut totals: Vec<(String, f64)> = weights
        .category_names()
        .iter()
        .cloned()
        .zip(sums)
        .collect();
    totals.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite totals")
            .then_with(|| a.0.cmp(&b.0))
    });

    let baseline_totals: Vec<f64> = (0..resamples)
        .map(|resample| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(resample as u64);
            let mut indices: Vec<u32> =
                rand::seq::index::sample(&mut rng, embedding.len(), baseline_words)
                    .iter()
                    .map(|i| i as u32)
                    .collect();
            indices.sort_unstable();
            let pseudo = CategoryDataset::new(
                vec![Category {
                    name: "baseline".into(),
                    word_indices: indices,
                }],
                embedding.len(),
            )?;
            let w = SeparationMetric.compute(embedding, &pseudo)?;
            Ok(w.column_abs_sums()[0])
        })
        .collect::<Result<_>>()?;
    let baseline = compensated_sum(baseline_totals.iter().copied()) / resamples as f64;

    Ok(StrengthReport {
        totals,
        baseline,
        baseline_words,
        resamples,
        seed,
    })
}

/// Which slice of the weight matrix a decomposition report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportAxis {
    /// Per-category weights of one embedding dimension.
    Dimension(usize),
    /// Per-dimension weights of one category.
    Category(usize),
}

/// The strongest weights along one dimension or one category, sorted by
/// magnitude and truncated to `top_t` entries.
pub fn decomposition_report(
    weights: &CategoryWeightMatrix,
    axis: ReportAxis,
    top_t: usize,
) -> Result<Vec<(String, f64)>> {
    let mut entries: Vec<(String, f64)> = match axis {
        ReportAxis::Dimension(i) => {
            if i >= weights.dims() {
                return Err(Error::IndexOutOfRange {
                    what: "dimension",
                    index: i,
                    len: weights.dims(),
                });
            }
            weights
                .category_names()
                .iter()
                .cloned()
                .zip(weights.values().row(i).iter().copied())
                .collect()
        }
        ReportAxis::Category(j) => {
            if j >= weights.num_categories() {
                return Err(Error::IndexOutOfRange {
                    what: "category",
                    index: j,
                    len: weights.num_categories(),
                });
            }
            weights
                .values()
                .column(j)
                .iter()
                .enumerate()
                .map(|(dim, &v)| (dim.to_string(), v))
                .collect()
        }
    };
    entries.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .expect("finite weights")
    });
    entries.truncate(top_t);
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_random_embedding;
    use ndarray::array;

    fn weights(values: Array2<f64>, state: WeightState) -> CategoryWeightMatrix {
        let signs = values.mapv(|v| if v < 0.0 { -1i8 } else { 1i8 });
        let names = (0..values.ncols()).map(|j| format!("cat{j}")).collect();
        CategoryWeightMatrix::from_parts(values, signs, state, names, 0)
    }

    #[test]
    fn one_hot_projection_selects_a_dimension() {
        let e = generate_random_embedding(50, 4, 5, None).unwrap();
        let w = weights(array![[0.0], [0.0], [1.0], [0.0]], WeightState::Signed);
        let space = project(&e, &w).unwrap();
        for row in 0..e.len() {
            assert_eq!(space.values()[(row, 0)], e.values()[(row, 2)]);
        }
    }

    #[test]
    fn sparse_and_dense_projections_agree() {
        let e = generate_random_embedding(64, 6, 9, None).unwrap();
        let w = weights(
            Array2::from_shape_fn((6, 3), |(i, j)| ((i * 3 + j) as f64 - 8.0) / 7.0),
            WeightState::Signed,
        );
        let sparse = crate::weights::sparsify(&w, 6).unwrap();
        let dense = project(&e, &w).unwrap();
        let via_sparse = project_sparse(&e, &sparse).unwrap();
        for (a, b) in dense.values().iter().zip(via_sparse.values().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_rejects_shape_mismatch() {
        let e = generate_random_embedding(10, 3, 1, None).unwrap();
        let w = weights(Array2::zeros((4, 2)), WeightState::Signed);
        assert!(matches!(project(&e, &w), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn decomposition_report_sorts_and_truncates() {
        let w = weights(array![[0.1, -0.9], [0.5, 0.2], [-0.3, 0.0]], WeightState::Signed);
        let by_dim = decomposition_report(&w, ReportAxis::Dimension(0), 2).unwrap();
        assert_eq!(by_dim[0].0, "cat1");
        assert_eq!(by_dim[0].1, -0.9);
        assert_eq!(by_dim.len(), 2);

        let by_cat = decomposition_report(&w, ReportAxis::Category(0), 3).unwrap();
        assert_eq!(by_cat[0].0, "1");
        assert!(matches!(
            decomposition_report(&w, ReportAxis::Dimension(7), 1),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn strengths_require_raw_state() {
        let e = generate_random_embedding(30, 2, 3, None).unwrap();
        let w = weights(array![[0.5, 0.5], [0.5, 0.5]], WeightState::Signed);
        assert!(matches!(
            category_strengths(&w, &e, 5, 2, 1),
            Err(Error::WeightState { .. })
        ));
    }
}
