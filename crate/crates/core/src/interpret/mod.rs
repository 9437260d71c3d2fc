//! Automated interpretability scoring: how well a space's extreme ranks line
//! up with human-defined categories, replacing manual intrusion judgements.

pub mod subsample;

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::data::CategoryDataset;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::space::WordSpace;

/// Window relaxation parameter; 1 is the strictest definition.
pub type Lambda = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Direction::Positive => write!(f, "+"),
            Direction::Negative => write!(f, "-"),
        }
    }
}

/// Best category assignment for one dimension at one lambda.
#[derive(Debug, Clone, Serialize)]
pub struct DimensionScore {
    /// Percentage of the winning category's words inside the winning window.
    pub score: f64,
    /// Index of the winning category.
    pub category: usize,
    pub direction: Direction,
    /// The winning window was cut off at the vocabulary size.
    pub clipped: bool,
}

/// Interpretability of a whole space at one lambda.
#[derive(Debug, Clone, Serialize)]
pub struct InterpretabilityReport {
    pub lambda: Lambda,
    /// Mean of the per-dimension scores, in percent.
    pub score: f64,
    pub dimension_scores: Vec<DimensionScore>,
    pub category_names: Vec<String>,
    /// Categories whose window `lambda * n_j` exceeded the vocabulary.
    pub clipped_categories: usize,
}

impl InterpretabilityReport {
    pub fn dims(&self) -> usize {
        self.dimension_scores.len()
    }

    /// CSV rows: `dim,score,category,direction`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "dim,score,category,direction")?;
        for (dim, ds) in self.dimension_scores.iter().enumerate() {
            writeln!(
                w,
                "{dim},{},{},{}",
                ds.score,
                crate::report::csv_field(&self.category_names[ds.category]),
                ds.direction
            )?;
        }
        Ok(())
    }
}

/// Scores every dimension of `space` against `cats` for each lambda.
///
/// For dimension i and category j, the positive-direction score is the share
/// of the category's words among the `lambda * n_j` largest values of the
/// dimension (percent); the negative direction uses the smallest values. A
/// dimension's score is the best over categories and directions, and the
/// space's score is the mean over dimensions. Rank ties break toward the
/// lower vocabulary index; on score ties the first winner stands, scanning
/// categories in order with the positive direction checked first.
pub fn interpretability_scores<S: WordSpace + ?Sized>(
    space: &S,
    cats: &CategoryDataset,
    lambdas: &[Lambda],
) -> Result<Vec<InterpretabilityReport>> {
    if lambdas.is_empty() {
        return Err(Error::EmptyInput { what: "lambda list" });
    }
    if let Some(&bad) = lambdas.iter().find(|&&l| l == 0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{bad} must be positive"),
        });
    }
    let matrix = space.matrix();
    cats.check_bound(matrix.nrows())?;
    let vocab_len = matrix.nrows();
    let dims = matrix.ncols();

    // (dim-major) per-lambda best assignments.
    let per_dim: Vec<Vec<DimensionScore>> = (0..dims)
        .into_par_iter()
        .map(|dim| {
            let column: Vec<f64> = matrix.column(dim).to_vec();
            let ranks = DimensionRanks::compute(&column);
            score_dimension(&ranks, cats, lambdas, vocab_len)
        })
        .collect();

    let reports = lambdas
        .iter()
        .enumerate()
        .map(|(li, &lambda)| {
            let dimension_scores: Vec<DimensionScore> =
                per_dim.iter().map(|scores| scores[li].clone()).collect();
            let score =
                compensated_sum(dimension_scores.iter().map(|d| d.score)) / dims as f64;
            let clipped_categories = cats
                .categories()
                .iter()
                .filter(|c| lambda as usize * c.len() > vocab_len)
                .count();
            InterpretabilityReport {
                lambda,
                score,
                dimension_scores,
                category_names: cats.names().map(String::from).collect(),
                clipped_categories,
            }
        })
        .collect();
    Ok(reports)
}

/// Top-rank and bottom-rank positions of every word along one dimension.
struct DimensionRanks {
    /// `from_top[w]` = rank of word w under (value desc, index asc).
    from_top: Vec<u32>,
    /// `from_bottom[w]` = rank of word w under (value asc, index asc).
    from_bottom: Vec<u32>,
}

impl DimensionRanks {
    fn compute(column: &[f64]) -> Self {
        let v = column.len();
        let mut order: Vec<u32> = (0..v as u32).collect();
        order.sort_unstable_by(|&a, &b| {
            column[b as usize]
                .partial_cmp(&column[a as usize])
                .expect("finite values")
                .then_with(|| a.cmp(&b))
        });
        let mut from_top = vec![0u32; v];
        for (pos, &w) in order.iter().enumerate() {
            from_top[w as usize] = pos as u32;
        }
        order.sort_unstable_by(|&a, &b| {
            column[a as usize]
                .partial_cmp(&column[b as usize])
                .expect("finite values")
                .then_with(|| a.cmp(&b))
        });
        let mut from_bottom = vec![0u32; v];
        for (pos, &w) in order.iter().enumerate() {
            from_bottom[w as usize] = pos as u32;
        }
        DimensionRanks {
            from_top,
            from_bottom,
        }
    }
}

fn score_dimension(
    ranks: &DimensionRanks,
    cats: &CategoryDataset,
    lambdas: &[Lambda],
    vocab_len: usize,
) -> Vec<DimensionScore> {
    // Sorted rank lists per category; window counts are then prefix counts.
    let cat_ranks: Vec<(Vec<u32>, Vec<u32>)> = cats
        .categories()
        .iter()
        .map(|cat| {
            let mut top: Vec<u32> = cat
                .word_indices
                .iter()
                .map(|&w| ranks.from_top[w as usize])
                .collect();
            top.sort_unstable();
            let mut bottom: Vec<u32> = cat
                .word_indices
                .iter()
                .map(|&w| ranks.from_bottom[w as usize])
                .collect();
            bottom.sort_unstable();
            (top, bottom)
        })
        .collect();

    lambdas
        .iter()
        .map(|&lambda| {
            let mut best = DimensionScore {
                score: -1.0,
                category: 0,
                direction: Direction::Positive,
                clipped: false,
            };
            for (j, cat) in cats.categories().iter().enumerate() {
                let n = cat.len();
                let requested = lambda as usize * n;
                let window = requested.min(vocab_len) as u32;
                let clipped = requested > vocab_len;
                let (top, bottom) = &cat_ranks[j];
                let plus = 100.0 * top.partition_point(|&r| r < window) as f64 / n as f64;
                let minus = 100.0 * bottom.partition_point(|&r| r < window) as f64 / n as f64;
                if plus > best.score {
                    best = DimensionScore {
                        score: plus,
                        category: j,
                        direction: Direction::Positive,
                        clipped,
                    };
                }
                if minus > best.score {
                    best = DimensionScore {
                        score: minus,
                        category: j,
                        direction: Direction::Negative,
                        clipped,
                    };
                }
            }
            best
        })
        .collect()
}
