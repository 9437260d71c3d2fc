//! Category word retrieval: hold out part of each category, rebuild weights
//! from the rest, and measure how highly the held-out words rank in their
//! category's projected dimension.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{Category, CategoryDataset, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::space::project_sparse;
use crate::stats::standardize;
use crate::weights::metric::{ProjectionBasis, WeightMetric};
use crate::weights::{finalize_weights, sparsify};

/// Rank-window multipliers: accuracy is measured inside the top n, 3n, and 5n
/// ranks where n is the per-category test-word count.
pub const MULTIPLIERS: [usize; 3] = [1, 3, 5];

#[derive(Debug, Clone)]
pub struct RetrievalOptions {
    /// Sparsification levels to sweep.
    pub ks: Vec<usize>,
    /// Independent random train/test selections.
    pub repeats: usize,
    /// Training fraction per category; the complement is tested.
    pub split: f64,
    pub seed: u64,
    /// Normalize and sign-correct raw weights before sparsifying (applies to
    /// metrics that support finalization).
    pub finalize: bool,
}

impl Default for RetrievalOptions {
    fn default() -> Self {
        RetrievalOptions {
            ks: vec![5, 7, 10, 15, 25, 50, 100, 200, 300],
            repeats: 10,
            split: 0.6,
            seed: 0,
            finalize: true,
        }
    }
}

/// One category's train/test assignment within a repetition.
#[derive(Debug, Clone)]
pub struct CategorySplit {
    pub name: String,
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

/// A repetition's train/test assignment across categories. Per category,
/// train and test partition the word set and `|train|` is the training
/// fraction rounded half-up; categories without at least two words on each
/// side are skipped.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub repetition: usize,
    pub seed: u64,
    pub splits: Vec<CategorySplit>,
    pub skipped: Vec<String>,
}

/// Draws the seeded split for one repetition; repetitions index independent
/// streams of the same seed, so each is individually reproducible.
pub fn split_plan(
    cats: &CategoryDataset,
    split: f64,
    seed: u64,
    repetition: usize,
) -> Result<SplitPlan> {
    if !(split > 0.0 && split < 1.0) {
        return Err(Error::InvalidParameter {
            name: "split",
            reason: format!("{split} not in (0,1)"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repetition as u64);
    let mut splits = Vec::new();
    let mut skipped = Vec::new();
    for cat in cats.categories() {
        let n = cat.len();
        let train_count = ((split.mul_add(n as f64, 0.5)).floor() as usize).min(n);
        let test_count = n - train_count;
        if train_count < 2 || test_count < 2 {
            log::warn!(
                "retrieval: skipping \"{}\" (train {train_count}, test {test_count})",
                cat.name
            );
            skipped.push(cat.name.clone());
            continue;
        }
        let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, n, train_count).into_vec();
        chosen.sort_unstable();
        let mut train = Vec::with_capacity(train_count);
        let mut test = Vec::with_capacity(test_count);
        let mut cursor = chosen.iter().peekable();
        for (pos, &word) in cat.word_indices.iter().enumerate() {
            if cursor.peek() == Some(&&pos) {
                train.push(word);
                cursor.next();
            } else {
                test.push(word);
            }
        }
        splits.push(CategorySplit {
            name: cat.name.clone(),
            train,
            test,
        });
    }
    Ok(SplitPlan {
        repetition,
        seed,
        splits,
        skipped,
    })
}

/// Aggregated accuracy for one `(k, multiplier)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct RetrievalCell {
    pub k: usize,
    pub multiplier: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// Weighted accuracies of a single repetition at one k.
#[derive(Debug, Clone, Serialize)]
pub struct RepetitionAccuracy {
    pub repetition: usize,
    pub k: usize,
    /// Indexed like [`MULTIPLIERS`].
    pub accuracy: [f64; 3],
}

#[derive(Debug, Clone, Serialize)]
pub struct RetrievalReport {
    pub metric: String,
    pub seed: u64,
    pub repeats: usize,
    pub split: f64,
    pub finalize: bool,
    pub cells: Vec<RetrievalCell>,
    pub repetitions: Vec<RepetitionAccuracy>,
    /// Categories skipped in at least one repetition for lacking enough
    /// train or test words.
    pub skipped_categories: Vec<String>,
}

impl RetrievalReport {
    pub fn cell(&self, k: usize, multiplier: usize) -> Option<&RetrievalCell> {
        self.cells
            .iter()
            .find(|c| c.k == k && c.multiplier == multiplier)
    }

    /// CSV rows: `k,multiplier,mean_accuracy,std_accuracy`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "k,multiplier,mean_accuracy,std_accuracy")?;
        for cell in &self.cells {
            writeln!(
                w,
                "{},{},{},{}",
                cell.k, cell.multiplier, cell.mean_accuracy, cell.std_accuracy
            )?;
        }
        Ok(())
    }
}

/// Runs the full retrieval experiment for one metric.
///
/// Per repetition: split each category `split`/rest into train/test, compute
/// weights from the training words only, sparsify at each k, project, and
/// rank every vocabulary word (own training words excluded) by the category
/// column. Accuracy is the percentage of test words inside the top
/// `multiplier * n` ranks, averaged over categories weighted by test count.
pub fn retrieval_test(
    embedding: &EmbeddingMatrix,
    cats: &CategoryDataset,
    metric: &dyn WeightMetric,
    options: &RetrievalOptions,
) -> Result<RetrievalReport> {
    cats.check_bound(embedding.len())?;
    if !(options.split > 0.0 && options.split < 1.0) {
        return Err(Error::InvalidParameter {
            name: "split",
            reason: format!("{} not in (0,1)", options.split),
        });
    }
    if options.ks.is_empty() {
        return Err(Error::EmptyInput { what: "k list" });
    }
    if options.repeats == 0 {
        return Err(Error::InvalidParameter {
            name: "repeats",
            reason: "must be positive".into(),
        });
    }
    for &k in &options.ks {
        if k == 0 || k > embedding.dim() {
            return Err(Error::KOutOfRange {
                k,
                max: embedding.dim(),
            });
        }
    }

    let standardized;
    let basis = match metric.projection_basis() {
        ProjectionBasis::Standardized => {
            standardized = standardize(embedding)?.0;
            &standardized
        }
        ProjectionBasis::Raw => embedding,
    };

    let mut repetitions = Vec::with_capacity(options.repeats * options.ks.len());
    let mut skipped: Vec<String> = Vec::new();
    for rep in 0..options.repeats {
        let plan = split_plan(cats, options.split, options.seed, rep)?;
        for name in &plan.skipped {
            if !skipped.contains(name) {
                skipped.push(name.clone());
            }
        }
        if plan.splits.is_empty() {
            return Err(Error::EmptyInput {
                what: "categories after splitting",
            });
        }
        let tests: Vec<Vec<u32>> = plan.splits.iter().map(|s| s.test.clone()).collect();
        let train_dataset = CategoryDataset::new(
            plan.splits
                .into_iter()
                .map(|s| Category {
                    name: s.name,
                    word_indices: s.train,
                })
                .collect(),
            cats.vocab_len(),
        )?;

        let weights = metric.compute(embedding, &train_dataset)?;
        let weights = if options.finalize && metric.finalize_for_projection() {
            finalize_weights(&weights)?
        } else {
            weights
        };

        for &k in &options.ks {
            let sparse = sparsify(&weights, k)?;
            let space = project_sparse(basis, &sparse)?;
            let per_category: Vec<(usize, [f64; 3])> = (0..train_dataset.len())
                .into_par_iter()
                .map(|j| {
                    let counts = window_hits(
                        &space.values().column(j).to_vec(),
                        &train_dataset.category(j).word_indices,
                        &tests[j],
                    );
                    let n = tests[j].len();
                    (
                        n,
                        [
                            100.0 * counts[0] as f64 / n as f64,
                            100.0 * counts[1] as f64 / n as f64,
                            100.0 * counts[2] as f64 / n as f64,
                        ],
                    )
                })
                .collect();

            let total_tests: f64 = per_category.iter().map(|(n, _)| *n as f64).sum();
            let mut weighted = [0.0f64; 3];
            for (m, acc) in weighted.iter_mut().enumerate() {
                *acc = compensated_sum(
                    per_category
                        .iter()
                        .map(|(n, accs)| accs[m] * *n as f64),
                ) / total_tests;
            }
            repetitions.push(RepetitionAccuracy {
                repetition: rep,
                k,
                accuracy: weighted,
            });
        }
    }

    let mut cells = Vec::with_capacity(options.ks.len() * MULTIPLIERS.len());
    for &k in &options.ks {
        for (m, &multiplier) in MULTIPLIERS.iter().enumerate() {
            let values: Vec<f64> = repetitions
                .iter()
                .filter(|r| r.k == k)
                .map(|r| r.accuracy[m])
                .collect();
            let mean = compensated_sum(values.iter().copied()) / values.len() as f64;
            let std = if values.len() > 1 {
                let ss = compensated_sum(values.iter().map(|v| {
                    let d = v - mean;
                    d * d
                }));
                (ss / (values.len() - 1) as f64).sqrt()
            } else {
                0.0
            };
            cells.push(RetrievalCell {
                k,
                multiplier,
                mean_accuracy: mean,
                std_accuracy: std,
            });
        }
    }

    skipped.sort();
    Ok(RetrievalReport {
        metric: metric.name().to_string(),
        seed: options.seed,
        repeats: options.repeats,
        split: options.split,
        finalize: options.finalize,
        cells,
        repetitions,
        skipped_categories: skipped,
    })
}

/// Counts test words inside the top n, 3n, 5n ranks of `scores` (descending,
/// ties to the lower word index), with the category's training words removed
/// from the ranking entirely.
fn window_hits(scores: &[f64], train: &[u32], test: &[u32]) -> [usize; 3] {
    let n = test.len();
    let mut ranked: Vec<(f64, u32)> = Vec::with_capacity(scores.len() - train.len());
    for (idx, &score) in scores.iter().enumerate() {
        let idx = idx as u32;
        if train.binary_search(&idx).is_err() {
            ranked.push((score, idx));
        }
    }
    let compare = |a: &(f64, u32), b: &(f64, u32)| {
        b.0.partial_cmp(&a.0)
            .expect("finite scores")
            .then_with(|| a.1.cmp(&b.1))
    };
    let window = (5 * n).min(ranked.len());
    if window == 0 {
        return [0; 3];
    }
    if window < ranked.len() {
        ranked.select_nth_unstable_by(window - 1, compare);
        ranked.truncate(window);
    }
    ranked.sort_unstable_by(compare);

    let mut counts = [0usize; 3];
    for (pos, (_, idx)) in ranked.iter().enumerate() {
        if test.binary_search(idx).is_ok() {
            for (m, &multiplier) in MULTIPLIERS.iter().enumerate() {
                if pos < multiplier * n {
                    counts[m] += 1;
                }
            }
        }
    }
    counts
}
