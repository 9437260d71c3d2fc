//! Dataset subsampling and the coverage/category-count sensitivity study.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::data::{Category, CategoryDataset, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::interpret::{interpretability_scores, Lambda};
use crate::numeric::derive_seed;
use crate::space::{project, WordSpace};
use crate::stats::standardize;
use crate::weights::finalize_weights;
use crate::weights::metric::{ProjectionBasis, WeightMetric};

/// Distance used to pick the words closest to a category center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CenterDistance {
    Euclidean,
    Cosine,
}

/// Keeps, per category, the `r` percent of words closest to the category's
/// mean vector in `reference` (at least one word). Ties break toward the
/// lower vocabulary index; `r = 100` returns the dataset unchanged.
pub fn subsample_words(
    cats: &CategoryDataset,
    r: f64,
    reference: &EmbeddingMatrix,
    distance: CenterDistance,
) -> Result<CategoryDataset> {
    if !(r > 0.0 && r <= 100.0) {
        return Err(Error::InvalidParameter {
            name: "coverage",
            reason: format!("{r} not in (0,100]"),
        });
    }
    cats.check_bound(reference.len())?;
    let dims = reference.dim();
    let matrix = reference.values();

    let categories = cats
        .categories()
        .iter()
        .map(|cat| {
            let n = cat.len();
            let keep = (((r * n as f64) / 100.0).floor() as usize).max(1);
            if keep >= n {
                return Category {
                    name: cat.name.clone(),
                    word_indices: cat.word_indices.clone(),
                };
            }
            let mut center = vec![0.0f64; dims];
            for &w in &cat.word_indices {
                for (c, &v) in center.iter_mut().zip(matrix.row(w as usize)) {
                    *c += v;
                }
            }
            for c in &mut center {
                *c /= n as f64;
            }
            let mut by_distance: Vec<(f64, u32)> = cat
                .word_indices
                .iter()
                .map(|&w| {
                    let row = matrix.row(w as usize);
                    let d = match distance {
                        CenterDistance::Euclidean => row
                            .iter()
                            .zip(&center)
                            .map(|(&x, &c)| (x - c) * (x - c))
                            .sum::<f64>()
                            .sqrt(),
                        CenterDistance::Cosine => {
                            let dot: f64 = row.iter().zip(&center).map(|(&x, &c)| x * c).sum();
                            let nx: f64 = row.iter().map(|&x| x * x).sum::<f64>().sqrt();
                            let nc: f64 = center.iter().map(|&c| c * c).sum::<f64>().sqrt();
                            if nx == 0.0 || nc == 0.0 {
                                2.0
                            } else {
                                1.0 - dot / (nx * nc)
                            }
                        }
                    };
                    (d, w)
                })
                .collect();
            by_distance.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .expect("finite distances")
                    .then_with(|| a.1.cmp(&b.1))
            });
            let mut kept: Vec<u32> = by_distance[..keep].iter().map(|&(_, w)| w).collect();
            kept.sort_unstable();
            Category {
                name: cat.name.clone(),
                word_indices: kept,
            }
        })
        .collect();
    CategoryDataset::new(categories, cats.vocab_len())
}

/// Uniform random m-subset of the categories, original order preserved.
pub fn subsample_categories(
    cats: &CategoryDataset,
    m: usize,
    seed: u64,
) -> Result<CategoryDataset> {
    if m == 0 || m > cats.len() {
        return Err(Error::IndexOutOfRange {
            what: "category count",
            index: m,
            len: cats.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, cats.len(), m).into_vec();
    chosen.sort_unstable();
    let categories = chosen
        .into_iter()
        .map(|j| cats.category(j).clone())
        .collect();
    CategoryDataset::new(categories, cats.vocab_len())
}

/// A space entering the study: either scored as-is, or rebuilt from each
/// subsampled dataset (spaces whose columns are category-defined).
pub enum StudySpace<'a> {
    Fixed {
        label: String,
        space: &'a dyn WordSpace,
    },
    Derived {
        label: String,
        metric: &'static dyn WeightMetric,
    },
}

impl StudySpace<'_> {
    pub fn label(&self) -> &str {
        match self {
            StudySpace::Fixed { label, .. } => label,
            StudySpace::Derived { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyCell {
    pub space: String,
    pub coverage_pct: f64,
    pub num_categories: usize,
    pub mean_score: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubsampleStudyReport {
    pub cells: Vec<StudyCell>,
    pub lambda: Lambda,
    pub repeats: usize,
    pub seed: u64,
}

impl SubsampleStudyReport {
    pub fn cell(&self, space: &str, coverage_pct: f64, num_categories: usize) -> Option<&StudyCell> {
        self.cells.iter().find(|c| {
            c.space == space && c.coverage_pct == coverage_pct && c.num_categories == num_categories
        })
    }

    /// CSV rows: `space,coverage_pct,num_categories,mean_IS`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "space,coverage_pct,num_categories,mean_IS")?;
        for cell in &self.cells {
            writeln!(
                w,
                "{},{},{},{}",
                crate::report::csv_field(&cell.space),
                cell.coverage_pct,
                cell.num_categories,
                cell.mean_score
            )?;
        }
        Ok(())
    }
}

pub struct StudyOptions {
    pub coverage_grid: Vec<f64>,
    pub category_grid: Vec<usize>,
    pub repeats: usize,
    pub lambda: Lambda,
    pub seed: u64,
    pub distance: CenterDistance,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            coverage_grid: vec![40.0, 60.0, 80.0, 100.0],
            category_grid: vec![30, 50, 70, 90, 110],
            repeats: 10,
            lambda: 5,
            seed: 0,
            distance: CenterDistance::Euclidean,
        }
    }
}

/// Scores every study space over the (coverage, category-count) grid.
///
/// Each cell subsamples words once (deterministic), then averages the score
/// over `repeats` seeded category draws; the same draws are shared by all
/// spaces in a cell. Derived spaces recompute their weights from each drawn
/// dataset before scoring.
pub fn subsample_study(
    spaces: &[StudySpace<'_>],
    cats: &CategoryDataset,
    reference: &EmbeddingMatrix,
    options: &StudyOptions,
) -> Result<SubsampleStudyReport> {
    if spaces.is_empty() {
        return Err(Error::EmptyInput { what: "space list" });
    }
    if options.coverage_grid.is_empty() || options.category_grid.is_empty() {
        return Err(Error::EmptyInput { what: "study grid" });
    }
    if options.repeats == 0 {
        return Err(Error::InvalidParameter {
            name: "repeats",
            reason: "must be positive".into(),
        });
    }
    cats.check_bound(reference.len())?;
    for space in spaces {
        if let StudySpace::Fixed { label, space } = space {
            if space.vocab().len() != cats.vocab_len() {
                return Err(Error::InvalidParameter {
                    name: "spaces",
                    reason: format!("space \"{label}\" not bound to the dataset vocabulary"),
                });
            }
        }
    }

    let needs_standardized = spaces.iter().any(|s| {
        matches!(s, StudySpace::Derived { metric, .. }
            if metric.projection_basis() == ProjectionBasis::Standardized)
    });
    let standardized = if needs_standardized {
        Some(standardize(reference)?.0)
    } else {
        None
    };

    let mut sums = vec![vec![0.0f64; options.coverage_grid.len() * options.category_grid.len()]; spaces.len()];
    for (ri, &r) in options.coverage_grid.iter().enumerate() {
        let cats_r = subsample_words(cats, r, reference, options.distance)?;
        for (mi, &m) in options.category_grid.iter().enumerate() {
            let cell = ri * options.category_grid.len() + mi;
            for rep in 0..options.repeats {
                let draw_seed = derive_seed(options.seed, (cell * options.repeats + rep) as u64);
                let draw = subsample_categories(&cats_r, m, draw_seed)?;
                for (si, space) in spaces.iter().enumerate() {
                    let score = match space {
                        StudySpace::Fixed { space, .. } => {
                            interpretability_scores(*space, &draw, &[options.lambda])?[0].score
                        }
                        StudySpace::Derived { metric, .. } => {
                            let weights = metric.compute(reference, &draw)?;
                            let weights = if metric.finalize_for_projection() {
                                finalize_weights(&weights)?
                            } else {
                                weights
                            };
                            let basis = match metric.projection_basis() {
                                ProjectionBasis::Standardized => {
                                    standardized.as_ref().expect("precomputed above")
                                }
                                ProjectionBasis::Raw => reference,
                            };
                            let derived = project(basis, &weights)?;
                            interpretability_scores(&derived, &draw, &[options.lambda])?[0].score
                        }
                    };
                    sums[si][cell] += score;
                }
            }
        }
    }

    let mut cells = Vec::new();
    for (si, space) in spaces.iter().enumerate() {
        for (ri, &r) in options.coverage_grid.iter().enumerate() {
            for (mi, &m) in options.category_grid.iter().enumerate() {
                let cell = ri * options.category_grid.len() + mi;
                cells.push(StudyCell {
                    space: space.label().to_string(),
                    coverage_pct: r,
                    num_categories: m,
                    mean_score: sums[si][cell] / options.repeats as f64,
                });
            }
        }
    }
    Ok(SubsampleStudyReport {
        cells,
        lambda: options.lambda,
        repeats: options.repeats,
        seed: options.seed,
    })
}

/// Mean interpretability over a lambda sweep for one labeled space.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub space: String,
    pub lambda: Lambda,
    pub score: f64,
}

/// CSV rows: `space,lambda,IS`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "space,lambda,IS")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{}",
            crate::report::csv_field(&row.space),
            row.lambda,
            row.score
        )?;
    }
    Ok(())
}
