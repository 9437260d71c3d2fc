//! Shared fixtures: planted-structure embeddings, category datasets with
//! realistic size profiles, and an independent brute-force interpretability
//! oracle.

// Each test binary compiles this module separately and uses a subset of it.
#![allow(dead_code)]

use std::collections::HashSet;

use ndarray::ArrayView2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use semlens_core::data::{
    generate_random_embedding, Category, CategoryDataset, EmbeddingMatrix, Vocabulary,
};
use semlens_core::interpret::Direction;

pub struct PlantedModel {
    pub embedding: EmbeddingMatrix,
    pub cats: CategoryDataset,
    /// planted_dims[j] is the dimension carrying category j's shift.
    pub planted_dims: Vec<usize>,
}

/// Standard-normal matrix with `num_cats` disjoint categories of
/// `words_per_cat` words, category j shifted by `+shift` along dimension j.
pub fn planted_model(
    vocab_len: usize,
    dims: usize,
    num_cats: usize,
    words_per_cat: usize,
    shift: f64,
    seed: u64,
) -> PlantedModel {
    assert!(num_cats <= dims);
    assert!(num_cats * words_per_cat <= vocab_len);
    let base = generate_random_embedding(vocab_len, dims, seed, None).unwrap();
    let mut values = base.values().to_owned();
    let mut categories = Vec::with_capacity(num_cats);
    let mut planted_dims = Vec::with_capacity(num_cats);
    for j in 0..num_cats {
        let words: Vec<u32> = (j * words_per_cat..(j + 1) * words_per_cat)
            .map(|w| w as u32)
            .collect();
        for &w in &words {
            values[(w as usize, j)] += shift;
        }
        categories.push(Category {
            name: format!("planted{j:02}"),
            word_indices: words,
        });
        planted_dims.push(j);
    }
    let embedding =
        EmbeddingMatrix::new(Vocabulary::placeholder(vocab_len), values).unwrap();
    let cats = CategoryDataset::new(categories, vocab_len).unwrap();
    PlantedModel {
        embedding,
        cats,
        planted_dims,
    }
}

/// Planted model plus one nuisance dimension (index 0) carrying a large
/// offset and spread common to all words, the way raw embedding dimensions
/// have nonzero means. Raw-mean weighting latches onto it; distributional
/// weighting does not. Category j's shift lands on dimension `1 + j`.
#[allow(clippy::too_many_arguments)]
pub fn planted_model_with_offset(
    vocab_len: usize,
    dims: usize,
    num_cats: usize,
    words_per_cat: usize,
    shift: f64,
    offset_mean: f64,
    offset_std: f64,
    seed: u64,
) -> PlantedModel {
    assert!(num_cats < dims);
    assert!(num_cats * words_per_cat <= vocab_len);
    let base = generate_random_embedding(vocab_len, dims, seed, None).unwrap();
    let mut values = base.values().to_owned();
    for w in 0..vocab_len {
        values[(w, 0)] = offset_mean + offset_std * values[(w, 0)];
    }
    let mut categories = Vec::with_capacity(num_cats);
    let mut planted_dims = Vec::with_capacity(num_cats);
    for j in 0..num_cats {
        let words: Vec<u32> = (j * words_per_cat..(j + 1) * words_per_cat)
            .map(|w| w as u32)
            .collect();
        for &w in &words {
            values[(w as usize, 1 + j)] += shift;
        }
        categories.push(Category {
            name: format!("planted{j:02}"),
            word_indices: words,
        });
        planted_dims.push(1 + j);
    }
    let embedding =
        EmbeddingMatrix::new(Vocabulary::placeholder(vocab_len), values).unwrap();
    let cats = CategoryDataset::new(categories, vocab_len).unwrap();
    PlantedModel {
        embedding,
        cats,
        planted_dims,
    }
}

/// Category dataset with a size profile like a hand-built semantic taxonomy:
/// `num_cats` categories, sizes drawn from Normal(91, 56) clamped to
/// [11, 300], words drawn from an 11,000-word pool so categories overlap.
pub fn realistic_categories(vocab_len: usize, num_cats: usize, seed: u64) -> CategoryDataset {
    let pool = vocab_len.min(11_000);
    let size_dist = Normal::new(91.0, 56.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let categories = (0..num_cats)
        .map(|j| {
            let size: f64 = size_dist.sample(&mut rng);
            let size = size.round().clamp(11.0, 300.0) as usize;
            let size = size.min(pool);
            let mut words: Vec<u32> = rand::seq::index::sample(&mut rng, pool, size)
                .iter()
                .map(|w| w as u32)
                .collect();
            words.sort_unstable();
            Category {
                name: format!("group{j:03}"),
                word_indices: words,
            }
        })
        .collect();
    CategoryDataset::new(categories, vocab_len).unwrap()
}

/// Literal rank-window/set-intersection interpretability scorer, kept
/// deliberately naive: full sorted word lists, hash-set intersections.
pub struct OracleDimension {
    pub score: f64,
    pub category: usize,
    pub direction: Direction,
}

pub fn oracle_interpretability(
    matrix: ArrayView2<'_, f64>,
    cats: &CategoryDataset,
    lambda: u32,
) -> Vec<OracleDimension> {
    let vocab_len = matrix.nrows();
    let member_sets: Vec<HashSet<u32>> = cats
        .categories()
        .iter()
        .map(|c| c.word_indices.iter().copied().collect())
        .collect();

    (0..matrix.ncols())
        .map(|dim| {
            let mut by_value: Vec<(f64, u32)> = matrix
                .column(dim)
                .iter()
                .enumerate()
                .map(|(w, &v)| (v, w as u32))
                .collect();
            // descending ranks: larger value first, lower index on ties
            by_value.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap()
                    .then_with(|| a.1.cmp(&b.1))
            });
            let descending: Vec<u32> = by_value.iter().map(|&(_, w)| w).collect();
            // ascending ranks: smaller value first, lower index on ties
            by_value.sort_by(|a, b| {
                a.0.partial_cmp(&b.0)
                    .unwrap()
                    .then_with(|| a.1.cmp(&b.1))
            });
            let ascending: Vec<u32> = by_value.iter().map(|&(_, w)| w).collect();

            let mut best = OracleDimension {
                score: -1.0,
                category: 0,
                direction: Direction::Positive,
            };
            for (j, cat) in cats.categories().iter().enumerate() {
                let n = cat.len();
                let window = (lambda as usize * n).min(vocab_len);
                let top: HashSet<u32> = descending[..window].iter().copied().collect();
                let bottom: HashSet<u32> = ascending[..window].iter().copied().collect();
                let plus = 100.0 * member_sets[j].intersection(&top).count() as f64 / n as f64;
                let minus =
                    100.0 * member_sets[j].intersection(&bottom).count() as f64 / n as f64;
                if plus > best.score {
                    best = OracleDimension {
                        score: plus,
                        category: j,
                        direction: Direction::Positive,
                    };
                }
                if minus > best.score {
                    best = OracleDimension {
                        score: minus,
                        category: j,
                        direction: Direction::Negative,
                    };
                }
            }
            best
        })
        .collect()
}
