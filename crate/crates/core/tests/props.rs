//! Property tests for the statistical core and pipeline invariants.

mod common;

use ndarray::Array2;
use proptest::prelude::*;
use semlens_core::data::{
    generate_random_embedding, preprocess_str, Category, CategoryDataset, EmbeddingMatrix,
};
use semlens_core::interpret::interpretability_scores;
use semlens_core::retrieval::{retrieval_test, RetrievalOptions, MULTIPLIERS};
use semlens_core::space::project;
use semlens_core::stats::{bhattacharyya_distance, standardize, GaussianSummary};
use semlens_core::weights::metric::metric_by_name;
use semlens_core::weights::{sparsify, CategoryWeightMatrix, WeightState};

fn summary_strategy() -> impl Strategy<Value = GaussianSummary> {
    (-3.0f64..3.0, 0.1f64..9.0, 2usize..500)
        .prop_map(|(mean, variance, count)| GaussianSummary::new(mean, variance, count).unwrap())
}

proptest! {
    #[test]
    fn separation_symmetric_and_nonnegative(p in summary_strategy(), q in summary_strategy()) {
        let pq = bhattacharyya_distance(&p, &q);
        let qp = bhattacharyya_distance(&q, &p);
        prop_assert_eq!(pq.distance, qp.distance);
        prop_assert!(pq.distance >= 0.0);
        if p.mean == q.mean && p.variance == q.variance {
            prop_assert_eq!(pq.distance, 0.0);
        } else if (p.mean - q.mean).abs() > 1e-9 || (p.variance - q.variance).abs() > 1e-9 {
            prop_assert!(pq.distance > 0.0);
        }
    }

    #[test]
    fn separation_affine_invariant(
        p in summary_strategy(),
        q in summary_strategy(),
        a in 0.2f64..5.0,
        b in -5.0f64..5.0,
    ) {
        let tp = GaussianSummary::new(a * p.mean + b, a * a * p.variance, p.count).unwrap();
        let tq = GaussianSummary::new(a * q.mean + b, a * a * q.variance, q.count).unwrap();
        let before = bhattacharyya_distance(&p, &q).distance;
        let after = bhattacharyya_distance(&tp, &tq).distance;
        prop_assert!((before - after).abs() <= 1e-12 * before.max(1.0),
            "before {before}, after {after}");
    }

    #[test]
    fn separation_strictly_grows_with_mean_gap(
        base in summary_strategy(),
        q in summary_strategy(),
        extra in 0.01f64..5.0,
    ) {
        let near = GaussianSummary::new(q.mean + (base.mean - q.mean).abs(), base.variance, base.count).unwrap();
        let far = GaussianSummary::new(near.mean + extra, base.variance, base.count).unwrap();
        let d_near = bhattacharyya_distance(&near, &q).distance;
        let d_far = bhattacharyya_distance(&far, &q).distance;
        prop_assert!(d_far > d_near);
    }

    #[test]
    fn standardize_is_idempotent(seed in 0u64..1000, rows in 20usize..120, dims in 1usize..8) {
        let e = generate_random_embedding(rows, dims, seed, None).unwrap();
        let (once, _) = standardize(&e).unwrap();
        let (twice, _) = standardize(&once).unwrap();
        for (a, b) in once.values().iter().zip(twice.values().iter()) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn preprocess_output_grammar_and_idempotence(input in "\\PC*") {
        let once = preprocess_str(&input);
        for line in once.lines() {
            prop_assert!(!line.starts_with(' ') && !line.ends_with(' '), "{line:?}");
            prop_assert!(!line.contains("  "), "{line:?}");
            for token in line.split(' ').filter(|t| !t.is_empty()) {
                prop_assert!(token.chars().all(|c| c.is_alphabetic() && !c.is_uppercase()),
                    "token {token:?}");
            }
        }
        let twice = preprocess_str(&once);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn embedding_text_round_trip_is_exact(
        seed in 0u64..500,
        rows in 1usize..40,
        dims in 1usize..6,
        scale in prop::sample::select(vec![1e-300f64, 1e-9, 1.0, 1e9, 1e300]),
    ) {
        let e = generate_random_embedding(rows, dims, seed, None).unwrap();
        let scaled = EmbeddingMatrix::new(
            e.vocab().clone(),
            e.values().mapv(|v| v * scale),
        ).unwrap();
        let mut buf = Vec::new();
        scaled.write_text(&mut buf).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt");
        std::fs::write(&path, &buf).unwrap();
        let back = semlens_core::data::load_embedding(&path, None, None).unwrap();
        prop_assert_eq!(scaled.values(), back.values());
    }

    #[test]
    fn sparsify_is_a_projection(seed in 0u64..500, k in 1usize..6) {
        let e = generate_random_embedding(30, 6, seed, None).unwrap();
        let names: Vec<String> = (0..3).map(|j| format!("c{j}")).collect();
        let values = Array2::from_shape_fn((6, 3), |(i, j)| e.values()[(i + j, j)]);
        let w = CategoryWeightMatrix::from_values(values, WeightState::Centers, names.clone()).unwrap();
        let once = sparsify(&w, k).unwrap();
        let redense = CategoryWeightMatrix::from_values(once.to_dense(), WeightState::Centers, names).unwrap();
        let twice = sparsify(&redense, k).unwrap();
        for j in 0..3 {
            prop_assert_eq!(once.category_entries(j), twice.category_entries(j));
        }
    }

    #[test]
    fn projection_is_linear(seed in 0u64..300, alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let e = generate_random_embedding(25, 4, seed, None).unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let w1 = Array2::from_shape_fn((4, 2), |(i, j)| ((i * 2 + j) as f64 - 3.0) / 4.0);
        let w2 = Array2::from_shape_fn((4, 2), |(i, j)| ((i as f64) - (j as f64)) / 3.0);
        let combined = CategoryWeightMatrix::from_values(
            alpha * &w1 + beta * &w2, WeightState::Centers, names.clone()).unwrap();
        let m1 = CategoryWeightMatrix::from_values(w1, WeightState::Centers, names.clone()).unwrap();
        let m2 = CategoryWeightMatrix::from_values(w2, WeightState::Centers, names).unwrap();
        let lhs = project(&e, &combined).unwrap();
        let p1 = project(&e, &m1).unwrap();
        let p2 = project(&e, &m2).unwrap();
        for ((l, a), b) in lhs.values().iter().zip(p1.values().iter()).zip(p2.values().iter()) {
            prop_assert!((l - (alpha * a + beta * b)).abs() < 1e-9);
        }
    }

    #[test]
    fn category_permutation_equivariance(seed in 0u64..300) {
        let e = generate_random_embedding(60, 5, seed, None).unwrap();
        let cats = CategoryDataset::new(
            (0..4)
                .map(|j| Category {
                    name: format!("c{j}"),
                    word_indices: (j * 12..(j + 1) * 12).map(|w| w as u32).collect(),
                })
                .collect(),
            60,
        ).unwrap();
        let perm = [2usize, 0, 3, 1];
        let permuted = CategoryDataset::new(
            perm.iter().map(|&j| cats.category(j).clone()).collect(),
            60,
        ).unwrap();
        let metric = metric_by_name("bhattacharyya").unwrap();
        let w = metric.compute(&e, &cats).unwrap();
        let wp = metric.compute(&e, &permuted).unwrap();
        for (out_col, &src_col) in perm.iter().enumerate() {
            for i in 0..w.dims() {
                prop_assert_eq!(wp.values()[(i, out_col)], w.values()[(i, src_col)]);
            }
        }
        let (es, _) = standardize(&e).unwrap();
        let space = project(&es, &semlens_core::weights::finalize_weights(&w).unwrap()).unwrap();
        let space_p = project(&es, &semlens_core::weights::finalize_weights(&wp).unwrap()).unwrap();
        for (out_col, &src_col) in perm.iter().enumerate() {
            for r in 0..space.len() {
                prop_assert_eq!(space_p.values()[(r, out_col)], space.values()[(r, src_col)]);
            }
        }
    }

    #[test]
    fn interpretability_scale_shift_invariant(
        seed in 0u64..300,
        a in 0.25f64..4.0,
        b in -10.0f64..10.0,
        lambda in 1u32..4,
    ) {
        let e = generate_random_embedding(80, 3, seed, None).unwrap();
        let cats = CategoryDataset::new(
            vec![
                Category { name: "one".into(), word_indices: (0..10).collect() },
                Category { name: "two".into(), word_indices: (30..45).collect() },
            ],
            80,
        ).unwrap();
        let transformed = EmbeddingMatrix::new(
            e.vocab().clone(),
            e.values().mapv(|v| a * v + b),
        ).unwrap();
        let before = interpretability_scores(&e, &cats, &[lambda]).unwrap();
        let after = interpretability_scores(&transformed, &cats, &[lambda]).unwrap();
        prop_assert_eq!(before[0].score, after[0].score);
        for (x, y) in before[0].dimension_scores.iter().zip(after[0].dimension_scores.iter()) {
            prop_assert_eq!(x.score, y.score);
            prop_assert_eq!(x.category, y.category);
            prop_assert_eq!(x.direction, y.direction);
        }
    }
}

/// Random-embedding retrieval accuracy sits at the chance level
/// `100 * m * n / (V - |train|)` within three standard deviations of the
/// repetition mean.
#[test]
fn retrieval_on_random_embedding_matches_chance() {
    let vocab_len = 3000;
    let e = generate_random_embedding(vocab_len, 16, 4242, None).unwrap();
    let cats = CategoryDataset::new(
        (0..4)
            .map(|j| Category {
                name: format!("c{j}"),
                word_indices: (j * 50..(j + 1) * 50).map(|w| w as u32).collect(),
            })
            .collect(),
        vocab_len,
    )
    .unwrap();
    let repeats = 8;
    let options = RetrievalOptions {
        ks: vec![3],
        repeats,
        split: 0.6,
        seed: 99,
        finalize: true,
    };
    for metric_name in ["bhattacharyya", "centers"] {
        let metric = metric_by_name(metric_name).unwrap();
        let report = retrieval_test(&e, &cats, metric, &options).unwrap();
        // per category: 50 words -> 30 train, 20 test
        let n = 20.0;
        let available = vocab_len as f64 - 30.0;
        for (m, &multiplier) in MULTIPLIERS.iter().enumerate() {
            let chance = 100.0 * multiplier as f64 * n / available;
            let cell = report.cell(3, multiplier).unwrap();
            let sem = cell.std_accuracy / (repeats as f64).sqrt();
            assert!(
                (cell.mean_accuracy - chance).abs() <= 3.0 * sem.max(0.05),
                "{metric_name} multiplier {multiplier}: mean {} vs chance {chance} (sem {sem})",
                cell.mean_accuracy
            );
            let _ = m;
        }
    }
}

/// Rerun stability: two embeddings with identical planted structure but
/// different sampling noise decompose the same way — per-category strength
/// totals agree within 10% and each category's argmax lands on its planted
/// dimension in both.
/// Block-planted model: category j's words are shifted on a block of ten
/// dimensions, the first of the block more strongly than the rest. The
/// per-dimension sampling noise then averages out of the column totals.
fn block_planted(seed: u64) -> (EmbeddingMatrix, CategoryDataset, Vec<usize>) {
    let (vocab_len, dims, num_cats, wpc) = (2000, 64, 6, 150);
    let base = generate_random_embedding(vocab_len, dims, seed, None).unwrap();
    let mut values = base.values().to_owned();
    let mut cats = Vec::new();
    let mut primary = Vec::new();
    for j in 0..num_cats {
        let words: Vec<u32> = (j * wpc..(j + 1) * wpc).map(|w| w as u32).collect();
        for &w in &words {
            for t in 0..10 {
                let shift = if t == 0 { 3.0 } else { 2.0 };
                values[(w as usize, 10 * j + t)] += shift;
            }
        }
        primary.push(10 * j);
        cats.push(Category {
            name: format!("c{j}"),
            word_indices: words,
        });
    }
    (
        EmbeddingMatrix::new(
            semlens_core::data::Vocabulary::placeholder(vocab_len),
            values,
        )
        .unwrap(),
        CategoryDataset::new(cats, vocab_len).unwrap(),
        primary,
    )
}

#[test]
fn planted_decomposition_is_stable_across_reruns() {
    let metric = metric_by_name("bhattacharyya").unwrap();
    let (ea, ca, primary) = block_planted(51);
    let (eb, cb, _) = block_planted(52);
    let wa = metric.compute(&ea, &ca).unwrap();
    let wb = metric.compute(&eb, &cb).unwrap();
    let totals_a = wa.column_abs_sums();
    let totals_b = wb.column_abs_sums();
    for j in 0..ca.len() {
        let rel = (totals_a[j] - totals_b[j]).abs() / totals_a[j].max(totals_b[j]);
        assert!(rel <= 0.10, "category {j}: {} vs {}", totals_a[j], totals_b[j]);
        for w in [&wa, &wb] {
            let argmax = w
                .values()
                .column(j)
                .iter()
                .enumerate()
                .max_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            assert_eq!(argmax, primary[j]);
        }
    }
}

/// A dimension planted to encode exactly one category reports that category
/// far ahead of the rest.
#[test]
fn planted_dimension_report_is_dominated_by_its_category() {
    let model = common::planted_model(1500, 30, 5, 30, 4.0, 77);
    let metric = metric_by_name("bhattacharyya").unwrap();
    let weights = metric.compute(&model.embedding, &model.cats).unwrap();
    for (j, &dim) in model.planted_dims.iter().enumerate() {
        let entries = semlens_core::space::decomposition_report(
            &weights,
            semlens_core::space::ReportAxis::Dimension(dim),
            5,
        )
        .unwrap();
        assert_eq!(entries[0].0, model.cats.category(j).name);
        assert!(
            entries[0].1 > 10.0 * entries[1].1.abs(),
            "dimension {dim} not dominated: {entries:?}"
        );
    }
}

/// A pseudo-category of randomly drawn words has a total strength
/// indistinguishable from the resampled baseline (within three standard
/// deviations of 20 resamples).
#[test]
fn random_category_strength_sits_on_the_baseline() {
    use rand::SeedableRng;
    let vocab_len = 5000;
    let words = 91;
    let e = generate_random_embedding(vocab_len, 20, 606, None).unwrap();
    let metric = metric_by_name("bhattacharyya").unwrap();

    // resampling oracle: 20 independent pseudo-categories
    let mut sums = Vec::new();
    for resample in 0..20u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(777);
        rng.set_stream(resample);
        let mut indices: Vec<u32> = rand::seq::index::sample(&mut rng, vocab_len, words)
            .iter()
            .map(|w| w as u32)
            .collect();
        indices.sort_unstable();
        let pseudo = CategoryDataset::new(
            vec![Category {
                name: "resample".into(),
                word_indices: indices,
            }],
            vocab_len,
        )
        .unwrap();
        let w = metric.compute(&e, &pseudo).unwrap();
        sums.push(w.column_abs_sums()[0]);
    }
    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
    let var = sums.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (sums.len() - 1) as f64;
    let std = var.sqrt();

    // one more random "category", drawn from a different stream
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12345);
    let mut indices: Vec<u32> = rand::seq::index::sample(&mut rng, vocab_len, words)
        .iter()
        .map(|w| w as u32)
        .collect();
    indices.sort_unstable();
    let candidate = CategoryDataset::new(
        vec![Category {
            name: "candidate".into(),
            word_indices: indices,
        }],
        vocab_len,
    )
    .unwrap();
    let total = metric.compute(&e, &candidate).unwrap().column_abs_sums()[0];
    assert!(
        (total - mean).abs() <= 3.0 * std,
        "random category total {total} vs baseline {mean} +- {std}"
    );

    // and the library's baseline agrees with the oracle's location
    let w = metric.compute(&e, &candidate).unwrap();
    let report =
        semlens_core::space::category_strengths(&w, &e, words, 20, 777).unwrap();
    assert!(
        (report.baseline - mean).abs() <= 3.0 * std,
        "library baseline {} vs oracle {mean} +- {std}",
        report.baseline
    );
}

/// The optimized scorer agrees with the naive set-intersection oracle on a
/// spread of random small instances.
#[test]
fn interpretability_matches_oracle_on_small_instances() {
    use rand::Rng;
    let mut seed_rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(7);
    for case in 0..25 {
        let vocab_len = seed_rng.random_range(20..=200);
        let dims = seed_rng.random_range(1..=10);
        let num_cats = seed_rng.random_range(1..=5);
        let lambda = seed_rng.random_range(1..=4);
        let e = generate_random_embedding(vocab_len, dims, 1000 + case, None).unwrap();
        let mut cats = Vec::new();
        for j in 0..num_cats {
            let size = seed_rng.random_range(2..=(vocab_len / 2).max(2));
            let mut words: Vec<u32> =
                rand::seq::index::sample(&mut seed_rng, vocab_len, size.min(vocab_len))
                    .iter()
                    .map(|w| w as u32)
                    .collect();
            words.sort_unstable();
            cats.push(Category {
                name: format!("c{j}"),
                word_indices: words,
            });
        }
        let cats = CategoryDataset::new(cats, vocab_len).unwrap();
        let fast = interpretability_scores(&e, &cats, &[lambda]).unwrap();
        let slow = common::oracle_interpretability(e.values(), &cats, lambda);
        for (dim, (f, s)) in fast[0].dimension_scores.iter().zip(&slow).enumerate() {
            assert_eq!(f.score, s.score, "case {case} dim {dim}");
            assert_eq!(f.category, s.category, "case {case} dim {dim}");
            assert_eq!(f.direction, s.direction, "case {case} dim {dim}");
        }
    }
}
