use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use semlens_core::space::{
    category_strengths, decomposition_report, project, project_sparse, ReportAxis,
};
use semlens_core::stats::ks::{ks_normality, KsReference, NormalityOptions};
use semlens_core::stats::standardize;
use semlens_core::weights::metric::ProjectionBasis;
use semlens_core::weights::{finalize_weights, sparsify, CategoryWeightMatrix};

use super::EmbeddingArgs;
use crate::output::{emit, emit_json, Manifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceArg {
    /// Fit mean and deviation from each dimension.
    Fitted,
    /// Compare against the standard normal as-is.
    Standard,
}

#[derive(Debug, Args)]
pub struct NormalityArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    /// Family-wise significance level before Bonferroni correction.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,

    #[arg(long, value_enum, default_value_t = ReferenceArg::Fitted)]
    pub reference: ReferenceArg,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn normality(args: &NormalityArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "normality",
        serde_json::json!({
            "alpha": args.alpha,
            "reference": format!("{:?}", args.reference).to_lowercase(),
            "vocab_limit": args.embedding.vocab_limit,
        }),
        None,
    );
    let embedding = args.embedding.load(&mut manifest)?;
    let options = NormalityOptions {
        alpha: args.alpha,
        reference: match args.reference {
            ReferenceArg::Fitted => KsReference::Fitted,
            ReferenceArg::Standard => KsReference::Standard,
        },
    };
    let report = ks_normality(&embedding, &options)?;
    emit(&args.out, "normality.csv", &mut manifest, |w| {
        report.write_csv(w)
    })?;
    manifest.write(&args.out)?;
    println!(
        "{} of {} dimensions normal at corrected alpha {:.3e}; mean statistic {:.6}",
        report.normal_count(),
        report.dims(),
        report.corrected_alpha,
        report.mean_statistic()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// Weights as produced by the metric.
    Raw,
    /// Normalized to unit column weight and sign-corrected.
    Finalized,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    /// Directory of `<category>.txt` word lists.
    #[arg(long)]
    pub categories: PathBuf,

    /// Weight metric, by registry name.
    #[arg(long, default_value = "bhattacharyya")]
    pub metric: String,

    #[arg(long, value_enum, default_value_t = StateArg::Finalized)]
    pub state: StateArg,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Computes the weight matrix in the requested state, recording metric and
/// lifecycle flags in a sidecar.
fn computed_weights(
    metric: &'static dyn semlens_core::weights::metric::WeightMetric,
    embedding: &semlens_core::data::EmbeddingMatrix,
    cats: &semlens_core::data::CategoryDataset,
    state: StateArg,
) -> Result<CategoryWeightMatrix> {
    let weights = metric.compute(embedding, cats)?;
    if state == StateArg::Finalized && metric.finalize_for_projection() {
        Ok(finalize_weights(&weights)?)
    } else {
        Ok(weights)
    }
}

pub fn decompose(args: &DecomposeArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "decompose",
        serde_json::json!({
            "metric": args.metric,
            "state": format!("{:?}", args.state).to_lowercase(),
        }),
        None,
    );
    let metric = super::resolve_metric(&args.metric)?;
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;
    let weights = computed_weights(metric, &embedding, &cats, args.state)?;

    emit(&args.out, "weights.csv", &mut manifest, |w| {
        weights.write_csv(w)
    })?;
    let sidecar = serde_json::json!({
        "metric": args.metric,
        "state": weights.state(),
        "dims": weights.dims(),
        "categories": weights.num_categories(),
        "variance_floor_hits": weights.clamp_count(),
        "seed": manifest.seed(),
        "sources": manifest.input_digests(),
    });
    emit_json(&args.out, "weights.meta.json", &mut manifest, &sidecar)?;
    manifest.write(&args.out)?;
    println!(
        "wrote {} x {} {:?} weights ({})",
        weights.dims(),
        weights.num_categories(),
        weights.state(),
        args.metric
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[arg(long)]
    pub categories: PathBuf,

    #[arg(long, default_value = "bhattacharyya")]
    pub metric: String,

    /// Keep only the k strongest weights per category before projecting.
    #[arg(long)]
    pub k: Option<usize>,

    /// Normalize/sign-correct before projecting (metrics that support it).
    #[arg(long, value_enum, default_value_t = StateArg::Finalized)]
    pub state: StateArg,

    /// Also write the top-scoring categories for these words.
    #[arg(long, value_delimiter = ',')]
    pub profile_words: Vec<String>,

    /// How many categories per profiled word.
    #[arg(long, default_value_t = 20)]
    pub profile_top: usize,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn project_cmd(args: &ProjectArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "project",
        serde_json::json!({
            "metric": args.metric,
            "state": format!("{:?}", args.state).to_lowercase(),
            "k": args.k,
        }),
        None,
    );
    let metric = super::resolve_metric(&args.metric)?;
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;
    let weights = computed_weights(metric, &embedding, &cats, args.state)?;

    let standardized;
    let basis = match metric.projection_basis() {
        ProjectionBasis::Standardized => {
            standardized = standardize(&embedding)?.0;
            &standardized
        }
        ProjectionBasis::Raw => &embedding,
    };
    let space = match args.k {
        Some(k) => project_sparse(basis, &sparsify(&weights, k)?)?,
        None => project(basis, &weights)?,
    };

    emit(&args.out, "space.csv", &mut manifest, |w| space.write_csv(w))?;
    let sidecar = serde_json::json!({
        "metric": args.metric,
        "state": weights.state(),
        "k": args.k,
        "rows": space.len(),
        "columns": space.num_columns(),
        "seed": manifest.seed(),
        "sources": manifest.input_digests(),
    });
    emit_json(&args.out, "space.meta.json", &mut manifest, &sidecar)?;

    if !args.profile_words.is_empty() {
        let mut rows = String::from("word,category,score\n");
        for word in &args.profile_words {
            match space.word_profile(word) {
                Some(profile) => {
                    for (category, score) in profile.into_iter().take(args.profile_top) {
                        rows.push_str(&format!(
                            "{},{},{score}\n",
                            semlens_core::report::csv_field(word),
                            semlens_core::report::csv_field(&category)
                        ));
                    }
                }
                None => log::warn!("profile word \"{word}\" not in vocabulary"),
            }
        }
        emit(&args.out, "profiles.csv", &mut manifest, |w| {
            use std::io::Write;
            w.write_all(rows.as_bytes())
        })?;
    }
    manifest.write(&args.out)?;
    println!(
        "wrote {} x {} semantic space ({})",
        space.len(),
        space.num_columns(),
        args.metric
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct StrengthsArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[arg(long)]
    pub categories: PathBuf,

    /// Words per random pseudo-category in the baseline.
    #[arg(long, default_value_t = 91)]
    pub baseline_words: usize,

    /// Random pseudo-categories averaged into the baseline.
    #[arg(long, default_value_t = 10)]
    pub resamples: usize,

    #[arg(long)]
    pub seed: u64,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn strengths(args: &StrengthsArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "strengths",
        serde_json::json!({
            "baseline_words": args.baseline_words,
            "resamples": args.resamples,
        }),
        Some(args.seed),
    );
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;
    let metric = super::resolve_metric("bhattacharyya")?;
    let weights = metric.compute(&embedding, &cats)?;
    let report = category_strengths(
        &weights,
        &embedding,
        args.baseline_words,
        args.resamples,
        args.seed,
    )?;

    emit(&args.out, "strengths.csv", &mut manifest, |w| {
        report.write_csv(w)
    })?;
    emit_json(
        &args.out,
        "strengths.meta.json",
        &mut manifest,
        &serde_json::json!({
            "baseline_strength": report.baseline,
            "baseline_words": report.baseline_words,
            "resamples": report.resamples,
            "seed": report.seed,
        }),
    )?;
    manifest.write(&args.out)?;
    let strongest = report.totals.first();
    let weakest = report.totals.last();
    println!(
        "strongest: {:?}; weakest: {:?}; baseline {:.4}",
        strongest, weakest, report.baseline
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    Dimension,
    Category,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[arg(long)]
    pub categories: PathBuf,

    #[arg(long, default_value = "bhattacharyya")]
    pub metric: String,

    #[arg(long, value_enum, default_value_t = StateArg::Raw)]
    pub state: StateArg,

    /// Slice to decompose: one dimension or one category.
    #[arg(long, value_enum)]
    pub axis: AxisArg,

    /// Dimension index, or category index, depending on --axis.
    #[arg(long)]
    pub index: usize,

    /// Entries to keep, strongest first.
    #[arg(long, default_value_t = 20)]
    pub top: usize,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn report_cmd(args: &ReportArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let mut manifest = Manifest::new(
        "report",
        serde_json::json!({
            "metric": args.metric,
            "axis": format!("{:?}", args.axis).to_lowercase(),
            "index": args.index,
            "top": args.top,
        }),
        None,
    );
    let metric = super::resolve_metric(&args.metric)?;
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;
    let weights = computed_weights(metric, &embedding, &cats, args.state)?;
    let axis = match args.axis {
        AxisArg::Dimension => ReportAxis::Dimension(args.index),
        AxisArg::Category => ReportAxis::Category(args.index),
    };
    if args.top == 0 {
        bail!("--top must be positive");
    }
    let entries = decomposition_report(&weights, axis, args.top)?;
    emit(&args.out, "decomposition.csv", &mut manifest, |w| {
        use std::io::Write;
        writeln!(w, "label,weight")?;
        for (label, weight) in &entries {
            writeln!(w, "{},{weight}", semlens_core::report::csv_field(label))?;
        }
        Ok(())
    })?;
    manifest.write(&args.out)?;
    for (label, weight) in entries.iter().take(5) {
        println!("{label}: {weight:.6}");
    }
    Ok(())
}
