use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use semlens_core::data::{generate_random_embedding, EmbeddingMatrix};
use semlens_core::interpret::subsample::{
    subsample_study, write_sweep_csv, CenterDistance, StudyOptions, StudySpace, SweepRow,
};
use semlens_core::interpret::interpretability_scores;
use semlens_core::numeric::derive_seed;
use semlens_core::retrieval::{retrieval_test, RetrievalOptions};
use semlens_core::space::{project, SemanticSpace, WordSpace};
use semlens_core::stats::standardize;
use semlens_core::weights::finalize_weights;
use semlens_core::weights::metric::ProjectionBasis;

use super::{parse_int_spec, EmbeddingArgs};
use crate::output::{emit, emit_json, Manifest};

#[derive(Debug, Args)]
pub struct RetrievalArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[arg(long)]
    pub categories: PathBuf,

    #[arg(long, default_value = "bhattacharyya")]
    pub metric: String,

    /// Sparsification levels, e.g. `5,7,10` or `5-10`.
    #[arg(long, value_parser = parse_int_spec, default_value = "5,7,10,15,25,50,100,200,300")]
    pub ks: Vec<Vec<u32>>,

    #[arg(long, default_value_t = 10)]
    pub repeats: usize,

    /// Training fraction of each category.
    #[arg(long, default_value_t = 0.6)]
    pub split: f64,

    #[arg(long)]
    pub seed: u64,

    /// Use raw weights instead of normalized/sign-corrected ones.
    #[arg(long)]
    pub raw_weights: bool,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn retrieval(args: &RetrievalArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let ks: Vec<usize> = args.ks.iter().flatten().map(|&k| k as usize).collect();
    let mut manifest = Manifest::new(
        "retrieval",
        serde_json::json!({
            "metric": args.metric,
            "ks": ks,
            "repeats": args.repeats,
            "split": args.split,
            "finalize": !args.raw_weights,
        }),
        Some(args.seed),
    );
    let metric = super::resolve_metric(&args.metric)?;
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;
    let options = RetrievalOptions {
        ks,
        repeats: args.repeats,
        split: args.split,
        seed: args.seed,
        finalize: !args.raw_weights,
    };
    let report = retrieval_test(&embedding, &cats, metric, &options)?;

    emit(&args.out, "retrieval.csv", &mut manifest, |w| {
        report.write_csv(w)
    })?;
    emit_json(&args.out, "retrieval.json", &mut manifest, &report)?;
    manifest.write(&args.out)?;
    for cell in report.cells.iter().filter(|c| c.multiplier == 1) {
        println!(
            "k={:<4} top-n {:.2}% +- {:.2}",
            cell.k, cell.mean_accuracy, cell.std_accuracy
        );
    }
    Ok(())
}

/// Which space an interpretability run scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpaceArg {
    /// The embedding file as loaded.
    Dense,
    /// A synthetic standard-normal space of the same shape.
    Random,
    /// Separation-weighted projection of the standardized embedding.
    Bhattacharyya,
    /// Category-center projection of the raw embedding.
    Centers,
}

impl SpaceArg {
    fn label(self) -> &'static str {
        match self {
            SpaceArg::Dense => "dense",
            SpaceArg::Random => "random",
            SpaceArg::Bhattacharyya => "bhattacharyya",
            SpaceArg::Centers => "centers",
        }
    }
}

#[derive(Debug, Args)]
pub struct InterpretabilityArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[arg(long)]
    pub categories: PathBuf,

    #[arg(long, value_enum, default_value_t = SpaceArg::Dense)]
    pub space: SpaceArg,

    /// Window relaxation values, e.g. `5`, `1,3,5`, or `1-10`.
    #[arg(long, value_parser = parse_int_spec, default_value = "1-10")]
    pub lambda: Vec<Vec<u32>>,

    /// Required when --space random.
    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Builds the requested space over the loaded embedding's vocabulary.
pub fn materialize_space(
    space: SpaceArg,
    embedding: &EmbeddingMatrix,
    cats: &semlens_core::data::CategoryDataset,
    seed: Option<u64>,
) -> Result<Option<SpaceHolder>> {
    Ok(match space {
        SpaceArg::Dense => None,
        SpaceArg::Random => {
            let seed = super::require_seed(seed, "--space random")?;
            Some(SpaceHolder::Embedding(generate_random_embedding(
                embedding.len(),
                embedding.dim(),
                seed,
                Some(embedding.vocab().clone()),
            )?))
        }
        SpaceArg::Bhattacharyya | SpaceArg::Centers => {
            let metric = super::resolve_metric(space.label())?;
            let weights = metric.compute(embedding, cats)?;
            let weights = if metric.finalize_for_projection() {
                finalize_weights(&weights)?
            } else {
                weights
            };
            let standardized;
            let basis = match metric.projection_basis() {
                ProjectionBasis::Standardized => {
                    standardized = standardize(embedding)?.0;
                    &standardized
                }
                ProjectionBasis::Raw => embedding,
            };
            Some(SpaceHolder::Semantic(project(basis, &weights)?))
        }
    })
}

pub enum SpaceHolder {
    Embedding(EmbeddingMatrix),
    Semantic(SemanticSpace),
}

impl SpaceHolder {
    pub fn as_word_space(&self) -> &dyn WordSpace {
        match self {
            SpaceHolder::Embedding(e) => e,
            SpaceHolder::Semantic(s) => s,
        }
    }
}

pub fn interpretability(args: &InterpretabilityArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let lambdas: Vec<u32> = args.lambda.iter().flatten().copied().collect();
    let mut manifest = Manifest::new(
        "interpretability",
        serde_json::json!({
            "space": args.space.label(),
            "lambda": lambdas,
        }),
        args.seed,
    );
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;
    let holder = materialize_space(args.space, &embedding, &cats, args.seed)?;
    let space: &dyn WordSpace = match &holder {
        Some(h) => h.as_word_space(),
        None => &embedding,
    };

    let reports = interpretability_scores(space, &cats, &lambdas)?;
    let sweep: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow {
            space: args.space.label().to_string(),
            lambda: r.lambda,
            score: r.score,
        })
        .collect();
    emit(&args.out, "sweep.csv", &mut manifest, |w| {
        write_sweep_csv(&sweep, w)
    })?;
    for report in &reports {
        let name = format!("dims_lambda_{}.csv", report.lambda);
        emit(&args.out, &name, &mut manifest, |w| report.write_csv(w))?;
    }
    manifest.write(&args.out)?;
    for report in &reports {
        println!(
            "lambda {:<2} IS {:.2}% ({} dims)",
            report.lambda,
            report.score,
            report.dims()
        );
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistanceArg {
    Euclidean,
    Cosine,
}

/// Optional JSON override so a whole grid run fits in one flag.
#[derive(Debug, Default, serde::Deserialize)]
pub struct StudyConfig {
    pub spaces: Option<Vec<String>>,
    pub coverage: Option<Vec<f64>>,
    pub num_categories: Option<Vec<usize>>,
    pub repeats: Option<usize>,
    pub lambda: Option<u32>,
    pub seed: Option<u64>,
    pub distance: Option<String>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub embedding: EmbeddingArgs,

    #[arg(long)]
    pub categories: PathBuf,

    /// Spaces to score, comma separated (dense, random, bhattacharyya,
    /// centers).
    #[arg(long, value_delimiter = ',')]
    pub spaces: Vec<String>,

    /// Word-coverage grid in percent.
    #[arg(long, value_delimiter = ',')]
    pub coverage: Vec<f64>,

    /// Category-count grid.
    #[arg(long, value_delimiter = ',')]
    pub num_categories: Vec<usize>,

    #[arg(long)]
    pub repeats: Option<usize>,

    #[arg(long)]
    pub lambda: Option<u32>,

    #[arg(long)]
    pub seed: Option<u64>,

    #[arg(long, value_enum)]
    pub distance: Option<DistanceArg>,

    /// JSON file supplying any of the grid parameters; explicit flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

pub fn study(args: &StudyArgs) -> Result<()> {
    super::ensure_out_dir(&args.out)?;
    let config: StudyConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => StudyConfig::default(),
    };

    let space_names: Vec<String> = if args.spaces.is_empty() {
        config.spaces.unwrap_or_else(|| {
            vec![
                "dense".into(),
                "random".into(),
                "bhattacharyya".into(),
                "centers".into(),
            ]
        })
    } else {
        args.spaces.clone()
    };
    let coverage = if args.coverage.is_empty() {
        config.coverage.unwrap_or_else(|| vec![40.0, 60.0, 80.0, 100.0])
    } else {
        args.coverage.clone()
    };
    let num_categories = if args.num_categories.is_empty() {
        config
            .num_categories
            .unwrap_or_else(|| vec![30, 50, 70, 90, 110])
    } else {
        args.num_categories.clone()
    };
    let repeats = args.repeats.or(config.repeats).unwrap_or(10);
    let lambda = args.lambda.or(config.lambda).unwrap_or(5);
    let seed = super::require_seed(args.seed.or(config.seed), "study")?;
    let distance = match args.distance {
        Some(DistanceArg::Euclidean) => CenterDistance::Euclidean,
        Some(DistanceArg::Cosine) => CenterDistance::Cosine,
        None => match config.distance.as_deref() {
            Some("cosine") => CenterDistance::Cosine,
            Some("euclidean") | None => CenterDistance::Euclidean,
            Some(other) => bail!("unknown distance {other:?}"),
        },
    };

    let mut manifest = Manifest::new(
        "study",
        serde_json::json!({
            "spaces": space_names,
            "coverage": coverage,
            "num_categories": num_categories,
            "repeats": repeats,
            "lambda": lambda,
            "distance": distance,
        }),
        Some(seed),
    );
    let embedding = args.embedding.load(&mut manifest)?;
    let cats = super::load_categories_arg(&args.categories, embedding.vocab(), &mut manifest)?;

    // The random space shares the reference's vocabulary and shape; its seed
    // is derived from the study seed.
    let random_space = if space_names.iter().any(|n| n == "random") {
        Some(generate_random_embedding(
            embedding.len(),
            embedding.dim(),
            derive_seed(seed, u64::from_le_bytes(*b"randspce")),
            Some(embedding.vocab().clone()),
        )?)
    } else {
        None
    };
    let mut spaces: Vec<StudySpace> = Vec::new();
    for name in &space_names {
        match name.as_str() {
            "dense" => spaces.push(StudySpace::Fixed {
                label: "dense".into(),
                space: &embedding,
            }),
            "random" => spaces.push(StudySpace::Fixed {
                label: "random".into(),
                space: random_space.as_ref().expect("generated above"),
            }),
            metric_name => {
                let metric = super::resolve_metric(metric_name)?;
                spaces.push(StudySpace::Derived {
                    label: metric_name.to_string(),
                    metric,
                });
            }
        }
    }

    let options = StudyOptions {
        coverage_grid: coverage,
        category_grid: num_categories,
        repeats,
        lambda,
        seed,
        distance,
    };
    let report = subsample_study(&spaces, &cats, &embedding, &options)?;
    emit(&args.out, "study.csv", &mut manifest, |w| {
        report.write_csv(w)
    })?;
    emit_json(&args.out, "study.json", &mut manifest, &report)?;
    manifest.write(&args.out)?;
    println!("{} study cells written", report.cells.len());
    Ok(())
}
