pub mod data;
pub mod decompose;
pub mod evaluate;

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use semlens_core::data::{load_embedding, load_frequency_list, EmbeddingMatrix};
use semlens_core::weights::metric::{metric_by_name, WeightMetric};

use crate::output::Manifest;

/// Flags shared by every command that reads an embedding file.
#[derive(Debug, Args)]
pub struct EmbeddingArgs {
    /// Text-format embedding file (token followed by D values per line).
    #[arg(long)]
    pub embedding: PathBuf,

    /// Keep only the most frequent N tokens.
    #[arg(long)]
    pub vocab_limit: Option<usize>,

    /// Frequency list (`token count` per line, descending) used to rank
    /// tokens when limiting the vocabulary.
    #[arg(long)]
    pub frequencies: Option<PathBuf>,
}

impl EmbeddingArgs {
    pub fn load(&self, manifest: &mut Manifest) -> Result<EmbeddingMatrix> {
        manifest.add_input(&self.embedding)?;
        let freq = match &self.frequencies {
            Some(path) => {
                manifest.add_input(path)?;
                Some(load_frequency_list(path)?)
            }
            None => None,
        };
        let embedding = load_embedding(&self.embedding, self.vocab_limit, freq.as_ref())?;
        log::info!(
            "loaded {} x {} embedding from {}",
            embedding.len(),
            embedding.dim(),
            self.embedding.display()
        );
        Ok(embedding)
    }
}

pub fn load_categories_arg(
    dir: &Path,
    vocab: &semlens_core::data::Vocabulary,
    manifest: &mut Manifest,
) -> Result<semlens_core::data::CategoryDataset> {
    manifest.add_input(dir)?;
    let cats = semlens_core::data::load_categories(dir, vocab)?;
    log::info!(
        "loaded {} categories ({} unique words) from {}",
        cats.len(),
        cats.unique_words(),
        dir.display()
    );
    Ok(cats)
}

pub fn resolve_metric(name: &str) -> Result<&'static dyn WeightMetric> {
    Ok(metric_by_name(name)?)
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Parses `5`, `1,3,5`, or `1-10` into a sorted list of positive integers.
pub fn parse_int_spec(s: &str) -> std::result::Result<Vec<u32>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u32 = lo.trim().parse().map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: u32 = hi.trim().parse().map_err(|_| format!("bad range end {hi:?}"))?;
            if lo == 0 || hi < lo {
                return Err(format!("bad range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            let v: u32 = part.parse().map_err(|_| format!("bad integer {part:?}"))?;
            if v == 0 {
                return Err("values must be positive".into());
            }
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

/// Argument-level mistake: reported on exit code 2 rather than 1.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for UsageError {}

/// A seed is mandatory wherever randomness is involved; there is no
/// wall-clock fallback.
pub fn require_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    match seed {
        Some(s) => Ok(s),
        None => Err(UsageError(format!("--seed is required for {what}")).into()),
    }
}
