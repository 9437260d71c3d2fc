//! Decomposes dense word-embedding dimensions into human-defined semantic
//! categories and scores how interpretable a space is, without human raters.
//!
//! The pipeline: load an embedding and a category dataset, weight every
//! (dimension, category) pair by how separably the category's words are
//! distributed along that dimension, then either project the embedding into
//! a category-labeled space, validate the weights by held-out word
//! retrieval, or score interpretability directly from extreme-rank
//! membership.
//!
//! Weighting strategies live behind the [`weights::metric::WeightMetric`]
//! trait and are selected by registry name (`"bhattacharyya"`, `"centers"`).

pub mod data;
pub mod error;
pub mod interpret;
pub mod numeric;
pub mod report;
pub mod retrieval;
pub mod space;
pub mod stats;
pub mod weights;

pub use error::{Error, Result};
