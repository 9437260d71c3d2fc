//! Input loading and synthesis: embeddings, category datasets, frequency
//! lists, corpus preprocessing.

mod categories;
mod embedding;
mod frequency;
mod preprocess;
mod vocab;

pub use categories::{load_categories, Category, CategoryDataset};
pub use embedding::{generate_random_embedding, load_embedding, EmbeddingMatrix};
pub use frequency::{load_frequency_list, FrequencyList};
pub use preprocess::{preprocess_corpus, preprocess_str, PreprocessStats};
pub use vocab::Vocabulary;
