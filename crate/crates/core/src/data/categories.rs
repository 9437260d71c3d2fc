use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::data::vocab::Vocabulary;
use crate::error::{Error, Result};

/// One named semantic category, holding positions into the bound vocabulary,
/// sorted ascending and unique.
#[derive(Debug, Clone)]
pub struct Category {
    pub name: String,
    pub word_indices: Vec<u32>,
}

impl Category {
    pub fn len(&self) -> usize {
        self.word_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_indices.is_empty()
    }
}

/// An ordered collection of semantic categories bound to one vocabulary.
///
/// Categories may share words; within a category words are unique. Every
/// index is valid for the vocabulary the dataset was built against.
#[derive(Debug, Clone)]
pub struct CategoryDataset {
    categories: Vec<Category>,
    vocab_len: usize,
}

impl CategoryDataset {
    pub fn new(categories: Vec<Category>, vocab_len: usize) -> Result<Self> {
        let mut names = std::collections::HashSet::new();
        for cat in &categories {
            if cat.word_indices.is_empty() {
                return Err(Error::EmptyInput { what: "category" });
            }
            if !names.insert(cat.name.as_str()) {
                return Err(Error::InvalidParameter {
                    name: "categories",
                    reason: format!("duplicate category name \"{}\"", cat.name),
                });
            }
            let mut prev: Option<u32> = None;
            for &w in &cat.word_indices {
                if w as usize >= vocab_len {
                    return Err(Error::IndexOutOfRange {
                        what: "vocabulary",
                        index: w as usize,
                        len: vocab_len,
                    });
                }
                if prev.is_some_and(|p| p >= w) {
                    return Err(Error::InvalidParameter {
                        name: "categories",
                        reason: format!(
                            "word indices of \"{}\" not sorted unique",
                            cat.name
                        ),
                    });
                }
                prev = Some(w);
            }
        }
        Ok(CategoryDataset {
            categories,
            vocab_len,
        })
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn category(&self, j: usize) -> &Category {
        &self.categories[j]
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }

    /// Length of the vocabulary this dataset is bound to.
    pub fn vocab_len(&self) -> usize {
        self.vocab_len
    }

    /// Number of distinct words across all categories.
    pub fn unique_words(&self) -> usize {
        let mut all: Vec<u32> = self
            .categories
            .iter()
            .flat_map(|c| c.word_indices.iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }

    /// Checks that ops mixing this dataset with a matrix of `rows` words are
    /// index-compatible.
    pub fn check_bound(&self, rows: usize) -> Result<()> {
        if self.vocab_len != rows {
            return Err(Error::VocabMismatch {
                expected: self.vocab_len,
                found: rows,
            });
        }
        Ok(())
    }
}

/// Loads a directory of `<category>.txt` files, one word per line.
///
/// Category names are the file stems, ordered lexicographically. Words are
/// lowercased; words missing from `vocab` are dropped with a warning;
/// duplicates within a category collapse silently; categories left empty are
/// excluded with a warning. Zero remaining categories is an error.
pub fn load_categories(path: impl AsRef<Path>, vocab: &Vocabulary) -> Result<CategoryDataset> {
    let path = path.as_ref();
    let mut files: Vec<_> = std::fs::read_dir(path)
        .map_err(|e| Error::io(path, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(path, e))?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    files.sort();

    let mut categories = Vec::new();
    for file_path in files {
        let name = file_path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        if name.is_empty() {
            continue;
        }
        let file = File::open(&file_path).map_err(|e| Error::io(&file_path, e))?;
        let mut indices: Vec<u32> = Vec::new();
        let mut dropped = 0usize;
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(&file_path, e))?;
            let word = line.trim().to_lowercase();
            if word.is_empty() {
                continue;
            }
            match vocab.position(&word) {
                Some(pos) => indices.push(pos),
                None => dropped += 1,
            }
        }
        if dropped > 0 {
            log::warn!("category \"{name}\": dropped {dropped} out-of-vocabulary words");
        }
        indices.sort_unstable();
        indices.dedup();
        if indices.is_empty() {
            log::warn!("category \"{name}\": empty after vocabulary filtering, excluded");
            continue;
        }
        categories.push(Category {
            name,
            word_indices: indices,
        });
    }

    if categories.is_empty() {
        return Err(Error::NoCategories {
            path: path.to_path_buf(),
        });
    }
    CategoryDataset::new(categories, vocab.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn vocab() -> Vocabulary {
        Vocabulary::new(
            ["iron", "gold", "lead", "cat", "dog", "bird"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
        .unwrap()
    }

    fn write_category(dir: &Path, name: &str, words: &[&str]) {
        let mut f = File::create(dir.join(format!("{name}.txt"))).unwrap();
        for w in words {
            writeln!(f, "{w}").unwrap();
        }
    }

    #[test]
    fn loads_filters_and_orders() {
        let dir = tempfile::tempdir().unwrap();
        write_category(dir.path(), "metals", &["Gold", "iron", "unobtainium", "gold"]);
        write_category(dir.path(), "animals", &["dog", "cat", "bird"]);
        let cats = load_categories(dir.path(), &vocab()).unwrap();
        assert_eq!(cats.len(), 2);
        // lexicographic by file name
        assert_eq!(cats.category(0).name, "animals");
        assert_eq!(cats.category(1).name, "metals");
        // "unobtainium" dropped, "gold" deduped
        assert_eq!(cats.category(1).word_indices, vec![0, 1]);
        assert_eq!(cats.unique_words(), 5);
    }

    #[test]
    fn empty_categories_are_excluded_and_all_empty_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_category(dir.path(), "ghosts", &["spectre", "wraith"]);
        assert!(matches!(
            load_categories(dir.path(), &vocab()),
            Err(Error::NoCategories { .. })
        ));
        write_category(dir.path(), "metals", &["iron"]);
        let cats = load_categories(dir.path(), &vocab()).unwrap();
        assert_eq!(cats.len(), 1);
    }

    #[test]
    fn words_never_escape_the_vocabulary() {
        let dir = tempfile::tempdir().unwrap();
        write_category(dir.path(), "mixed", &["cat", "zzz", "iron", "qqq"]);
        let cats = load_categories(dir.path(), &vocab()).unwrap();
        let v = vocab();
        for cat in cats.categories() {
            for &w in &cat.word_indices {
                assert!((w as usize) < v.len());
            }
        }
    }
}
