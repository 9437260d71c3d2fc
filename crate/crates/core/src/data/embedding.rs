use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::data::frequency::FrequencyList;
use crate::data::vocab::Vocabulary;
use crate::error::{Error, Result};

/// A dense V x D embedding bound to an ordered vocabulary. Row `i` holds the
/// vector of `vocab.token(i)`; all entries are finite.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    vocab: Vocabulary,
    values: Array2<f64>,
}

impl EmbeddingMatrix {
    pub fn new(vocab: Vocabulary, values: Array2<f64>) -> Result<Self> {
        if vocab.len() != values.nrows() {
            return Err(Error::VocabMismatch {
                expected: vocab.len(),
                found: values.nrows(),
            });
        }
        if let Some((pos, _)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let row = pos / values.ncols();
            return Err(Error::InvalidParameter {
                name: "values",
                reason: format!("non-finite entry in row {row}"),
            });
        }
        Ok(EmbeddingMatrix { vocab, values })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    /// Number of words (rows).
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Vector length (columns).
    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    /// Contiguous copy of one dimension across all words.
    pub fn dimension(&self, dim: usize) -> Vec<f64> {
        self.values.column(dim).to_vec()
    }

    /// Writes the line-oriented text format: `token v1 v2 ... vD`, one word
    /// per line, shortest round-trip float formatting.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, token) in self.vocab.tokens().iter().enumerate() {
            w.write_all(token.as_bytes())?;
            for v in self.values.row(i) {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Loads a text-format embedding file: one token plus D space-separated real
/// numbers per line.
///
/// Tokens are lowercased on load. Tokens that are not purely alphabetic are
/// skipped with a warning; duplicates, ragged rows, and non-finite values are
/// rejected with the offending line number.
///
/// With `vocab_limit` and a frequency list, the most frequent `vocab_limit`
/// tokens are retained and ordered by descending count (equal counts break
/// lexicographically; tokens absent from the list count as zero). Without a
/// frequency list the file order decides.
pub fn load_embedding(
    path: impl AsRef<Path>,
    vocab_limit: Option<usize>,
    frequencies: Option<&FrequencyList>,
) -> Result<EmbeddingMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_embedding(BufReader::new(file), path, vocab_limit, frequencies)
}

pub(crate) fn read_embedding<R: BufRead>(
    reader: R,
    path: &Path,
    vocab_limit: Option<usize>,
    frequencies: Option<&FrequencyList>,
) -> Result<EmbeddingMatrix> {
    let mut tokens: Vec<String> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim: Option<usize> = None;
    let mut skipped = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let token = fields
            .next()
            .expect("non-empty line has a first field")
            .to_lowercase();
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::MalformedLine {
                    path: path.to_path_buf(),
                    line: line_no,
                    reason: format!("cannot parse \"{f}\" as a real number"),
                })
            })
            .collect::<Result<_>>()?;
        match dim {
            None => {
                if values.is_empty() {
                    return Err(Error::MalformedLine {
                        path: path.to_path_buf(),
                        line: line_no,
                        reason: "no vector values after token".into(),
                    });
                }
                dim = Some(values.len());
            }
            Some(d) if d != values.len() => {
                return Err(Error::InconsistentDimension {
                    path: path.to_path_buf(),
                    line: line_no,
                    expected: d,
                    found: values.len(),
                });
            }
            Some(_) => {}
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::MalformedLine {
                path: path.to_path_buf(),
                line: line_no,
                reason: format!("non-finite value in column {}", bad + 1),
            });
        }
        if !token.chars().all(char::is_alphabetic) {
            skipped += 1;
            continue;
        }
        if seen.contains(&token) {
            return Err(Error::DuplicateToken {
                path: path.to_path_buf(),
                line: line_no,
                token,
            });
        }
        seen.insert(token.clone());
        tokens.push(token);
        rows.push(values);
    }

    if skipped > 0 {
        log::warn!("{}: skipped {skipped} non-alphabetic tokens", path.display());
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput {
            what: "embedding file",
        });
    }

    // Order and cut the vocabulary.
    let order: Vec<usize> = match (vocab_limit, frequencies) {
        (Some(limit), Some(freq)) => {
            let mut idx: Vec<usize> = (0..tokens.len()).collect();
            idx.sort_by(|&a, &b| {
                let ca = freq.count(&tokens[a]);
                let cb = freq.count(&tokens[b]);
                cb.cmp(&ca).then_with(|| tokens[a].cmp(&tokens[b]))
            });
            idx.truncate(limit);
            idx
        }
        (Some(limit), None) => (0..tokens.len().min(limit)).collect(),
        _ => (0..tokens.len()).collect(),
    };

    let dim = dim.expect("rows non-empty");
    let mut values = Array2::zeros((order.len(), dim));
    let mut ordered_tokens = Vec::with_capacity(order.len());
    for (out_row, &src) in order.iter().enumerate() {
        ordered_tokens.push(tokens[src].clone());
        values
            .row_mut(out_row)
            .iter_mut()
            .zip(&rows[src])
            .for_each(|(dst, &v)| *dst = v);
    }
    EmbeddingMatrix::new(Vocabulary::new(ordered_tokens)?, values)
}

/// Synthesizes a V x D embedding with i.i.d. standard normal entries.
///
/// Each row draws from its own counter-indexed stream of a seeded ChaCha
/// generator, so parallel fills are reproducible and the result depends only
/// on `(rows, dim, seed)`.
pub fn generate_random_embedding(
    rows: usize,
    dim: usize,
    seed: u64,
    vocab: Option<Vocabulary>,
) -> Result<EmbeddingMatrix> {
    if rows == 0 || dim == 0 {
        return Err(Error::InvalidParameter {
            name: "shape",
            reason: format!("rows and dim must be positive, got {rows}x{dim}"),
        });
    }
    let vocab = match vocab {
        Some(v) => {
            if v.len() != rows {
                return Err(Error::VocabMismatch {
                    expected: rows,
                    found: v.len(),
                });
            }
            v
        }
        None => Vocabulary::placeholder(rows),
    };

    let mut values = Array2::zeros((rows, dim));
    values
        .axis_iter_mut(ndarray::Axis(0))
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .for_each(|(row, mut out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(row as u64);
            for v in out.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
        });

    EmbeddingMatrix::new(vocab, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;
    use std::path::PathBuf;

    fn parse(text: &str) -> Result<EmbeddingMatrix> {
        read_embedding(Cursor::new(text), &PathBuf::from("test.txt"), None, None)
    }

    #[test]
    fn parses_a_small_file() {
        let e = parse("cat 1.0 2.0\ndog -0.5 0.25\nfish 0 1e-3\n").unwrap();
        assert_eq!(e.len(), 3);
        assert_eq!(e.dim(), 2);
        assert_eq!(e.values()[(1, 0)], -0.5);
        assert_eq!(e.vocab().position("fish"), Some(2));
    }

    #[test]
    fn rejects_duplicate_with_line_number() {
        let err = parse("cat 1.0\ndog 2.0\ncat 3.0\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cat"), "{msg}");
        assert!(msg.contains(":3"), "{msg}");
    }

    #[test]
    fn rejects_ragged_and_nonfinite() {
        assert!(parse("cat 1.0 2.0\ndog 1.0\n").is_err());
        assert!(parse("cat 1.0\ndog nan\n").is_err());
        assert!(parse("cat 1.0\ndog inf\n").is_err());
    }

    #[test]
    fn skips_non_alphabetic_tokens() {
        let e = parse("cat 1.0\n123 2.0\n... 3.0\ndog 4.0\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.vocab().tokens(), &["cat".to_string(), "dog".to_string()]);
    }

    #[test]
    fn limit_without_frequencies_keeps_file_order() {
        let e = read_embedding(
            Cursor::new("cat 1\ndog 2\nfish 3\n"),
            &PathBuf::from("t"),
            Some(2),
            None,
        )
        .unwrap();
        assert_eq!(e.vocab().tokens(), &["cat".to_string(), "dog".to_string()]);
    }

    #[test]
    fn limit_with_frequencies_orders_by_rank() {
        let freq = FrequencyList::new(vec![
            ("fish".into(), 10),
            ("dog".into(), 5),
            ("cat".into(), 1),
        ])
        .unwrap();
        let e = read_embedding(
            Cursor::new("cat 1\ndog 2\nfish 3\n"),
            &PathBuf::from("t"),
            Some(2),
            Some(&freq),
        )
        .unwrap();
        assert_eq!(e.vocab().tokens(), &["fish".to_string(), "dog".to_string()]);
        assert_eq!(e.values()[(0, 0)], 3.0);
    }

    #[test]
    fn frequency_ties_break_lexicographically() {
        let freq = FrequencyList::new(vec![
            ("zebra".into(), 7),
            ("mule".into(), 7),
            ("yak".into(), 7),
        ])
        .unwrap();
        let e = read_embedding(
            Cursor::new("zebra 1\nyak 2\nmule 3\n"),
            &PathBuf::from("t"),
            Some(2),
            Some(&freq),
        )
        .unwrap();
        assert_eq!(e.vocab().tokens(), &["mule".to_string(), "yak".to_string()]);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let e = generate_random_embedding(17, 5, 99, None).unwrap();
        let mut buf = Vec::new();
        e.write_text(&mut buf).unwrap();
        let back = read_embedding(Cursor::new(buf), &PathBuf::from("t"), None, None).unwrap();
        assert_eq!(e.values(), back.values());
        assert_eq!(e.vocab(), back.vocab());
    }

    #[test]
    fn random_embedding_is_deterministic_per_seed() {
        let a = generate_random_embedding(40, 7, 3, None).unwrap();
        let b = generate_random_embedding(40, 7, 3, None).unwrap();
        let c = generate_random_embedding(40, 7, 4, None).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn random_embedding_moments_at_scale() {
        // 3 sigma / sqrt(50000) < 0.02 for the per-dimension sample mean
        let e = generate_random_embedding(50_000, 6, 8, None).unwrap();
        for dim in 0..e.dim() {
            let column = e.dimension(dim);
            let mean = column.iter().sum::<f64>() / column.len() as f64;
            assert!(mean.abs() < 0.02, "dim {dim} mean {mean}");
        }
    }
}
