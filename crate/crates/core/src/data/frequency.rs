use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// Corpus word frequencies: `(token, count)` pairs in descending count order.
#[derive(Debug, Clone)]
pub struct FrequencyList {
    entries: Vec<(String, u64)>,
    rank: HashMap<String, usize>,
}

impl FrequencyList {
    /// Validates descending counts, positive counts, and unique tokens.
    pub fn new(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut rank = HashMap::with_capacity(entries.len());
        let mut prev = u64::MAX;
        for (pos, (token, count)) in entries.iter().enumerate() {
            if *count == 0 {
                return Err(Error::InvalidParameter {
                    name: "frequency",
                    reason: format!("token \"{token}\" has zero count"),
                });
            }
            if *count > prev {
                return Err(Error::InvalidParameter {
                    name: "frequency",
                    reason: format!("counts not descending at token \"{token}\""),
                });
            }
            prev = *count;
            if rank.insert(token.clone(), pos).is_some() {
                return Err(Error::InvalidParameter {
                    name: "frequency",
                    reason: format!("duplicate token \"{token}\""),
                });
            }
        }
        Ok(FrequencyList { entries, rank })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(String, u64)] {
        &self.entries
    }

    /// Rank of a token (0 = most frequent); unlisted tokens rank last.
    pub fn rank(&self, token: &str) -> usize {
        self.rank.get(token).copied().unwrap_or(usize::MAX)
    }

    /// Count of a token, zero when unlisted.
    pub fn count(&self, token: &str) -> u64 {
        self.rank
            .get(token)
            .map(|&pos| self.entries[pos].1)
            .unwrap_or(0)
    }
}

/// Loads `token count` lines, whitespace separated, descending by count.
pub fn load_frequency_list(path: impl AsRef<Path>) -> Result<FrequencyList> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let token = fields.next().expect("non-empty line").to_lowercase();
        let count: u64 = fields
            .next()
            .ok_or_else(|| Error::MalformedLine {
                path: path.to_path_buf(),
                line: line_no,
                reason: "missing count".into(),
            })?
            .parse()
            .map_err(|_| Error::MalformedLine {
                path: path.to_path_buf(),
                line: line_no,
                reason: "count is not a positive integer".into(),
            })?;
        entries.push((token, count));
    }
    FrequencyList::new(entries)
}
