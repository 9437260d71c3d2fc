use std::collections::HashMap;

use crate::error::{Error, Result};

/// An ordered vocabulary of unique, lowercase, purely alphabetic tokens.
///
/// Positions are dense `0..len()`; every loaded matrix and category dataset
/// is bound to one vocabulary through these positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from tokens already in their final order.
    ///
    /// Rejects empty, non-alphabetic, non-lowercase, or duplicate tokens.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (pos, token) in tokens.iter().enumerate() {
            validate_token(token)?;
            if index.insert(token.clone(), pos as u32).is_some() {
                return Err(Error::InvalidToken {
                    token: token.clone(),
                    reason: "duplicate".into(),
                });
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    /// Deterministic placeholder vocabulary: `wa`, `wb`, ..., `wba`, ...
    /// Used when synthesizing embeddings without a real token list.
    pub fn placeholder(len: usize) -> Self {
        let tokens: Vec<String> = (0..len).map(placeholder_token).collect();
        let index = tokens
            .iter()
            .enumerate()
            .map(|(pos, t)| (t.clone(), pos as u32))
            .collect();
        Vocabulary { tokens, index }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, pos: u32) -> &str {
        &self.tokens[pos as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn position(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }
}

fn validate_token(token: &str) -> Result<()> {
    if token.is_empty() {
        return Err(Error::InvalidToken {
            token: token.to_string(),
            reason: "empty".into(),
        });
    }
    if !token.chars().all(char::is_alphabetic) {
        return Err(Error::InvalidToken {
            token: token.to_string(),
            reason: "contains non-alphabetic characters".into(),
        });
    }
    if token.chars().any(char::is_uppercase) {
        return Err(Error::InvalidToken {
            token: token.to_string(),
            reason: "not lowercase".into(),
        });
    }
    Ok(())
}

/// `w` followed by the index in base-26 letters, e.g. 0 -> "wa", 27 -> "wbb".
fn placeholder_token(mut i: usize) -> String {
    let mut suffix = Vec::new();
    loop {
        suffix.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
    }
    suffix.push(b'w');
    suffix.reverse();
    String::from_utf8(suffix).expect("ascii")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_and_indexes() {
        let v = Vocabulary::new(vec!["cat".into(), "dog".into()]).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.position("dog"), Some(1));
        assert_eq!(v.token(0), "cat");
        assert!(!v.contains("bird"));
    }

    #[test]
    fn rejects_duplicates_and_bad_tokens() {
        assert!(Vocabulary::new(vec!["cat".into(), "cat".into()]).is_err());
        assert!(Vocabulary::new(vec!["".into()]).is_err());
        assert!(Vocabulary::new(vec!["ab1".into()]).is_err());
        assert!(Vocabulary::new(vec!["Cat".into()]).is_err());
    }

    #[test]
    fn placeholder_tokens_are_unique_and_valid() {
        let v = Vocabulary::placeholder(1000);
        assert_eq!(v.len(), 1000);
        for pos in 0..1000u32 {
            assert_eq!(v.position(v.token(pos)), Some(pos));
        }
    }
}
