use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Counters reported by [`preprocess_corpus`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PreprocessStats {
    pub lines: u64,
    pub tokens: u64,
}

/// Normalizes a raw text corpus for embedding training.
///
/// Per line: letters are lowercased, every non-alphabetic character becomes a
/// space (so `she'll` comes out as `she ll`), and whitespace runs collapse to
/// single separators. Line boundaries are preserved; the output grammar is
/// lowercase alphabetic tokens joined by single spaces, and the transform is
/// idempotent.
pub fn preprocess_corpus<R: BufRead, W: Write>(
    mut input: R,
    mut output: W,
) -> Result<PreprocessStats> {
    let mut stats = PreprocessStats::default();
    let mut raw = Vec::new();
    let mut offset = 0u64;
    let mut line_out = String::new();

    loop {
        raw.clear();
        let read = input
            .read_until(b'\n', &mut raw)
            .map_err(|e| Error::io("<input>", e))?;
        if read == 0 {
            break;
        }
        let had_newline = raw.last() == Some(&b'\n');
        let body = if had_newline { &raw[..raw.len() - 1] } else { &raw[..] };
        let text = std::str::from_utf8(body).map_err(|e| Error::InvalidUtf8 {
            offset: offset + e.valid_up_to() as u64,
        })?;

        line_out.clear();
        let mut pending_space = false;
        for ch in text.chars() {
            for lc in ch.to_lowercase() {
                // A few symbols (enclosed letters and the like) are
                // alphabetic and uppercase yet have no lowercase mapping;
                // they are dropped like any other non-letter.
                if lc.is_alphabetic() && !lc.is_uppercase() {
                    if pending_space && !line_out.is_empty() {
                        line_out.push(' ');
                        stats.tokens += 1;
                    }
                    if line_out.is_empty() {
                        stats.tokens += 1;
                    }
                    pending_space = false;
                    line_out.push(lc);
                } else {
                    pending_space = true;
                }
            }
        }

        output
            .write_all(line_out.as_bytes())
            .map_err(|e| Error::io("<output>", e))?;
        output
            .write_all(b"\n")
            .map_err(|e| Error::io("<output>", e))?;
        stats.lines += 1;
        offset += read as u64;
    }
    output.flush().map_err(|e| Error::io("<output>", e))?;
    Ok(stats)
}

/// Convenience wrapper normalizing a string in memory.
pub fn preprocess_str(input: &str) -> String {
    let mut out = Vec::new();
    preprocess_corpus(input.as_bytes(), &mut out).expect("in-memory streams cannot fail");
    String::from_utf8(out).expect("output is valid UTF-8")
}
