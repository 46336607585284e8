//! Immutable pre-trained word-embedding tables.
//!
//! Tables load from the word2vec text format: a `"<count> <dim>"` header
//! line followed by `count` lines of `"<token> <v1> ... <vD>"` with single
//! ASCII-space separators and LF line endings. Values are parsed as `f64`
//! and stored at the table's scalar type (`f32` by default, halving memory
//! at large vocabulary sizes).

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Word → dense-vector dictionary of fixed dimension, immutable after load.
#[derive(Debug, Clone)]
pub struct EmbeddingTable<F: Scalar> {
    dim: usize,
    /// Tokens in insertion order; slot i owns `values[i*dim .. (i+1)*dim]`.
    tokens: Vec<String>,
    values: Vec<F>,
    index: HashMap<String, usize>,
}

impl<F: Scalar> EmbeddingTable<F> {
    /// Builds a table from (token, vector) pairs. Duplicate tokens keep the
    /// last vector; the second return value counts the duplicates.
    pub fn from_entries(
        dim: usize,
        entries: impl IntoIterator<Item = (String, Vec<F>)>,
    ) -> Result<(Self, usize)> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        let mut table = Self {
            dim,
            tokens: Vec::new(),
            values: Vec::new(),
            index: HashMap::new(),
        };
        let mut duplicates = 0;
        for (token, vec) in entries {
            if vec.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: vec.len(),
                });
            }
            if let Some(bad) = vec.iter().find(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "non-finite embedding value {bad} for token {token:?}"
                )));
            }
            match table.index.get(&token) {
                Some(&slot) => {
                    duplicates += 1;
                    table.values[slot * dim..(slot + 1) * dim].copy_from_slice(&vec);
                }
                None => {
                    let slot = table.tokens.len();
                    table.tokens.push(token.clone());
                    table.values.extend_from_slice(&vec);
                    table.index.insert(token, slot);
                }
            }
        }
        Ok((table, duplicates))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// The stored vector for `token`, if present.
    pub fn lookup(&self, token: &str) -> Option<&[F]> {
        self.index
            .get(token)
            .map(|&slot| &self.values[slot * self.dim..(slot + 1) * self.dim])
    }

    /// Fraction of `tokens` present in the table; 1.0 for an empty sequence.
    pub fn coverage<S: AsRef<str>>(&self, tokens: &[S]) -> f64 {
        if tokens.is_empty() {
            return 1.0;
        }
        let hits = tokens
            .iter()
            .filter(|t| self.index.contains_key(t.as_ref()))
            .count();
        hits as f64 / tokens.len() as f64
    }

    /// Tokens in insertion (file) order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }
}

/// Loads a word2vec-text table. Returns the table and the number of
/// duplicate tokens that were overwritten (last occurrence wins).
pub fn load_word2vec_text<F: Scalar>(path: &Path) -> Result<(EmbeddingTable<F>, usize)> {
    let display = path.display().to_string();
    let mut lines = BufReader::new(File::open(path)?).lines();

    let header = lines
        .next()
        .ok_or_else(|| Error::format(&display, 1, "empty file; expected \"<count> <dim>\""))??;
    let mut parts = header.split(' ');
    let (count, dim) = match (parts.next(), parts.next(), parts.next()) {
        (Some(c), Some(d), None) => {
            let count: usize = c.parse().map_err(|_| {
                Error::format(&display, 1, format!("invalid entry count {c:?}"))
            })?;
            let dim: usize = d
                .parse()
                .map_err(|_| Error::format(&display, 1, format!("invalid dimension {d:?}")))?;
            (count, dim)
        }
        _ => {
            return Err(Error::format(
                &display,
                1,
                format!("malformed header {header:?}; expected \"<count> <dim>\""),
            ))
        }
    };
    if dim == 0 {
        return Err(Error::format(&display, 1, "dimension must be positive"));
    }

    let mut entries: Vec<(String, Vec<F>)> = Vec::with_capacity(count);
    let mut lineno = 1;
    for line in lines {
        let line = line?;
        lineno += 1;
        if entries.len() == count {
            return Err(Error::format(
                &display,
                lineno,
                format!("more data lines than the declared count {count}"),
            ));
        }
        let mut fields = line.split(' ');
        let token = fields
            .next()
            .filter(|t| !t.is_empty())
            .ok_or_else(|| Error::format(&display, lineno, "missing token"))?;
        let mut vec = Vec::with_capacity(dim);
        for field in fields {
            let v: f64 = field.parse().map_err(|_| {
                Error::format(&display, lineno, format!("invalid value {field:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::format(
                    &display,
                    lineno,
                    format!("non-finite value {field:?}"),
                ));
            }
            vec.push(F::from_f64_lossy(v));
        }
        if vec.len() != dim {
            return Err(Error::format(
                &display,
                lineno,
                format!("expected {dim} components, found {}", vec.len()),
            ));
        }
        entries.push((token.to_string(), vec));
    }
    if entries.len() != count {
        return Err(Error::format(
            &display,
            lineno,
            format!("declared {count} entries, found {}", entries.len()),
        ));
    }
    EmbeddingTable::from_entries(dim, entries)
}

/// Serializes a table back to the word2vec text format (insertion order,
/// shortest round-trip decimals).
pub fn save_word2vec_text<F: Scalar>(table: &EmbeddingTable<F>, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{} {}", table.len(), table.dim())?;
    for token in table.tokens() {
        let vec = table.lookup(token).expect("token comes from the table");
        write!(out, "{token}")?;
        for v in vec {
            write!(out, " {v}")?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("emb.txt");
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_simple_table() {
        let (_d, path) = write_tmp("1 2\napple 0.5 -1.0\n");
        let (table, dups) = load_word2vec_text::<f32>(&path).unwrap();
        assert_eq!(dups, 0);
        assert_eq!(table.dim(), 2);
        assert_eq!(table.lookup("apple"), Some(&[0.5f32, -1.0][..]));
        assert_eq!(table.lookup("missing"), None);
        assert_eq!(table.lookup("apple"), table.lookup("apple"));
    }

    #[test]
    fn duplicate_tokens_last_wins() {
        let (_d, path) = write_tmp("2 3\na 1 2 3\na 4 5 6\n");
        let (table, dups) = load_word2vec_text::<f32>(&path).unwrap();
        assert_eq!(dups, 1);
        assert_eq!(table.len(), 1);
        assert_eq!(table.lookup("a"), Some(&[4.0f32, 5.0, 6.0][..]));
    }

    #[test]
    fn wrong_component_count_names_line() {
        let (_d, path) = write_tmp("1 2\napple 0.5 -1.0 7\n");
        let err = load_word2vec_text::<f32>(&path).unwrap_err();
        match err {
            Error::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite_and_bad_header() {
        let (_d, path) = write_tmp("1 2\napple nan 1\n");
        assert!(load_word2vec_text::<f32>(&path).is_err());
        let (_d, path) = write_tmp("1\n");
        assert!(load_word2vec_text::<f32>(&path).is_err());
        let (_d, path) = write_tmp("2 2\napple 1 2\n");
        assert!(load_word2vec_text::<f32>(&path).is_err());
    }

    #[test]
    fn coverage_convention() {
        let (_d, path) = write_tmp("1 2\napple 0.5 -1.0\n");
        let (table, _) = load_word2vec_text::<f32>(&path).unwrap();
        assert_eq!(table.coverage(&["apple", "missing"]), 0.5);
        assert_eq!(table.coverage(&["apple"]), 1.0);
        assert_eq!(table.coverage::<&str>(&[]), 1.0);
    }

    #[test]
    fn save_load_save_round_trip() {
        let (_d, path) = write_tmp("2 2\napple 0.5 -1.0\npear 0.25 3.0\n");
        let (table, _) = load_word2vec_text::<f32>(&path).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out1 = dir.path().join("one.txt");
        let out2 = dir.path().join("two.txt");
        save_word2vec_text(&table, &out1).unwrap();
        let (reloaded, _) = load_word2vec_text::<f32>(&out1).unwrap();
        save_word2vec_text(&reloaded, &out2).unwrap();
        assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
        for token in table.tokens() {
            assert_eq!(table.lookup(token), reloaded.lookup(token));
        }
    }
}
