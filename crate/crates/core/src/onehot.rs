//! Sparse one-hot document representations: tf-idf and feature hashing.
//!
//! The tf-idf model is fit on a training corpus and applied to any
//! tokenized document; terms unseen at fit time are dropped. Weights use
//! the sublinear form `(1 + ln tf) * (idf + 1)` with the smoothed
//! `idf = ln((1 + N) / (1 + df))`, so every emitted weight is strictly
//! positive. The hashing representation needs no fitting: token counts are
//! summed into `fnv1a_64(token) % dim` buckets, collisions adding up.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedDocument;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::vector::SparseVector;
use crate::Result;

/// Hashed representation dimension used when none is requested.
pub const DEFAULT_HASH_DIM: usize = 70_000;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a 64-bit hash.
pub fn fnv1a_64(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// tf-idf vectorizer fit on one corpus and reusable across documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TfidfModel {
    vocab: Vec<String>,
    df: Vec<usize>,
    n_docs: usize,
    pub normalize: bool,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

impl TfidfModel {
    /// Builds the vocabulary (every token of `docs`, lexicographic order)
    /// and per-term document frequencies. `normalize` selects L2 scaling of
    /// transformed vectors.
    pub fn fit(docs: &[TokenizedDocument], normalize: bool) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::invalid("tf-idf fit requires a non-empty corpus"));
        }
        let mut df_map: BTreeMap<&str, usize> = BTreeMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = doc.tokens.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for tok in seen {
                *df_map.entry(tok).or_insert(0) += 1;
            }
        }
        let vocab: Vec<String> = df_map.keys().map(|s| s.to_string()).collect();
        let df: Vec<usize> = df_map.values().copied().collect();
        let index = vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(TfidfModel {
            vocab,
            df,
            n_docs: docs.len(),
            normalize,
            index,
        })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    /// Smoothed inverse document frequency of term `i`.
    pub fn idf(&self, i: usize) -> f64 {
        ((1 + self.n_docs) as f64 / (1 + self.df[i]) as f64).ln()
    }

    /// Maps a document onto the fit vocabulary. Unknown terms are dropped;
    /// a document with no known terms maps to the empty vector.
    pub fn transform<F: Scalar>(&self, doc: &TokenizedDocument) -> SparseVector<F> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for tok in &doc.tokens {
            if let Some(&i) = self.index.get(tok.as_str()) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, tf)| (i, (1.0 + (tf as f64).ln()) * (self.idf(i) + 1.0)))
            .collect();
        if self.normalize {
            let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                for (_, v) in entries.iter_mut() {
                    *v /= norm;
                }
            }
        }
        SparseVector::new(
            self.vocab.len(),
            entries
                .into_iter()
                .map(|(i, v)| (i as u32, F::from_f64_lossy(v)))
                .collect(),
        )
        .expect("tf-idf weights are finite and positive")
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        serde_json::to_writer(BufWriter::new(file), self)
            .map_err(|e| Error::invalid(format!("cannot serialize tf-idf model: {e}")))?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let mut model: TfidfModel = serde_json::from_reader(BufReader::new(file))
            .map_err(|e| Error::format(path, 0, format!("invalid tf-idf model: {e}")))?;
        if model.df.len() != model.vocab.len() {
            return Err(Error::format(path, 0, "tf-idf model vocab/df length mismatch"));
        }
        model.index = model
            .vocab
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(model)
    }
}

/// Hashes token counts into a `dim`-dimensional sparse vector. Bucket
/// values are summed term frequencies, so colliding tokens add up and
/// every stored value is a positive integer (unless `normalize` rescales
/// the vector to unit L2 norm).
pub fn hash_transform<F: Scalar>(
    doc: &TokenizedDocument,
    dim: usize,
    normalize: bool,
) -> Result<SparseVector<F>> {
    if dim == 0 {
        return Err(Error::invalid("hash dimension must be positive"));
    }
    let mut buckets: BTreeMap<usize, f64> = BTreeMap::new();
    for tok in &doc.tokens {
        let idx = (fnv1a_64(tok.as_bytes()) % dim as u64) as usize;
        *buckets.entry(idx).or_insert(0.0) += 1.0;
    }
    let mut entries: Vec<(usize, f64)> = buckets.into_iter().collect();
    if normalize {
        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in entries.iter_mut() {
                *v /= norm;
            }
        }
    }
    SparseVector::new(
        dim,
        entries
            .into_iter()
            .map(|(i, v)| (i as u32, F::from_f64_lossy(v)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn doc(id: &str, tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: id.to_string(),
            labels: BTreeSet::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn fixture_docs() -> Vec<TokenizedDocument> {
        vec![
            doc("d1", &["cat", "dog"]),
            doc("d2", &["cat", "cat", "fish"]),
            doc("d3", &["dog"]),
        ]
    }

    #[test]
    fn fit_builds_lexicographic_vocab_and_df() {
        let model = TfidfModel::fit(&fixture_docs(), false).unwrap();
        assert_eq!(model.vocab(), &["cat", "dog", "fish"]);
        assert_eq!(model.df, vec![2, 2, 1]);
        assert_eq!(model.n_docs(), 3);
        assert!((model.idf(0) - 0.28768207245178085).abs() < 1e-15);
        // idf(fish) = ln((1+3)/(1+1)) = ln 2
        assert!((model.idf(2) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn transform_matches_hand_computed_weights() {
        let model = TfidfModel::fit(&fixture_docs(), false).unwrap();
        let v: SparseVector<f64> = model.transform(&doc("d2", &["cat", "cat", "fish"]));
        let entries = v.entries();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].0, 0);
        assert!((entries[0].1 - 2.18023527042932).abs() < 1e-14);
        assert_eq!(entries[1].0, 2);
        assert!((entries[1].1 - 1.6931471805599454).abs() < 1e-14);
    }

    #[test]
    fn transform_normalizes_to_unit_length() {
        let model = TfidfModel::fit(&fixture_docs(), true).unwrap();
        let v: SparseVector<f64> = model.transform(&doc("d2", &["cat", "cat", "fish"]));
        assert!((v.l2_norm() - 1.0).abs() < 1e-12);
        let entries = v.entries();
        assert!((entries[0].1 - 0.7898069290660905).abs() < 1e-14);
        assert!((entries[1].1 - 0.6133555370249717).abs() < 1e-14);
        // equal raw weights normalize to 1/sqrt(2)
        let d1: SparseVector<f64> = model.transform(&doc("d1", &["cat", "dog"]));
        assert!((d1.entries()[0].1 - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn unknown_terms_are_dropped() {
        let model = TfidfModel::fit(&fixture_docs(), true).unwrap();
        let v: SparseVector<f64> = model.transform(&doc("dx", &["zebra", "quokka"]));
        assert!(v.is_empty());
        assert_eq!(v.dim(), 3);
    }

    #[test]
    fn fnv1a_reference_vectors() {
        assert_eq!(fnv1a_64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a_64(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a_64(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn hash_transform_buckets_counts() {
        let d = doc("d", &["cat", "dog", "cat", "fish"]);
        let v: SparseVector<f64> = hash_transform(&d, 50, false).unwrap();
        // fnv1a("cat") % 50 == 31, "dog" -> 43, "fish" -> 23
        let entries = v.entries();
        assert_eq!(entries.len(), 3);
        assert_eq!(entries[0], (23, 1.0));
        assert_eq!(entries[1], (31, 2.0));
        assert_eq!(entries[2], (43, 1.0));
    }

    #[test]
    fn hash_collisions_sum_counts() {
        let d = doc("d", &["cat", "dog", "cat", "fish"]);
        let v: SparseVector<f64> = hash_transform(&d, 1, false).unwrap();
        assert_eq!(v.entries(), &[(0, 4.0)]);
    }

    #[test]
    fn hash_rejects_zero_dim() {
        assert!(hash_transform::<f64>(&doc("d", &["a"]), 0, false).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tfidf.json");
        let model = TfidfModel::fit(&fixture_docs(), true).unwrap();
        model.save_json(&path).unwrap();
        let loaded = TfidfModel::load_json(&path).unwrap();
        assert_eq!(loaded.vocab(), model.vocab());
        let a: SparseVector<f64> = model.transform(&doc("d2", &["cat", "cat", "fish"]));
        let b: SparseVector<f64> = loaded.transform(&doc("d2", &["cat", "cat", "fish"]));
        assert_eq!(a.entries(), b.entries());
    }
}
