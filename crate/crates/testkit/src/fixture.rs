//! Deterministic synthetic corpus with class-clustered embeddings.
//!
//! Twenty classes, 5000 documents, a 3000-token vocabulary and 20-dim
//! vectors. Each class owns 100 tokens whose vectors point along the class
//! axis; 1000 shared tokens are low-norm noise. Documents draw roughly half
//! their tokens from their primary class pool, some from an optional
//! secondary class, and the rest from the shared pool, so both the one-hot
//! and the composed representations carry linear signal.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use embfuse::corpus::{write_corpus_jsonl, RawDocument};
use embfuse::embeddings::{save_word2vec_text, EmbeddingTable};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::standard_normal;

pub const N_CLASSES: usize = 20;
pub const N_DOCS: usize = 5_000;
pub const EMBED_DIM: usize = 20;
pub const CLASS_TOKENS: usize = 100;
pub const SHARED_TOKENS: usize = 1_000;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
    pub labels: Vec<String>,
}

pub fn label_name(k: usize) -> String {
    format!("c{k:02}")
}

fn class_token(k: usize, i: usize) -> String {
    format!("k{k:02}w{i:03}")
}

fn shared_token(i: usize) -> String {
    format!("s{i:04}")
}

/// Quadratically skewed pool index, so token frequencies are uneven the way
/// natural text is.
fn skewed(rng: &mut ChaCha8Rng, pool: usize) -> usize {
    let u: f64 = rng.gen();
    ((u * u * pool as f64) as usize).min(pool - 1)
}

/// Writes `corpus.jsonl` and `embeddings.txt` under `dir`.
pub fn write_fixture(dir: &Path, seed: u64) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut docs = Vec::with_capacity(N_DOCS);
    for i in 0..N_DOCS {
        let primary = rng.gen_range(0..N_CLASSES);
        let secondary = if rng.gen::<f64>() < 0.25 {
            Some((primary + 1 + rng.gen_range(0..N_CLASSES - 1)) % N_CLASSES)
        } else {
            None
        };
        let len: usize = rng.gen_range(25..=55);
        let mut words = Vec::with_capacity(len);
        for _ in 0..len {
            let r: f64 = rng.gen();
            let tok = if r < 0.50 {
                class_token(primary, skewed(&mut rng, CLASS_TOKENS))
            } else if r < 0.65 {
                class_token(secondary.unwrap_or(primary), skewed(&mut rng, CLASS_TOKENS))
            } else {
                shared_token(skewed(&mut rng, SHARED_TOKENS))
            };
            words.push(tok);
        }
        let mut labels = BTreeSet::new();
        labels.insert(label_name(primary));
        if let Some(s) = secondary {
            labels.insert(label_name(s));
        }
        docs.push(RawDocument {
            id: format!("d{i:04}"),
            labels,
            text: words.join(" "),
        });
    }
    let corpus = dir.join("corpus.jsonl");
    write_corpus_jsonl(&corpus, &[], &docs).unwrap();

    let mut erng = ChaCha8Rng::seed_from_u64(seed ^ 0x00c0_ffee_c0ff_ee00);
    let mut entries: Vec<(String, Vec<f32>)> = Vec::new();
    for k in 0..N_CLASSES {
        for i in 0..CLASS_TOKENS {
            let v: Vec<f32> = (0..EMBED_DIM)
                .map(|j| {
                    let axis = if j == k { 1.1 } else { 0.0 };
                    (axis + 0.22 * standard_normal(&mut erng)) as f32
                })
                .collect();
            entries.push((class_token(k, i), v));
        }
    }
    for i in 0..SHARED_TOKENS {
        let v: Vec<f32> = (0..EMBED_DIM)
            .map(|_| (0.25 * standard_normal(&mut erng)) as f32)
            .collect();
        entries.push((shared_token(i), v));
    }
    let (table, _) = EmbeddingTable::from_entries(EMBED_DIM, entries).unwrap();
    let embeddings = dir.join("embeddings.txt");
    save_word2vec_text(&table, &embeddings).unwrap();

    Fixture {
        corpus,
        embeddings,
        labels: (0..N_CLASSES).map(label_name).collect(),
    }
}
