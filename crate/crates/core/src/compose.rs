//! Element-wise composition of word vectors into document vectors.
//!
//! Three reductions (`avg`, `min`, `max`) map the word vectors of a
//! document onto one vector of the same dimension; `conc` concatenates the
//! three results in that fixed order. Out-of-vocabulary tokens are skipped;
//! a document with no in-vocabulary tokens composes to the zero vector
//! (flagged by `n_in_vocab = 0`). Averages accumulate with compensated
//! summation so results are reproducible to 1e-12 per component regardless
//! of token order, which keeps parallel runs identical to sequential ones.

use serde::{Deserialize, Serialize};

use crate::corpus::TokenizedDocument;
use crate::embeddings::EmbeddingTable;
use crate::scalar::Scalar;
use crate::vector::DenseVector;

/// One of the three element-wise reductions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComposeMode {
    Avg,
    Min,
    Max,
}

/// Composition applied to a document, including the concatenation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositionKind {
    Avg,
    Min,
    Max,
    Conc,
}

impl From<ComposeMode> for CompositionKind {
    fn from(mode: ComposeMode) -> Self {
        match mode {
            ComposeMode::Avg => CompositionKind::Avg,
            ComposeMode::Min => CompositionKind::Min,
            ComposeMode::Max => CompositionKind::Max,
        }
    }
}

/// A document vector produced by a composition function.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedDocument<F: Scalar> {
    pub id: String,
    pub vector: DenseVector<F>,
    pub mode: CompositionKind,
    /// Tokens found in the embedding table, counted with multiplicity.
    pub n_in_vocab: usize,
}

#[inline]
fn kahan_add(sum: &mut f64, comp: &mut f64, v: f64) {
    let y = v - *comp;
    let t = *sum + y;
    *comp = (t - *sum) - y;
    *sum = t;
}

/// Applies `mode` element-wise over the document's in-vocabulary word
/// vectors. Token multiplicity counts: a word appearing twice contributes
/// twice to the average.
pub fn compose<FS: Scalar, F: Scalar>(
    doc: &TokenizedDocument,
    table: &EmbeddingTable<FS>,
    mode: ComposeMode,
) -> ComposedDocument<F> {
    let dim = table.dim();
    let mut n_in_vocab = 0usize;

    let components: Vec<f64> = match mode {
        ComposeMode::Avg => {
            let mut sums = vec![0.0f64; dim];
            let mut comps = vec![0.0f64; dim];
            for tok in &doc.tokens {
                if let Some(vec) = table.lookup(tok) {
                    n_in_vocab += 1;
                    for (j, v) in vec.iter().enumerate() {
                        kahan_add(&mut sums[j], &mut comps[j], v.to_f64_lossless());
                    }
                }
            }
            if n_in_vocab > 0 {
                let k = n_in_vocab as f64;
                sums.iter().map(|s| s / k).collect()
            } else {
                sums
            }
        }
        ComposeMode::Min | ComposeMode::Max => {
            let mut acc: Option<Vec<f64>> = None;
            for tok in &doc.tokens {
                if let Some(vec) = table.lookup(tok) {
                    n_in_vocab += 1;
                    match acc.as_mut() {
                        None => acc = Some(vec.iter().map(|v| v.to_f64_lossless()).collect()),
                        Some(acc) => {
                            for (a, v) in acc.iter_mut().zip(vec) {
                                let v = v.to_f64_lossless();
                                if (mode == ComposeMode::Min) == (v < *a) {
                                    *a = v;
                                }
                            }
                        }
                    }
                }
            }
            acc.unwrap_or_else(|| vec![0.0; dim])
        }
    };

    let vector = DenseVector::new(components.into_iter().map(F::from_f64_lossy).collect())
        .expect("finite inputs compose to finite outputs");
    ComposedDocument {
        id: doc.id.clone(),
        vector,
        mode: mode.into(),
        n_in_vocab,
    }
}

/// Concatenation `[avg, min, max]`, dimension `3 * D`.
pub fn compose_conc<FS: Scalar, F: Scalar>(
    doc: &TokenizedDocument,
    table: &EmbeddingTable<FS>,
) -> ComposedDocument<F> {
    let avg: ComposedDocument<F> = compose(doc, table, ComposeMode::Avg);
    let min: ComposedDocument<F> = compose(doc, table, ComposeMode::Min);
    let max: ComposedDocument<F> = compose(doc, table, ComposeMode::Max);

    let mut components = Vec::with_capacity(3 * table.dim());
    components.extend_from_slice(avg.vector.as_slice());
    components.extend_from_slice(min.vector.as_slice());
    components.extend_from_slice(max.vector.as_slice());

    ComposedDocument {
        id: doc.id.clone(),
        vector: DenseVector::new(components).expect("blocks are finite"),
        mode: CompositionKind::Conc,
        n_in_vocab: avg.n_in_vocab,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::EmbeddingTable;
    use std::collections::BTreeSet;

    fn table(entries: &[(&str, &[f64])]) -> EmbeddingTable<f64> {
        let dim = entries[0].1.len();
        let (t, _) = EmbeddingTable::from_entries(
            dim,
            entries
                .iter()
                .map(|(tok, v)| (tok.to_string(), v.to_vec())),
        )
        .unwrap();
        t
    }

    fn doc(tokens: &[&str]) -> TokenizedDocument {
        TokenizedDocument {
            id: "d".to_string(),
            labels: BTreeSet::new(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn elementwise_reductions() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let d = doc(&["a", "b"]);
        let max: ComposedDocument<f64> = compose(&d, &t, ComposeMode::Max);
        let min: ComposedDocument<f64> = compose(&d, &t, ComposeMode::Min);
        let avg: ComposedDocument<f64> = compose(&d, &t, ComposeMode::Avg);
        assert_eq!(max.vector.as_slice(), &[1.0, 1.0]);
        assert_eq!(min.vector.as_slice(), &[0.0, 0.0]);
        assert_eq!(avg.vector.as_slice(), &[0.5, 0.5]);
        assert_eq!(avg.n_in_vocab, 2);
    }

    #[test]
    fn single_token_is_identity() {
        let t = table(&[("a", &[0.25, -3.0, 7.5])]);
        let d = doc(&["a"]);
        for mode in [ComposeMode::Avg, ComposeMode::Min, ComposeMode::Max] {
            let c: ComposedDocument<f64> = compose(&d, &t, mode);
            assert_eq!(c.vector.as_slice(), &[0.25, -3.0, 7.5]);
        }
        let conc: ComposedDocument<f64> = compose_conc(&d, &t);
        assert_eq!(
            conc.vector.as_slice(),
            &[0.25, -3.0, 7.5, 0.25, -3.0, 7.5, 0.25, -3.0, 7.5]
        );
    }

    #[test]
    fn all_oov_is_zero_vector() {
        let t = table(&[("a", &[1.0, 1.0, 1.0])]);
        let d = doc(&["x", "y"]);
        for mode in [ComposeMode::Avg, ComposeMode::Min, ComposeMode::Max] {
            let c: ComposedDocument<f64> = compose(&d, &t, mode);
            assert_eq!(c.vector.as_slice(), &[0.0, 0.0, 0.0]);
            assert_eq!(c.n_in_vocab, 0);
        }
    }

    #[test]
    fn conc_is_literal_concatenation() {
        let t = table(&[("a", &[1.0, 0.0]), ("b", &[0.0, 1.0])]);
        let d = doc(&["a", "b"]);
        let conc: ComposedDocument<f64> = compose_conc(&d, &t);
        assert_eq!(conc.vector.dim(), 6);
        assert_eq!(conc.vector.as_slice(), &[0.5, 0.5, 0.0, 0.0, 1.0, 1.0]);
        assert_eq!(conc.mode, CompositionKind::Conc);
    }

    #[test]
    fn conc_dimension_is_three_d() {
        let entries: Vec<(String, Vec<f64>)> =
            vec![("w".to_string(), (0..100).map(|i| i as f64).collect())];
        let (t, _) = EmbeddingTable::from_entries(100, entries).unwrap();
        let conc: ComposedDocument<f64> = compose_conc(&doc(&["w"]), &t);
        assert_eq!(conc.vector.dim(), 300);
    }

    #[test]
    fn multiplicity_counts_in_avg() {
        let t = table(&[("a", &[3.0]), ("b", &[0.0])]);
        let avg: ComposedDocument<f64> = compose(&doc(&["a", "a", "b"]), &t, ComposeMode::Avg);
        assert_eq!(avg.vector.as_slice(), &[2.0]);
        assert_eq!(avg.n_in_vocab, 3);
    }
}
