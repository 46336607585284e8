//! Large-scale multi-label text classification from composed word embeddings.
//!
//! The crate covers the full experimental pipeline:
//!
//! - [`corpus`]: JSONL corpus ingestion, tokenization, multi-label stratified
//!   splitting, and subsampling for learning curves.
//! - [`embeddings`]: immutable pre-trained word-embedding tables in the
//!   word2vec text format.
//! - [`compose`]: element-wise `avg` / `min` / `max` composition of word
//!   vectors into document vectors, plus their concatenation.
//! - [`onehot`]: sparse one-hot representations, sublinear smoothed tf-idf
//!   and the feature-hashing trick (FNV-1a).
//! - [`fusion`]: concatenation of a sparse one-hot block with a dense
//!   composed-embedding block.
//! - [`svm`]: L2-regularized hinge-loss linear classifiers, one-vs-rest
//!   training, binary-relevance prediction, and cross-validated lambda
//!   selection.
//! - [`metrics`]: micro/macro F1, length-bucketed slices, and two-sided
//!   Student t-tests.
//!
//! Numeric code is generic over the scalar type through [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the defaults used by the
//! pipeline: `f64` for transforms and training, `f32` for stored
//! embeddings and model weights.

pub mod compose;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod fusion;
pub mod metrics;
pub mod onehot;
pub mod svm;
pub mod vector;

mod scalar;

pub use error::Error;
pub use scalar::Scalar;

/// Scalar used for transforms, training, and evaluation.
pub type Value = f64;
/// Scalar used for stored embeddings and serialized model weights.
pub type StoredValue = f32;

/// Dense document vector at pipeline precision.
pub type DenseVec = vector::DenseVector<Value>;
/// Sparse feature vector at pipeline precision.
pub type SparseVec = vector::SparseVector<Value>;
/// Embedding table as loaded from disk.
pub type EmbeddingTable32 = embeddings::EmbeddingTable<StoredValue>;
/// Fused sparse+dense feature vector at pipeline precision.
pub type FusedVec = fusion::FusedVector<Value>;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
