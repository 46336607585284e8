//! Fusion of a sparse one-hot block with a dense embedding block.
//!
//! The fused layout keeps sparse indices verbatim in `[0, boundary)` and
//! places dense component `j` at `boundary + j`. With block scaling on,
//! each block is scaled to unit L2 norm independently before fusion so
//! neither representation dominates the margin; a zero block is left
//! untouched. `split` recovers the two (post-scaling) blocks exactly.

use crate::scalar::Scalar;
use crate::vector::{DenseVector, SparseVector};
use crate::Result;

/// A fused document vector together with its block boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedVector<F: Scalar> {
    boundary: usize,
    vector: SparseVector<F>,
}

impl<F: Scalar> FusedVector<F> {
    /// Wraps an already fused vector. `boundary` must not exceed the
    /// vector's dimension.
    pub fn from_parts(boundary: usize, vector: SparseVector<F>) -> Result<Self> {
        if boundary > vector.dim() {
            return Err(crate::error::Error::invalid(format!(
                "boundary {} exceeds dimension {}",
                boundary,
                vector.dim()
            )));
        }
        Ok(FusedVector { boundary, vector })
    }

    pub fn boundary(&self) -> usize {
        self.boundary
    }

    pub fn dim(&self) -> usize {
        self.vector.dim()
    }

    pub fn vector(&self) -> &SparseVector<F> {
        &self.vector
    }

    pub fn into_vector(self) -> SparseVector<F> {
        self.vector
    }

    /// Recovers the sparse block (dim `boundary`) and the dense block
    /// (dim `dim - boundary`, zeros filled in).
    pub fn split(&self) -> (SparseVector<F>, DenseVector<F>) {
        let mut sparse_entries = Vec::new();
        let mut dense = vec![F::zero(); self.dim() - self.boundary];
        for &(i, v) in self.vector.entries() {
            let i = i as usize;
            if i < self.boundary {
                sparse_entries.push((i as u32, v));
            } else {
                dense[i - self.boundary] = v;
            }
        }
        let sparse = SparseVector::new(self.boundary, sparse_entries)
            .expect("block entries stay valid under split");
        let dense = DenseVector::new(dense).expect("block entries stay valid under split");
        (sparse, dense)
    }
}

fn block_scale<F: Scalar>(entries: &mut [(u32, F)]) {
    let norm = entries
        .iter()
        .map(|(_, v)| {
            let v = v.to_f64_lossless();
            v * v
        })
        .sum::<f64>()
        .sqrt();
    if norm > 0.0 {
        for (_, v) in entries.iter_mut() {
            *v = F::from_f64_lossy(v.to_f64_lossless() / norm);
        }
    }
}

/// Fuses a sparse block and a dense block. The sparse block's dimension
/// becomes the boundary; the result has dimension
/// `sparse.dim() + dense.dim()`.
pub fn fuse<F: Scalar>(
    sparse: &SparseVector<F>,
    dense: &DenseVector<F>,
    scale_blocks: bool,
) -> FusedVector<F> {
    let boundary = sparse.dim();
    let mut sparse_entries: Vec<(u32, F)> = sparse.entries().to_vec();
    let mut dense_entries: Vec<(u32, F)> = dense
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, &v)| ((boundary + j) as u32, v))
        .collect();
    if scale_blocks {
        block_scale(&mut sparse_entries);
        block_scale(&mut dense_entries);
    }
    sparse_entries.extend(dense_entries);
    let vector = SparseVector::new(boundary + dense.dim(), sparse_entries)
        .expect("fused entries are ordered and finite");
    FusedVector { boundary, vector }
}
