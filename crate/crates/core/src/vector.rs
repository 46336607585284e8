//! Dense and sparse feature-vector containers and the sparse-vector file
//! format shared by the one-hot and fusion representations.
//!
//! The file format is line-oriented: a header `#dim=<dim>` (with an optional
//! ` #boundary=<b>` for fused vectors), then any number of `#`-prefixed
//! comment lines, then one document per line as
//! `label1,label2<TAB>idx:val idx:val ...` with 0-based ascending indices and
//! values in shortest round-trip decimal.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::Error;
use crate::scalar::Scalar;
use crate::Result;

/// Dense real vector of fixed dimension with finite components.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector<F: Scalar> {
    components: Vec<F>,
}

impl<F: Scalar> DenseVector<F> {
    /// Wraps `components`, rejecting non-finite values.
    pub fn new(components: Vec<F>) -> Result<Self> {
        if let Some(pos) = components.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite component at position {pos}"
            )));
        }
        Ok(Self { components })
    }

    /// Zero vector of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        Self {
            components: vec![F::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.components
    }

    pub fn into_components(self) -> Vec<F> {
        self.components
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|v| {
                let x = v.to_f64_lossless();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// True when every component is zero.
    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|v| *v == F::zero())
    }
}

/// Sparse vector: strictly increasing indices paired with finite nonzero
/// values, all below the declared dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<F: Scalar> {
    dim: usize,
    entries: Vec<(u32, F)>,
}

impl<F: Scalar> SparseVector<F> {
    /// Builds a sparse vector, validating the container invariants:
    /// indices strictly increasing and `< dim`, values finite and nonzero.
    pub fn new(dim: usize, entries: Vec<(u32, F)>) -> Result<Self> {
        let mut prev: Option<u32> = None;
        for &(idx, val) in &entries {
            if (idx as usize) >= dim {
                return Err(Error::invalid(format!(
                    "sparse index {idx} out of range for dimension {dim}"
                )));
            }
            if let Some(p) = prev {
                if idx <= p {
                    return Err(Error::invalid(format!(
                        "sparse indices not strictly increasing at {idx}"
                    )));
                }
            }
            if !val.is_finite() || val == F::zero() {
                return Err(Error::invalid(format!(
                    "sparse value at index {idx} must be finite and nonzero"
                )));
            }
            prev = Some(idx);
        }
        Ok(Self { dim, entries })
    }

    /// Empty vector of dimension `dim`.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// Converts a dense vector, dropping zero components.
    pub fn from_dense(dense: &DenseVector<F>) -> Self {
        let entries = dense
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != F::zero())
            .map(|(i, v)| (i as u32, *v))
            .collect();
        Self {
            dim: dense.dim(),
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(u32, F)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all stored values, in `f64`.
    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v.to_f64_lossless()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, v)| {
                let x = v.to_f64_lossless();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Dot product against a dense weight slice of matching dimension.
    pub fn dot_dense(&self, weights: &[f64]) -> f64 {
        debug_assert_eq!(weights.len(), self.dim);
        self.entries
            .iter()
            .map(|&(i, v)| v.to_f64_lossless() * weights[i as usize])
            .sum()
    }

    /// Dot product against another sparse vector (sorted-merge).
    pub fn dot_sparse(&self, other: &Self) -> f64 {
        let (a, b) = (&self.entries, &other.entries);
        let (mut i, mut j) = (0usize, 0usize);
        let mut acc = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1.to_f64_lossless() * b[j].1.to_f64_lossless();
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Rescales every stored value by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let entries = self
            .entries
            .iter()
            .map(|&(i, v)| (i, F::from_f64_lossy(v.to_f64_lossless() * factor)))
            .collect();
        Self::new(self.dim, entries)
    }
}

/// Label set plus feature vector, one per document line.
pub type SparseRow<F> = (BTreeSet<String>, SparseVector<F>);

/// Parsed contents of a sparse-vector file.
#[derive(Debug, Clone)]
pub struct SparseFile<F: Scalar> {
    /// Declared vector dimension.
    pub dim: usize,
    /// Sparse/dense block boundary for fused files.
    pub boundary: Option<usize>,
    /// One row per document, in file order.
    pub rows: Vec<SparseRow<F>>,
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains([',', '\t', '\n', '\r']) {
        return Err(Error::invalid(format!(
            "label {label:?} cannot be written to a sparse-vector file"
        )));
    }
    Ok(())
}

/// Writes a sparse-vector file. `comments` go out as extra `#` lines after
/// the dimension header; rows keep their order.
pub fn write_sparse_file<F: Scalar, W: Write>(
    out: &mut W,
    dim: usize,
    boundary: Option<usize>,
    comments: &[String],
    rows: &[SparseRow<F>],
) -> Result<()> {
    match boundary {
        Some(b) => writeln!(out, "#dim={dim} #boundary={b}")?,
        None => writeln!(out, "#dim={dim}")?,
    }
    for c in comments {
        writeln!(out, "#{c}")?;
    }
    let mut line = String::new();
    for (labels, vec) in rows {
        if vec.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: vec.dim(),
            });
        }
        line.clear();
        let mut first = true;
        for label in labels {
            check_label(label)?;
            if !first {
                line.push(',');
            }
            line.push_str(label);
            first = false;
        }
        line.push('\t');
        let mut first = true;
        for &(idx, val) in vec.entries() {
            if !first {
                line.push(' ');
            }
            line.push_str(&format!("{idx}:{val}"));
            first = false;
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Writes a sparse-vector file to `path`.
pub fn write_sparse_file_to<F: Scalar>(
    path: &Path,
    dim: usize,
    boundary: Option<usize>,
    comments: &[String],
    rows: &[SparseRow<F>],
) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_sparse_file(&mut out, dim, boundary, comments, rows)?;
    out.flush()?;
    Ok(())
}

/// Reads a sparse-vector file produced by [`write_sparse_file`].
pub fn read_sparse_file<F: Scalar>(path: &Path) -> Result<SparseFile<F>> {
    let display = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut dim: Option<usize> = None;
    let mut boundary: Option<usize> = None;
    let mut rows = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        if line.starts_with('#') {
            if lineno == 1 {
                let (d, b) = parse_header(&display, lineno, &line)?;
                dim = Some(d);
                boundary = b;
            }
            continue;
        }
        let dim = dim.ok_or_else(|| {
            Error::format(&display, lineno, "missing #dim= header before data rows")
        })?;
        rows.push(parse_row(&display, lineno, &line, dim)?);
    }
    let dim = dim.ok_or_else(|| Error::format(&display, 1, "missing #dim= header"))?;
    Ok(SparseFile {
        dim,
        boundary,
        rows,
    })
}

fn parse_header(path: &str, lineno: usize, line: &str) -> Result<(usize, Option<usize>)> {
    let mut dim = None;
    let mut boundary = None;
    for part in line.split_whitespace() {
        if let Some(v) = part.strip_prefix("#dim=") {
            dim = Some(v.parse::<usize>().map_err(|_| {
                Error::format(path, lineno, format!("invalid dimension {v:?}"))
            })?);
        } else if let Some(v) = part.strip_prefix("#boundary=") {
            boundary = Some(v.parse::<usize>().map_err(|_| {
                Error::format(path, lineno, format!("invalid boundary {v:?}"))
            })?);
        }
    }
    match dim {
        Some(d) => Ok((d, boundary)),
        None => Err(Error::format(path, lineno, "first line must carry #dim=")),
    }
}

fn parse_row<F: Scalar>(
    path: &str,
    lineno: usize,
    line: &str,
    dim: usize,
) -> Result<SparseRow<F>> {
    let (label_part, entry_part) = line
        .split_once('\t')
        .ok_or_else(|| Error::format(path, lineno, "missing TAB between labels and entries"))?;
    let mut labels = BTreeSet::new();
    if !label_part.is_empty() {
        for label in label_part.split(',') {
            if label.is_empty() {
                return Err(Error::format(path, lineno, "empty label"));
            }
            labels.insert(label.to_string());
        }
    }
    let mut entries = Vec::new();
    for tok in entry_part.split_whitespace() {
        let (idx, val) = tok
            .split_once(':')
            .ok_or_else(|| Error::format(path, lineno, format!("malformed entry {tok:?}")))?;
        let idx: u32 = idx
            .parse()
            .map_err(|_| Error::format(path, lineno, format!("invalid index {idx:?}")))?;
        let val: f64 = val
            .parse()
            .map_err(|_| Error::format(path, lineno, format!("invalid value {val:?}")))?;
        entries.push((idx, F::from_f64_lossy(val)));
    }
    let vec = SparseVector::new(dim, entries)
        .map_err(|e| Error::format(path, lineno, e.to_string()))?;
    Ok((labels, vec))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_rejects_unsorted_indices() {
        assert!(SparseVector::<f64>::new(4, vec![(2, 1.0), (1, 1.0)]).is_err());
        assert!(SparseVector::<f64>::new(4, vec![(1, 1.0), (1, 2.0)]).is_err());
    }

    #[test]
    fn sparse_rejects_out_of_range_and_zero() {
        assert!(SparseVector::<f64>::new(2, vec![(2, 1.0)]).is_err());
        assert!(SparseVector::<f64>::new(2, vec![(0, 0.0)]).is_err());
        assert!(SparseVector::<f64>::new(2, vec![(0, f64::NAN)]).is_err());
    }

    #[test]
    fn dot_products_agree() {
        let a = SparseVector::<f64>::new(5, vec![(0, 1.0), (3, 2.0)]).unwrap();
        let b = SparseVector::<f64>::new(5, vec![(3, 4.0), (4, 1.0)]).unwrap();
        assert_eq!(a.dot_sparse(&b), 8.0);
        let w = vec![1.0, 0.0, 0.0, 0.5, 0.0];
        assert_eq!(a.dot_dense(&w), 2.0);
    }

    #[test]
    fn file_round_trip() {
        let rows: Vec<SparseRow<f64>> = vec![
            (
                ["x".to_string(), "y".to_string()].into(),
                SparseVector::new(6, vec![(1, 2.0), (5, -3.5)]).unwrap(),
            ),
            (BTreeSet::new(), SparseVector::empty(6)),
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.vec");
        write_sparse_file_to(&path, 6, Some(4), &["config={}".into()], &rows).unwrap();
        let parsed = read_sparse_file::<f64>(&path).unwrap();
        assert_eq!(parsed.dim, 6);
        assert_eq!(parsed.boundary, Some(4));
        assert_eq!(parsed.rows, rows);
    }

    #[test]
    fn labels_with_separators_are_rejected() {
        let rows: Vec<SparseRow<f64>> =
            vec![(["a,b".to_string()].into(), SparseVector::empty(2))];
        let mut buf = Vec::new();
        assert!(write_sparse_file(&mut buf, 2, None, &[], &rows).is_err());
    }
}
