//! Multi-label evaluation: micro/macro F1, length-bucketed slices, and a
//! two-sample significance test.
//!
//! Micro-F1 pools true/false positives and false negatives over every
//! (document, label) decision; macro-F1 averages per-label F1 without
//! weighting, counting labels that never occur as 0. Length buckets are
//! left-closed at {100, 200, 300, 400}. All scores use the convention
//! 0/0 = 0.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::Error;
use crate::Result;

/// Pooled contingency counts for one label (or globally).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Counts {
    pub fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }
}

fn check_lengths<T, U>(gold: &[T], pred: &[U]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::invalid(format!(
            "{} gold documents but {} predictions",
            gold.len(),
            pred.len()
        )));
    }
    Ok(())
}

fn pooled_counts(gold: &[BTreeSet<String>], pred: &[BTreeSet<String>]) -> Counts {
    let mut c = Counts::default();
    for (g, p) in gold.iter().zip(pred) {
        c.tp += g.intersection(p).count() as u64;
        c.fp += p.difference(g).count() as u64;
        c.fn_ += g.difference(p).count() as u64;
    }
    c
}

/// Micro-averaged F1 over all (document, label) decisions.
pub fn micro_f1(gold: &[BTreeSet<String>], pred: &[BTreeSet<String>]) -> Result<f64> {
    check_lengths(gold, pred)?;
    Ok(pooled_counts(gold, pred).f1())
}

/// Per-label pooled counts for every universe label.
pub fn per_label_counts(
    gold: &[BTreeSet<String>],
    pred: &[BTreeSet<String>],
    label_universe: &[String],
) -> Result<BTreeMap<String, Counts>> {
    check_lengths(gold, pred)?;
    let mut out: BTreeMap<String, Counts> = label_universe
        .iter()
        .map(|l| (l.clone(), Counts::default()))
        .collect();
    for (g, p) in gold.iter().zip(pred) {
        for label in g.intersection(p) {
            if let Some(c) = out.get_mut(label) {
                c.tp += 1;
            }
        }
        for label in p.difference(g) {
            if let Some(c) = out.get_mut(label) {
                c.fp += 1;
            }
        }
        for label in g.difference(p) {
            if let Some(c) = out.get_mut(label) {
                c.fn_ += 1;
            }
        }
    }
    Ok(out)
}

/// Unweighted mean of per-label F1 over the universe; labels that never
/// occur contribute 0.
pub fn macro_f1(
    gold: &[BTreeSet<String>],
    pred: &[BTreeSet<String>],
    label_universe: &[String],
) -> Result<f64> {
    if label_universe.is_empty() {
        return Err(Error::invalid("macro-F1 needs a non-empty label universe"));
    }
    let per_label = per_label_counts(gold, pred, label_universe)?;
    Ok(per_label.values().map(Counts::f1).sum::<f64>() / label_universe.len() as f64)
}

/// Document-length buckets, left-closed at {100, 200, 300, 400}.
pub const BUCKET_NAMES: [&str; 5] = ["<100", "100-200", "200-300", "300-400", ">400"];

fn bucket_of(len: usize) -> usize {
    match len {
        0..=99 => 0,
        100..=199 => 1,
        200..=299 => 2,
        300..=399 => 3,
        _ => 4,
    }
}

/// Micro-F1 per length bucket.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct BucketScore {
    pub bucket: String,
    pub n_docs: usize,
    pub micro_f1: f64,
}

/// Slices the evaluation by document length (token count). Empty buckets
/// are omitted; buckets appear in ascending length order.
pub fn bucketed_f1(
    gold: &[BTreeSet<String>],
    pred: &[BTreeSet<String>],
    doc_lengths: &[usize],
) -> Result<Vec<BucketScore>> {
    check_lengths(gold, pred)?;
    check_lengths(gold, doc_lengths)?;
    let mut counts = [Counts::default(); 5];
    let mut sizes = [0usize; 5];
    for ((g, p), &len) in gold.iter().zip(pred).zip(doc_lengths) {
        let b = bucket_of(len);
        sizes[b] += 1;
        counts[b].tp += g.intersection(p).count() as u64;
        counts[b].fp += p.difference(g).count() as u64;
        counts[b].fn_ += g.difference(p).count() as u64;
    }
    Ok((0..5)
        .filter(|&b| sizes[b] > 0)
        .map(|b| BucketScore {
            bucket: BUCKET_NAMES[b].to_string(),
            n_docs: sizes[b],
            micro_f1: counts[b].f1(),
        })
        .collect())
}

/// Full evaluation summary, serialized with stable field order.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct EvalReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub per_label: BTreeMap<String, Counts>,
    pub per_bucket: Vec<BucketScore>,
}

/// Builds the complete report for one evaluation run.
pub fn evaluate(
    gold: &[BTreeSet<String>],
    pred: &[BTreeSet<String>],
    doc_lengths: &[usize],
    label_universe: &[String],
) -> Result<EvalReport> {
    let global = pooled_counts(gold, pred);
    Ok(EvalReport {
        micro_f1: micro_f1(gold, pred)?,
        macro_f1: macro_f1(gold, pred, label_universe)?,
        tp: global.tp,
        fp: global.fp,
        fn_: global.fn_,
        per_label: per_label_counts(gold, pred, label_universe)?,
        per_bucket: bucketed_f1(gold, pred, doc_lengths)?,
    })
}

fn sample_stats(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sample Student t-test with pooled variance; returns (t, two-sided p).
pub fn two_sided_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64)> {
    if sample_a.len() < 2 || sample_b.len() < 2 {
        return Err(Error::invalid("t-test needs at least 2 points per sample"));
    }
    let (na, nb) = (sample_a.len() as f64, sample_b.len() as f64);
    let (ma, va) = sample_stats(sample_a);
    let (mb, vb) = sample_stats(sample_b);
    let df = na + nb - 2.0;
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / df;
    if pooled <= 0.0 {
        return Err(Error::invalid("degenerate variance in t-test"));
    }
    let t = (ma - mb) / (pooled * (1.0 / na + 1.0 / nb)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df)
        .map_err(|e| Error::invalid(format!("t-distribution setup failed: {e}")))?;
    let p = 2.0 * dist.cdf(-t.abs());
    Ok((t, p))
}
