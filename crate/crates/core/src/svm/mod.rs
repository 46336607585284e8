//! Linear SVM training: binary solver, one-vs-rest multi-label wrapper,
//! binary-relevance prediction, and cross-validated lambda selection.
//!
//! The objective is J(w, b) = (lambda/2)||w||^2 + (1/n) sum_i hinge_i; for
//! users of the C convention, C = 1/(lambda n). The bias, when fitted, is
//! native and unregularized. Per-label problems are independent, seeded by
//! the label name xor the run seed, so parallel one-vs-rest training is
//! bitwise identical to sequential. Trained weights are narrowed to f32
//! for storage, and every prediction path reads the narrowed weights, so
//! in-process predictions match predictions from a reloaded model file.

mod model_io;
mod solver;

use std::collections::{BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::error::Error;
use crate::onehot::fnv1a_64;
use crate::vector::SparseVector;
use crate::Result;

pub use solver::BinaryFit;

/// Solver settings shared by all training entry points.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Regularization weight; must be positive.
    pub lambda: f64,
    /// Stopping tolerance on the solver's optimality measure.
    pub tol: f64,
    /// Epoch cap.
    pub max_iter: usize,
    pub seed: u64,
    /// Fit an unregularized intercept.
    pub fit_bias: bool,
    /// Distribute per-label problems across threads; results are
    /// identical to sequential either way.
    pub parallel: bool,
}

impl TrainConfig {
    pub fn new(lambda: f64) -> Self {
        TrainConfig {
            lambda,
            tol: 1e-4,
            max_iter: 1000,
            seed: 0,
            fit_bias: true,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::invalid("lambda must be positive and finite"));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tol must be positive and finite"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// One-vs-rest linear model with f32 weight storage.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    labels: Vec<String>,
    feature_dim: usize,
    lambda: f64,
    has_bias: bool,
    fallback: usize,
    weights: Vec<f32>,
    biases: Vec<f32>,
}

impl LinearModel {
    /// Assembles a model, validating the shape invariants.
    pub fn from_parts(
        labels: Vec<String>,
        feature_dim: usize,
        lambda: f64,
        has_bias: bool,
        fallback: usize,
        weights: Vec<f32>,
        biases: Vec<f32>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("model needs at least one label"));
        }
        let unique: HashSet<&str> = labels.iter().map(String::as_str).collect();
        if unique.len() != labels.len() {
            return Err(Error::invalid("duplicate labels in model"));
        }
        if fallback >= labels.len() {
            return Err(Error::invalid("fallback label index out of range"));
        }
        if weights.len() != labels.len() * feature_dim || biases.len() != labels.len() {
            return Err(Error::invalid("model weight/bias shape mismatch"));
        }
        if weights.iter().any(|w| !w.is_finite()) || biases.iter().any(|b| !b.is_finite()) {
            return Err(Error::invalid("non-finite model parameter"));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::invalid("model lambda must be positive"));
        }
        Ok(LinearModel {
            labels,
            feature_dim,
            lambda,
            has_bias,
            fallback,
            weights,
            biases,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn has_bias(&self) -> bool {
        self.has_bias
    }

    pub fn fallback_label(&self) -> &str {
        &self.labels[self.fallback]
    }

    /// Weight row of label `c`.
    pub fn weights_of(&self, c: usize) -> &[f32] {
        &self.weights[c * self.feature_dim..(c + 1) * self.feature_dim]
    }

    /// Per-label scores w_c.x + b_c, in label order. Scores are computed
    /// in f64 from the stored f32 parameters.
    pub fn decision(&self, x: &SparseVector<f64>) -> Result<Vec<f64>> {
        if x.dim() != self.feature_dim {
            return Err(Error::Dimension {
                expected: self.feature_dim,
                got: x.dim(),
            });
        }
        let scores = (0..self.labels.len())
            .map(|c| {
                let row = self.weights_of(c);
                let dot: f64 = x
                    .entries()
                    .iter()
                    .map(|&(i, v)| v * f64::from(row[i as usize]))
                    .sum();
                dot + f64::from(self.biases[c])
            })
            .collect();
        Ok(scores)
    }

    /// Labels with strictly positive score; the fallback label when none
    /// score positive. Never empty.
    pub fn predict_multilabel(&self, x: &SparseVector<f64>) -> Result<BTreeSet<String>> {
        let scores = self.decision(x)?;
        let mut out: BTreeSet<String> = scores
            .iter()
            .zip(&self.labels)
            .filter(|(s, _)| **s > 0.0)
            .map(|(_, l)| l.clone())
            .collect();
        if out.is_empty() {
            out.insert(self.labels[self.fallback].clone());
        }
        Ok(out)
    }
}

fn check_rows(xs: &[SparseVector<f64>]) -> Result<usize> {
    let first = xs
        .first()
        .ok_or_else(|| Error::invalid("training set is empty"))?;
    let dim = first.dim();
    for x in xs {
        if x.dim() != dim {
            return Err(Error::Dimension {
                expected: dim,
                got: x.dim(),
            });
        }
    }
    Ok(dim)
}

fn fit_one(
    xs: &[SparseVector<f64>],
    ys: &[f64],
    dim: usize,
    cfg: &TrainConfig,
    cols: Option<&[Vec<(u32, f64)>]>,
    seed: u64,
) -> BinaryFit {
    let c = 1.0 / (cfg.lambda * xs.len() as f64);
    if cfg.fit_bias {
        let owned;
        let cols = match cols {
            Some(c) => c,
            None => {
                owned = solver::build_columns(xs, dim);
                &owned
            }
        };
        solver::solve_smo(xs, ys, dim, c, cfg.tol, cfg.max_iter, cols)
    } else {
        solver::solve_dcd(xs, ys, dim, c, cfg.tol, cfg.max_iter, seed)
    }
}

/// Trains one binary problem. `ys` entries must be +1 or -1.
pub fn train_binary(xs: &[SparseVector<f64>], ys: &[i8], cfg: &TrainConfig) -> Result<BinaryFit> {
    cfg.validate()?;
    let dim = check_rows(xs)?;
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "{} documents but {} targets",
            xs.len(),
            ys.len()
        )));
    }
    if ys.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::invalid("targets must be +1 or -1"));
    }
    let ys: Vec<f64> = ys.iter().map(|&y| f64::from(y)).collect();
    Ok(fit_one(xs, &ys, dim, cfg, None, cfg.seed))
}

/// Computes J(w, b) on the given data; exposed so independent checks can
/// compare solver output against reference solutions.
pub fn primal_objective(
    xs: &[SparseVector<f64>],
    ys: &[i8],
    weights: &[f64],
    bias: f64,
    lambda: f64,
) -> f64 {
    let reg = 0.5 * lambda * weights.iter().map(|w| w * w).sum::<f64>();
    let hinge: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, &y)| (1.0 - f64::from(y) * (x.dot_dense(weights) + bias)).max(0.0))
        .sum();
    reg + hinge / xs.len() as f64
}

fn fallback_index(label_universe: &[String], label_sets: &[BTreeSet<String>]) -> usize {
    let mut best = 0usize;
    let mut best_count = usize::MAX;
    for (idx, label) in label_universe.iter().enumerate() {
        let count = label_sets.iter().filter(|s| s.contains(label)).count();
        let better = best_count == usize::MAX
            || count > best_count
            || (count == best_count && label.as_str() < label_universe[best].as_str());
        if better {
            best = idx;
            best_count = count;
        }
    }
    best
}

/// Trains one binary-relevance problem per universe label and assembles
/// the weight rows in universe order.
pub fn train_ovr(
    xs: &[SparseVector<f64>],
    label_sets: &[BTreeSet<String>],
    label_universe: &[String],
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    cfg.validate()?;
    let dim = check_rows(xs)?;
    if xs.len() != label_sets.len() {
        return Err(Error::invalid(format!(
            "{} documents but {} label sets",
            xs.len(),
            label_sets.len()
        )));
    }
    if label_universe.is_empty() {
        return Err(Error::invalid("label universe is empty"));
    }
    let known: HashSet<&str> = label_universe.iter().map(String::as_str).collect();
    if known.len() != label_universe.len() {
        return Err(Error::invalid("duplicate label in universe"));
    }
    for (i, set) in label_sets.iter().enumerate() {
        for label in set {
            if !known.contains(label.as_str()) {
                return Err(Error::invalid(format!(
                    "document {i} carries label {label:?} not in the universe"
                )));
            }
        }
    }

    let cols = if cfg.fit_bias {
        Some(solver::build_columns(xs, dim))
    } else {
        None
    };
    let fit_label = |label: &String| -> BinaryFit {
        let ys: Vec<f64> = label_sets
            .iter()
            .map(|s| if s.contains(label) { 1.0 } else { -1.0 })
            .collect();
        let seed = fnv1a_64(label.as_bytes()) ^ cfg.seed;
        fit_one(xs, &ys, dim, cfg, cols.as_deref(), seed)
    };
    let fits: Vec<BinaryFit> = if cfg.parallel {
        label_universe.par_iter().map(fit_label).collect()
    } else {
        label_universe.iter().map(fit_label).collect()
    };

    let mut weights = Vec::with_capacity(label_universe.len() * dim);
    let mut biases = Vec::with_capacity(label_universe.len());
    for fit in &fits {
        weights.extend(fit.weights.iter().map(|&w| w as f32));
        biases.push(fit.bias as f32);
    }
    LinearModel::from_parts(
        label_universe.to_vec(),
        dim,
        cfg.lambda,
        cfg.fit_bias,
        fallback_index(label_universe, label_sets),
        weights,
        biases,
    )
}

/// Cross-validation outcome: the winning lambda and the per-lambda mean
/// validation micro-F1, in ascending lambda order.
#[derive(Debug, Clone)]
pub struct CvReport {
    pub best_lambda: f64,
    pub scores: Vec<(f64, f64)>,
}

/// Deterministic seeded k-fold assignment, stratified by each document's
/// globally most frequent label.
fn fold_assignment(label_sets: &[BTreeSet<String>], k: usize, seed: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    let mut counts: HashMap<&str, usize> = HashMap::new();
    for set in label_sets {
        for label in set {
            *counts.entry(label.as_str()).or_insert(0) += 1;
        }
    }
    let mut groups: std::collections::BTreeMap<Option<&str>, Vec<usize>> =
        std::collections::BTreeMap::new();
    for (i, set) in label_sets.iter().enumerate() {
        let mut key: Option<&str> = None;
        let mut key_count = 0usize;
        for label in set {
            let c = counts[label.as_str()];
            if c > key_count {
                key_count = c;
                key = Some(label.as_str());
            }
        }
        groups.entry(key).or_default().push(i);
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0usize; label_sets.len()];
    for (_, mut docs) in groups {
        docs.shuffle(&mut rng);
        for (pos, doc) in docs.into_iter().enumerate() {
            folds[doc] = pos % k;
        }
    }
    folds
}

/// Selects lambda by seeded stratified k-fold cross-validation, scoring
/// each candidate by mean validation micro-F1; ties go to the smaller
/// lambda.
pub fn cross_validate_lambda(
    xs: &[SparseVector<f64>],
    label_sets: &[BTreeSet<String>],
    label_universe: &[String],
    grid: &[f64],
    k: usize,
    cfg: &TrainConfig,
) -> Result<CvReport> {
    cfg.validate()?;
    check_rows(xs)?;
    if k < 2 {
        return Err(Error::invalid("cross-validation needs k >= 2"));
    }
    if xs.len() < k {
        return Err(Error::invalid(format!(
            "{} documents cannot fill {k} folds",
            xs.len()
        )));
    }
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid is empty"));
    }
    if grid.iter().any(|l| !l.is_finite() || *l <= 0.0) {
        return Err(Error::invalid("lambda grid values must be positive"));
    }
    let mut lambdas: Vec<f64> = grid.to_vec();
    lambdas.sort_by(|a, b| a.partial_cmp(b).expect("finite lambdas"));
    lambdas.dedup();

    let folds = fold_assignment(label_sets, k, cfg.seed);
    let mut scores = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        let mut total = 0.0;
        for fold in 0..k {
            let mut train_x = Vec::new();
            let mut train_y = Vec::new();
            let mut val_x = Vec::new();
            let mut val_y = Vec::new();
            for i in 0..xs.len() {
                if folds[i] == fold {
                    val_x.push(xs[i].clone());
                    val_y.push(label_sets[i].clone());
                } else {
                    train_x.push(xs[i].clone());
                    train_y.push(label_sets[i].clone());
                }
            }
            let fold_cfg = TrainConfig {
                lambda,
                ..cfg.clone()
            };
            let model = train_ovr(&train_x, &train_y, label_universe, &fold_cfg)?;
            let preds: Vec<BTreeSet<String>> = val_x
                .iter()
                .map(|x| model.predict_multilabel(x))
                .collect::<Result<_>>()?;
            total += crate::metrics::micro_f1(&val_y, &preds)?;
        }
        scores.push((lambda, total / k as f64));
    }
    let mut best = scores[0];
    for &(lambda, score) in &scores[1..] {
        if score > best.1 {
            best = (lambda, score);
        }
    }
    Ok(CvReport {
        best_lambda: best.0,
        scores,
    })
}
