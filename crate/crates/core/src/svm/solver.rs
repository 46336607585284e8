//! Dual solvers for the L2-regularized, L1-loss linear SVM.
//!
//! Training minimizes J(w, b) = (lambda/2)||w||^2 + (1/n) sum hinge, which
//! in the dual is a box-constrained QP with box bound C = 1/(lambda n).
//! Without a bias the box is the only constraint and single-coordinate
//! updates suffice (dual coordinate descent with seeded epoch shuffles).
//! The unregularized bias adds the constraint sum(y_i alpha_i) = 0, so
//! feasible updates move two coordinates at once: each step picks the
//! maximal-violating pair and takes the exact clipped line-search step.
//! Both solvers maintain w explicitly and record the dual objective
//! sum(alpha) - 0.5||w||^2 once per epoch; it is non-decreasing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::vector::SparseVector;

/// Result of one binary training run, including per-epoch diagnostics.
#[derive(Debug, Clone)]
pub struct BinaryFit {
    /// Weight vector in feature order, full precision.
    pub weights: Vec<f64>,
    /// Intercept; 0 when the bias is not fitted.
    pub bias: f64,
    /// Dual variables, one per training document, in [0, C].
    pub alpha: Vec<f64>,
    /// Dual objective after each epoch (an epoch is n coordinate or pair
    /// updates); non-decreasing within float slack.
    pub dual_objective: Vec<f64>,
    /// True when the optimality measure reached the tolerance before the
    /// epoch cap.
    pub converged: bool,
}

fn dual_objective(alpha: &[f64], w: &[f64]) -> f64 {
    let sum_alpha: f64 = alpha.iter().sum();
    let w_sq: f64 = w.iter().map(|v| v * v).sum();
    sum_alpha - 0.5 * w_sq
}

/// Dual coordinate descent for the no-bias problem (one-variable exact
/// minimization per coordinate, random permutation per epoch). Stops when
/// the largest projected gradient magnitude over an epoch is at most `tol`.
pub(crate) fn solve_dcd(
    xs: &[SparseVector<f64>],
    ys: &[f64],
    dim: usize,
    c: f64,
    tol: f64,
    max_epochs: usize,
    seed: u64,
) -> BinaryFit {
    let n = xs.len();
    let q_diag: Vec<f64> = xs
        .iter()
        .map(|x| x.entries().iter().map(|(_, v)| v * v).sum())
        .collect();
    let mut w = vec![0.0f64; dim];
    let mut alpha = vec![0.0f64; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut curve = Vec::new();
    let mut converged = false;

    for _ in 0..max_epochs {
        order.shuffle(&mut rng);
        let mut max_pg = 0.0f64;
        for &i in &order {
            let g = ys[i] * xs[i].dot_dense(&w) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            max_pg = max_pg.max(pg.abs());
            if pg.abs() > 1e-12 {
                // Q_ii = 0 means the hinge term is linear in alpha_i: the
                // minimizer sits at whichever box end the gradient points to.
                let next = if q_diag[i] > 0.0 {
                    (alpha[i] - g / q_diag[i]).clamp(0.0, c)
                } else if g < 0.0 {
                    c
                } else {
                    0.0
                };
                let delta = next - alpha[i];
                if delta != 0.0 {
                    alpha[i] = next;
                    let step = delta * ys[i];
                    for &(j, v) in xs[i].entries() {
                        w[j as usize] += step * v;
                    }
                }
            }
        }
        curve.push(dual_objective(&alpha, &w));
        if max_pg <= tol {
            converged = true;
            break;
        }
    }

    BinaryFit {
        weights: w,
        bias: 0.0,
        alpha,
        dual_objective: curve,
        converged,
    }
}

/// Inverted index: for each feature, the documents containing it with
/// their values. Shared read-only across the per-label problems.
pub(crate) fn build_columns(xs: &[SparseVector<f64>], dim: usize) -> Vec<Vec<(u32, f64)>> {
    let mut cols: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dim];
    for (doc, x) in xs.iter().enumerate() {
        for &(f, v) in x.entries() {
            cols[f as usize].push((doc as u32, v));
        }
    }
    cols
}

/// Maximal-violating-pair SMO for the problem with an unregularized bias.
///
/// With F_i = y_i - w.x_i, the KKT system requires b >= F_i on the "up" set
/// and b <= F_j on the "low" set; m = max(up) and M = min(low) bound the
/// feasible intercepts and m - M <= tol is the stopping rule. The pair step
/// along (alpha_i += y_i t, alpha_j -= y_j t) keeps sum(y alpha) fixed, has
/// optimal length t = (m - M) / ||x_i - x_j||^2, and moves w by t(x_i - x_j).
pub(crate) fn solve_smo(
    xs: &[SparseVector<f64>],
    ys: &[f64],
    dim: usize,
    c: f64,
    tol: f64,
    max_epochs: usize,
    cols: &[Vec<(u32, f64)>],
) -> BinaryFit {
    let n = xs.len();
    let sq_norms: Vec<f64> = xs
        .iter()
        .map(|x| x.entries().iter().map(|(_, v)| v * v).sum())
        .collect();
    let mut w = vec![0.0f64; dim];
    let mut alpha = vec![0.0f64; n];
    // G_i = y_i w.x_i - 1; F_i = -y_i G_i.
    let mut grad = vec![-1.0f64; n];
    let mut curve = Vec::new();
    let mut converged = false;
    let mut last_m = f64::NEG_INFINITY;
    let mut last_big_m = f64::INFINITY;

    let mut epoch = 0;
    while epoch < max_epochs && !converged {
        let mut stalled = false;
        for _ in 0..n {
            let mut m = f64::NEG_INFINITY;
            let mut big_m = f64::INFINITY;
            let mut i_up = usize::MAX;
            let mut j_low = usize::MAX;
            for k in 0..n {
                let f = -ys[k] * grad[k];
                let positive = ys[k] > 0.0;
                let in_up = (positive && alpha[k] < c) || (!positive && alpha[k] > 0.0);
                let in_low = (positive && alpha[k] > 0.0) || (!positive && alpha[k] < c);
                if in_up && f > m {
                    m = f;
                    i_up = k;
                }
                if in_low && f < big_m {
                    big_m = f;
                    j_low = k;
                }
            }
            last_m = m;
            last_big_m = big_m;
            if m - big_m <= tol {
                converged = true;
                break;
            }
            let (i, j) = (i_up, j_low);

            // Largest step keeping both variables in the box.
            let bound_i = if ys[i] > 0.0 { c - alpha[i] } else { alpha[i] };
            let bound_j = if ys[j] > 0.0 { alpha[j] } else { c - alpha[j] };
            let mut t = bound_i.min(bound_j);
            let eta = sq_norms[i] + sq_norms[j] - 2.0 * xs[i].dot_sparse(&xs[j]);
            if eta > 1e-12 {
                t = t.min((m - big_m) / eta);
            }
            if t <= 0.0 {
                stalled = true;
                break;
            }

            alpha[i] = (alpha[i] + ys[i] * t).clamp(0.0, c);
            alpha[j] = (alpha[j] - ys[j] * t).clamp(0.0, c);

            // w += t (x_i - x_j); every gradient touched through the
            // changed features is updated via the inverted index.
            for &(f, v) in xs[i].entries() {
                let delta = t * v;
                w[f as usize] += delta;
                for &(doc, xv) in &cols[f as usize] {
                    let d = doc as usize;
                    grad[d] += ys[d] * delta * xv;
                }
            }
            for &(f, v) in xs[j].entries() {
                let delta = -t * v;
                w[f as usize] += delta;
                for &(doc, xv) in &cols[f as usize] {
                    let d = doc as usize;
                    grad[d] += ys[d] * delta * xv;
                }
            }
        }
        curve.push(dual_objective(&alpha, &w));
        epoch += 1;
        if stalled {
            break;
        }
    }

    let free: Vec<usize> = (0..n).filter(|&k| alpha[k] > 0.0 && alpha[k] < c).collect();
    let bias = if !free.is_empty() {
        free.iter().map(|&k| -ys[k] * grad[k]).sum::<f64>() / free.len() as f64
    } else if last_m.is_finite() && last_big_m.is_finite() {
        0.5 * (last_m + last_big_m)
    } else if last_m.is_finite() {
        last_m
    } else if last_big_m.is_finite() {
        last_big_m
    } else {
        0.0
    };

    BinaryFit {
        weights: w,
        bias,
        alpha,
        dual_objective: curve,
        converged,
    }
}
