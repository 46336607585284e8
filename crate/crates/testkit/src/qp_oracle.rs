//! Independent reference solver for the binary hinge-loss problem.
//!
//! The production solvers are coordinate methods, so the reference runs a
//! different algorithm entirely: accelerated projected-gradient ascent on
//! the dual
//!
//! ```text
//! maximize   D(a) = sum(a) - 0.5 ||sum_i a_i y_i x_i||^2
//! subject to 0 <= a_i <= C = 1 / (lambda n)      (box)
//!            y . a = 0                           (only when a bias is fit)
//! ```
//!
//! Strong duality gives J* = lambda * D*, so for any feasible dual point
//! `a` and any (w, b) the sandwich
//!
//! ```text
//! lambda * D(a)  <=  J*  <=  J(w, b)
//! ```
//!
//! holds. [`solve_reference`] returns the best primal pair it found along
//! with the width of that sandwich; a caller that checks the gap certifies
//! the reference (and any solver it is compared against) without trusting
//! either iteration to have converged.

use embfuse::svm::primal_objective;
use embfuse::SparseVec;

/// Reference solution with a correctness certificate.
#[derive(Debug, Clone)]
pub struct Reference {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// J(weights, bias) on the instance.
    pub primal: f64,
    /// primal - lambda * D(a) >= primal - J* >= 0.
    pub gap: f64,
    pub iterations: usize,
}

/// Maximizes the dual until `primal - lambda * dual <= gap_tol * (1 + |primal|)`
/// or `max_iters` steps, whichever comes first. Requires both classes.
pub fn solve_reference(
    xs: &[SparseVec],
    ys: &[i8],
    lambda: f64,
    fit_bias: bool,
    gap_tol: f64,
    max_iters: usize,
) -> Reference {
    let n = xs.len();
    assert!(n > 0 && ys.len() == n, "empty or mismatched instance");
    assert!(
        ys.contains(&1) && ys.contains(&-1),
        "reference solver needs both classes"
    );
    let dim = xs[0].dim();
    let c = 1.0 / (lambda * n as f64);
    let ysf: Vec<f64> = ys.iter().map(|&y| f64::from(y)).collect();

    let mut lip = lipschitz(xs, &ysf, dim).max(1e-12);
    let project = |v: Vec<f64>| -> Vec<f64> {
        if fit_bias {
            project_box_hyperplane(&v, &ysf, c)
        } else {
            v.into_iter().map(|a| a.clamp(0.0, c)).collect()
        }
    };

    let mut alpha = vec![0.0f64; n];
    let mut z = alpha.clone();
    let mut theta = 1.0f64;
    let mut dual_at_alpha = 0.0f64;

    let mut best_w = vec![0.0f64; dim];
    let mut best_b = if fit_bias { best_bias(xs, &ysf, &best_w) } else { 0.0 };
    let mut best_primal = primal_objective(xs, ys, &best_w, best_b, lambda);
    let mut best_dual = dual_at_alpha;
    let mut iterations = 0;

    for iter in 1..=max_iters {
        iterations = iter;
        let w_z = weights_of(&z, xs, &ysf, dim);
        let cand = project(ascent_step(&z, &w_z, xs, &ysf, lip));
        let mut cand_dual = dual_value(&cand, xs, &ysf, dim);
        let (cand, cand_dual) = if cand_dual >= dual_at_alpha {
            (cand, cand_dual)
        } else {
            // Momentum overshot. Retry as a plain step from the last
            // iterate, doubling the Lipschitz estimate until it ascends.
            theta = 1.0;
            let w_a = weights_of(&alpha, xs, &ysf, dim);
            loop {
                let plain = project(ascent_step(&alpha, &w_a, xs, &ysf, lip));
                cand_dual = dual_value(&plain, xs, &ysf, dim);
                if cand_dual >= dual_at_alpha - 1e-15 {
                    break (plain, cand_dual);
                }
                lip *= 2.0;
            }
        };
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = (theta - 1.0) / theta_next;
        z = cand
            .iter()
            .zip(&alpha)
            .map(|(&new, &old)| new + momentum * (new - old))
            .collect();
        alpha = cand;
        dual_at_alpha = cand_dual;
        theta = theta_next;

        if iter % 64 == 0 || iter == max_iters {
            best_dual = best_dual.max(dual_at_alpha);
            let w = weights_of(&alpha, xs, &ysf, dim);
            let b = if fit_bias { best_bias(xs, &ysf, &w) } else { 0.0 };
            let primal = primal_objective(xs, ys, &w, b, lambda);
            if primal < best_primal {
                best_primal = primal;
                best_w = w;
                best_b = b;
            }
            let gap = best_primal - lambda * best_dual;
            if gap <= gap_tol * (1.0 + best_primal.abs()) {
                break;
            }
        }
    }

    Reference {
        weights: best_w,
        bias: best_b,
        primal: best_primal,
        gap: best_primal - lambda * best_dual,
        iterations,
    }
}

fn weights_of(alpha: &[f64], xs: &[SparseVec], ysf: &[f64], dim: usize) -> Vec<f64> {
    let mut w = vec![0.0f64; dim];
    for ((x, &y), &a) in xs.iter().zip(ysf).zip(alpha) {
        if a != 0.0 {
            for &(j, v) in x.entries() {
                w[j as usize] += a * y * v;
            }
        }
    }
    w
}

fn dual_value(alpha: &[f64], xs: &[SparseVec], ysf: &[f64], dim: usize) -> f64 {
    let w = weights_of(alpha, xs, ysf, dim);
    alpha.iter().sum::<f64>() - 0.5 * w.iter().map(|v| v * v).sum::<f64>()
}

fn ascent_step(from: &[f64], w: &[f64], xs: &[SparseVec], ysf: &[f64], lip: f64) -> Vec<f64> {
    from.iter()
        .zip(xs)
        .zip(ysf)
        .map(|((&a, x), &y)| a + (1.0 - y * x.dot_dense(w)) / lip)
        .collect()
}

/// Largest eigenvalue of Q_ij = y_i y_j x_i . x_j by power iteration, padded
/// by 2% against Rayleigh underestimation. The monotone restart above makes
/// a residual underestimate harmless anyway.
fn lipschitz(xs: &[SparseVec], ysf: &[f64], dim: usize) -> f64 {
    let n = xs.len();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i % 7) as f64).collect();
    let norm = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    v.iter_mut().for_each(|t| *t /= norm);
    let mut rayleigh = 0.0;
    for _ in 0..120 {
        let w = weights_of(&v, xs, ysf, dim);
        let qv: Vec<f64> = xs
            .iter()
            .zip(ysf)
            .map(|(x, &y)| y * x.dot_dense(&w))
            .collect();
        let norm = qv.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        rayleigh = v.iter().zip(&qv).map(|(a, b)| a * b).sum::<f64>();
        v = qv.into_iter().map(|t| t / norm).collect();
    }
    rayleigh * 1.02
}

/// Euclidean projection onto {0 <= a <= c} ∩ {y . a = 0}. The KKT form is
/// a_i = clamp(v_i - mu y_i, 0, c) with h(mu) = y . a(mu) piecewise linear
/// and non-increasing, so the root is found exactly between two of the 2n
/// clamp breakpoints.
fn project_box_hyperplane(v: &[f64], ysf: &[f64], c: f64) -> Vec<f64> {
    let apply = |mu: f64| -> Vec<f64> {
        v.iter()
            .zip(ysf)
            .map(|(&vi, &y)| (vi - mu * y).clamp(0.0, c))
            .collect()
    };
    let h = |mu: f64| -> f64 {
        v.iter()
            .zip(ysf)
            .map(|(&vi, &y)| y * (vi - mu * y).clamp(0.0, c))
            .sum()
    };

    let mut bps = Vec::with_capacity(2 * v.len());
    for (&vi, &y) in v.iter().zip(ysf) {
        if y > 0.0 {
            bps.push(vi - c);
            bps.push(vi);
        } else {
            bps.push(-vi);
            bps.push(c - vi);
        }
    }
    bps.sort_unstable_by(f64::total_cmp);

    // h is constant outside the breakpoint hull: n_pos * c on the left,
    // -n_neg * c on the right. Both classes are present, so a root exists
    // strictly inside and the prefix of non-negative h values is proper.
    let k = bps.partition_point(|&mu| h(mu) >= 0.0);
    if k == 0 {
        return apply(bps[0]);
    }
    if k == bps.len() {
        return apply(bps[bps.len() - 1]);
    }
    let (m0, m1) = (bps[k - 1], bps[k]);
    let (h0, h1) = (h(m0), h(m1));
    let mu = if h0 - h1 <= 0.0 {
        m0
    } else {
        m0 + (m1 - m0) * h0 / (h0 - h1)
    };
    apply(mu)
}

/// Exact minimizer over b of sum_i max(0, 1 - y_i (w . x_i + b)). The sum is
/// convex piecewise linear with kinks at b = y_i - w . x_i, so with both
/// classes present some kink attains the minimum.
fn best_bias(xs: &[SparseVec], ysf: &[f64], w: &[f64]) -> f64 {
    let margins: Vec<(f64, f64)> = xs
        .iter()
        .zip(ysf)
        .map(|(x, &y)| (1.0 - y * x.dot_dense(w), y))
        .collect();
    let g = |b: f64| -> f64 {
        margins
            .iter()
            .map(|&(m, y)| (m - y * b).max(0.0))
            .sum::<f64>()
    };
    let mut cands: Vec<f64> = margins.iter().map(|&(m, y)| y * m).collect();
    cands.sort_unstable_by(f64::total_cmp);
    let mut best = cands[0];
    let mut best_g = g(best);
    for &b in &cands[1..] {
        let gb = g(b);
        if gb < best_g {
            best_g = gb;
            best = b;
        }
    }
    best
}
