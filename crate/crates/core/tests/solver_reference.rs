//! Cross-checks the production solvers against an independent reference:
//! projected-gradient ascent on the dual with a duality-gap certificate.
//! The full randomized sweep lives in the acceptance suite; this is a
//! fast sanity slice over both solver paths and all three lambdas.

use embfuse::svm::{primal_objective, train_binary, TrainConfig};
use embfuse_testkit::instances::{random_instances, separable_instance};
use embfuse_testkit::qp_oracle::solve_reference;

const GAP_TOL: f64 = 2e-7;
const MATCH_TOL: f64 = 1e-6;

fn check(inst: &embfuse_testkit::instances::Instance) {
    let mut cfg = TrainConfig::new(inst.lambda);
    cfg.tol = 1e-9;
    cfg.max_iter = 200_000;
    cfg.fit_bias = inst.fit_bias;
    let fit = train_binary(&inst.xs, &inst.ys, &cfg).unwrap();
    let solver_j = primal_objective(&inst.xs, &inst.ys, &fit.weights, fit.bias, inst.lambda);

    let reference = solve_reference(
        &inst.xs,
        &inst.ys,
        inst.lambda,
        inst.fit_bias,
        GAP_TOL,
        5_000_000,
    );
    assert!(
        reference.gap <= GAP_TOL * (1.0 + reference.primal.abs()),
        "{}: reference did not certify, gap {:.3e}",
        inst.name,
        reference.gap
    );
    let diff = (solver_j - reference.primal).abs();
    assert!(
        diff <= MATCH_TOL * (1.0 + reference.primal.abs()),
        "{}: solver {solver_j:.12} vs reference {:.12} (diff {diff:.3e})",
        inst.name,
        reference.primal
    );
}

#[test]
fn solver_matches_reference_on_random_slice() {
    for inst in random_instances(6, 0xfeed) {
        check(&inst);
    }
}

#[test]
fn solver_matches_reference_on_separable_instance() {
    for fit_bias in [false, true] {
        check(&separable_instance(fit_bias));
    }
}
