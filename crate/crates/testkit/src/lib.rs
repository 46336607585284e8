//! Reference oracles and synthetic fixtures used by the test suites.
//!
//! Everything in this crate favors obvious correctness over speed: the QP
//! reference maximizes the SVM dual with projected-gradient steps and
//! reports a duality-gap certificate, the t-distribution tail is integrated
//! numerically, and the fixture generator writes a fully seeded synthetic
//! corpus. None of this code ships in the production crates.

pub mod fixture;
pub mod instances;
pub mod qp_oracle;
pub mod t_oracle;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Standard normal draw via Box-Muller; `u1` is kept away from zero so the
/// logarithm stays finite.
pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
