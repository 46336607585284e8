//! Two-sided t-test p-value by direct numerical integration.
//!
//! Uses the unnormalized Student density f(u) = (1 + u^2/df)^(-(df+1)/2);
//! taking the ratio of the tail mass to the half-line mass cancels the
//! gamma-function normalization. Each integral is mapped onto [0, 1) via
//! u = a + s/(1-s) and evaluated with adaptive Simpson quadrature.

/// P(|T| >= |t|) for T ~ Student-t with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: f64) -> f64 {
    assert!(df > 0.0, "degrees of freedom must be positive");
    let tail = tail_mass(t.abs(), df);
    let half = tail_mass(0.0, df);
    (tail / half).min(1.0)
}

/// Integral of the unnormalized density over [a, infinity).
fn tail_mass(a: f64, df: f64) -> f64 {
    let g = |s: f64| -> f64 {
        // The transformed integrand decays like (1-s)^(df-1); for df > 1 it
        // vanishes at s = 1, and clamping just short of 1 truncates a mass
        // far below the quadrature tolerance.
        if s >= 1.0 - 1e-13 {
            return 0.0;
        }
        let u = a + s / (1.0 - s);
        let density = (1.0 + u * u / df).powf(-(df + 1.0) / 2.0);
        density / ((1.0 - s) * (1.0 - s))
    };
    adaptive_simpson(&g, 0.0, 1.0, 1e-12)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, eps: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, eps, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        left + right + delta / 15.0
    } else {
        simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
            + simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    }
}
