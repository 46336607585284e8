//! Seeded random binary SVM instances: two Gaussian clouds of controlled
//! overlap, a shared translation so the bias term has work to do, and both
//! classes always present.

use embfuse::vector::SparseVector;
use embfuse::SparseVec;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::standard_normal;

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub xs: Vec<SparseVec>,
    pub ys: Vec<i8>,
    pub lambda: f64,
    pub fit_bias: bool,
}

fn point(
    rng: &mut ChaCha8Rng,
    y: i8,
    center: &[f64],
    offset: &[f64],
    sigma: f64,
) -> SparseVec {
    let entries = center
        .iter()
        .zip(offset)
        .enumerate()
        .map(|(j, (&c, &o))| {
            let v = f64::from(y) * c + o + sigma * standard_normal(rng);
            (j as u32, v)
        })
        .collect();
    SparseVector::new(center.len(), entries).unwrap()
}

/// `count` instances cycling lambda through {0.01, 0.1, 1} and alternating
/// the bias setting. Sizes vary in [20, 200] points and [2, 10] features.
pub fn random_instances(count: usize, seed: u64) -> Vec<Instance> {
    const LAMBDAS: [f64; 3] = [0.01, 0.1, 1.0];
    (0..count)
        .map(|k| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((k as u64).wrapping_mul(0x9e3779b97f4a7c15)));
            let n: usize = rng.gen_range(20..=200);
            let d: usize = rng.gen_range(2..=10);
            let center: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let offset: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.6..0.6)).collect();
            let sigma: f64 = rng.gen_range(0.45..0.85);
            let mut xs = Vec::with_capacity(n);
            let mut ys = Vec::with_capacity(n);
            for i in 0..n {
                let y: i8 = if i % 2 == 0 { 1 } else { -1 };
                xs.push(point(&mut rng, y, &center, &offset, sigma));
                ys.push(y);
            }
            Instance {
                name: format!("random-{k:02}-n{n}-d{d}"),
                xs,
                ys,
                lambda: LAMBDAS[k % LAMBDAS.len()],
                fit_bias: k % 2 == 0,
            }
        })
        .collect()
}

/// Fixed 50-point, 2-feature instance with well-separated clouds.
pub fn separable_instance(fit_bias: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eb1);
    let center = [1.1, 0.8];
    let offset = [0.35, -0.2];
    let mut xs = Vec::with_capacity(50);
    let mut ys = Vec::with_capacity(50);
    for i in 0..50 {
        let y: i8 = if i % 2 == 0 { 1 } else { -1 };
        xs.push(point(&mut rng, y, &center, &offset, 0.18));
        ys.push(y);
    }
    Instance {
        name: "separable-50x2".to_string(),
        xs,
        ys,
        lambda: 0.1,
        fit_bias,
    }
}
