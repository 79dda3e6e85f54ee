use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};

pub const DEFAULT_WIDTH_DIRECTIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthCheck {
    /// `R / sqrt(N) - sqrt(N)`.
    pub bound: f64,
    /// Smallest support value `max_i |<v_i, w>|` over the sampled directions.
    pub sampled_min_support: f64,
    pub pass: bool,
}

/// Support function of `absconv(vectors)` in direction `w`.
pub fn support_value(vectors: &[Vec<f64>], w: &[f64]) -> f64 {
    vectors
        .iter()
        .map(|v| v.iter().zip(w).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// Checks the inclusion `(R/sqrt(N) - sqrt(N)) B_2^N` in `absconv(v_1..v_N)`
/// for `v_i = R f_i + y_i` with `||y_i||_inf <= 1`, by sampling directions
/// on the sphere. Sampling can only overestimate the inradius, so a failed
/// check contradicts the bound.
pub fn width_bound_check(
    vectors: &[Vec<f64>],
    big_r: f64,
    n_dirs: usize,
    seed: u64,
) -> Result<WidthCheck> {
    let n = vectors.len();
    if n == 0 {
        return domain("need at least one vector");
    }
    if !(big_r.is_finite() && big_r > 0.0) {
        return domain(format!("R={big_r} must be positive"));
    }
    if n_dirs == 0 {
        return domain("need at least one direction");
    }
    for (i, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return domain(format!("vector {i} has length {}, expected {n}", v.len()));
        }
        for (k, x) in v.iter().enumerate() {
            let y = x - if k == i { big_r } else { 0.0 };
            if !(y.abs() <= 1.0 + 1e-12) {
                return domain(format!("perturbation of vector {i} exceeds 1 at coordinate {k}"));
            }
        }
    }
    let root_n = (n as f64).sqrt();
    let bound = big_r / root_n - root_n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = vec![0.0; n];
    let mut sampled_min_support = f64::INFINITY;
    for _ in 0..n_dirs {
        let norm = loop {
            for x in w.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        w.iter_mut().for_each(|x| *x /= norm);
        sampled_min_support = sampled_min_support.min(support_value(vectors, &w));
    }
    Ok(WidthCheck {
        bound,
        sampled_min_support,
        pass: sampled_min_support >= bound - 1e-9,
    })
}
