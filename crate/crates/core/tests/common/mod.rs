//! Independent oracles shared by the integration and acceptance tests.
//! Linear algebra here goes through nalgebra, not the crate's own routines.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spiky::ensemble::MeasurementMatrix;

pub struct BoxLp {
    pub c: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Random equality-constrained box LP with a planted feasible point.
pub fn random_box_lp(rng: &mut ChaCha8Rng, m: usize, k: usize) -> BoxLp {
    let c = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..k).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let lower: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..0.0)).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.random_range(0.5..3.0)).collect();
    let x0: Vec<f64> = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| rng.random_range(*l..*u))
        .collect();
    let b = rows
        .iter()
        .map(|r| r.iter().zip(&x0).map(|(a, x)| a * x).sum())
        .collect();
    BoxLp { c, rows, b, lower, upper }
}

/// Optimum of a box LP by enumerating every basic solution: pick `m`
/// basic columns, put the rest at a bound, solve for the basic part.
pub fn vertex_enumeration_optimum(lp: &BoxLp) -> Option<f64> {
    let m = lp.rows.len();
    let k = lp.c.len();
    let mut best: Option<f64> = None;
    for basis in combinations(k, m) {
        let nonbasic: Vec<usize> = (0..k).filter(|j| !basis.contains(j)).collect();
        let bm = DMatrix::from_fn(m, m, |i, c| lp.rows[i][basis[c]]);
        let lu = bm.clone().lu();
        if bm.determinant().abs() < 1e-12 {
            continue;
        }
        for mask in 0..(1usize << nonbasic.len()) {
            let mut x = vec![0.0; k];
            for (t, &j) in nonbasic.iter().enumerate() {
                x[j] = if mask >> t & 1 == 1 { lp.upper[j] } else { lp.lower[j] };
            }
            let rhs = DVector::from_fn(m, |i, _| {
                lp.b[i] - nonbasic.iter().map(|&j| lp.rows[i][j] * x[j]).sum::<f64>()
            });
            let Some(sol) = lu.solve(&rhs) else { continue };
            let ok = basis.iter().enumerate().all(|(t, &j)| {
                sol[t] >= lp.lower[j] - 1e-11 && sol[t] <= lp.upper[j] + 1e-11
            });
            if !ok {
                continue;
            }
            for (t, &j) in basis.iter().enumerate() {
                x[j] = sol[t];
            }
            let val: f64 = lp.c.iter().zip(&x).map(|(a, b)| a * b).sum();
            best = Some(best.map_or(val, |b: f64| b.min(val)));
        }
    }
    best
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn gaussian_matrix(n_rows: usize, n_cols: usize, seed: u64) -> MeasurementMatrix {
    use rand_distr::StandardNormal;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = (0..n_rows * n_cols)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    MeasurementMatrix::from_row_major(n_rows, n_cols, entries, 1.0).unwrap()
}

pub fn to_nalgebra(gamma: &MeasurementMatrix) -> DMatrix<f64> {
    DMatrix::from_fn(gamma.n_rows(), gamma.n_cols(), |i, j| gamma.get(i, j))
}

pub fn binomial_se(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}
