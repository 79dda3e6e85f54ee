use std::fmt;

use rayon::prelude::*;

use crate::ensemble::MeasurementMatrix;
use crate::error::{domain, Error, Result};
use crate::recovery::split_sign_matrix;
use crate::simplex::{self, LinearProgram, LpStatus};

pub const STRICT_MARGIN_TOL: f64 = 1e-7;

/// Exact ER(d) verdict through the null space property: ER(d) holds iff
/// `sum_{i in S} s_i h_i < 1/2` for every kernel vector with `||h||_1 <= 1`,
/// every support `|S| = d` and every sign pattern `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct NspVerdict {
    pub d: usize,
    pub holds: bool,
    pub worst_support: Vec<usize>,
    pub worst_signs: Vec<i8>,
    pub worst_value: f64,
    /// `0.5 - worst_value`.
    pub margin: f64,
}

impl fmt::Display for NspVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.worst_support.iter().map(|j| j.to_string()).collect();
        let signs: Vec<&str> = self
            .worst_signs
            .iter()
            .map(|&x| if x > 0 { "+" } else { "-" })
            .collect();
        write!(
            f,
            "{} d={} margin={:.9e} worst_S={} worst_signs={}",
            if self.holds { "holds" } else { "fails" },
            self.d,
            self.margin,
            s.join(","),
            signs.join("")
        )
    }
}

fn supports(n: usize, d: usize) -> Vec<Vec<usize>> {
    match d {
        1 => (0..n).map(|i| vec![i]).collect(),
        2 => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| vec![i, j]))
            .collect(),
        _ => unreachable!(),
    }
}

fn sign_patterns(d: usize) -> Vec<Vec<i8>> {
    (0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|b| if mask >> (d - 1 - b) & 1 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}

/// Solves one LP per `(S, s)` and reports the worst case. Guards:
/// `d in {1, 2}`, `n <= 4096` for `d = 1`, `n <= 256` for `d = 2`.
pub fn er_check_nsp(
    gamma: &MeasurementMatrix,
    d: usize,
    strict_margin_tol: f64,
    feas_tol: f64,
) -> Result<NspVerdict> {
    let n = gamma.n_cols();
    let m = gamma.n_rows();
    match d {
        1 if n > 4096 => return domain(format!("n={n} exceeds 4096 for d=1")),
        2 if n > 256 => return domain(format!("n={n} exceeds 256 for d=2")),
        1 | 2 => {}
        _ => return domain(format!("d={d} not supported (use 1 or 2)")),
    }
    if d > n {
        return domain("d exceeds the number of columns");
    }
    // Variables: h+ (n), h- (n), budget slack (1).
    let k = 2 * n + 1;
    let split = split_sign_matrix(gamma);
    let mut a = Vec::with_capacity((m + 1) * k);
    for i in 0..m {
        a.extend_from_slice(&split[i * 2 * n..(i + 1) * 2 * n]);
        a.push(0.0);
    }
    a.extend(std::iter::repeat_n(1.0, k));
    let mut b = vec![0.0; m];
    b.push(1.0);
    let base = LinearProgram::new(vec![0.0; k], a, b, vec![0.0; k], vec![f64::INFINITY; k])?;

    let cases: Vec<(Vec<usize>, Vec<i8>)> = supports(n, d)
        .into_iter()
        .flat_map(|s| sign_patterns(d).into_iter().map(move |sg| (s.clone(), sg)))
        .collect();
    let values: Vec<f64> = cases
        .par_iter()
        .map(|(support, signs)| {
            let mut obj = vec![0.0; k];
            for (&i, &s) in support.iter().zip(signs) {
                obj[i] = -(s as f64);
                obj[n + i] = s as f64;
            }
            let sol = simplex::solve(&base.with_objective(obj)?, feas_tol)?;
            match sol.status {
                LpStatus::Optimal => Ok(-sol.objective_value),
                other => Err(Error::Domain(format!("null space LP returned {other:?}"))),
            }
        })
        .collect::<Result<_>>()?;

    let mut worst = 0;
    for (idx, v) in values.iter().enumerate() {
        if *v > values[worst] {
            worst = idx;
        }
    }
    let worst_value = values[worst];
    let margin = 0.5 - worst_value;
    Ok(NspVerdict {
        d,
        holds: margin > strict_margin_tol,
        worst_support: cases[worst].0.clone(),
        worst_signs: cases[worst].1.clone(),
        worst_value,
        margin,
    })
}
