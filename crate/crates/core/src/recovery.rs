//! Basis pursuit, per-target uniqueness certification and l0 recovery by
//! support enumeration.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::ensemble::MeasurementMatrix;
use crate::error::{domain, Error, Result};
use crate::simplex::{self, LinearProgram, LpStatus};

pub const UNIQUENESS_TOL: f64 = 1e-6;
pub const L0_RES_TOL: f64 = 1e-8;

/// Sparse vector in `R^dim` with a sorted support and nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn new(dim: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.len() != values.len() {
            return domain("support and values differ in length");
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return domain("support must be strictly increasing");
        }
        if support.last().is_some_and(|&i| i >= dim) {
            return domain(format!("support index out of range for dimension {dim}"));
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return domain("stored values must be finite and nonzero");
        }
        Ok(SparseVector {
            dim,
            support,
            values,
        })
    }

    /// The standard basis vector `e_j` (0-based `j`).
    pub fn basis(dim: usize, j: usize) -> Result<Self> {
        Self::new(dim, vec![j], vec![1.0])
    }

    pub fn zero(dim: usize) -> Self {
        SparseVector {
            dim,
            support: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps entries with `|v| > tol`.
    pub fn from_dense(v: &[f64], tol: f64) -> Self {
        let (support, values) = v
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > tol)
            .map(|(i, x)| (i, *x))
            .unzip();
        SparseVector {
            dim: v.len(),
            support,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.support.iter().zip(&self.values) {
            out[*i] = *v;
        }
        out
    }
}

/// `dim; idx:val,idx:val` with 0-based indices.
impl fmt::Display for SparseVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.dim)?;
        for (k, (i, v)) in self.support.iter().zip(&self.values).enumerate() {
            let sep = if k == 0 { " " } else { "," };
            write!(f, "{sep}{i}:{v:.16e}")?;
        }
        Ok(())
    }
}

impl FromStr for SparseVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad sparse vector literal {s:?}"));
        let (dim, rest) = s.split_once(';').ok_or_else(bad)?;
        let dim: usize = dim.trim().parse().map_err(|_| bad())?;
        let mut pairs: Vec<(usize, f64)> = Vec::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (i, v) = item.split_once(':').ok_or_else(bad)?;
            pairs.push((
                i.trim().parse().map_err(|_| bad())?,
                v.trim().parse().map_err(|_| bad())?,
            ));
        }
        pairs.sort_by_key(|p| p.0);
        let (support, values) = pairs.into_iter().unzip();
        SparseVector::new(dim, support, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Uniqueness {
    Unique,
    NotUnique,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub minimizer: Vec<f64>,
    pub l1_value: f64,
    pub unique: Uniqueness,
    /// A second optimal point, present when `unique == NotUnique`.
    pub witness_alt: Option<Vec<f64>>,
}

fn check_rhs(gamma: &MeasurementMatrix, y: &[f64]) -> Result<()> {
    if y.len() != gamma.n_rows() {
        return domain(format!(
            "measurement vector has length {}, expected {}",
            y.len(),
            gamma.n_rows()
        ));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return domain("measurement vector has non-finite entries");
    }
    Ok(())
}

/// Row-major `[Gamma | -Gamma]`.
pub(crate) fn split_sign_matrix(gamma: &MeasurementMatrix) -> Vec<f64> {
    let n = gamma.n_cols();
    let mut a = Vec::with_capacity(2 * n * gamma.n_rows());
    for i in 0..gamma.n_rows() {
        let row = gamma.row(i);
        a.extend_from_slice(row);
        a.extend(row.iter().map(|v| -v));
    }
    a
}

/// `argmin ||t||_1  s.t.  Gamma t = y`, via `t = t+ - t-`.
pub fn basis_pursuit(gamma: &MeasurementMatrix, y: &[f64], feas_tol: f64) -> Result<RecoveryResult> {
    check_rhs(gamma, y)?;
    let n = gamma.n_cols();
    let lp = LinearProgram::new(
        vec![1.0; 2 * n],
        split_sign_matrix(gamma),
        y.to_vec(),
        vec![0.0; 2 * n],
        vec![f64::INFINITY; 2 * n],
    )?;
    let sol = simplex::solve(&lp, feas_tol)?;
    match sol.status {
        LpStatus::Optimal => {
            let minimizer: Vec<f64> = (0..n).map(|j| sol.x[j] - sol.x[n + j]).collect();
            Ok(RecoveryResult {
                minimizer,
                l1_value: sol.objective_value,
                unique: Uniqueness::Unknown,
                witness_alt: None,
            })
        }
        LpStatus::Infeasible => Err(Error::NoSolution),
        LpStatus::Unbounded => unreachable!("l1 objective is bounded below"),
    }
}

/// Resolves whether the basis pursuit minimizer is unique by measuring the
/// range of every coordinate over the optimal face
/// `{Gamma t = y, ||t||_1 <= l1_value + slack}`.
pub fn certify_uniqueness(
    gamma: &MeasurementMatrix,
    y: &[f64],
    result: &RecoveryResult,
    uniqueness_tol: f64,
    feas_tol: f64,
) -> Result<RecoveryResult> {
    check_rhs(gamma, y)?;
    let n = gamma.n_cols();
    let m = gamma.n_rows();
    if result.minimizer.len() != n {
        return domain("recovery result does not match the matrix");
    }
    let slack = 1e-8 * (1.0 + result.l1_value);
    // Variables: t+ (n), t- (n), budget slack (1).
    let k = 2 * n + 1;
    let gamma_split = split_sign_matrix(gamma);
    let mut a = Vec::with_capacity((m + 1) * k);
    for i in 0..m {
        a.extend_from_slice(&gamma_split[i * 2 * n..(i + 1) * 2 * n]);
        a.push(0.0);
    }
    a.extend(std::iter::repeat_n(1.0, k));
    let mut b = y.to_vec();
    b.push(result.l1_value + slack);
    let base = LinearProgram::new(
        vec![0.0; k],
        a,
        b,
        vec![0.0; k],
        vec![f64::INFINITY; k],
    )?;

    let extremes: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|coord| {
            let mut obj = vec![0.0; k];
            obj[coord] = 1.0;
            obj[n + coord] = -1.0;
            let point = |sign: f64| -> Result<Vec<f64>> {
                let lp = base.with_objective(obj.iter().map(|c| c * sign).collect())?;
                let sol = simplex::solve(&lp, feas_tol)?;
                if sol.status != LpStatus::Optimal {
                    return Err(Error::Domain(format!(
                        "optimal face LP for coordinate {coord} returned {:?}",
                        sol.status
                    )));
                }
                Ok((0..n).map(|j| sol.x[j] - sol.x[n + j]).collect())
            };
            let lo = point(1.0)?;
            let hi = point(-1.0)?;
            Ok((hi[coord] - lo[coord], lo, hi))
        })
        .collect::<Result<_>>()?;

    let (widest, (width, lo, hi)) = extremes
        .into_iter()
        .enumerate()
        .fold(None::<(usize, (f64, Vec<f64>, Vec<f64>))>, |best, (c, e)| match best {
            Some((_, ref b)) if b.0 >= e.0 => best,
            _ => Some((c, e)),
        })
        .expect("matrix has at least one column");
    let mut out = result.clone();
    if width <= uniqueness_tol {
        out.unique = Uniqueness::Unique;
        out.witness_alt = None;
    } else {
        out.unique = Uniqueness::NotUnique;
        let m_c = result.minimizer[widest];
        let alt = if (hi[widest] - m_c).abs() >= (lo[widest] - m_c).abs() {
            hi
        } else {
            lo
        };
        out.witness_alt = Some(alt);
    }
    Ok(out)
}

/// Cholesky solve of a small symmetric positive-definite system; `None` if
/// the matrix is numerically singular.
fn spd_solve(gram: &[f64], rhs: &[f64], s: usize) -> Option<Vec<f64>> {
    let scale = (0..s).map(|i| gram[i * s + i]).fold(0.0, f64::max);
    let mut l = vec![0.0; s * s];
    for i in 0..s {
        for j in 0..=i {
            let mut sum = gram[i * s + j];
            for p in 0..j {
                sum -= l[i * s + p] * l[j * s + p];
            }
            if i == j {
                if sum <= 1e-12 * scale {
                    return None;
                }
                l[i * s + i] = sum.sqrt();
            } else {
                l[i * s + j] = sum / l[j * s + j];
            }
        }
    }
    let mut z = vec![0.0; s];
    for i in 0..s {
        let acc: f64 = (0..i).map(|p| l[i * s + p] * z[p]).sum();
        z[i] = (rhs[i] - acc) / l[i * s + i];
    }
    let mut x = vec![0.0; s];
    for i in (0..s).rev() {
        let acc: f64 = (i + 1..s).map(|p| l[p * s + i] * x[p]).sum();
        x[i] = (z[i] - acc) / l[i * s + i];
    }
    Some(x)
}

fn least_squares_on(columns: &[Vec<f64>], support: &[usize], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let s = support.len();
    let mut gram = vec![0.0; s * s];
    let mut rhs = vec![0.0; s];
    for (a, &ja) in support.iter().enumerate() {
        for (b, &jb) in support.iter().enumerate() {
            gram[a * s + b] = dot(&columns[ja], &columns[jb]);
        }
        rhs[a] = dot(&columns[ja], y);
    }
    let coef = spd_solve(&gram, &rhs, s)?;
    let residual: f64 = (0..y.len())
        .map(|i| {
            let fit: f64 = support.iter().zip(&coef).map(|(&j, c)| c * columns[j][i]).sum();
            (fit - y[i]).powi(2)
        })
        .sum::<f64>()
        .sqrt();
    Some((coef, residual))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// All supports in lexicographic order of the given size, split by their
/// first index so they can be searched in parallel.
fn supports_starting_at(first: usize, size: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![first];
    fn extend(current: &mut Vec<usize>, size: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        let start = current.last().map_or(0, |&l| l + 1);
        for j in start..n {
            current.push(j);
            extend(current, size, n, out);
            current.pop();
        }
    }
    extend(&mut current, size, n, &mut out);
    out
}

/// l0 minimization by enumerating supports of size `0, 1, ..., d_max`.
///
/// Returns every support of the smallest size that reproduces `y` up to
/// `res_tol * (1 + ||y||_2)`, each with its least-squares coefficients.
/// More than one element means l0 recovery is ambiguous. An empty list
/// means nothing up to `d_max` fits.
pub fn l0_brute_force(
    gamma: &MeasurementMatrix,
    y: &[f64],
    d_max: usize,
    res_tol: f64,
) -> Result<Vec<SparseVector>> {
    check_rhs(gamma, y)?;
    if d_max > 3 {
        return domain(format!("d_max={d_max} exceeds the enumeration cap of 3"));
    }
    if gamma.n_rows() < d_max {
        return domain(format!(
            "need N >= d_max, got N={} and d_max={d_max}",
            gamma.n_rows()
        ));
    }
    let n = gamma.n_cols();
    let y_norm = dot(y, y).sqrt();
    let threshold = res_tol * (1.0 + y_norm);
    if y_norm <= threshold {
        return Ok(vec![SparseVector::zero(n)]);
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|j| gamma.column(j)).collect();
    for size in 1..=d_max {
        let found: Vec<SparseVector> = (0..n)
            .into_par_iter()
            .flat_map_iter(|first| {
                supports_starting_at(first, size, n)
                    .into_iter()
                    .filter_map(|support| {
                        let (coef, residual) = least_squares_on(&columns, &support, y)?;
                        if residual > threshold || coef.contains(&0.0) {
                            return None;
                        }
                        SparseVector::new(n, support, coef).ok()
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if !found.is_empty() {
            return Ok(found);
        }
    }
    Ok(Vec::new())
}

/// Columns `k != j` with `|<a_j, a_k>| >= (1 - rel_tol) ||a_j|| ||a_k||`.
pub fn columns_parallel_to(gamma: &MeasurementMatrix, j: usize, rel_tol: f64) -> Vec<usize> {
    let target = gamma.column(j);
    let tn = dot(&target, &target).sqrt();
    (0..gamma.n_cols())
        .filter(|&k| k != j)
        .filter(|&k| {
            let c = gamma.column(k);
            let cn = dot(&c, &c).sqrt();
            dot(&target, &c).abs() >= (1.0 - rel_tol) * tn * cn
        })
        .collect()
}
