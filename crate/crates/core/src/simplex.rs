//! Dense two-phase bounded-variable simplex.
//!
//! Revised simplex with an explicit `m x m` basis inverse. The target
//! problems have a handful of equality rows and up to tens of thousands of
//! columns, so the inverse is cheap and pricing dominates.

use crate::error::{domain, Error, Result};

/// `min c^T x  s.t.  A x = b,  lower <= x <= upper`. Bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    /// Row-major `m x k`.
    eq_matrix: Vec<f64>,
    eq_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// `eq_matrix` is row-major with `eq_rhs.len()` rows and
    /// `objective.len()` columns.
    pub fn new(
        objective: Vec<f64>,
        eq_matrix: Vec<f64>,
        eq_rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let k = objective.len();
        let m = eq_rhs.len();
        if eq_matrix.len() != m * k {
            return domain(format!(
                "constraint matrix has {} entries, expected {m} x {k}",
                eq_matrix.len()
            ));
        }
        if lower.len() != k || upper.len() != k {
            return domain("bound vectors must match the number of variables");
        }
        if objective.iter().chain(&eq_matrix).chain(&eq_rhs).any(|v| !v.is_finite()) {
            return domain("objective, constraint matrix and rhs must be finite");
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return domain(format!("invalid bounds [{l}, {u}] on variable {j}"));
            }
            if l > u {
                return domain(format!("lower bound {l} exceeds upper bound {u} on variable {j}"));
            }
        }
        Ok(LinearProgram {
            objective,
            eq_matrix,
            eq_rhs,
            lower,
            upper,
        })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(
        objective: Vec<f64>,
        rows: &[Vec<f64>],
        eq_rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        if rows.iter().any(|r| r.len() != objective.len()) {
            return domain("constraint row length differs from the number of variables");
        }
        Self::new(objective, rows.concat(), eq_rhs, lower, upper)
    }

    pub fn n_constraints(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    #[inline]
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        self.eq_matrix[i * self.n_vars() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.n_vars();
        &self.eq_matrix[i * k..(i + 1) * k]
    }

    /// Same problem with the objective multiplied by `factor`.
    pub fn with_scaled_objective(&self, factor: f64) -> Self {
        LinearProgram {
            objective: self.objective.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    /// Same constraints with a different objective.
    pub fn with_objective(&self, objective: Vec<f64>) -> Result<Self> {
        if objective.len() != self.n_vars() {
            return domain("objective length differs from the number of variables");
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return domain("objective must be finite");
        }
        Ok(LinearProgram {
            objective,
            ..self.clone()
        })
    }

    /// Same problem with the variables reordered: new variable `t` is old
    /// variable `perm[t]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let m = self.n_constraints();
        let mut eq_matrix = Vec::with_capacity(self.eq_matrix.len());
        for i in 0..m {
            eq_matrix.extend(perm.iter().map(|&j| self.coefficient(i, j)));
        }
        LinearProgram {
            objective: perm.iter().map(|&j| self.objective[j]).collect(),
            eq_matrix,
            eq_rhs: self.eq_rhs.clone(),
            lower: perm.iter().map(|&j| self.lower[j]).collect(),
            upper: perm.iter().map(|&j| self.upper[j]).collect(),
        }
    }

    /// `max_i |(A x - b)_i|`.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        (0..self.n_constraints())
            .map(|i| {
                let ax: f64 = self.row(i).iter().zip(x).map(|(a, v)| a * v).sum();
                (ax - self.eq_rhs[i]).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest violation of the variable bounds.
    pub fn bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless `status == Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;

/// Solves `lp` with the two-phase method.
pub fn solve(lp: &LinearProgram, feas_tol: f64) -> Result<LpSolution> {
    if !(feas_tol.is_finite() && feas_tol > 0.0) {
        return domain(format!("feasibility tolerance {feas_tol} must be positive"));
    }
    Simplex::new(lp, feas_tol).run()
}

/// Phase-1 only: a point satisfying `A x = b` and the bounds, or `None`.
pub fn feasible_point(
    eq_matrix: &[Vec<f64>],
    eq_rhs: &[f64],
    lower: &[f64],
    upper: &[f64],
    feas_tol: f64,
) -> Result<Option<Vec<f64>>> {
    let k = lower.len();
    let lp = LinearProgram::from_rows(
        vec![0.0; k],
        eq_matrix,
        eq_rhs.to_vec(),
        lower.to_vec(),
        upper.to_vec(),
    )?;
    let sol = solve(&lp, feas_tol)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(sol.x),
        _ => None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    FreeZero,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    k: usize,
    feas_tol: f64,
    /// Sign of artificial column `i` (it is `sign * e_i`).
    art_sign: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Row-major `m x m`.
    binv: Vec<f64>,
    iterations: usize,
    iteration_cap: usize,
    degenerate_pivots: usize,
    bland: bool,
    since_refactor: usize,
}

enum Step {
    Optimal,
    Unbounded,
    Continue,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, feas_tol: f64) -> Self {
        let m = lp.n_constraints();
        let k = lp.n_vars();
        let total = k + m;
        let mut x = vec![0.0; total];
        let mut state = vec![VarState::AtLower; total];
        for j in 0..k {
            let (l, u) = (lp.lower[j], lp.upper[j]);
            if l.is_finite() {
                x[j] = l;
                state[j] = VarState::AtLower;
            } else if u.is_finite() {
                x[j] = u;
                state[j] = VarState::AtUpper;
            } else {
                x[j] = 0.0;
                state[j] = VarState::FreeZero;
            }
        }
        let mut art_sign = vec![1.0; m];
        let mut basis = Vec::with_capacity(m);
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            let ax: f64 = lp.row(i).iter().zip(&x[..k]).map(|(a, v)| a * v).sum();
            let r = lp.eq_rhs[i] - ax;
            art_sign[i] = if r >= 0.0 { 1.0 } else { -1.0 };
            x[k + i] = r.abs();
            state[k + i] = VarState::Basic;
            basis.push(k + i);
            binv[i * m + i] = art_sign[i];
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        let mut cost = vec![0.0; total];
        cost[k..].iter_mut().for_each(|c| *c = 1.0);
        let size = (m + k) as u128;
        let iteration_cap = (50 * size * size).min(usize::MAX as u128) as usize;
        Simplex {
            lp,
            m,
            k,
            feas_tol,
            art_sign,
            cost,
            lower,
            upper,
            x,
            state,
            basis,
            binv,
            iterations: 0,
            iteration_cap,
            degenerate_pivots: 0,
            bland: false,
            since_refactor: 0,
        }
    }

    fn run(mut self) -> Result<LpSolution> {
        // Phase 1.
        loop {
            match self.step()? {
                Step::Continue => {}
                Step::Optimal => break,
                // Phase 1 is bounded below by zero.
                Step::Unbounded => unreachable!("phase 1 cannot be unbounded"),
            }
        }
        let infeasibility: f64 = self.x[self.k..].iter().sum();
        let b_inf = self.lp.eq_rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if infeasibility > self.feas_tol * (1.0 + b_inf) {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective_value: f64::NAN,
                iterations: self.iterations,
            });
        }
        self.drive_out_artificials();

        // Phase 2.
        for i in 0..self.m {
            self.upper[self.k + i] = 0.0;
        }
        for j in 0..self.k {
            self.cost[j] = self.lp.objective[j];
        }
        for i in 0..self.m {
            self.cost[self.k + i] = 0.0;
        }
        self.degenerate_pivots = 0;
        self.bland = false;
        loop {
            match self.step()? {
                Step::Continue => {}
                Step::Optimal => break,
                Step::Unbounded => {
                    return Ok(LpSolution {
                        status: LpStatus::Unbounded,
                        x: Vec::new(),
                        objective_value: f64::NEG_INFINITY,
                        iterations: self.iterations,
                    })
                }
            }
        }
        let x: Vec<f64> = self.x[..self.k].to_vec();
        let objective_value = x.iter().zip(&self.lp.objective).map(|(a, c)| a * c).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            x,
            objective_value,
            iterations: self.iterations,
        })
    }

    /// Entry `i` of column `j` of the extended matrix `[A | diag(art_sign)]`.
    #[inline]
    fn column_entry(&self, i: usize, j: usize) -> f64 {
        if j < self.k {
            self.lp.coefficient(i, j)
        } else if j - self.k == i {
            self.art_sign[i]
        } else {
            0.0
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let col: Vec<f64> = (0..m).map(|i| self.column_entry(i, j)).collect();
        (0..m)
            .map(|r| (0..m).map(|i| self.binv[r * m + i] * col[i]).sum())
            .collect()
    }

    /// Reduced costs of every variable (basic ones come out as ~0).
    fn reduced_costs(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = self.cost[bv];
            if cb != 0.0 {
                for i in 0..m {
                    y[i] += cb * self.binv[r * m + i];
                }
            }
        }
        let mut d = self.cost.clone();
        for (i, yi) in y.iter().enumerate() {
            if *yi != 0.0 {
                for (dj, a) in d[..self.k].iter_mut().zip(self.lp.row(i)) {
                    *dj -= yi * a;
                }
                d[self.k + i] -= yi * self.art_sign[i];
            }
        }
        d
    }

    fn choose_entering(&self, d: &[f64]) -> Option<(usize, f64)> {
        let opt_tol = self.feas_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for (j, &dj) in d.iter().enumerate() {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let dir = match self.state[j] {
                VarState::Basic => continue,
                VarState::AtLower if dj < -opt_tol => 1.0,
                VarState::AtUpper if dj > opt_tol => -1.0,
                VarState::FreeZero if dj.abs() > opt_tol => -dj.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn step(&mut self) -> Result<Step> {
        if self.iterations >= self.iteration_cap {
            return Err(Error::IterationLimit {
                limit: self.iteration_cap,
            });
        }
        let d = self.reduced_costs();
        let Some((q, dir)) = self.choose_entering(&d) else {
            return Ok(Step::Optimal);
        };
        let alpha = self.ftran(q);

        // Ratio test. Basic variable r moves by -theta * dir * alpha[r].
        let mut theta = f64::INFINITY;
        let mut leave: Option<(usize, bool)> = None; // (row, goes to upper)
        let mut leave_var = usize::MAX;
        for (r, &a) in alpha.iter().enumerate() {
            let rate = dir * a;
            let bv = self.basis[r];
            let (limit, to_upper) = if rate > PIVOT_TOL && self.lower[bv].is_finite() {
                (((self.x[bv] - self.lower[bv]) / rate).max(0.0), false)
            } else if rate < -PIVOT_TOL && self.upper[bv].is_finite() {
                (((self.upper[bv] - self.x[bv]) / -rate).max(0.0), true)
            } else {
                continue;
            };
            let tie = (limit - theta).abs() <= 1e-12 * (1.0 + theta.abs().min(limit));
            if limit < theta && !tie || (tie && bv < leave_var) {
                theta = limit.min(theta);
                leave = Some((r, to_upper));
                leave_var = bv;
            }
        }
        let span = self.upper[q] - self.lower[q];
        let flip = span.is_finite() && span <= theta;
        if flip {
            theta = span;
        } else if leave.is_none() {
            return Ok(Step::Unbounded);
        }

        self.iterations += 1;
        if theta <= 1e-12 {
            self.degenerate_pivots += 1;
            if self.degenerate_pivots >= 3 * (self.m + self.k) {
                self.bland = true;
            }
        }

        self.x[q] += dir * theta;
        for (r, &a) in alpha.iter().enumerate() {
            let bv = self.basis[r];
            self.x[bv] -= dir * theta * a;
        }

        if flip {
            self.state[q] = if dir > 0.0 {
                self.x[q] = self.upper[q];
                VarState::AtUpper
            } else {
                self.x[q] = self.lower[q];
                VarState::AtLower
            };
            return Ok(Step::Continue);
        }

        let (r, to_upper) = leave.expect("checked above");
        let out = self.basis[r];
        if to_upper {
            self.x[out] = self.upper[out];
            self.state[out] = VarState::AtUpper;
        } else {
            self.x[out] = self.lower[out];
            self.state[out] = VarState::AtLower;
        }
        self.pivot(r, q, &alpha);
        Ok(Step::Continue)
    }

    /// Replaces basis position `r` by variable `q` with `alpha = B^{-1} a_q`.
    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let piv = alpha[r];
        for c in 0..m {
            self.binv[r * m + c] /= piv;
        }
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                let f = alpha[i];
                for c in 0..m {
                    self.binv[i * m + c] -= f * self.binv[r * m + c];
                }
            }
        }
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        self.since_refactor += 1;
        if self.since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    /// Recomputes `B^{-1}` and the basic values from scratch.
    fn refactor(&mut self) {
        let m = self.m;
        self.since_refactor = 0;
        let mut b = vec![0.0; m * m];
        for (c, &bv) in self.basis.iter().enumerate() {
            for i in 0..m {
                b[i * m + c] = self.column_entry(i, bv);
            }
        }
        if let Some(inv) = invert(&b, m) {
            self.binv = inv;
        }
        let mut rhs = self.lp.eq_rhs.clone();
        for j in 0..self.k + m {
            if self.state[j] != VarState::Basic && self.x[j] != 0.0 {
                for (i, ri) in rhs.iter_mut().enumerate() {
                    *ri -= self.column_entry(i, j) * self.x[j];
                }
            }
        }
        for (r, &bv) in self.basis.iter().enumerate() {
            self.x[bv] = (0..m).map(|i| self.binv[r * m + i] * rhs[i]).sum();
        }
    }

    /// Pivots basic artificials out of the basis where some structural
    /// column has a usable entry in their row. Rows without one are
    /// redundant; their artificial stays basic and is later fixed at 0.
    fn drive_out_artificials(&mut self) {
        let m = self.m;
        for r in 0..m {
            let bv = self.basis[r];
            if bv < self.k {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.k {
                if self.state[j] == VarState::Basic {
                    continue;
                }
                let rho: f64 = (0..m)
                    .map(|i| self.binv[r * m + i] * self.lp.coefficient(i, j))
                    .sum();
                if rho.abs() > 1e-7 && best.is_none_or(|(_, b)| rho.abs() > b) {
                    best = Some((j, rho.abs()));
                }
            }
            if let Some((j, _)) = best {
                let alpha = self.ftran(j);
                self.x[bv] = 0.0;
                self.state[bv] = VarState::AtLower;
                self.pivot(r, j, &alpha);
            }
        }
        self.refactor();
    }
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular.
fn invert(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut work = a.to_vec();
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let piv_row = (col..m).max_by(|&x, &y| {
            work[x * m + col]
                .abs()
                .total_cmp(&work[y * m + col].abs())
        })?;
        let piv = work[piv_row * m + col];
        if piv.abs() < 1e-14 {
            return None;
        }
        if piv_row != col {
            for c in 0..m {
                work.swap(piv_row * m + c, col * m + c);
                inv.swap(piv_row * m + c, col * m + c);
            }
        }
        for c in 0..m {
            work[col * m + c] /= piv;
            inv[col * m + c] /= piv;
        }
        for r in 0..m {
            if r != col {
                let f = work[r * m + col];
                if f != 0.0 {
                    for c in 0..m {
                        work[r * m + c] -= f * work[col * m + c];
                        inv[r * m + c] -= f * inv[col * m + c];
                    }
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_variable_equality() {
        let lp = LinearProgram::from_rows(vec![1.0], &[vec![1.0]], vec![1.0], vec![0.0], vec![10.0]).unwrap();
        let sol = solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.x[0] - 1.0).abs() < 1e-12);
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_with_nonnegative_variable_is_infeasible() {
        let lp = LinearProgram::from_rows(vec![0.0], &[vec![1.0]], vec![-1.0], vec![0.0], vec![INF]).unwrap();
        assert_eq!(solve(&lp, DEFAULT_FEAS_TOL).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction_is_reported() {
        // min -x1 s.t. x1 - x2 = 0, x >= 0.
        let lp = LinearProgram::from_rows(
            vec![-1.0, 0.0],
            &[vec![1.0, -1.0]],
            vec![0.0],
            vec![0.0, 0.0],
            vec![INF, INF],
        )
        .unwrap();
        assert_eq!(solve(&lp, DEFAULT_FEAS_TOL).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_are_handled() {
        // min |x| encoded with a free x and t >= |x|: min t, x free, x = -3,
        // t - x - s1 = 0, t + x - s2 = 0.
        let lp = LinearProgram::from_rows(
            vec![0.0, 1.0, 0.0, 0.0],
            &[
                vec![1.0, 0.0, 0.0, 0.0],
                vec![-1.0, 1.0, -1.0, 0.0],
                vec![1.0, 1.0, 0.0, -1.0],
            ],
            vec![-3.0, 0.0, 0.0],
            vec![-INF, -INF, 0.0, 0.0],
            vec![INF, INF, INF, INF],
        )
        .unwrap();
        let sol = solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = LinearProgram::from_rows(
            vec![1.0, 2.0],
            &[vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![1.0, 2.0],
            vec![0.0, 0.0],
            vec![INF, INF],
        )
        .unwrap();
        let sol = solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasible_point_examples() {
        let p = feasible_point(&[vec![1.0, 1.0]], &[1.0], &[0.0, 0.0], &[1.0, 1.0], 1e-9)
            .unwrap()
            .unwrap();
        assert!((p[0] + p[1] - 1.0).abs() <= 1e-9);
        assert!(feasible_point(&[vec![1.0]], &[2.0], &[0.0], &[1.0], 1e-9).unwrap().is_none());
    }

    #[test]
    fn malformed_programs_are_rejected() {
        assert!(LinearProgram::from_rows(vec![1.0], &[vec![f64::NAN]], vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(LinearProgram::from_rows(vec![1.0], &[vec![1.0]], vec![1.0], vec![2.0], vec![1.0]).is_err());
        assert!(LinearProgram::from_rows(vec![1.0], &[vec![1.0, 2.0]], vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(LinearProgram::from_rows(vec![1.0], &[vec![1.0]], vec![1.0], vec![INF], vec![INF]).is_err());
    }

    #[test]
    fn fixed_variables_stay_put() {
        let lp = LinearProgram::from_rows(
            vec![-1.0, -1.0],
            &[vec![1.0, 1.0]],
            vec![3.0],
            vec![1.0, 0.0],
            vec![1.0, 5.0],
        )
        .unwrap();
        let sol = solve(&lp, DEFAULT_FEAS_TOL).unwrap();
        assert_eq!(sol.x, vec![1.0, 2.0]);
    }
}
