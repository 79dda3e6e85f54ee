use std::fmt;

use crate::error::{domain, Result};

/// Constants standing in for the unspecified `<~` relations of the
/// construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConstants {
    /// `delta = c_lo * ln(N) / n`, also the lower end of the delta window.
    pub c_lo: f64,
    /// Upper bound in `R^4 delta <= c_4`.
    pub c_4: f64,
}

impl Default for PlannerConstants {
    fn default() -> Self {
        PlannerConstants { c_lo: 3.0, c_4: 2.0 }
    }
}

/// One evaluated admissibility condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    /// The inequality with the numbers substituted in.
    pub inequality: String,
    pub satisfied: bool,
}

/// An admissible (or rejected) choice of `(delta, p, R)` for an `N x n`
/// spiky matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterPlan {
    pub n_rows: usize,
    pub n_cols: usize,
    pub delta: f64,
    pub p: f64,
    pub big_r: f64,
    pub constants: PlannerConstants,
    pub conditions: Vec<Condition>,
}

/// `R = sqrt(p) * (1/delta)^{1/p}`.
pub fn spike_magnitude(delta: f64, p: f64) -> f64 {
    p.sqrt() * (1.0 / delta).powf(1.0 / p)
}

/// Evaluates the four conditions C1..C4 for the given values.
pub fn evaluate_conditions(
    n_rows: usize,
    n_cols: usize,
    delta: f64,
    big_r: f64,
    constants: PlannerConstants,
) -> Vec<Condition> {
    let nr = n_rows as f64;
    let nc = n_cols as f64;
    let two_n = 2.0 * nr;
    let lo = constants.c_lo * nr.ln() / nc;
    let hi = (std::f64::consts::E * nc / nr).ln() / nr;
    let r4d = big_r.powi(4) * delta;
    let inv_n = 1.0 / nr;
    vec![
        Condition {
            name: "C1",
            inequality: format!("R = {big_r:.6} >= 2N = {two_n}"),
            satisfied: big_r >= two_n,
        },
        Condition {
            name: "C2",
            inequality: format!(
                "c_lo ln(N)/n = {lo:.6e} <= delta = {delta:.6e} <= ln(e n/N)/N = {hi:.6e}"
            ),
            satisfied: lo <= delta && delta <= hi,
        },
        Condition {
            name: "C3",
            inequality: format!("R^4 delta = {r4d:.6} <= c_4 = {}", constants.c_4),
            satisfied: r4d <= constants.c_4,
        },
        Condition {
            name: "C4",
            inequality: format!("delta = {delta:.6e} <= 1/N = {inv_n:.6e}"),
            satisfied: delta <= inv_n,
        },
    ]
}

/// Plans `(delta, p, R)` with the default constants.
pub fn plan_parameters(n_rows: usize, n_cols: usize) -> Result<ParameterPlan> {
    plan_parameters_with(n_rows, n_cols, PlannerConstants::default())
}

/// `delta = c_lo ln(N)/n`, `p = ln(n)/ln(N)`, `R = sqrt(p) (1/delta)^{1/p}`.
///
/// An infeasible plan is returned, not rejected; inspect
/// [`ParameterPlan::feasible`].
pub fn plan_parameters_with(
    n_rows: usize,
    n_cols: usize,
    constants: PlannerConstants,
) -> Result<ParameterPlan> {
    if n_rows < 2 {
        return domain(format!("planner needs N >= 2, got N={n_rows}"));
    }
    if n_rows >= n_cols {
        return domain(format!("planner needs N < n, got N={n_rows}, n={n_cols}"));
    }
    if !(constants.c_lo > 0.0 && constants.c_4 > 0.0) {
        return domain("planner constants must be positive");
    }
    let delta = constants.c_lo * (n_rows as f64).ln() / n_cols as f64;
    if delta > 1.0 {
        return domain(format!("c_lo ln(N)/n = {delta} exceeds 1"));
    }
    let p = (n_cols as f64).ln() / (n_rows as f64).ln();
    let big_r = spike_magnitude(delta, p);
    Ok(ParameterPlan {
        n_rows,
        n_cols,
        delta,
        p,
        big_r,
        constants,
        conditions: evaluate_conditions(n_rows, n_cols, delta, big_r, constants),
    })
}

impl ParameterPlan {
    /// A plan built from explicit values, e.g. user overrides. `big_r`
    /// defaults to `sqrt(p) (1/delta)^{1/p}` when not given.
    pub fn from_values(
        n_rows: usize,
        n_cols: usize,
        delta: f64,
        p: f64,
        big_r: Option<f64>,
        constants: PlannerConstants,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return domain("zero matrix dimension");
        }
        if !(0.0..=1.0).contains(&delta) {
            return domain(format!("delta={delta} outside [0, 1]"));
        }
        if !(p.is_finite() && p > 0.0) {
            return domain(format!("p={p} must be positive"));
        }
        let big_r = big_r.unwrap_or_else(|| spike_magnitude(delta, p));
        if !(big_r.is_finite() && big_r >= 0.0) {
            return domain(format!("R={big_r} is not a finite nonnegative number; pass R explicitly"));
        }
        Ok(ParameterPlan {
            n_rows,
            n_cols,
            delta,
            p,
            big_r,
            constants,
            conditions: evaluate_conditions(n_rows, n_cols, delta, big_r, constants),
        })
    }

    pub fn feasible(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }

    pub fn first_violation(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| !c.satisfied)
    }

    pub fn law(&self) -> super::ScalarLaw {
        super::ScalarLaw::Spiky {
            delta: self.delta,
            big_r: self.big_r,
        }
    }
}

impl fmt::Display for ParameterPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N = {}, n = {}", self.n_rows, self.n_cols)?;
        writeln!(
            f,
            "constants: c_lo = {}, c_4 = {}",
            self.constants.c_lo, self.constants.c_4
        )?;
        writeln!(f, "delta = {:.10e}", self.delta)?;
        writeln!(f, "p = {:.10}", self.p)?;
        writeln!(f, "R = {:.10}", self.big_r)?;
        for c in &self.conditions {
            let mark = if c.satisfied { "ok" } else { "VIOLATED" };
            writeln!(f, "{}: {} [{}]", c.name, c.inequality, mark)?;
        }
        match self.first_violation() {
            None => write!(f, "plan: feasible"),
            Some(c) => write!(f, "plan: infeasible (first violated: {})", c.name),
        }
    }
}
