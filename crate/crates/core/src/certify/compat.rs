//! The compatibility constant
//! `phi^2(L, S) = |S| min ||Gamma b_S - Gamma b_{S^c}||_2^2` over
//! `||b_S||_1 = 1`, `||b_{S^c}||_1 <= L`.
//!
//! Each sign pattern of `b_S` gives a convex quadratic over a product of
//! polytopes (a simplex times a scaled cross-polytope), minimized with
//! away-step Frank-Wolfe. Every iterate is a convex combination of vertex
//! pairs, so all the work happens in the `N`-dimensional image space.

use crate::ensemble::MeasurementMatrix;
use crate::error::{domain, Error, Result};

pub const MAX_FW_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityValue {
    pub s_set: Vec<usize>,
    pub l_budget: f64,
    pub phi2: f64,
    /// Dense `b` with `b_S` and `b_{S^c}` merged; the objective uses
    /// `Gamma b_S - Gamma b_{S^c}`.
    pub minimizer_beta: Vec<f64>,
    /// Final Frank-Wolfe gap of the winning sign pattern.
    pub gap: f64,
    pub iterations: usize,
}

/// A vertex of the product domain: vertex `on` of the signed simplex over
/// `S` together with `+-L e_off` on the complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Atom {
    on: usize,
    off: usize,
    off_negative: bool,
}

struct Problem<'a> {
    gamma: &'a MeasurementMatrix,
    s_set: &'a [usize],
    signs: Vec<f64>,
    off: Vec<usize>,
    l_budget: f64,
    columns: Vec<Vec<f64>>,
}

struct Outcome {
    value: f64,
    gap: f64,
    iterations: usize,
    active: Vec<(Atom, f64)>,
}

impl<'a> Problem<'a> {
    fn image(&self, atom: Atom) -> Vec<f64> {
        let on = &self.columns[self.s_set[atom.on]];
        let off = &self.columns[self.off[atom.off]];
        let sign_off = if atom.off_negative { -1.0 } else { 1.0 };
        on.iter()
            .zip(off)
            .map(|(a, b)| self.signs[atom.on] * a - self.l_budget * sign_off * b)
            .collect()
    }

    /// Linear minimization oracle for the gradient `2 * image^T r`.
    fn lmo(&self, r: &[f64]) -> Atom {
        let dot = |c: &[f64]| -> f64 { c.iter().zip(r).map(|(a, b)| a * b).sum() };
        let on = (0..self.s_set.len())
            .min_by(|&a, &b| {
                (self.signs[a] * dot(&self.columns[self.s_set[a]]))
                    .total_cmp(&(self.signs[b] * dot(&self.columns[self.s_set[b]])))
            })
            .expect("S is nonempty");
        // Minimize -L * sign * <col, r>: pick the largest |<col, r>|.
        let mut best = 0;
        let mut best_abs = f64::NEG_INFINITY;
        let mut best_dot = 0.0;
        for (t, &j) in self.off.iter().enumerate() {
            let d = dot(&self.columns[j]);
            if d.abs() > best_abs {
                best_abs = d.abs();
                best = t;
                best_dot = d;
            }
        }
        Atom {
            on,
            off: best,
            off_negative: best_dot < 0.0,
        }
    }

    fn run(&self, gap_tol: f64, max_iter: usize) -> std::result::Result<Outcome, Outcome> {
        let m = self.gamma.n_rows();
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
        let start_r: Vec<f64> = self.columns[self.s_set[0]]
            .iter()
            .map(|v| self.signs[0] * v)
            .collect();
        let first = self.lmo(&start_r);
        let mut active: Vec<(Atom, f64)> = vec![(first, 1.0)];
        let mut images: Vec<Vec<f64>> = vec![self.image(first)];
        let mut r = images[0].clone();
        let mut gap = f64::INFINITY;
        for it in 0..max_iter {
            if it % 1000 == 999 {
                // Refresh the image to stop drift.
                r = vec![0.0; m];
                for ((_, w), img) in active.iter().zip(&images) {
                    for (ri, v) in r.iter_mut().zip(img) {
                        *ri += w * v;
                    }
                }
            }
            let fw = self.lmo(&r);
            let fw_img = self.image(fw);
            let rr = dot(&r, &r);
            gap = 2.0 * (rr - dot(&r, &fw_img));
            if gap <= gap_tol {
                return Ok(Outcome {
                    value: rr,
                    gap,
                    iterations: it,
                    active,
                });
            }
            // Away vertex: active atom with the largest <r, image>.
            let (away, away_score) = images
                .iter()
                .enumerate()
                .map(|(t, img)| (t, dot(&r, img)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("active set is nonempty");
            let away_gap = 2.0 * (away_score - rr);
            let (dir, max_step, fw_step) = if gap >= away_gap || active.len() == 1 {
                let d: Vec<f64> = fw_img.iter().zip(&r).map(|(s, x)| s - x).collect();
                (d, 1.0, true)
            } else {
                let w = active[away].1;
                let d: Vec<f64> = r.iter().zip(&images[away]).map(|(x, v)| x - v).collect();
                (d, w / (1.0 - w), false)
            };
            let dd = dot(&dir, &dir);
            if dd == 0.0 {
                continue;
            }
            let step = (-dot(&r, &dir) / dd).clamp(0.0, max_step);
            for (ri, di) in r.iter_mut().zip(&dir) {
                *ri += step * di;
            }
            if fw_step {
                for (_, w) in active.iter_mut() {
                    *w *= 1.0 - step;
                }
                match active.iter().position(|(a, _)| *a == fw) {
                    Some(t) => active[t].1 += step,
                    None => {
                        active.push((fw, step));
                        images.push(fw_img);
                    }
                }
                if step == 1.0 {
                    let keep = active.iter().position(|(a, _)| *a == fw).unwrap();
                    active = vec![(fw, 1.0)];
                    images = vec![images.swap_remove(keep)];
                }
            } else {
                for (_, w) in active.iter_mut() {
                    *w *= 1.0 + step;
                }
                active[away].1 -= step;
                if step >= max_step || active[away].1 <= 1e-15 {
                    active.swap_remove(away);
                    images.swap_remove(away);
                }
            }
            active.retain(|(_, w)| *w > 0.0);
            if active.len() != images.len() {
                images = active.iter().map(|(a, _)| self.image(*a)).collect();
            }
        }
        let rr = dot(&r, &r);
        Err(Outcome {
            value: rr,
            gap,
            iterations: max_iter,
            active,
        })
    }

    fn beta(&self, active: &[(Atom, f64)]) -> Vec<f64> {
        let mut beta = vec![0.0; self.gamma.n_cols()];
        for (a, w) in active {
            beta[self.s_set[a.on]] += w * self.signs[a.on];
            let sign_off = if a.off_negative { -1.0 } else { 1.0 };
            beta[self.off[a.off]] += w * self.l_budget * sign_off;
        }
        beta
    }
}

/// `phi^2(L, S)` with the squared Euclidean norm, for `1 <= |S| <= 2`.
///
/// Runs one Frank-Wolfe problem per sign pattern of `b_S`, each until its
/// duality gap drops to `gap_tol`, and returns `|S|` times the best value.
pub fn compatibility_constant(
    gamma: &MeasurementMatrix,
    s_set: &[usize],
    l_budget: f64,
    gap_tol: f64,
) -> Result<CompatibilityValue> {
    let n = gamma.n_cols();
    if s_set.is_empty() || s_set.len() > 2 {
        return domain(format!("|S|={} must be 1 or 2", s_set.len()));
    }
    if s_set.iter().any(|&j| j >= n) || (s_set.len() == 2 && s_set[0] == s_set[1]) {
        return domain("S must hold distinct column indices");
    }
    if !(l_budget.is_finite() && l_budget >= 1.0) {
        return domain(format!("L={l_budget} must be >= 1"));
    }
    if !(gap_tol.is_finite() && gap_tol > 0.0) {
        return domain("gap tolerance must be positive");
    }
    let off: Vec<usize> = (0..n).filter(|j| !s_set.contains(j)).collect();
    if off.is_empty() {
        return domain("S covers every column");
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|j| gamma.column(j)).collect();
    let mut best: Option<(f64, Vec<f64>, f64, usize)> = None;
    let mut total_iterations = 0;
    for mask in 0..1usize << s_set.len() {
        let signs: Vec<f64> = (0..s_set.len())
            .map(|b| if mask >> b & 1 == 0 { 1.0 } else { -1.0 })
            .collect();
        let problem = Problem {
            gamma,
            s_set,
            signs,
            off: off.clone(),
            l_budget,
            columns: columns.clone(),
        };
        let outcome = problem
            .run(gap_tol, MAX_FW_ITERATIONS)
            .map_err(|o| Error::NonConvergence {
                best: o.value * s_set.len() as f64,
                gap: o.gap,
                iterations: o.iterations,
            })?;
        total_iterations += outcome.iterations;
        if best.as_ref().is_none_or(|b| outcome.value < b.0) {
            best = Some((
                outcome.value,
                problem.beta(&outcome.active),
                outcome.gap,
                outcome.iterations,
            ));
        }
    }
    let (value, minimizer_beta, gap, _) = best.expect("at least one sign pattern");
    Ok(CompatibilityValue {
        s_set: s_set.to_vec(),
        l_budget,
        phi2: s_set.len() as f64 * value,
        minimizer_beta,
        gap,
        iterations: total_iterations,
    })
}

/// `|S| * ||Gamma b_S - Gamma b_{S^c}||_2^2` for an explicit `b`.
pub fn compatibility_objective(gamma: &MeasurementMatrix, s_set: &[usize], beta: &[f64]) -> Result<f64> {
    let signed: Vec<f64> = beta
        .iter()
        .enumerate()
        .map(|(j, b)| if s_set.contains(&j) { *b } else { -b })
        .collect();
    let r = gamma.apply(&signed)?;
    Ok(s_set.len() as f64 * r.iter().map(|x| x * x).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicated_column_gives_zero() {
        let gamma = MeasurementMatrix::from_columns(&[
            vec![1.0, -1.0, 1.0],
            vec![1.0, -1.0, 1.0],
            vec![3.0, 1.0, 0.0],
            vec![0.0, 2.0, -2.0],
        ])
        .unwrap();
        let v = compatibility_constant(&gamma, &[0], 1.0, 1e-9).unwrap();
        assert!(v.phi2 <= 1e-9, "{}", v.phi2);
    }

    #[test]
    fn orthonormal_columns_give_one() {
        let gamma = MeasurementMatrix::identity(5);
        for l in [1.0, 2.5] {
            let v = compatibility_constant(&gamma, &[2], l, 1e-9).unwrap();
            assert!((v.phi2 - 1.0).abs() <= 1e-6, "{}", v.phi2);
            let off_mass: f64 = v
                .minimizer_beta
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != 2)
                .map(|(_, b)| b.abs())
                .sum();
            assert!(off_mass <= 1e-4);
        }
    }

    #[test]
    fn reported_value_matches_objective_at_minimizer() {
        let gamma = MeasurementMatrix::from_rows(&[
            vec![1.0, 0.3, -0.2, 0.5],
            vec![0.1, 1.0, 0.4, -0.3],
        ])
        .unwrap();
        let v = compatibility_constant(&gamma, &[0, 1], 1.5, 1e-10).unwrap();
        let direct = compatibility_objective(&gamma, &[0, 1], &v.minimizer_beta).unwrap();
        assert!((direct - v.phi2).abs() <= 1e-9);
        let on: f64 = v.minimizer_beta[..2].iter().map(|b| b.abs()).sum();
        let off: f64 = v.minimizer_beta[2..].iter().map(|b| b.abs()).sum();
        assert!((on - 1.0).abs() <= 1e-9);
        assert!(off <= 1.5 + 1e-9);
    }

    #[test]
    fn guards() {
        let gamma = MeasurementMatrix::identity(4);
        assert!(compatibility_constant(&gamma, &[0], 0.5, 1e-9).is_err());
        assert!(compatibility_constant(&gamma, &[0, 1, 2], 1.0, 1e-9).is_err());
        assert!(compatibility_constant(&gamma, &[], 1.0, 1e-9).is_err());
        assert!(compatibility_constant(&gamma, &[7], 1.0, 1e-9).is_err());
    }
}
