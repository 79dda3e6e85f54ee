use std::fmt;

use crate::ensemble::MeasurementMatrix;
use crate::error::{domain, Result};
use crate::recovery::{split_sign_matrix, SparseVector};
use crate::simplex::{self, LinearProgram, LpStatus};

/// Witness that `Gamma v` lies in `Gamma B_1^{J^c}` for a unit-l1 vector `v`
/// supported on `J`, which rules out exact reconstruction of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureCertificate {
    pub target_index_set: Vec<usize>,
    pub target: SparseVector,
    /// Dense witness `w`, zero on `J`.
    pub witness: Vec<f64>,
    /// `||Gamma w - Gamma v||_inf`.
    pub residual: f64,
    /// `||w||_1`.
    pub l1_witness: f64,
}

impl FailureCertificate {
    /// Re-checks the certificate against `gamma`: disjoint supports,
    /// `||w||_1 <= 1 + 1e-8` and `residual <= 1e-8 (1 + ||Gamma v||_inf)`.
    pub fn validate(&self, gamma: &MeasurementMatrix) -> Result<()> {
        if self.witness.len() != gamma.n_cols() || self.target.dim() != gamma.n_cols() {
            return domain("certificate does not match the matrix");
        }
        if self.target_index_set.iter().any(|&j| self.witness[j] != 0.0) {
            return domain("witness touches the target support");
        }
        let l1: f64 = self.witness.iter().map(|v| v.abs()).sum();
        if l1 > 1.0 + 1e-8 {
            return domain(format!("witness l1 norm {l1} exceeds 1"));
        }
        let gv = gamma.apply(&self.target.to_dense())?;
        let gw = gamma.apply(&self.witness)?;
        let gv_inf = gv.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let residual = gv
            .iter()
            .zip(&gw)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
        if residual > 1e-8 * (1.0 + gv_inf) {
            return domain(format!("residual {residual} too large"));
        }
        Ok(())
    }

    /// 0-based index of the largest witness entry.
    pub fn dominant_witness_column(&self) -> usize {
        self.witness
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(j, _)| j)
            .unwrap_or(0)
    }
}

impl fmt::Display for FailureCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let j: Vec<String> = self.target_index_set.iter().map(|j| j.to_string()).collect();
        writeln!(f, "certificate")?;
        writeln!(f, "target_J: {}", j.join(","))?;
        writeln!(f, "target: {}", self.target)?;
        writeln!(f, "witness: {}", SparseVector::from_dense(&self.witness, 0.0))?;
        writeln!(f, "residual: {:.16e}", self.residual)?;
        write!(f, "l1_witness: {:.16e}", self.l1_witness)
    }
}

/// Searches for `w` supported off `supp(v)` with `||w||_1 <= 1` and
/// `Gamma w = Gamma v`, by minimizing `||w||_1` under the equality.
///
/// `None` means no certificate exists for this `v`; it does not mean the
/// matrix satisfies exact reconstruction.
pub fn er_failure_certificate(
    gamma: &MeasurementMatrix,
    v: &SparseVector,
    feas_tol: f64,
) -> Result<Option<FailureCertificate>> {
    let n = gamma.n_cols();
    if v.dim() != n {
        return domain(format!("target has dimension {}, matrix has {n} columns", v.dim()));
    }
    if (v.l1_norm() - 1.0).abs() > 1e-9 {
        return domain(format!("target must have unit l1 norm, got {}", v.l1_norm()));
    }
    let support = v.support();
    let off: Vec<usize> = (0..n).filter(|j| support.binary_search(j).is_err()).collect();
    if off.is_empty() {
        return Ok(None);
    }
    let gv = gamma.apply(&v.to_dense())?;
    let restricted = MeasurementMatrix::from_columns(
        &off.iter().map(|&j| gamma.column(j)).collect::<Vec<_>>(),
    )?;
    let k = 2 * off.len();
    let lp = LinearProgram::new(
        vec![1.0; k],
        split_sign_matrix(&restricted),
        gv.clone(),
        vec![0.0; k],
        vec![f64::INFINITY; k],
    )?;
    let sol = simplex::solve(&lp, feas_tol)?;
    if sol.status != LpStatus::Optimal || sol.objective_value > 1.0 + feas_tol {
        return Ok(None);
    }
    let mut witness = vec![0.0; n];
    for (t, &j) in off.iter().enumerate() {
        witness[j] = sol.x[t] - sol.x[off.len() + t];
    }
    let gw = gamma.apply(&witness)?;
    let residual = gv
        .iter()
        .zip(&gw)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()));
    let l1_witness = witness.iter().map(|x| x.abs()).sum();
    Ok(Some(FailureCertificate {
        target_index_set: support.to_vec(),
        target: v.clone(),
        witness,
        residual,
        l1_witness,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::DEFAULT_FEAS_TOL;

    #[test]
    fn duplicated_column_certifies_failure() {
        let gamma = MeasurementMatrix::from_columns(&[
            vec![1.0, 0.5, -2.0],
            vec![1.0, 0.5, -2.0],
            vec![0.0, 1.0, 1.0],
        ])
        .unwrap();
        let v = SparseVector::basis(3, 0).unwrap();
        let cert = er_failure_certificate(&gamma, &v, DEFAULT_FEAS_TOL).unwrap().unwrap();
        assert!((cert.witness[1] - 1.0).abs() < 1e-12);
        assert_eq!(cert.witness[0], 0.0);
        assert!(cert.witness[2].abs() < 1e-12);
        cert.validate(&gamma).unwrap();
        let text = cert.to_string();
        assert!(text.contains("target_J: 0"));
        assert!(text.contains("witness: 3;"));
    }

    #[test]
    fn identity_has_no_certificate() {
        let gamma = MeasurementMatrix::identity(5);
        for j in 0..5 {
            let v = SparseVector::basis(5, j).unwrap();
            assert!(er_failure_certificate(&gamma, &v, DEFAULT_FEAS_TOL).unwrap().is_none());
        }
    }

    #[test]
    fn unnormalized_target_is_rejected() {
        let gamma = MeasurementMatrix::identity(3);
        let v = SparseVector::new(3, vec![0], vec![2.0]).unwrap();
        assert!(er_failure_certificate(&gamma, &v, DEFAULT_FEAS_TOL).is_err());
    }
}
