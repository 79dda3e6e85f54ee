//! Plain-text forms of vectors and targets shared by the CLI.

use crate::error::{domain, Error, Result};
use crate::recovery::SparseVector;

/// Single line of space-separated decimals with 17 significant digits.
pub fn format_vector(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:.16e}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_vector(s: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = s
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("cannot parse {t:?} as a number")))
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::Parse("empty vector".into()));
    }
    Ok(out)
}

/// `e<k>` (1-based basis vector) or a sparse literal `dim; idx:val,...`
/// with 0-based indices.
pub fn parse_target(s: &str, dim: usize) -> Result<SparseVector> {
    let s = s.trim();
    if let Some(k) = s.strip_prefix('e') {
        let k: usize = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad basis vector {s:?}")))?;
        if k == 0 || k > dim {
            return domain(format!("basis vector e{k} out of range 1..={dim}"));
        }
        return SparseVector::basis(dim, k - 1);
    }
    let v: SparseVector = s.parse()?;
    if v.dim() != dim {
        return domain(format!("target dimension {} does not match n = {dim}", v.dim()));
    }
    Ok(v)
}

/// Comma-separated 1-based column list, returned 0-based.
pub fn parse_columns(s: &str, dim: usize) -> Result<Vec<usize>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let k: usize = t
                .parse()
                .map_err(|_| Error::Parse(format!("bad column index {t:?}")))?;
            if k == 0 || k > dim {
                return domain(format!("column {k} out of range 1..={dim}"));
            }
            Ok(k - 1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets() {
        assert_eq!(parse_target("e1", 4).unwrap(), SparseVector::basis(4, 0).unwrap());
        assert!(parse_target("e0", 4).is_err());
        assert!(parse_target("e5", 4).is_err());
        assert_eq!(parse_target("4; 2:1", 4).unwrap().support(), &[2]);
        assert!(parse_target("3; 2:1", 4).is_err());
    }

    #[test]
    fn vectors() {
        let v = vec![1.0, -0.1, 1e-300];
        assert_eq!(parse_vector(&format_vector(&v)).unwrap(), v);
        assert!(parse_vector("").is_err());
        assert!(parse_vector("1 x").is_err());
        assert_eq!(parse_columns("1, 3", 3).unwrap(), vec![0, 2]);
        assert!(parse_columns("4", 3).is_err());
    }
}
