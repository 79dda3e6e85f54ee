use std::fmt::Write as _;

use rayon::prelude::*;

use super::ScalarLaw;
use crate::error::{domain, Error, Result};
use crate::rng;

/// What to sample: law, shape, seed and whether to apply the `1/sqrt(N)`
/// row scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec {
    pub law: ScalarLaw,
    pub n_rows: usize,
    pub n_cols: usize,
    pub seed: u64,
    pub apply_row_scale: bool,
}

impl EnsembleSpec {
    pub fn new(law: ScalarLaw, n_rows: usize, n_cols: usize, seed: u64) -> Self {
        EnsembleSpec {
            law,
            n_rows,
            n_cols,
            seed,
            apply_row_scale: true,
        }
    }

    pub fn without_row_scale(mut self) -> Self {
        self.apply_row_scale = false;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return domain(format!(
                "zero matrix dimension ({} x {})",
                self.n_rows, self.n_cols
            ));
        }
        self.law.validate()
    }

    /// Whether the spike selector fired at entry `(i, j)`.
    pub fn spike_at(&self, i: usize, j: usize) -> bool {
        self.law.decode(rng::bits_at(self.seed, i as u64, j as u64)).1
    }

    /// Row-major selector pattern of the sampled matrix.
    pub fn spike_mask(&self) -> Vec<bool> {
        (0..self.n_rows)
            .flat_map(|i| (0..self.n_cols).map(move |j| (i, j)))
            .map(|(i, j)| self.spike_at(i, j))
            .collect()
    }
}

/// Dense row-major `N x n` measurement matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<f64>,
    row_scale: f64,
}

/// Draws the matrix described by `spec`. Entry `(i, j)` depends only on
/// `(seed, i, j)`.
pub fn sample_matrix(spec: &EnsembleSpec) -> Result<MeasurementMatrix> {
    spec.validate()?;
    let row_scale = if spec.apply_row_scale {
        1.0 / (spec.n_rows as f64).sqrt()
    } else {
        1.0
    };
    let mut entries = vec![0.0; spec.n_rows * spec.n_cols];
    entries
        .par_chunks_mut(spec.n_cols)
        .enumerate()
        .for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                let bits = rng::bits_at(spec.seed, i as u64, j as u64);
                *slot = spec.law.decode(bits).0 * row_scale;
            }
        });
    Ok(MeasurementMatrix {
        n_rows: spec.n_rows,
        n_cols: spec.n_cols,
        entries,
        row_scale,
    })
}

impl MeasurementMatrix {
    pub fn from_row_major(
        n_rows: usize,
        n_cols: usize,
        entries: Vec<f64>,
        row_scale: f64,
    ) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return domain("zero matrix dimension");
        }
        if entries.len() != n_rows * n_cols {
            return domain(format!(
                "expected {} entries, got {}",
                n_rows * n_cols,
                entries.len()
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return domain("matrix has non-finite entries");
        }
        Ok(MeasurementMatrix {
            n_rows,
            n_cols,
            entries,
            row_scale,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return domain("ragged rows");
        }
        Self::from_row_major(n_rows, n_cols, rows.concat(), 1.0)
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let n_cols = cols.len();
        let n_rows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != n_rows) {
            return domain("ragged columns");
        }
        let mut entries = vec![0.0; n_rows * n_cols];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                entries[i * n_cols + j] = *v;
            }
        }
        Self::from_row_major(n_rows, n_cols, entries, 1.0)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        MeasurementMatrix {
            n_rows: n,
            n_cols: n,
            entries,
            row_scale: 1.0,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row_scale(&self) -> f64 {
        self.row_scale
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    /// `Gamma t`.
    pub fn apply(&self, t: &[f64]) -> Result<Vec<f64>> {
        if t.len() != self.n_cols {
            return domain(format!(
                "vector has length {}, matrix has {} columns",
                t.len(),
                self.n_cols
            ));
        }
        Ok((0..self.n_rows)
            .map(|i| self.row(i).iter().zip(t).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Gamma^T r`.
    pub fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (i, ri) in r.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * ri;
            }
        }
        out
    }

    /// The matrix multiplied entrywise by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        MeasurementMatrix {
            entries: self.entries.iter().map(|v| v * c).collect(),
            row_scale: self.row_scale * c,
            ..*self
        }
    }

    /// Text form: a header `N n row_scale`, then one line per row with 17
    /// significant digits per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 25 + 32);
        let _ = writeln!(out, "{} {} {:.16e}", self.n_rows, self.n_cols, self.row_scale);
        for i in 0..self.n_rows {
            let line: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad matrix header: {header:?}")));
        }
        let n_rows: usize = parse_field(fields[0])?;
        let n_cols: usize = parse_field(fields[1])?;
        let row_scale: f64 = parse_field(fields[2])?;
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        let mut seen_rows = 0;
        for line in lines {
            let before = entries.len();
            for tok in line.split_whitespace() {
                entries.push(parse_field::<f64>(tok)?);
            }
            if entries.len() - before != n_cols {
                return Err(Error::Parse(format!(
                    "row {} has {} entries, expected {n_cols}",
                    seen_rows + 1,
                    entries.len() - before
                )));
            }
            seen_rows += 1;
        }
        if seen_rows != n_rows {
            return Err(Error::Parse(format!(
                "expected {n_rows} rows, found {seen_rows}"
            )));
        }
        Self::from_row_major(n_rows, n_cols, entries, row_scale)
    }
}

fn parse_field<T: std::str::FromStr>(tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| Error::Parse(format!("cannot parse {tok:?}")))
}
