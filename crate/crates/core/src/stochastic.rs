use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, NORMALIZATION_TOL};

/// Checks that `p` is a finite, nonnegative vector summing to one.
pub(crate) fn validate_distribution(p: &[f64], what: &str) -> Result<(), Error> {
    let invalid = |reason: alloc::string::String| Error::InvalidDistribution {
        what: what.to_string(),
        reason,
    };
    if p.is_empty() {
        return Err(invalid("empty".to_string()));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(invalid(format!("entry {v} is negative or not finite")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOL {
        return Err(invalid(format!("sums to {total}")));
    }
    Ok(())
}

pub(crate) fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

pub(crate) fn is_uniform(p: &[f64]) -> bool {
    let u = 1.0 / p.len() as f64;
    p.iter().all(|v| (v - u).abs() <= NORMALIZATION_TOL)
}

/// Row-stochastic matrix: every row is a probability distribution over the
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, Error> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} stochastic matrix given {} entries",
                data.len()
            )));
        }
        let m = StochasticMatrix { rows, cols, data };
        for r in 0..rows {
            validate_distribution(m.row(r), &format!("row {r}"))?;
        }
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, Error> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".to_string()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Deterministic rows: row `r` puts all mass on column `choices[r]`.
    pub fn deterministic(cols: usize, choices: &[usize]) -> Self {
        let mut data = vec![0.0; choices.len() * cols];
        for (r, &c) in choices.iter().enumerate() {
            assert!(c < cols, "choice {c} out of range {cols}");
            data[r * cols + c] = 1.0;
        }
        StochasticMatrix {
            rows: choices.len(),
            cols,
            data,
        }
    }

    pub fn uniform(rows: usize, cols: usize) -> Self {
        StochasticMatrix {
            rows,
            cols,
            data: vec![1.0 / cols as f64; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    /// If every row is a point mass, the column index of each row.
    pub fn as_deterministic(&self) -> Option<Vec<usize>> {
        self.iter_rows()
            .map(|row| row.iter().position(|&v| v == 1.0))
            .collect()
    }
}
