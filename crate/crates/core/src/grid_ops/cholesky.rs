//! Envelope Cholesky factorization for symmetric periodic band matrices.
//!
//! The lower triangle of a periodic band matrix with half bandwidth `p` has
//! the ordinary band in every row plus wrapped corner entries in the last `p`
//! rows. Cholesky preserves that envelope: rows `i < n - p` keep columns
//! `i-p..=i`, the last `p` rows fill in densely from column 0. Cost is
//! `O(n p^2)` and no pivoting is performed.

use super::banded::BandedOperator;
use crate::error::Error;

#[derive(Debug, Clone)]
pub struct PeriodicCholesky {
    n: usize,
    /// First stored column of each row.
    start: Vec<usize>,
    /// `rows[i][c]` holds `L[i, start[i] + c]`, diagonal last.
    rows: Vec<Vec<f64>>,
}

/// Failure of the factorization: the pivot at `row` was not positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotFailure {
    pub row: usize,
    pub pivot: f64,
}

impl PeriodicCholesky {
    pub fn factor(a: &BandedOperator) -> std::result::Result<Self, PivotFailure> {
        let n = a.n();
        let p = a.bandwidth();
        let start: Vec<usize> = (0..n)
            .map(|i| if i + p >= n { 0 } else { i.saturating_sub(p) })
            .collect();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);

        for i in 0..n {
            let si = start[i];
            let mut row = vec![0.0; i - si + 1];
            // only the lower triangle of `a` is read
            for j in si..=i {
                let mut acc = a.entry(i, j);
                if j < i {
                    let sj = start[j];
                    let lj = &rows[j];
                    for k in si.max(sj)..j {
                        acc -= row[k - si] * lj[k - sj];
                    }
                    row[j - si] = acc / lj[j - sj];
                } else {
                    for v in &row[..i - si] {
                        acc -= v * v;
                    }
                    if !(acc > 0.0) || !acc.is_finite() {
                        return Err(PivotFailure { row: i, pivot: acc });
                    }
                    row[i - si] = acc.sqrt();
                }
            }
            rows.push(row);
        }
        Ok(Self { n, start, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.n);
        let mut y = f.to_vec();
        // L y = f
        for i in 0..self.n {
            let si = self.start[i];
            let row = &self.rows[i];
            let mut acc = y[i];
            for k in si..i {
                acc -= row[k - si] * y[k];
            }
            y[i] = acc / row[i - si];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let si = self.start[i];
            let row = &self.rows[i];
            let xi = y[i] / row[i - si];
            y[i] = xi;
            for k in si..i {
                y[k] -= row[k - si] * xi;
            }
        }
        y
    }

    pub fn min_pivot(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.start)
            .enumerate()
            .map(|(i, (row, &s))| row[i - s] * row[i - s])
            .fold(f64::INFINITY, f64::min)
    }
}

impl From<PivotFailure> for Error {
    fn from(e: PivotFailure) -> Self {
        Error::NotPositiveDefinite {
            row: e.row,
            pivot: e.pivot,
            min_h: f64::NAN,
        }
    }
}
