//! Periodic band matrices.
//!
//! Row `i` stores the entries `A[i, (i + k) mod n]` for `k = -p..=p`, where
//! `p` is the half bandwidth. Requires `n > 2p` so wrapped offsets stay
//! distinct.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BandedOperator {
    n: usize,
    bandwidth: usize,
    coeffs: Vec<f64>,
}

impl BandedOperator {
    pub fn zeros(n: usize, bandwidth: usize) -> Result<Self> {
        if n < 2 * bandwidth + 1 {
            return Err(Error::GridTooSmall {
                n,
                min: 2 * bandwidth + 1,
            });
        }
        Ok(Self {
            n,
            bandwidth,
            coeffs: vec![0.0; n * (2 * bandwidth + 1)],
        })
    }

    /// Constant-coefficient (circulant) operator from a centered stencil of
    /// odd length.
    pub fn circulant(n: usize, stencil: &[f64]) -> Result<Self> {
        assert!(stencil.len() % 2 == 1, "stencil length must be odd");
        let p = stencil.len() / 2;
        let mut op = Self::zeros(n, p)?;
        for i in 0..n {
            op.row_mut(i).copy_from_slice(stencil);
        }
        Ok(op)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self {
            n: d.len(),
            bandwidth: 0,
            coeffs: d.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn width(&self) -> usize {
        2 * self.bandwidth + 1
    }

    /// Band coefficients of row `i`, offsets `-p..=p`.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.coeffs[i * w..(i + 1) * w]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let w = self.width();
        &mut self.coeffs[i * w..(i + 1) * w]
    }

    /// `A[i, (i + offset) mod n]`; zero outside the band.
    pub fn get(&self, i: usize, offset: isize) -> f64 {
        let p = self.bandwidth as isize;
        if offset.abs() > p {
            return 0.0;
        }
        self.row(i)[(offset + p) as usize]
    }

    fn set(&mut self, i: usize, offset: isize, value: f64) {
        let p = self.bandwidth as isize;
        let w = self.width();
        self.coeffs[i * w + (offset + p) as usize] = value;
    }

    /// Entry `A[i, j]` addressed by absolute column.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self.offset_of(i, j) {
            Some(k) => self.get(i, k),
            None => 0.0,
        }
    }

    fn offset_of(&self, i: usize, j: usize) -> Option<isize> {
        let n = self.n as isize;
        let mut k = j as isize - i as isize;
        if k > n / 2 {
            k -= n;
        } else if k < -(n / 2) {
            k += n;
        }
        (k.unsigned_abs() <= self.bandwidth).then_some(k)
    }

    fn wrap(&self, i: isize) -> usize {
        i.rem_euclid(self.n as isize) as usize
    }

    /// Matrix-vector product. Offsets `±k` are summed as pairs, so an
    /// antisymmetric stencil maps constants to exactly zero.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let p = self.bandwidth;
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let ii = i as isize;
                let mut acc = row[p] * v[i];
                for k in 1..=p {
                    let ki = k as isize;
                    acc += row[p + k] * v[self.wrap(ii + ki)] + row[p - k] * v[self.wrap(ii - ki)];
                }
                acc
            })
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let p = self.bandwidth as isize;
        let mut out = self.clone();
        for i in 0..self.n {
            for k in -p..=p {
                let src = self.wrap(i as isize + k);
                out.set(i, k, self.get(src, -k));
            }
        }
        out
    }

    /// `diag(d) * A`.
    pub fn scale_rows(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            for c in out.row_mut(i) {
                *c *= di;
            }
        }
        out
    }

    /// `A + diag(d)`.
    pub fn add_diagonal(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.n);
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            let v = out.get(i, 0) + di;
            out.set(i, 0, v);
        }
        out
    }

    /// Entrywise `alpha * A + beta * B`, widening to the larger band.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        assert_eq!(self.n, other.n);
        let p = self.bandwidth.max(other.bandwidth);
        let mut out = Self::zeros(self.n, p)?;
        let pi = p as isize;
        for i in 0..self.n {
            for k in -pi..=pi {
                out.set(i, k, alpha * self.get(i, k) + beta * other.get(i, k));
            }
        }
        Ok(out)
    }

    /// `Mᵀ diag(w) M`, with entry `(i, j)` accumulated as
    /// `sum_r (M[r,i] * M[r,j]) * w[r]` over rows `r` in increasing unwrapped
    /// order. Entries `(i, j)` and `(j, i)` see identical terms in identical
    /// order, so the result is symmetric bit for bit.
    pub fn weighted_gram(&self, w: &[f64]) -> Result<Self> {
        assert_eq!(w.len(), self.n);
        let p = self.bandwidth as isize;
        let mut out = Self::zeros(self.n, 2 * self.bandwidth)?;
        for i in 0..self.n {
            let ii = i as isize;
            for k in -2 * p..=2 * p {
                let jj = ii + k;
                let lo = ii.max(jj) - p;
                let hi = ii.min(jj) + p;
                let mut acc = 0.0;
                for r in lo..=hi {
                    let rw = self.wrap(r);
                    let a = self.get(rw, ii - r);
                    let b = self.get(rw, jj - r);
                    acc += (a * b) * w[rw];
                }
                out.set(i, k, acc);
            }
        }
        Ok(out)
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        let p = self.bandwidth.max(other.bandwidth) as isize;
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for k in -p..=p {
                m = m.max((self.get(i, k) - other.get(i, k)).abs());
            }
        }
        m
    }

    /// True when `A[i, j]` and `A[j, i]` are bitwise equal for every pair.
    pub fn is_exactly_symmetric(&self) -> bool {
        let p = self.bandwidth as isize;
        (0..self.n).all(|i| {
            (-p..=p).all(|k| {
                let j = self.wrap(i as isize + k);
                self.get(i, k).to_bits() == self.get(j, -k).to_bits()
            })
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.n]; self.n];
        let p = self.bandwidth as isize;
        for (i, row) in dense.iter_mut().enumerate() {
            for k in -p..=p {
                row[self.wrap(i as isize + k)] += self.get(i, k);
            }
        }
        dense
    }
}
