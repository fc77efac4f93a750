//! Fourier-space calculus on the periodic grid.
//!
//! Wavenumbers are physical: mode `m` maps to `k = 2 pi m / L`. The Nyquist
//! mode `m = n/2` is zeroed by odd multipliers (first derivative) and kept by
//! even ones.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::types::Grid;

#[derive(Clone)]
pub struct Spectral {
    n: usize,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("n", &self.n).finish()
    }
}

/// Fourier coefficients of a real field, FFT ordering (modes `0..n/2`, then
/// `-n/2+1..-1`), unnormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub coeffs: Vec<Complex64>,
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let scale = 2.0 * std::f64::consts::PI / grid.length();
        let wavenumbers = (0..n).map(|i| mode_index(i, n) as f64 * scale).collect();
        Self {
            n,
            wavenumbers,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Physical wavenumber per FFT slot; the Nyquist slot carries `+n/2`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn is_nyquist(&self, slot: usize) -> bool {
        slot == self.n / 2
    }

    pub fn forward(&self, f: &[f64]) -> SpectralField {
        assert_eq!(f.len(), self.n);
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        SpectralField { coeffs: buf }
    }

    pub fn inverse(&self, field: &SpectralField) -> Vec<f64> {
        let mut buf = field.coeffs.clone();
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    /// Applies a real even Fourier multiplier `sym(k)`.
    pub fn apply_even(&self, f: &[f64], sym: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut hat = self.forward(f);
        for (c, &k) in hat.coeffs.iter_mut().zip(&self.wavenumbers) {
            *c *= sym(k);
        }
        self.inverse(&hat)
    }

    /// Applies precomputed per-slot real multipliers.
    pub fn apply_symbol(&self, f: &[f64], symbol: &[f64]) -> Vec<f64> {
        assert_eq!(symbol.len(), self.n);
        let mut hat = self.forward(f);
        for (c, &s) in hat.coeffs.iter_mut().zip(symbol) {
            *c *= s;
        }
        self.inverse(&hat)
    }

    /// Exact derivative of the trigonometric interpolant, Nyquist zeroed.
    pub fn d1(&self, f: &[f64]) -> Vec<f64> {
        let mut hat = self.forward(f);
        for (slot, (c, &k)) in hat.coeffs.iter_mut().zip(&self.wavenumbers).enumerate() {
            *c = if self.is_nyquist(slot) {
                Complex64::new(0.0, 0.0)
            } else {
                *c * Complex64::new(0.0, k)
            };
        }
        self.inverse(&hat)
    }

    pub fn d2(&self, f: &[f64]) -> Vec<f64> {
        self.apply_even(f, |k| -k * k)
    }

    /// Bessel potential `(1 + k^2)^{s/2}`.
    pub fn lambda_s(&self, f: &[f64], s: f64) -> Vec<f64> {
        if s == 0.0 {
            return f.to_vec();
        }
        self.apply_even(f, |k| (1.0 + k * k).powf(0.5 * s))
    }

    /// Zeroes every mode with `|m| > n/3`.
    pub fn dealias_two_thirds(&self, f: &[f64]) -> Vec<f64> {
        let cutoff = self.n / 3;
        let mut hat = self.forward(f);
        for (slot, c) in hat.coeffs.iter_mut().enumerate() {
            if mode_index(slot, self.n).unsigned_abs() as usize > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self.inverse(&hat)
    }

    /// `|Λ^s f|_2^2` evaluated in Fourier space (discrete Parseval).
    pub fn hs_norm_sq(&self, f: &[f64], s: f64, dx: f64) -> f64 {
        let hat = self.forward(f);
        let scale = dx / self.n as f64;
        hat.coeffs
            .iter()
            .zip(&self.wavenumbers)
            .map(|(c, &k)| (1.0 + k * k).powf(s) * c.norm_sqr())
            .sum::<f64>()
            * scale
    }
}

/// Signed mode index of FFT slot `i`; the Nyquist slot maps to `+n/2`.
pub fn mode_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// `dx * sum f[i] g[i]`.
pub fn inner_product(f: &[f64], g: &[f64], grid: &Grid) -> f64 {
    assert_eq!(f.len(), g.len());
    grid.dx() * f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()
}

pub fn l2_norm(f: &[f64], grid: &Grid) -> f64 {
    inner_product(f, f, grid).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new(n, 2.0 * PI).unwrap()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn d1_of_sine() {
        let g = grid(64);
        let sp = Spectral::new(&g);
        for k in [1.0, 5.0, 17.0] {
            let d = sp.d1(&g.sample(|x| (k * x).sin()));
            assert!(max_err(&d, &g.sample(|x| k * (k * x).cos())) < 1e-12 * k);
        }
        let c = sp.d1(&vec![3.5; 64]);
        assert!(c.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn nyquist_is_zeroed_by_d1() {
        let g = grid(16);
        let sp = Spectral::new(&g);
        let f = g.sample(|x| (8.0 * x).cos());
        assert!(sp.d1(&f).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn round_trip() {
        let g = grid(32);
        let sp = Spectral::new(&g);
        let f: Vec<f64> = (0..32).map(|i| ((i * i) % 7) as f64 - 3.0).collect();
        let back = sp.inverse(&sp.forward(&f));
        assert!(max_err(&f, &back) < 1e-14);
    }

    #[test]
    fn inner_products() {
        let g = grid(128);
        let one = vec![1.0; 128];
        assert!((inner_product(&one, &one, &g) - 2.0 * PI).abs() < 1e-13);
        let s = g.sample(f64::sin);
        let c = g.sample(f64::cos);
        assert!(inner_product(&s, &c, &g).abs() <= 1e-14);
        let c3 = g.sample(|x| (3.0 * x).cos());
        assert!((inner_product(&c3, &c3, &g) - PI).abs() < 1e-13);
    }

    #[test]
    fn lambda_s_single_mode() {
        let g = grid(64);
        let sp = Spectral::new(&g);
        let f = g.sample(|x| (3.0 * x).cos());
        assert_eq!(sp.lambda_s(&f, 0.0), f);
        let got = sp.lambda_s(&f, 1.0);
        let expected: Vec<f64> = f.iter().map(|v| 10f64.sqrt() * v).collect();
        assert!(max_err(&got, &expected) < 1e-13);
    }

    #[test]
    fn two_thirds_filter() {
        let g = grid(48);
        let sp = Spectral::new(&g);
        let low = g.sample(|x| (16.0 * x).sin());
        let high = g.sample(|x| (17.0 * x).sin());
        assert!(max_err(&sp.dealias_two_thirds(&low), &low) < 1e-13);
        assert!(sp.dealias_two_thirds(&high).iter().all(|v| v.abs() < 1e-13));
    }
}
