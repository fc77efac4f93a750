//! Parameters, grid, bathymetry and state.
//!
//! Everything here is plain value data. Fields are sampled on a uniform
//! periodic grid `x_i = i * dx`, `i = 0..n`, with index `n` identified with 0.

use crate::error::{Error, Result};

/// The nondimensional pair `(epsilon, mu)` and the depth floor `h0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    epsilon: f64,
    mu: f64,
    h0: f64,
}

impl Parameters {
    pub fn new(epsilon: f64, mu: f64, h0: f64) -> Result<Self> {
        check_unit_interval("epsilon", epsilon)?;
        check_unit_interval("mu", mu)?;
        if !(h0 > 0.0 && h0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "h0",
                value: h0,
                range: "(0, inf)",
            });
        }
        Ok(Self { epsilon, mu, h0 })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    /// Same `(epsilon, mu)` with a different depth floor.
    pub fn with_h0(&self, h0: f64) -> Result<Self> {
        Self::new(self.epsilon, self.mu, h0)
    }
}

fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            range: "(0, 1]",
        })
    }
}

/// Uniform periodic mesh on `[0, length)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(Error::GridTooSmall {
                n,
                min: Self::MIN_POINTS,
            });
        }
        if !n.is_multiple_of(2) {
            return Err(Error::OddGridSize(n));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "length",
                value: length,
                range: "(0, inf)",
            });
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.n).map(|i| f(self.x(i))).collect()
    }

    pub(crate) fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() == self.n {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                expected: self.n,
                actual: field.len(),
            })
        }
    }
}

/// Bottom elevation `b` with its first and second derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct Bathymetry {
    pub b: Vec<f64>,
    pub b_x: Vec<f64>,
    pub b_xx: Vec<f64>,
}

impl Bathymetry {
    pub fn new(b: Vec<f64>, b_x: Vec<f64>, b_xx: Vec<f64>) -> Result<Self> {
        for other in [&b_x, &b_xx] {
            if other.len() != b.len() {
                return Err(Error::LengthMismatch {
                    expected: b.len(),
                    actual: other.len(),
                });
            }
        }
        Ok(Self { b, b_x, b_xx })
    }

    pub fn flat(n: usize) -> Self {
        Self {
            b: vec![0.0; n],
            b_x: vec![0.0; n],
            b_xx: vec![0.0; n],
        }
    }

    /// Samples an analytic profile together with its exact derivatives.
    pub fn from_analytic(
        grid: &Grid,
        b: impl Fn(f64) -> f64,
        b_x: impl Fn(f64) -> f64,
        b_xx: impl Fn(f64) -> f64,
    ) -> Self {
        Self {
            b: grid.sample(b),
            b_x: grid.sample(b_x),
            b_xx: grid.sample(b_xx),
        }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn is_flat(&self) -> bool {
        self.b
            .iter()
            .chain(&self.b_x)
            .chain(&self.b_xx)
            .all(|&v| v == 0.0)
    }
}

/// Surface elevation and depth-averaged velocity at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub zeta: Vec<f64>,
    pub u: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn new(zeta: Vec<f64>, u: Vec<f64>, time: f64) -> Result<Self> {
        if zeta.len() != u.len() {
            return Err(Error::LengthMismatch {
                expected: zeta.len(),
                actual: u.len(),
            });
        }
        Ok(Self { zeta, u, time })
    }

    pub fn rest(n: usize) -> Self {
        Self {
            zeta: vec![0.0; n],
            u: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.zeta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.zeta.iter().chain(&self.u).all(|v| v.is_finite())
    }

    /// `self + alpha * (dzeta, du)`, time unchanged.
    pub fn axpy(&self, alpha: f64, dzeta: &[f64], du: &[f64]) -> State {
        State {
            zeta: self
                .zeta
                .iter()
                .zip(dzeta)
                .map(|(a, b)| a + alpha * b)
                .collect(),
            u: self.u.iter().zip(du).map(|(a, b)| a + alpha * b).collect(),
            time: self.time,
        }
    }

    /// Componentwise difference `self - other`, time taken from `self`.
    pub fn diff(&self, other: &State) -> State {
        State {
            zeta: self.zeta.iter().zip(&other.zeta).map(|(a, b)| a - b).collect(),
            u: self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect(),
            time: self.time,
        }
    }

    pub fn scaled(&self, alpha: f64) -> State {
        State {
            zeta: self.zeta.iter().map(|v| alpha * v).collect(),
            u: self.u.iter().map(|v| alpha * v).collect(),
            time: self.time,
        }
    }
}

/// Water depth `h = 1 + epsilon * (zeta - b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthField {
    pub h: Vec<f64>,
}

impl DepthField {
    pub fn uniform(n: usize, value: f64) -> Self {
        Self { h: vec![value; n] }
    }

    /// Minimum value and its first index. NaN entries count as the minimum.
    pub fn min(&self) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (i, &v) in self.h.iter().enumerate() {
            if v.is_nan() {
                return (v, i);
            }
            if v < best.0 {
                best = (v, i);
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepthVerdict {
    Ok,
    Violated { min_value: f64, location: usize },
}

impl DepthVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, DepthVerdict::Ok)
    }
}

pub fn compute_depth(state: &State, bathy: &Bathymetry, params: &Parameters) -> DepthField {
    depth_from_zeta(&state.zeta, bathy, params)
}

pub(crate) fn depth_from_zeta(zeta: &[f64], bathy: &Bathymetry, params: &Parameters) -> DepthField {
    let eps = params.epsilon();
    DepthField {
        h: zeta
            .iter()
            .zip(&bathy.b)
            .map(|(z, b)| 1.0 + eps * (z - b))
            .collect(),
    }
}

/// `Ok` iff `min h >= h0` (inclusive).
pub fn check_depth_condition(h: &DepthField, params: &Parameters) -> DepthVerdict {
    let (min_value, location) = h.min();
    if min_value >= params.h0() {
        DepthVerdict::Ok
    } else {
        DepthVerdict::Violated {
            min_value,
            location,
        }
    }
}

impl DepthField {
    pub(crate) fn require(&self, params: &Parameters) -> Result<()> {
        match check_depth_condition(self, params) {
            DepthVerdict::Ok => Ok(()),
            DepthVerdict::Violated {
                min_value,
                location,
            } => Err(Error::DepthViolation {
                min_h: min_value,
                index: location,
                h0: params.h0(),
            }),
        }
    }
}
