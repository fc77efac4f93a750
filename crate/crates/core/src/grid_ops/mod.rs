//! Discrete calculus on the periodic grid.
//!
//! Two backends: a banded fourth-order finite-difference first derivative,
//! used wherever an operator has to stay banded, and Fourier multipliers for
//! everything else.

mod banded;
mod cholesky;
mod spectral;

pub use banded::BandedOperator;
pub use cholesky::{PeriodicCholesky, PivotFailure};
pub use spectral::{inner_product, l2_norm, mode_index, Spectral, SpectralField};

use crate::error::{Error, Result};
use crate::types::Grid;

/// Fourth-order centered periodic first derivative. `Dᵀ = -D` exactly.
pub fn d1_fd(grid: &Grid) -> Result<BandedOperator> {
    if grid.n() < 8 {
        return Err(Error::GridTooSmall { n: grid.n(), min: 8 });
    }
    let dx = grid.dx();
    let c1 = 8.0 / (12.0 * dx);
    let c2 = 1.0 / (12.0 * dx);
    BandedOperator::circulant(grid.n(), &[c2, -c1, 0.0, c1, -c2])
}

/// Discrete symbol of [`d1_fd`]: `D e^{ikx} = i k_fd e^{ikx}` with
/// `k_fd = (8 sin(k dx) - sin(2 k dx)) / (6 dx)`.
pub fn fd_wavenumber(k: f64, dx: f64) -> f64 {
    (8.0 * (k * dx).sin() - (2.0 * k * dx).sin()) / (6.0 * dx)
}
