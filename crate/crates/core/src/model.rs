use crate::error::{Error, Result};
use crate::grid_ops::{d1_fd, BandedOperator, Spectral};
use crate::types::{depth_from_zeta, Bathymetry, DepthField, Grid, Parameters, State};

/// Everything fixed for the duration of a run: mesh, parameters, bottom and
/// the derivative operators built from them.
#[derive(Debug, Clone)]
pub struct Model {
    grid: Grid,
    params: Parameters,
    bathy: Bathymetry,
    spectral: Spectral,
    d1: BandedOperator,
    dealias: bool,
}

impl Model {
    pub fn new(grid: Grid, params: Parameters, bathy: Bathymetry) -> Result<Self> {
        if bathy.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                actual: bathy.len(),
            });
        }
        Ok(Self {
            spectral: Spectral::new(&grid),
            d1: d1_fd(&grid)?,
            grid,
            params,
            bathy,
            dealias: false,
        })
    }

    pub fn flat(grid: Grid, params: Parameters) -> Result<Self> {
        Self::new(grid, params, Bathymetry::flat(grid.n()))
    }

    /// Enables 2/3-rule filtering of the nonlinear tendency.
    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    /// Same grid and bottom with different parameters.
    pub fn with_params(&self, params: Parameters) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &Parameters {
        &self.params
    }

    pub fn bathymetry(&self) -> &Bathymetry {
        &self.bathy
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// The banded fourth-order first derivative.
    pub fn d1_fd(&self) -> &BandedOperator {
        &self.d1
    }

    pub fn dealias(&self) -> bool {
        self.dealias
    }

    pub fn depth(&self, state: &State) -> DepthField {
        depth_from_zeta(&state.zeta, &self.bathy, &self.params)
    }

    pub(crate) fn check_state(&self, state: &State) -> Result<()> {
        self.grid.check_len(&state.zeta)?;
        self.grid.check_len(&state.u)
    }
}
