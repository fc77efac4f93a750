//! Initial conditions and bottoms with known behaviour.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::types::{Bathymetry, DepthField, Grid, Parameters, State};

/// Seam tolerance for the solitary-wave tail.
pub const SEAM_TOL: f64 = 1e-12;

/// Signed distance from `x0` to `x` wrapped to `[-L/2, L/2)`.
fn wrapped(x: f64, x0: f64, length: f64) -> f64 {
    (x - x0 + 0.5 * length).rem_euclid(length) - 0.5 * length
}

/// Speed and inverse width of the flat-bottom solitary wave of amplitude `a`:
/// `c = sqrt(1 + εa)`, `κ = sqrt(3εa / (4μ(1 + εa)))`.
pub fn solitary_parameters(a: f64, params: &Parameters) -> (f64, f64) {
    let ea = params.epsilon() * a;
    let c = (1.0 + ea).sqrt();
    let kappa = (3.0 * ea / (4.0 * params.mu() * (1.0 + ea))).sqrt();
    (c, kappa)
}

/// Classical Serre solitary wave over a flat bottom,
/// `ζ = a sech²(κ(x - x0))`, `u = c ζ / (1 + εζ)`.
pub fn solitary_wave(a: f64, params: &Parameters, grid: &Grid, x0: f64) -> Result<State> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            value: a,
            range: "[0, inf)",
        });
    }
    let eps = params.epsilon();
    let (c, kappa) = solitary_parameters(a, params);
    let sech2 = |y: f64| {
        let s = 1.0 / y.cosh();
        s * s
    };
    let tail = a * sech2(kappa * 0.5 * grid.length());
    if tail > SEAM_TOL {
        return Err(Error::DomainTooShort { tail, tol: SEAM_TOL });
    }
    let zeta = grid.sample(|x| a * sech2(kappa * wrapped(x, x0, grid.length())));
    let u = zeta.iter().map(|z| c * z / (1.0 + eps * z)).collect();
    State::new(zeta, u, 0.0)
}

/// Gaussian elevation at rest, `ζ = a exp(-((x - x0)/width)²)`.
pub fn gaussian_hump(a: f64, width: f64, x0: f64, grid: &Grid) -> Result<State> {
    check_width(width, grid)?;
    let zeta = grid.sample(|x| {
        let d = wrapped(x, x0, grid.length()) / width;
        a * (-d * d).exp()
    });
    State::new(zeta, vec![0.0; grid.n()], 0.0)
}

/// Gaussian submerged bar `b = height exp(-((x - x0)/width)²)` with exact
/// derivatives. Fails if the still-water depth `1 - ε b` drops below `h0`.
pub fn bar_bathymetry(height: f64, width: f64, x0: f64, grid: &Grid, params: &Parameters) -> Result<Bathymetry> {
    check_width(width, grid)?;
    let len = grid.length();
    let w2 = width * width;
    let g = move |x: f64| {
        let d = wrapped(x, x0, len);
        (d, height * (-d * d / w2).exp())
    };
    let bathy = Bathymetry::from_analytic(
        grid,
        |x| g(x).1,
        |x| {
            let (d, v) = g(x);
            -2.0 * d / w2 * v
        },
        |x| {
            let (d, v) = g(x);
            (4.0 * d * d / (w2 * w2) - 2.0 / w2) * v
        },
    );
    let rest = DepthField {
        h: bathy.b.iter().map(|b| 1.0 - params.epsilon() * b).collect(),
    };
    rest.require(params)?;
    Ok(bathy)
}

/// Gaussians are treated as periodic; the value at half a period away must
/// be negligible.
fn check_width(width: f64, grid: &Grid) -> Result<()> {
    let half = 0.5 * grid.length() / width;
    if !(width > 0.0) || (-half * half).exp() > SEAM_TOL {
        return Err(Error::InvalidParameter {
            name: "width",
            value: width,
            range: "(0, L / 10.5]",
        });
    }
    Ok(())
}

/// Named, CLI-addressable scenario.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub n: usize,
    pub length: f64,
    pub t_end: f64,
    pub epsilon: f64,
    pub mu: f64,
    pub expected: &'static str,
    /// Whether runs of this scenario filter the tendency by default.
    pub dealias: bool,
}

/// Overridable shape parameters for [`Scenario::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeOptions {
    pub amplitude: f64,
    pub width: f64,
    pub bar_height: f64,
    pub bar_width: f64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            width: 2.0,
            bar_height: 0.5,
            bar_width: 3.0,
        }
    }
}

pub const SCENARIOS: &[Scenario] = &[
    Scenario {
        name: "solitary",
        description: "flat-bottom solitary wave",
        n: 512,
        length: 80.0,
        t_end: 20.0,
        epsilon: 0.2,
        mu: 0.5,
        expected: "translates at c = sqrt(1 + eps a) with its shape preserved",
        dealias: true,
    },
    Scenario {
        name: "hump",
        description: "Gaussian hump released from rest, flat bottom",
        n: 512,
        length: 80.0,
        t_end: 10.0,
        epsilon: 0.2,
        mu: 0.5,
        expected: "splits into mirror-image left and right-going waves",
        dealias: true,
    },
    Scenario {
        name: "lake_at_rest",
        description: "still water over a submerged bar",
        n: 256,
        length: 40.0,
        t_end: 10.0,
        epsilon: 0.5,
        mu: 0.5,
        expected: "stays exactly at rest",
        dealias: false,
    },
    Scenario {
        name: "solitary_over_bar",
        description: "solitary wave running onto a submerged bar",
        n: 512,
        length: 80.0,
        t_end: 20.0,
        epsilon: 0.2,
        mu: 0.5,
        expected: "partial reflection and a dispersive tail behind the bar",
        dealias: true,
    },
];

impl Scenario {
    pub fn find(name: &str) -> Result<&'static Scenario> {
        SCENARIOS
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    /// Builds bottom and initial state on `grid`.
    pub fn build(&self, grid: &Grid, params: &Parameters, shape: &ShapeOptions) -> Result<(Bathymetry, State)> {
        let len = grid.length();
        match self.name {
            "solitary" => Ok((
                Bathymetry::flat(grid.n()),
                solitary_wave(shape.amplitude, params, grid, 0.25 * len)?,
            )),
            "hump" => Ok((
                Bathymetry::flat(grid.n()),
                gaussian_hump(shape.amplitude, shape.width, 0.5 * len, grid)?,
            )),
            "lake_at_rest" => Ok((
                bar_bathymetry(shape.bar_height, shape.bar_width, 0.5 * len, grid, params)?,
                State::rest(grid.n()),
            )),
            "solitary_over_bar" => Ok((
                bar_bathymetry(shape.bar_height, shape.bar_width, 0.6 * len, grid, params)?,
                solitary_wave(shape.amplitude, params, grid, 0.25 * len)?,
            )),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

/// `2π / L`, the fundamental wavenumber of the grid.
pub fn fundamental_wavenumber(grid: &Grid) -> f64 {
    2.0 * PI / grid.length()
}
