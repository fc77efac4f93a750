//! Python bindings: grids, states, models and the main solver entry points.

use std::path::Path;

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use gn1d::cli_app::{prepare, RunConfig};
use gn1d::time_integrator::{self, Monitors, NullSink, StepControl};
use gn1d::verify::{verify_suite, VerifyOptions};

create_exception!(gn1d_py, SolverError, PyRuntimeError);

fn to_py(e: gn1d::Error) -> PyErr {
    if gn1d::cli_app::is_blowup(&e) {
        SolverError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

#[pyclass(name = "Grid", from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid(gn1d::Grid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(n: usize, length: f64) -> PyResult<Self> {
        gn1d::Grid::new(n, length).map(PyGrid).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.length()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.0.dx()
    }

    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn __repr__(&self) -> String {
        format!("Grid(n={}, length={})", self.0.n(), self.0.length())
    }
}

#[pyclass(name = "Parameters", from_py_object)]
#[derive(Clone, Copy)]
struct PyParameters(gn1d::Parameters);

#[pymethods]
impl PyParameters {
    #[new]
    fn new(epsilon: f64, mu: f64, h0: f64) -> PyResult<Self> {
        gn1d::Parameters::new(epsilon, mu, h0).map(PyParameters).map_err(to_py)
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn h0(&self) -> f64 {
        self.0.h0()
    }

    fn __repr__(&self) -> String {
        format!("Parameters(epsilon={}, mu={}, h0={})", self.0.epsilon(), self.0.mu(), self.0.h0())
    }
}

#[pyclass(name = "State", from_py_object)]
#[derive(Clone)]
struct PyState(gn1d::State);

#[pymethods]
impl PyState {
    #[new]
    #[pyo3(signature = (zeta, u, time = 0.0))]
    fn new(zeta: Vec<f64>, u: Vec<f64>, time: f64) -> PyResult<Self> {
        gn1d::State::new(zeta, u, time).map(PyState).map_err(to_py)
    }

    #[staticmethod]
    fn rest(n: usize) -> Self {
        PyState(gn1d::State::rest(n))
    }

    #[getter]
    fn zeta(&self) -> Vec<f64> {
        self.0.zeta.clone()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.0.u.clone()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.0.time
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyclass(name = "Model", from_py_object)]
#[derive(Clone)]
struct PyModel(gn1d::Model);

#[pymethods]
impl PyModel {
    /// Flat bottom unless all three of `b`, `b_x`, `b_xx` are given.
    #[new]
    #[pyo3(signature = (grid, params, b = None, b_x = None, b_xx = None, dealias = false))]
    fn new(
        grid: PyGrid,
        params: PyParameters,
        b: Option<Vec<f64>>,
        b_x: Option<Vec<f64>>,
        b_xx: Option<Vec<f64>>,
        dealias: bool,
    ) -> PyResult<Self> {
        let bathy = match (b, b_x, b_xx) {
            (None, None, None) => gn1d::Bathymetry::flat(grid.0.n()),
            (Some(b), Some(bx), Some(bxx)) => gn1d::Bathymetry::new(b, bx, bxx).map_err(to_py)?,
            _ => return Err(PyValueError::new_err("give all of b, b_x, b_xx or none")),
        };
        let model = gn1d::Model::new(grid.0, params.0, bathy).map_err(to_py)?;
        Ok(PyModel(model.with_dealiasing(dealias)))
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(*self.0.grid())
    }

    #[getter]
    fn params(&self) -> PyParameters {
        PyParameters(*self.0.params())
    }

    #[getter]
    fn bathymetry(&self) -> Vec<f64> {
        self.0.bathymetry().b.clone()
    }

    #[getter]
    fn dealias(&self) -> bool {
        self.0.dealias()
    }

    fn depth(&self, state: &PyState) -> Vec<f64> {
        self.0.depth(&state.0).h
    }
}

/// Model and initial state of a named scenario with its default settings.
#[pyfunction]
fn scenario(name: &str) -> PyResult<(PyModel, PyState)> {
    let cfg = RunConfig::for_scenario(name).map_err(to_py)?;
    let setup = prepare(&cfg, Path::new(".")).map_err(to_py)?;
    Ok((PyModel(setup.model), PyState(setup.initial)))
}

#[pyfunction]
fn scenario_names() -> Vec<&'static str> {
    gn1d::scenarios::SCENARIOS.iter().map(|s| s.name).collect()
}

/// Time derivative `(dζ/dt, du/dt)`.
#[pyfunction]
fn nonlinear_rhs(model: &PyModel, state: &PyState) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let t = gn1d::gn_rhs::nonlinear_rhs(&model.0, &state.0).map_err(to_py)?;
    Ok((t.dzeta, t.du))
}

#[pyfunction]
fn rk4_step(model: &PyModel, state: &PyState, dt: f64) -> PyResult<PyState> {
    time_integrator::rk4_step(&model.0, &state.0, dt).map(PyState).map_err(to_py)
}

/// Runs to `t_end`; returns `(status, steps, final_state, min_h)`.
#[pyfunction]
#[pyo3(signature = (model, state, t_end, cfl = 0.5, dt_max = f64::INFINITY))]
fn run(model: &PyModel, state: &PyState, t_end: f64, cfl: f64, dt_max: f64) -> PyResult<(String, usize, PyState, f64)> {
    let control = StepControl::new(cfl, dt_max, t_end).map_err(to_py)?;
    let monitors = Monitors {
        emit_every: 0,
        ..Monitors::default()
    };
    let out = time_integrator::run(&model.0, &state.0, &control, &monitors, &mut NullSink).map_err(to_py)?;
    Ok((out.status.as_str().to_string(), out.steps, PyState(out.final_state), out.min_h))
}

#[pyfunction]
fn conserved_energy(model: &PyModel, state: &PyState) -> f64 {
    gn1d::diagnostics::conserved_energy(&model.0, &state.0)
}

#[pyfunction]
fn mass(model: &PyModel, state: &PyState) -> f64 {
    gn1d::diagnostics::mass(&state.0, model.0.grid())
}

#[pyfunction]
#[pyo3(signature = (model, state, s = 2.0))]
fn xs_norm(model: &PyModel, state: &PyState, s: f64) -> f64 {
    gn1d::diagnostics::xs_norm(&model.0, &state.0, s)
}

/// Property-check suite; returns `(name, measured, passed)` per check.
#[pyfunction]
#[pyo3(signature = (seed = 1))]
fn verify(seed: u64) -> Vec<(String, String, bool)> {
    verify_suite(&VerifyOptions {
        seed,
        ..VerifyOptions::default()
    })
    .into_iter()
    .map(|r| (r.name.to_string(), r.measured, r.passed))
    .collect()
}

#[pymodule]
fn gn1d_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyParameters>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyModel>()?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add_function(wrap_pyfunction!(scenario, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_names, m)?)?;
    m.add_function(wrap_pyfunction!(nonlinear_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(rk4_step, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(conserved_energy, m)?)?;
    m.add_function(wrap_pyfunction!(mass, m)?)?;
    m.add_function(wrap_pyfunction!(xs_norm, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
