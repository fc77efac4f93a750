//! Classical RK4 with CFL step control and blow-up monitors.
//!
//! A run stops early when either of the two blow-up alternatives is observed
//! on the discrete solution: the `X^s` norm exceeds its threshold, or the
//! depth drops below `h0`.

use crate::diagnostics::{self, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::gn_rhs::{nonlinear_rhs_with, Tendency};
use crate::model::Model;
use crate::t_operator::assemble_t;
use crate::types::State;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
}

impl StepControl {
    pub fn new(cfl: f64, dt_max: f64, t_end: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "cfl",
                value: cfl,
                range: "(0, 1]",
            });
        }
        if !(dt_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "dt_max",
                value: dt_max,
                range: "(0, inf)",
            });
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                value: t_end,
                range: "[0, inf)",
            });
        }
        Ok(Self { cfl, dt_max, t_end })
    }

    /// `steps` uniform steps of `t_end / steps` (the CFL bound must not bind).
    pub fn uniform(t_end: f64, steps: usize) -> Self {
        Self {
            cfl: 1.0,
            dt_max: t_end / steps as f64,
            t_end,
        }
    }
}

/// `min(dt_max, cfl dx / max(ε|u| + sqrt(h)))`.
pub fn cfl_dt(model: &Model, state: &State, control: &StepControl) -> f64 {
    let eps = model.params().epsilon();
    let h = model.depth(state);
    let speed = state
        .u
        .iter()
        .zip(&h.h)
        .map(|(u, hv)| eps * u.abs() + hv.max(0.0).sqrt())
        .fold(0.0, f64::max);
    let dt = control.cfl * model.grid().dx() / speed;
    dt.min(control.dt_max)
}

fn tendency(model: &Model, state: &State) -> Result<Tendency> {
    let h = model.depth(state);
    let op = assemble_t(&h, model)?;
    nonlinear_rhs_with(model, state, &h, &op)
}

/// One classical RK4 step. `𝔗` is reassembled at every stage.
pub fn rk4_step(model: &Model, state: &State, dt: f64) -> Result<State> {
    rk4_generic(state, dt, |s| tendency(model, s))
}

pub(crate) fn rk4_generic(state: &State, dt: f64, mut f: impl FnMut(&State) -> Result<Tendency>) -> Result<State> {
    let t0 = state.time;
    let k1 = f(state)?;
    let mut s2 = state.axpy(0.5 * dt, &k1.dzeta, &k1.du);
    s2.time = t0 + 0.5 * dt;
    let k2 = f(&s2)?;
    let mut s3 = state.axpy(0.5 * dt, &k2.dzeta, &k2.du);
    s3.time = t0 + 0.5 * dt;
    let k3 = f(&s3)?;
    let mut s4 = state.axpy(dt, &k3.dzeta, &k3.du);
    s4.time = t0 + dt;
    let k4 = f(&s4)?;

    let combine = |a: &[f64], k1: &[f64], k2: &[f64], k3: &[f64], k4: &[f64]| -> Vec<f64> {
        (0..a.len())
            .map(|i| a[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    };
    Ok(State {
        zeta: combine(&state.zeta, &k1.dzeta, &k2.dzeta, &k3.dzeta, &k4.dzeta),
        u: combine(&state.u, &k1.du, &k2.du, &k3.du, &k4.du),
        time: t0 + dt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowupNorm,
    BlowupDepth,
    SolverFailure,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowupNorm => "blowup_norm",
            RunStatus::BlowupDepth => "blowup_depth",
            RunStatus::SolverFailure => "solver_failure",
        }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::DepthViolation { .. } => RunStatus::BlowupDepth,
            Error::NonFinite(_) => RunStatus::BlowupNorm,
            _ => RunStatus::SolverFailure,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Last accepted state.
    pub final_state: State,
    pub history: Vec<DiagnosticRecord>,
    pub steps: usize,
    /// Minimum depth over every accepted state, including the initial one.
    pub min_h: f64,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitors {
    /// Sobolev index of the `X^s` monitor and the diagnostic norms.
    pub s: f64,
    /// Absolute `X^s` threshold; `None` means 10³ × the initial norm.
    pub xs_threshold: Option<f64>,
    /// Emit a record every this many steps (0 disables periodic emission).
    pub emit_every: usize,
}

impl Default for Monitors {
    fn default() -> Self {
        Self {
            s: diagnostics::DEFAULT_S,
            xs_threshold: None,
            emit_every: 10,
        }
    }
}

pub const DEFAULT_XS_FACTOR: f64 = 1e3;

/// Receives diagnostics and snapshots while a run progresses.
pub trait RunSink {
    fn record(&mut self, _record: &DiagnosticRecord) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _step: usize, _state: &State) -> Result<()> {
        Ok(())
    }
}

pub struct NullSink;

impl RunSink for NullSink {}

/// Integrates from `initial` to `control.t_end`. Deterministic given inputs.
pub fn run(
    model: &Model,
    initial: &State,
    control: &StepControl,
    monitors: &Monitors,
    sink: &mut dyn RunSink,
) -> Result<RunOutcome> {
    model.check_state(initial)?;
    let h0 = model.params().h0();
    let xs0 = diagnostics::xs_norm(model, initial, monitors.s);
    let threshold = monitors.xs_threshold.unwrap_or(DEFAULT_XS_FACTOR * xs0);

    let mut outcome = RunOutcome {
        status: RunStatus::Completed,
        final_state: initial.clone(),
        history: Vec::new(),
        steps: 0,
        min_h: model.depth(initial).min().0,
        message: None,
    };

    let (min0, idx0) = model.depth(initial).min();
    if !(min0 >= h0) {
        outcome.status = RunStatus::BlowupDepth;
        outcome.message = Some(format!("initial min h = {min0} at index {idx0} below h0 = {h0}"));
        return Ok(outcome);
    }
    if !(xs0 <= threshold) {
        outcome.status = RunStatus::BlowupNorm;
        outcome.message = Some(format!("initial X^s norm {xs0} exceeds threshold {threshold}"));
        return Ok(outcome);
    }

    emit(model, initial, 0, monitors, sink, &mut outcome.history)?;
    let mut state = initial.clone();
    let t_end = control.t_end;
    let mut last_emitted = 0;
    while state.time < t_end {
        let mut dt = cfl_dt(model, &state, control);
        let remaining = t_end - state.time;
        if dt >= remaining || remaining - dt < 1e-12 * t_end.max(1.0) {
            dt = remaining;
        }
        let next = match rk4_step(model, &state, dt) {
            Ok(mut s) => {
                if dt == remaining {
                    s.time = t_end;
                }
                s
            }
            Err(e) => {
                outcome.status = RunStatus::from_error(&e);
                outcome.message = Some(e.to_string());
                break;
            }
        };
        let (min_h, idx) = model.depth(&next).min();
        if !(min_h >= h0) {
            outcome.min_h = outcome.min_h.min(min_h);
            outcome.status = RunStatus::BlowupDepth;
            outcome.message = Some(format!("min h = {min_h} at index {idx} below h0 = {h0} at t = {}", next.time));
            break;
        }
        let xs = diagnostics::xs_norm(model, &next, monitors.s);
        if !(xs <= threshold) {
            outcome.status = RunStatus::BlowupNorm;
            outcome.message = Some(format!("X^s norm {xs} exceeds threshold {threshold} at t = {}", next.time));
            break;
        }
        outcome.min_h = outcome.min_h.min(min_h);
        outcome.steps += 1;
        state = next;
        if monitors.emit_every > 0 && outcome.steps.is_multiple_of(monitors.emit_every) {
            emit(model, &state, outcome.steps, monitors, sink, &mut outcome.history)?;
            last_emitted = outcome.steps;
        }
    }
    if outcome.steps != last_emitted {
        emit(model, &state, outcome.steps, monitors, sink, &mut outcome.history)?;
    }
    outcome.final_state = state;
    Ok(outcome)
}

fn emit(
    model: &Model,
    state: &State,
    step: usize,
    monitors: &Monitors,
    sink: &mut dyn RunSink,
    history: &mut Vec<DiagnosticRecord>,
) -> Result<()> {
    let rec = diagnostics::record(model, state, monitors.s)?;
    sink.record(&rec)?;
    sink.snapshot(step, state)?;
    history.push(rec);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::bar_bathymetry;
    use crate::types::{Bathymetry, Grid, Parameters};
    use std::f64::consts::PI;

    fn bar_model(n: usize) -> Model {
        let grid = Grid::new(n, 20.0).unwrap();
        let params = Parameters::new(0.5, 0.5, 0.3).unwrap();
        let bathy = bar_bathymetry(0.6, 1.5, 10.0, &grid, &params).unwrap();
        Model::new(grid, params, bathy).unwrap()
    }

    #[test]
    fn rest_dt() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let model = Model::flat(grid, Parameters::new(0.5, 0.5, 0.5).unwrap()).unwrap();
        let c = StepControl::new(0.5, 1e9, 1.0).unwrap();
        let dt = cfl_dt(&model, &State::rest(64), &c);
        assert!((dt - 0.5 * grid.dx()).abs() < 1e-16);
        let fine = Model::flat(Grid::new(128, 2.0 * PI).unwrap(), *model.params()).unwrap();
        let dt2 = cfl_dt(&fine, &State::rest(128), &c);
        assert!((dt / dt2 - 2.0).abs() < 1e-14);
        let capped = StepControl::new(0.5, 1e-3, 1.0).unwrap();
        assert_eq!(cfl_dt(&model, &State::rest(64), &capped), 1e-3);
    }

    #[test]
    fn dt_shrinks_with_velocity() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let model = Model::flat(grid, Parameters::new(0.5, 0.5, 0.5).unwrap()).unwrap();
        let c = StepControl::new(0.5, 1e9, 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for amp in [0.0, 0.5, 1.0, 2.0, 4.0] {
            let s = State::new(vec![0.0; 64], vec![amp; 64], 0.0).unwrap();
            let dt = cfl_dt(&model, &s, &c);
            assert!(dt < prev || amp == 0.0);
            prev = dt;
        }
    }

    #[test]
    fn invalid_cfl() {
        assert!(StepControl::new(0.0, 1.0, 1.0).is_err());
        assert!(StepControl::new(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn lake_at_rest_step() {
        let model = bar_model(128);
        let s = rk4_step(&model, &State::rest(128), 0.05).unwrap();
        assert!(s.zeta.iter().chain(&s.u).all(|v| v.abs() <= 1e-14));
    }

    #[test]
    fn reversibility_probe() {
        // one step forward then back: local error is O(dt^5)
        let grid = Grid::new(128, 2.0 * PI).unwrap();
        let model = Model::flat(grid, Parameters::new(0.3, 0.5, 0.3).unwrap()).unwrap();
        let s0 = State::new(grid.sample(|x| 0.3 * x.cos()), grid.sample(|x| 0.2 * x.sin()), 0.0).unwrap();
        let err = |dt: f64| {
            let fwd = rk4_step(&model, &s0, dt).unwrap();
            let back = rk4_step(&model, &fwd, -dt).unwrap();
            back.zeta
                .iter()
                .zip(&s0.zeta)
                .chain(back.u.iter().zip(&s0.u))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.1), err(0.05));
        assert!(e1 < 1e-5);
        let order = (e1 / e2).log2();
        assert!(order > 4.5, "order {order}");
    }

    #[test]
    fn initial_depth_violation() {
        let model = bar_model(64);
        let s = State::new(vec![-3.0; 64], vec![0.0; 64], 0.0).unwrap();
        let c = StepControl::new(0.5, 1.0, 1.0).unwrap();
        let out = run(&model, &s, &c, &Monitors::default(), &mut NullSink).unwrap();
        assert_eq!(out.status, RunStatus::BlowupDepth);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn norm_threshold_below_initial() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let model = Model::flat(grid, Parameters::new(0.2, 0.5, 0.3).unwrap()).unwrap();
        let s = State::new(grid.sample(f64::cos), vec![0.0; 64], 0.0).unwrap();
        let c = StepControl::new(0.5, 1.0, 1.0).unwrap();
        let m = Monitors {
            xs_threshold: Some(1e-3),
            ..Monitors::default()
        };
        let out = run(&model, &s, &c, &m, &mut NullSink).unwrap();
        assert_eq!(out.status, RunStatus::BlowupNorm);
    }

    #[test]
    fn run_reaches_t_end_exactly() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let model = Model::new(grid, Parameters::new(0.2, 0.5, 0.3).unwrap(), Bathymetry::flat(64)).unwrap();
        let s = State::new(grid.sample(|x| 0.1 * x.cos()), vec![0.0; 64], 0.0).unwrap();
        let c = StepControl::new(0.5, 1.0, 0.37).unwrap();
        let out = run(&model, &s, &c, &Monitors::default(), &mut NullSink).unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.final_state.time, 0.37);
        assert_eq!(out.history.last().unwrap().t, 0.37);
        let again = run(&model, &s, &c, &Monitors::default(), &mut NullSink).unwrap();
        assert_eq!(again.final_state, out.final_state);
    }

    #[test]
    fn min_h_tracks_accepted_states() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let model = Model::flat(grid, Parameters::new(0.5, 0.5, 0.3).unwrap()).unwrap();
        let s = State::new(grid.sample(|x| 0.4 * x.cos()), vec![0.0; 64], 0.0).unwrap();
        let c = StepControl::new(0.5, 1.0, 1.0).unwrap();
        let m = Monitors {
            emit_every: 1,
            ..Monitors::default()
        };
        let out = run(&model, &s, &c, &m, &mut NullSink).unwrap();
        let from_history = out.history.iter().map(|r| r.min_h).fold(f64::INFINITY, f64::min);
        assert_eq!(out.min_h, from_history);
    }
}
