//! Linear problem about a frozen reference trajectory, the Picard iteration
//! built on it, and the mollified variant.

use crate::diagnostics::{self, es_norm_with};
use crate::error::{Error, Result};
use crate::gn_rhs::{apply_a, eval_b, Frozen, Tendency};
use crate::grid_ops::Spectral;
use crate::model::Model;
use crate::t_operator::assemble_t;
use crate::time_integrator::{cfl_dt, rk4_generic, rk4_step, StepControl};
use crate::types::State;

/// Smooth step: 1 on `[0, 1]`, 0 on `[2, inf)`, monotone in between, built
/// from the `exp(-1/x)` partition.
pub fn phi(r: f64) -> f64 {
    let r = r.abs();
    if r <= 1.0 {
        return 1.0;
    }
    if r >= 2.0 {
        return 0.0;
    }
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let a = g(2.0 - r);
    a / (a + g(r - 1.0))
}

/// Fourier multiplier `J^δ = φ(δ|D|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollifier {
    delta: f64,
    symbol: Vec<f64>,
}

impl Mollifier {
    pub fn new(delta: f64, spectral: &Spectral) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: delta,
                range: "(0, inf)",
            });
        }
        let symbol = spectral.wavenumbers().iter().map(|k| phi(delta * k)).collect();
        Ok(Self { delta, symbol })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    pub fn mollify(&self, spectral: &Spectral, f: &[f64]) -> Vec<f64> {
        spectral.apply_symbol(f, &self.symbol)
    }

    /// Per-slot symbol of `J^δ Λ^s` (equivalently `Λ^s J^δ`).
    pub fn with_lambda(&self, spectral: &Spectral, s: f64) -> Vec<f64> {
        self.symbol
            .iter()
            .zip(spectral.wavenumbers())
            .map(|(p, k)| p * (1.0 + k * k).powf(0.5 * s))
            .collect()
    }

    /// `max |J f|_∞ / |f|_∞` over a corpus.
    pub fn linf_constant(&self, spectral: &Spectral, corpus: &[Vec<f64>]) -> f64 {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        corpus
            .iter()
            .filter(|f| sup(f) > 0.0)
            .map(|f| sup(&self.mollify(spectral, f)) / sup(f))
            .fold(0.0, f64::max)
    }
}

/// Snapshots `Ū(t_j)` on a uniform time grid, linearly interpolated.
#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    snapshots: Vec<State>,
    t0: f64,
    dt: f64,
}

impl ReferenceTrajectory {
    /// Snapshot `j` must sit at `t0 + j dt` (to within rounding).
    pub fn new(snapshots: Vec<State>) -> Result<Self> {
        if snapshots.len() < 2 {
            return Err(Error::InvalidParameter {
                name: "snapshots",
                value: snapshots.len() as f64,
                range: "[2, inf)",
            });
        }
        let t0 = snapshots[0].time;
        let dt = (snapshots[snapshots.len() - 1].time - t0) / (snapshots.len() - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter {
                name: "snapshot spacing",
                value: dt,
                range: "(0, inf)",
            });
        }
        for (j, s) in snapshots.iter().enumerate() {
            let expected = t0 + j as f64 * dt;
            if (s.time - expected).abs() > 1e-9 * dt {
                return Err(Error::InvalidParameter {
                    name: "snapshot time",
                    value: s.time,
                    range: "uniform spacing",
                });
            }
            if s.len() != snapshots[0].len() {
                return Err(Error::LengthMismatch {
                    expected: snapshots[0].len(),
                    actual: s.len(),
                });
            }
        }
        Ok(Self { snapshots, t0, dt })
    }

    /// `Ū(t) = U0` for every `t`, sampled at `steps + 1` points on `[0, t_end]`.
    pub fn constant(state: &State, t_end: f64, steps: usize) -> Result<Self> {
        let snaps = (0..=steps)
            .map(|j| State {
                time: state.time + t_end * j as f64 / steps as f64,
                ..state.clone()
            })
            .collect();
        Self::new(snaps)
    }

    /// Nonlinear RK4 solution from `initial` with `steps` uniform steps.
    pub fn from_nonlinear(model: &Model, initial: &State, t_end: f64, steps: usize) -> Result<Self> {
        let dt = t_end / steps as f64;
        let mut snaps = Vec::with_capacity(steps + 1);
        snaps.push(initial.clone());
        for j in 0..steps {
            let mut next = rk4_step(model, &snaps[j], dt)?;
            next.time = initial.time + (j + 1) as f64 * dt;
            snaps.push(next);
        }
        Self::new(snaps)
    }

    pub fn snapshots(&self) -> &[State] {
        &self.snapshots
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t0 + (self.snapshots.len() - 1) as f64 * self.dt
    }

    pub fn last(&self) -> &State {
        &self.snapshots[self.snapshots.len() - 1]
    }

    pub fn at(&self, t: f64) -> Result<State> {
        let (start, end) = (self.start(), self.end());
        let slack = 1e-12 * self.dt;
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutsideWindow { t, start, end });
        }
        let pos = ((t - start) / self.dt).clamp(0.0, (self.snapshots.len() - 1) as f64);
        let j = (pos.floor() as usize).min(self.snapshots.len() - 2);
        let w = pos - j as f64;
        let (a, b) = (&self.snapshots[j], &self.snapshots[j + 1]);
        if w == 0.0 {
            return Ok(State { time: t, ..a.clone() });
        }
        let lerp = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p + w * (q - p)).collect() };
        Ok(State {
            zeta: lerp(&a.zeta, &b.zeta),
            u: lerp(&a.u, &b.u),
            time: t,
        })
    }
}

/// How the linear system is driven.
#[derive(Debug, Clone, Default)]
pub struct LinearOptions {
    pub mollifier: Option<Mollifier>,
    /// Drops `B(Ū)` to give the homogeneous flow.
    pub homogeneous: bool,
}

fn linear_rhs_frozen(model: &Model, frozen: &Frozen, state: &State, opts: &LinearOptions) -> Result<Tendency> {
    let sp = model.spectral();
    let mut dz = sp.d1(&state.zeta);
    let mut du = sp.d1(&state.u);
    if let Some(m) = &opts.mollifier {
        dz = m.mollify(sp, &dz);
        du = m.mollify(sp, &du);
    }
    let (mut a1, mut a2) = apply_a(model, frozen, &dz, &du);
    if let Some(m) = &opts.mollifier {
        a1 = m.mollify(sp, &a1);
        a2 = m.mollify(sp, &a2);
    }
    let mut t = Tendency {
        dzeta: a1.iter().map(|v| -v).collect(),
        du: a2.iter().map(|v| -v).collect(),
    };
    if !opts.homogeneous {
        let (b1, b2) = eval_b(model, frozen);
        for i in 0..b1.len() {
            t.dzeta[i] -= b1[i];
            t.du[i] -= b2[i];
        }
    }
    if model.dealias() {
        t.dzeta = sp.dealias_two_thirds(&t.dzeta);
        t.du = sp.dealias_two_thirds(&t.du);
    }
    if !t.is_finite() {
        return Err(Error::NonFinite("linear tendency"));
    }
    Ok(t)
}

/// `-A[Ū(t)] ∂x U - B(Ū(t))`.
pub fn linear_rhs(model: &Model, reference: &ReferenceTrajectory, t: f64, state: &State) -> Result<Tendency> {
    linear_rhs_with(model, reference, t, state, &LinearOptions::default())
}

/// [`linear_rhs`] with a mollifier, `-J A[Ū] J ∂x U - B(Ū)`, or without `B`.
pub fn linear_rhs_with(
    model: &Model,
    reference: &ReferenceTrajectory,
    t: f64,
    state: &State,
    opts: &LinearOptions,
) -> Result<Tendency> {
    model.check_state(state)?;
    let frozen = Frozen::new(model, &reference.at(t)?)?;
    linear_rhs_frozen(model, &frozen, state, opts)
}

/// Uniform step for a linear solve on `[t0, t0 + t_end]`: the CFL step of
/// the initial reference state, then shortened so it divides the window.
pub fn linear_steps(model: &Model, reference: &ReferenceTrajectory, control: &StepControl) -> usize {
    let dt = cfl_dt(model, &reference.snapshots()[0], control);
    ((control.t_end / dt).ceil() as usize).max(1)
}

/// RK4 for `∂t U = -J A[Ū] J ∂x U - B(Ū)` on uniform steps. Returns the
/// solution sampled at every step.
pub fn solve_linear(
    model: &Model,
    reference: &ReferenceTrajectory,
    initial: &State,
    control: &StepControl,
    opts: &LinearOptions,
) -> Result<ReferenceTrajectory> {
    let steps = linear_steps(model, reference, control);
    solve_linear_steps(model, reference, initial, control.t_end, steps, opts)
}

pub fn solve_linear_steps(
    model: &Model,
    reference: &ReferenceTrajectory,
    initial: &State,
    t_end: f64,
    steps: usize,
    opts: &LinearOptions,
) -> Result<ReferenceTrajectory> {
    model.check_state(initial)?;
    let dt = t_end / steps as f64;
    let t0 = initial.time;
    let mut snaps = Vec::with_capacity(steps + 1);
    snaps.push(initial.clone());
    for j in 0..steps {
        let mut next = rk4_generic(&snaps[j], dt, |s| linear_rhs_with(model, reference, s.time, s, opts))?;
        next.time = t0 + (j + 1) as f64 * dt;
        snaps.push(next);
    }
    ReferenceTrajectory::new(snaps)
}

#[derive(Debug, Clone)]
pub struct PicardReport {
    /// `sup_t E^s(U^{k+1} - U^k)` for each completed iteration.
    pub gaps: Vec<f64>,
    pub converged: bool,
    pub last: ReferenceTrajectory,
}

impl PicardReport {
    pub fn iterations(&self) -> usize {
        self.gaps.len()
    }

    /// `gap[k+1] / gap[k]`.
    pub fn ratios(&self) -> Vec<f64> {
        self.gaps.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// `sup_j E^s(a_j - b_j)` with the symmetrizer frozen at `sym_j`.
pub fn trajectory_gap(
    model: &Model,
    a: &ReferenceTrajectory,
    b: &ReferenceTrajectory,
    sym: &ReferenceTrajectory,
    s: f64,
) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for (j, (x, y)) in a.snapshots().iter().zip(b.snapshots()).enumerate() {
        let op = assemble_t(&model.depth(&sym.snapshots()[j]), model)?;
        sup = sup.max(es_norm_with(model, &x.diff(y), s, &op));
    }
    Ok(sup)
}

/// Picard scheme: `U^0(t) = U0`, `U^{k+1}` solves the linear problem frozen
/// at `U^k` with data `U0`. Stops when the gap drops to `tol`.
pub fn picard_solve(
    model: &Model,
    initial: &State,
    control: &StepControl,
    max_iters: usize,
    tol: f64,
) -> Result<PicardReport> {
    let h = model.depth(initial);
    h.require(model.params())?;
    let probe = ReferenceTrajectory::constant(initial, control.t_end, 1)?;
    let steps = linear_steps(model, &probe, control);
    let mut current = ReferenceTrajectory::constant(initial, control.t_end, steps)?;
    let mut gaps = Vec::new();
    let opts = LinearOptions::default();
    for _ in 0..max_iters {
        let next = solve_linear_steps(model, &current, initial, control.t_end, steps, &opts)?;
        let gap = trajectory_gap(model, &next, &current, &current, diagnostics::DEFAULT_S)?;
        gaps.push(gap);
        current = next;
        if gap <= tol {
            return Ok(PicardReport {
                gaps,
                converged: true,
                last: current,
            });
        }
    }
    Ok(PicardReport {
        gaps,
        converged: false,
        last: current,
    })
}

/// `e^{ελt} E0 + ε ∫_0^t e^{ελ(t-t')} C dt'`.
pub fn envelope(t: f64, eps: f64, lambda: f64, c: f64, e0: f64) -> f64 {
    let growth = (eps * lambda * t).exp();
    let forcing = if lambda == 0.0 {
        eps * c * t
    } else {
        c * (growth - 1.0) / lambda
    };
    growth * e0 + forcing
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeFit {
    pub lambda: f64,
    pub c: f64,
    pub e0: f64,
    /// `(t, E^s(U(t)))`.
    pub samples: Vec<(f64, f64)>,
}

impl EnvelopeFit {
    pub fn holds(&self, eps: f64) -> bool {
        self.samples
            .iter()
            .all(|&(t, e)| e <= envelope(t, eps, self.lambda, self.c, self.e0) * (1.0 + 1e-12))
    }
}

/// Fits the energy envelope of a linear solution. `Ĉ = sup_t E^s(B(Ū))/ε`
/// and `λ̂` is the smallest real rate (possibly negative) for which the
/// envelope holds at every sample. `E^s` uses the symmetrizer frozen at
/// `Ū(t)`.
pub fn fit_envelope(
    model: &Model,
    reference: &ReferenceTrajectory,
    solution: &ReferenceTrajectory,
    s: f64,
) -> Result<EnvelopeFit> {
    let eps = model.params().epsilon();
    let mut samples = Vec::with_capacity(solution.snapshots().len());
    let mut c: f64 = 0.0;
    for u in solution.snapshots() {
        let frozen = Frozen::new(model, &reference.at(u.time)?)?;
        let (b1, b2) = eval_b(model, &frozen);
        let b = State::new(b1, b2, u.time)?;
        c = c.max(es_norm_with(model, &b, s, &frozen.op) / eps);
        samples.push((u.time - solution.start(), es_norm_with(model, u, s, &frozen.op)));
    }
    let e0 = samples[0].1;
    let mut fit = EnvelopeFit {
        lambda: 0.0,
        c,
        e0,
        samples,
    };
    // the envelope is increasing in λ, so bracket and bisect
    let holds_at = |fit: &mut EnvelopeFit, lambda: f64| {
        fit.lambda = lambda;
        fit.holds(eps)
    };
    let (mut lo, mut hi) = if holds_at(&mut fit, 0.0) { (-1.0, 0.0) } else { (0.0, 1.0) };
    while holds_at(&mut fit, lo) {
        hi = lo;
        lo *= 2.0;
        if lo < -1e12 {
            // data decays faster than any exponential we can resolve
            fit.lambda = lo;
            return Ok(fit);
        }
    }
    while !holds_at(&mut fit, hi) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::NonFinite("envelope rate"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if holds_at(&mut fit, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1e-300) {
            break;
        }
    }
    fit.lambda = hi;
    Ok(fit)
}

/// Solutions for each `δ` in `deltas` and the successive differences
/// `|U_δk(t_end) - U_δ(k+1)(t_end)|_{X^s}`.
pub fn delta_ladder(
    model: &Model,
    reference: &ReferenceTrajectory,
    initial: &State,
    control: &StepControl,
    deltas: &[f64],
) -> Result<Vec<f64>> {
    let steps = linear_steps(model, reference, control);
    let mut finals = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let opts = LinearOptions {
            mollifier: Some(Mollifier::new(d, model.spectral())?),
            homogeneous: false,
        };
        let sol = solve_linear_steps(model, reference, initial, control.t_end, steps, &opts)?;
        finals.push(sol.last().clone());
    }
    Ok(finals
        .windows(2)
        .map(|w| diagnostics::xs_norm(model, &w[0].diff(&w[1]), diagnostics::DEFAULT_S))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gn_rhs::nonlinear_rhs;
    use crate::types::{Bathymetry, Grid, Parameters};
    use std::f64::consts::PI;

    fn bumpy(n: usize) -> Model {
        let grid = Grid::new(n, 2.0 * PI).unwrap();
        let bathy = Bathymetry::from_analytic(&grid, |x| 0.2 * x.cos(), |x| -0.2 * x.sin(), |x| -0.2 * x.cos());
        Model::new(grid, Parameters::new(0.5, 0.5, 0.3).unwrap(), bathy).unwrap()
    }

    fn smooth_state(model: &Model, a: f64) -> State {
        let g = model.grid();
        State::new(g.sample(|x| a * (x + 0.3).cos()), g.sample(|x| a * (2.0 * x).sin()), 0.0).unwrap()
    }

    #[test]
    fn phi_profile() {
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(phi(1.0), 1.0);
        assert_eq!(phi(2.0), 0.0);
        assert_eq!(phi(5.0), 0.0);
        assert!((phi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=1000 {
            let v = phi(1.0 + i as f64 / 1000.0);
            assert!(v <= prev);
            prev = v;
        }
        assert_eq!(phi(-1.7), phi(1.7));
    }

    #[test]
    fn tiny_delta_is_identity() {
        let model = bumpy(64);
        let sp = model.spectral();
        let kmax = 32.0;
        let m = Mollifier::new(0.9 / kmax, sp).unwrap();
        let f = smooth_state(&model, 1.0).zeta;
        let jf = m.mollify(sp, &f);
        assert!(f.iter().zip(&jf).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn huge_delta_keeps_mean() {
        let model = bumpy(64);
        let sp = model.spectral();
        let m = Mollifier::new(2.0, sp).unwrap();
        let f: Vec<f64> = model.grid().sample(|x| 0.7 + x.sin() + 0.2 * (5.0 * x).cos());
        for v in m.mollify(sp, &f) {
            assert!((v - 0.7).abs() < 1e-14);
        }
    }

    #[test]
    fn trajectory_interpolation() {
        let a = State::new(vec![0.0; 8], vec![1.0; 8], 0.0).unwrap();
        let b = State::new(vec![2.0; 8], vec![3.0; 8], 0.5).unwrap();
        let traj = ReferenceTrajectory::new(vec![a, b]).unwrap();
        let mid = traj.at(0.125).unwrap();
        assert!(mid.zeta.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert!(mid.u.iter().all(|&v| (v - 1.5).abs() < 1e-15));
        assert_eq!(traj.at(0.5).unwrap().zeta[0], 2.0);
        assert!(matches!(traj.at(0.6), Err(Error::OutsideWindow { .. })));
    }

    #[test]
    fn nonuniform_snapshots_rejected() {
        let s = |t| State::new(vec![0.0; 8], vec![0.0; 8], t).unwrap();
        assert!(ReferenceTrajectory::new(vec![s(0.0), s(0.1), s(0.3)]).is_err());
    }

    #[test]
    fn rest_reference_rest_state() {
        let model = bumpy(64);
        let traj = ReferenceTrajectory::constant(&State::rest(64), 1.0, 4).unwrap();
        let t = linear_rhs(&model, &traj, 0.3, &State::rest(64)).unwrap();
        assert!(t.dzeta.iter().chain(&t.du).all(|&v| v == 0.0));
    }

    #[test]
    fn self_reference_matches_nonlinear() {
        let model = bumpy(128);
        let s = smooth_state(&model, 0.4);
        let traj = ReferenceTrajectory::constant(&s, 1.0, 2).unwrap();
        let lin = linear_rhs(&model, &traj, 0.5, &s).unwrap();
        let nl = nonlinear_rhs(&model, &s).unwrap();
        let diff: f64 = lin
            .dzeta
            .iter()
            .zip(&nl.dzeta)
            .chain(lin.du.iter().zip(&nl.du))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = nl.dzeta.iter().chain(&nl.du).map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff <= 1e-9 * norm, "{diff} {norm}");
    }

    #[test]
    fn homogeneous_part_is_linear() {
        let model = bumpy(64);
        let ubar = smooth_state(&model, 0.3);
        let traj = ReferenceTrajectory::constant(&ubar, 1.0, 2).unwrap();
        let g = model.grid();
        let u1 = State::new(g.sample(|x| (3.0 * x).sin()), g.sample(f64::cos), 0.0).unwrap();
        let u2 = State::new(g.sample(|x| (x - 1.0).cos()), g.sample(|x| (2.0 * x).sin()), 0.0).unwrap();
        let (al, be) = (0.7, -1.3);
        let combo = State::new(
            u1.zeta.iter().zip(&u2.zeta).map(|(a, b)| al * a + be * b).collect(),
            u1.u.iter().zip(&u2.u).map(|(a, b)| al * a + be * b).collect(),
            0.0,
        )
        .unwrap();
        let opts = LinearOptions {
            homogeneous: true,
            ..Default::default()
        };
        let r = |s: &State| linear_rhs_with(&model, &traj, 0.2, s, &opts).unwrap();
        let (r1, r2, rc) = (r(&u1), r(&u2), r(&combo));
        for i in 0..64 {
            assert!((rc.dzeta[i] - (al * r1.dzeta[i] + be * r2.dzeta[i])).abs() < 1e-12);
            assert!((rc.du[i] - (al * r1.du[i] + be * r2.du[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_data_flat_rest_reference() {
        let grid = Grid::new(64, 2.0 * PI).unwrap();
        let model = Model::flat(grid, Parameters::new(0.5, 0.5, 0.3).unwrap()).unwrap();
        let traj = ReferenceTrajectory::constant(&State::rest(64), 0.5, 5).unwrap();
        let sol = solve_linear_steps(&model, &traj, &State::rest(64), 0.5, 5, &LinearOptions::default()).unwrap();
        assert!(sol.snapshots().iter().all(|s| s.zeta.iter().chain(&s.u).all(|&v| v == 0.0)));
    }

    #[test]
    fn picard_rest_is_fixed_point() {
        let model = bumpy(64);
        let c = StepControl::new(0.5, 0.05, 0.2).unwrap();
        let rep = picard_solve(&model, &State::rest(64), &c, 5, 1e-12).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations(), 1);
        assert_eq!(rep.gaps[0], 0.0);
    }

    #[test]
    fn envelope_closed_form() {
        assert_eq!(envelope(0.0, 0.5, 3.0, 2.0, 1.5), 1.5);
        let (eps, lam, c, e0, t) = (0.3, 0.8, 1.2, 2.0, 1.7);
        // trapezoid check of the forcing integral
        let n = 20000;
        let h = t / n as f64;
        let integral: f64 = (0..=n)
            .map(|i| {
                let tp = i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * (eps * lam * (t - tp)).exp() * c
            })
            .sum::<f64>()
            * h;
        let expected = (eps * lam * t).exp() * e0 + eps * integral;
        assert!((envelope(t, eps, lam, c, e0) - expected).abs() < 1e-8);
        assert!((envelope(t, eps, 0.0, c, e0) - (e0 + eps * c * t)).abs() < 1e-15);
    }
}
