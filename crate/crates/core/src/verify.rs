//! Property checks run by `gn1d verify` and the acceptance suite.
//!
//! Every check is deterministic given its seed and reports the measured
//! value next to the required one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{conserved_energy, equivalence_report};
use crate::error::Result;
use crate::gn_rhs::{nonlinear_rhs, q1_apply, q2_eval, q_total, quasilinear_rhs, Frozen};
use crate::grid_ops::{inner_product, Spectral};
use crate::linearized::Mollifier;
use crate::model::Model;
use crate::t_operator::{assemble_t, coercivity_report, inverse_bound_sweep, SweepOptions};
use crate::types::{Bathymetry, DepthField, Grid, Parameters, State};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub measured: String,
    pub required: String,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: &'static str, measured: String, required: impl Into<String>, passed: bool) -> Self {
        Self {
            name,
            measured,
            required: required.into(),
            passed,
        }
    }

    fn failed(name: &'static str, required: impl Into<String>, err: &crate::error::Error) -> Self {
        Self::new(name, format!("error: {err}"), required, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Negative control: the coercivity check is handed a depth field that
    /// violates the depth condition.
    pub violate_depth: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            violate_depth: false,
        }
    }
}

/// Relative discrete 2-norm distance `|a - b| / |b|`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Smooth periodic bottom with a few low modes, amplitude `amp`.
pub fn bumpy_bathymetry(grid: &Grid, amp: f64) -> Bathymetry {
    let k = 2.0 * std::f64::consts::PI / grid.length();
    Bathymetry::from_analytic(
        grid,
        |x| amp * ((k * x).cos() + 0.5 * (2.0 * k * x + 0.4).sin()),
        |x| amp * (-k * (k * x).sin() + k * (2.0 * k * x + 0.4).cos()),
        |x| amp * (-k * k * (k * x).cos() - 2.0 * k * k * (2.0 * k * x + 0.4).sin()),
    )
}

/// Random trigonometric sum over modes `1..=modes` with `1/m` decay.
pub fn random_smooth(grid: &Grid, rng: &mut ChaCha8Rng, modes: usize, amp: f64) -> Vec<f64> {
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let terms: Vec<(f64, f64, f64)> = (1..=modes)
        .map(|m| {
            (
                m as f64 * base,
                amp * rng.gen_range(-1.0..1.0) / m as f64,
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    grid.sample(|x| terms.iter().map(|(k, a, p)| a * (k * x + p).cos()).sum())
}

fn random_state(model: &Model, rng: &mut ChaCha8Rng, modes: usize, amp: f64) -> State {
    let g = model.grid();
    State {
        zeta: random_smooth(g, rng, modes, amp),
        u: random_smooth(g, rng, modes, amp),
        time: 0.0,
    }
}

/// A random depth field with minimum slightly above `h0`.
fn random_depth(grid: &Grid, rng: &mut ChaCha8Rng, h0: f64) -> DepthField {
    let raw = random_smooth(grid, rng, 6, 1.0);
    let lo = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = rng.gen_range(0.0..2.0);
    let hi = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { spread / (hi - lo) } else { 0.0 };
    DepthField {
        h: raw.iter().map(|r| h0 * (1.0 + 1e-9 + scale * (r - lo))).collect(),
    }
}

pub const COERCIVITY_VALUES: [f64; 3] = [0.1, 0.5, 1.0];

/// Coercivity on a bumpy bottom across the `(ε, μ, h0)` grid.
/// `states_per_point` depth fields are drawn per grid point and each is
/// probed with `probes` random vectors.
pub fn check_coercivity(opts: &VerifyOptions, states_per_point: usize, probes: usize) -> CheckResult {
    const NAME: &str = "coercivity";
    let required = "a(v,v)/|v|_*^2 >= h0/max(1, 18/h0^2), 0 violations";
    let run = || -> Result<(f64, usize, usize)> {
        let grid = Grid::new(128, 2.0 * std::f64::consts::PI)?;
        let bathy = bumpy_bathymetry(&grid, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut worst = f64::INFINITY;
        let mut violations = 0;
        let mut states = 0;
        for &eps in &COERCIVITY_VALUES {
            for &mu in &COERCIVITY_VALUES {
                for &h0 in &COERCIVITY_VALUES {
                    let model = Model::new(grid, Parameters::new(eps, mu, h0)?, bathy.clone())?;
                    for _ in 0..states_per_point {
                        let mut h = random_depth(&grid, &mut rng, h0);
                        if opts.violate_depth {
                            h.h[0] = 0.5 * h0;
                        }
                        let op = assemble_t(&h, &model)?;
                        let rep = coercivity_report(&op, &model, probes, rng.gen());
                        worst = worst.min(rep.min_ratio / rep.bound);
                        violations += rep.violations;
                        states += 1;
                    }
                }
            }
        }
        Ok((worst, violations, states))
    };
    match run() {
        Ok((worst, violations, states)) => CheckResult::new(
            NAME,
            format!("{states} states, min ratio/bound {worst:.4}, {violations} violations"),
            required,
            violations == 0,
        ),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

/// Exact symmetry, solve residual and `solve(apply(v))` round trip.
pub fn check_operator_exactness(opts: &VerifyOptions, pairs: usize) -> CheckResult {
    const NAME: &str = "operator exactness";
    let required = "symmetric bit-exactly, residual <= 1e-12, round trip <= 1e-12";
    let run = || -> Result<(bool, f64, f64)> {
        let grid = Grid::new(128, 2.0 * std::f64::consts::PI)?;
        let model = Model::new(grid, Parameters::new(0.7, 0.6, 0.2)?, bumpy_bathymetry(&grid, 0.3))?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
        let (mut sym, mut res, mut trip) = (true, 0.0f64, 0.0f64);
        for _ in 0..pairs {
            let state = random_state(&model, &mut rng, 8, 0.3);
            let op = assemble_t(&model.depth(&state), &model)?;
            sym &= op.matrix().is_exactly_symmetric();
            let f: Vec<f64> = (0..grid.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = op.solve(&f);
            res = res.max(rel_err(&op.apply(&w), &f));
            trip = trip.max(rel_err(&op.solve(&op.apply(&f)), &f));
        }
        Ok((sym, res, trip))
    };
    match run() {
        Ok((sym, res, trip)) => CheckResult::new(
            NAME,
            format!("symmetric {sym}, residual {res:.2e}, round trip {trip:.2e}"),
            required,
            sym && res <= 1e-12 && trip <= 1e-12,
        ),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

pub const MU_SWEEP: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

/// Inverse-operator constants across `μ ∈ {1e-4, ..., 1}` and `ε ∈ {0.1, 0.5, 1}`.
pub fn check_inverse_bounds(opts: &VerifyOptions, s: f64) -> CheckResult {
    const NAME: &str = "mu-uniform inverse bounds";
    let required = "spread of each constant across the sweep <= 10";
    let run = || -> Result<(f64, f64, f64, f64)> {
        let grid = Grid::new(512, 2.0 * std::f64::consts::PI)?;
        let bathy = bumpy_bathymetry(&grid, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(2));
        let base = Model::new(grid, Parameters::new(0.5, 0.5, 0.1)?, bathy)?;
        let states: Vec<(DepthField, Model)> = (0..2)
            .map(|_| (random_depth(&grid, &mut rng, 0.3), base.clone()))
            .collect();
        let params: Vec<(f64, f64)> = COERCIVITY_VALUES
            .iter()
            .flat_map(|&e| MU_SWEEP.iter().map(move |&m| (e, m)))
            .collect();
        let rep = inverse_bound_sweep(
            &states,
            &params,
            SweepOptions {
                s,
                seed: opts.seed,
                ..SweepOptions::default()
            },
        )?;
        Ok((rep.spread_r1, rep.spread_r2, rep.max_r1, rep.max_r2))
    };
    match run() {
        Ok((s1, s2, m1, m2)) => CheckResult::new(
            NAME,
            format!("spread {s1:.3} / {s2:.3}, max constants {m1:.3} / {m2:.3}"),
            required,
            s1 <= 10.0 && s2 <= 10.0,
        ),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

fn bumpy_model(n: usize, eps: f64, mu: f64) -> Result<Model> {
    let grid = Grid::new(n, 2.0 * std::f64::consts::PI)?;
    Model::new(grid, Parameters::new(eps, mu, 0.1)?, bumpy_bathymetry(&grid, 0.3))
}

/// Direct and quasilinear tendencies agree.
pub fn check_formulation_equivalence(opts: &VerifyOptions, states: usize) -> CheckResult {
    const NAME: &str = "formulation equivalence";
    let required = "relative difference <= 1e-9";
    let run = || -> Result<f64> {
        let model = bumpy_model(128, 0.7, 0.6)?;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(3));
        let mut worst: f64 = 0.0;
        for _ in 0..states {
            let s = random_state(&model, &mut rng, 6, 0.3);
            let direct = nonlinear_rhs(&model, &s)?;
            let quasi = quasilinear_rhs(&model, &s)?;
            let a: Vec<f64> = direct.dzeta.iter().chain(&direct.du).copied().collect();
            let b: Vec<f64> = quasi.dzeta.iter().chain(&quasi.du).copied().collect();
            worst = worst.max(rel_err(&b, &a));
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => CheckResult::new(NAME, format!("{w:.2e}"), required, w <= 1e-9),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

/// `Q1[U] u_x + q2(U) = εμ h Q[h, εb](u)`.
pub fn check_decomposition(opts: &VerifyOptions, states: usize) -> CheckResult {
    const NAME: &str = "decomposition identity";
    let required = "relative difference <= 1e-10";
    let run = || -> Result<f64> {
        let model = bumpy_model(128, 0.7, 0.6)?;
        let em = model.params().epsilon() * model.params().mu();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(4));
        let mut worst: f64 = 0.0;
        for _ in 0..states {
            let s = random_state(&model, &mut rng, 6, 0.3);
            let frozen = Frozen::new(&model, &s)?;
            let ux = model.spectral().d1(&s.u);
            let lhs: Vec<f64> = q1_apply(&model, &frozen, &ux)
                .iter()
                .zip(q2_eval(&model, &frozen))
                .map(|(a, b)| a + b)
                .collect();
            let q = q_total(&model, &frozen.h, &s.u);
            let rhs: Vec<f64> = q.iter().zip(&frozen.h.h).map(|(qv, hv)| em * hv * qv).collect();
            worst = worst.max(rel_err(&lhs, &rhs));
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => CheckResult::new(NAME, format!("{w:.2e}"), required, w <= 1e-10),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

/// Factored energy equals `|ζ|² + (𝔗u, u)` with the assembled operator.
pub fn check_energy_identity(opts: &VerifyOptions, states: usize) -> CheckResult {
    const NAME: &str = "energy identity";
    let required = "relative difference <= 1e-12";
    let run = || -> Result<f64> {
        let model = bumpy_model(128, 0.7, 0.6)?;
        let g = *model.grid();
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(5));
        let mut worst: f64 = 0.0;
        for _ in 0..states {
            let s = random_state(&model, &mut rng, 8, 0.3);
            let op = assemble_t(&model.depth(&s), &model)?;
            let direct = inner_product(&s.zeta, &s.zeta, &g) + inner_product(&op.apply(&s.u), &s.u, &g);
            let e = conserved_energy(&model, &s);
            worst = worst.max((e - direct).abs() / direct);
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => CheckResult::new(NAME, format!("{w:.2e}"), required, w <= 1e-12),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

/// Deterministic profiles for the `L∞` bound of the mollifier: smooth bumps,
/// a sine, a tent and a square wave.
pub fn mollifier_corpus(grid: &Grid) -> Vec<Vec<f64>> {
    let l = grid.length();
    let c = 0.5 * l;
    vec![
        grid.sample(|x| (-((x - c) / (0.05 * l)).powi(2)).exp()),
        grid.sample(|x| (std::f64::consts::TAU * x / l).sin()),
        grid.sample(|x| 1.0 / ((x - c) / (0.03 * l)).cosh().powi(2)),
        grid.sample(|x| (0.2 * l - (x - c).abs()).max(0.0)),
        grid.sample(|x| if (x - c).abs() < 0.125 * l { 1.0 } else { 0.0 }),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierMeasures {
    pub self_adjoint: f64,
    pub commutes_exactly: bool,
    pub commutation_two_pass: f64,
    pub linf_constant: f64,
}

/// Self-adjointness, commutation with `Λ^s` and the `L∞` constant over
/// `δ k_max ∈ {2, 4, 8, 16}`.
pub fn mollifier_measures(seed: u64) -> Result<MollifierMeasures> {
    let grid = Grid::new(256, 40.0)?;
    let sp = Spectral::new(&grid);
    let kmax = std::f64::consts::PI / grid.dx();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let corpus = mollifier_corpus(&grid);
    let mut m = MollifierMeasures {
        self_adjoint: 0.0,
        commutes_exactly: true,
        commutation_two_pass: 0.0,
        linf_constant: 0.0,
    };
    let lam: Vec<f64> = sp.wavenumbers().iter().map(|k| 1.0 + k * k).collect();
    for scale in [2.0, 4.0, 8.0, 16.0] {
        let j = Mollifier::new(scale / kmax, &sp)?;
        for _ in 0..10 {
            let f: Vec<f64> = (0..grid.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..grid.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let a = inner_product(&j.mollify(&sp, &f), &g, &grid);
            let b = inner_product(&f, &j.mollify(&sp, &g), &grid);
            let scale = inner_product(&f, &f, &grid).sqrt() * inner_product(&g, &g, &grid).sqrt();
            m.self_adjoint = m.self_adjoint.max((a - b).abs() / scale);
            let two = sp.lambda_s(&j.mollify(&sp, &f), 2.0);
            let other = j.mollify(&sp, &sp.lambda_s(&f, 2.0));
            m.commutation_two_pass = m.commutation_two_pass.max(rel_err(&two, &other));
        }
        // in a single transform the two orders are the same products
        let jl: Vec<f64> = j.symbol().iter().zip(&lam).map(|(p, l)| p * l).collect();
        let lj: Vec<f64> = lam.iter().zip(j.symbol()).map(|(l, p)| l * p).collect();
        m.commutes_exactly &= jl.iter().zip(&lj).all(|(x, y)| x.to_bits() == y.to_bits());
        m.linf_constant = m.linf_constant.max(j.linf_constant(&sp, &corpus));
    }
    Ok(m)
}

pub fn check_mollifier(opts: &VerifyOptions) -> CheckResult {
    const NAME: &str = "mollifier properties";
    let required = "self-adjoint <= 1e-13, commutes exactly, Linf constant <= 1.1";
    match mollifier_measures(opts.seed.wrapping_add(6)) {
        Ok(m) => CheckResult::new(
            NAME,
            format!(
                "self-adjoint {:.2e}, exact {}, two-pass {:.2e}, Linf {:.4}",
                m.self_adjoint, m.commutes_exactly, m.commutation_two_pass, m.linf_constant
            ),
            required,
            m.self_adjoint <= 1e-13 && m.commutes_exactly && m.linf_constant <= 1.1,
        ),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

/// Band-limited random state, modes up to `k_max / 4`.
fn band_limited_state(model: &Model, rng: &mut ChaCha8Rng) -> State {
    let modes = model.grid().n() / 8;
    random_state(model, rng, modes, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceSweep {
    pub spread_upper: f64,
    pub spread_lower: f64,
    pub max_upper: f64,
    pub max_lower: f64,
}

/// Ratios `E^s / |U|_{X^s}` and their inverses over the `(μ, ε)` sweep.
pub fn equivalence_sweep(seed: u64, samples: usize, s: f64) -> Result<EquivalenceSweep> {
    let grid = Grid::new(256, 2.0 * std::f64::consts::PI)?;
    let bathy = bumpy_bathymetry(&grid, 0.3);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = Model::new(grid, Parameters::new(0.5, 0.5, 0.1)?, bathy)?;
    let states: Vec<State> = (0..samples).map(|_| band_limited_state(&base, &mut rng)).collect();
    let ubar = random_state(&base, &mut rng, 4, 0.2);
    let (mut lo_u, mut hi_u, mut lo_l, mut hi_l) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for &eps in &COERCIVITY_VALUES {
        for &mu in &MU_SWEEP {
            let model = base.with_params(Parameters::new(eps, mu, 0.1)?);
            let h0 = model.depth(&ubar).min().0;
            let model = model.with_params(Parameters::new(eps, mu, h0)?);
            let rep = equivalence_report(&model, &states, s, &ubar)?;
            lo_u = lo_u.min(rep.max_upper_ratio);
            hi_u = hi_u.max(rep.max_upper_ratio);
            lo_l = lo_l.min(rep.max_lower_ratio);
            hi_l = hi_l.max(rep.max_lower_ratio);
        }
    }
    Ok(EquivalenceSweep {
        spread_upper: hi_u / lo_u,
        spread_lower: hi_l / lo_l,
        max_upper: hi_u,
        max_lower: hi_l,
    })
}

pub fn check_norm_equivalence(opts: &VerifyOptions, samples: usize) -> CheckResult {
    const NAME: &str = "norm equivalence";
    let required = "spread of each ratio across the sweep <= 10";
    match equivalence_sweep(opts.seed.wrapping_add(7), samples, crate::diagnostics::DEFAULT_S) {
        Ok(r) => CheckResult::new(
            NAME,
            format!(
                "spread {:.3} / {:.3}, max ratios {:.3} / {:.3}",
                r.spread_upper, r.spread_lower, r.max_upper, r.max_lower
            ),
            required,
            r.spread_upper <= 10.0 && r.spread_lower <= 10.0,
        ),
        Err(e) => CheckResult::failed(NAME, required, &e),
    }
}

/// The full property suite.
pub fn verify_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    vec![
        check_coercivity(opts, 4, 10),
        check_operator_exactness(opts, 100),
        check_inverse_bounds(opts, 0.0),
        check_formulation_equivalence(opts, 100),
        check_decomposition(opts, 100),
        check_energy_identity(opts, 50),
        check_mollifier(opts),
        check_norm_equivalence(opts, 20),
    ]
}

/// One line per check: `PASS|FAIL  name  measured  (required)`.
pub fn format_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        out.push_str(&format!(
            "{}  {:<width$}  {}  (required: {})\n",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.required,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_control_fails() {
        let opts = VerifyOptions {
            violate_depth: true,
            ..VerifyOptions::default()
        };
        let r = check_coercivity(&opts, 1, 1);
        assert!(!r.passed);
        assert!(r.measured.contains("depth"), "{}", r.measured);
    }

    #[test]
    fn rel_err_zero_reference() {
        assert_eq!(rel_err(&[0.0, 0.0], &[0.0, 0.0]), 0.0);
        assert!((rel_err(&[1.0, 0.0], &[2.0, 0.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_depth_respects_floor() {
        let g = Grid::new(64, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let h = random_depth(&g, &mut rng, 0.5);
            assert!(h.min().0 > 0.5);
        }
    }
}
