//! The elliptic operator `𝔗 = h + μ h 𝒯[h, εb]`.
//!
//! Assembled in factored form
//!
//! ```text
//! 𝔗 = diag(h) + μ T1ᵀ diag(h) T1 + μ T2ᵀ diag(h) T2
//! T1 = diag(h/√3) D - diag(√3 ε b_x / 2),   T2 = diag(ε b_x / 2)
//! ```
//!
//! with `D` the banded fourth-order derivative. The matrix is symmetric bit
//! for bit and positive definite whenever `h > 0`, and `(𝔗u, u)` is the
//! quadratic form `a(u, u)` used for coercivity.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid_ops::{inner_product, BandedOperator, PeriodicCholesky};
use crate::model::Model;
use crate::types::{DepthField, Parameters};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// The two factors `T1` (banded) and `T2` (diagonal).
#[derive(Debug, Clone)]
pub struct FactorOps {
    pub t1: BandedOperator,
    pub t2: Vec<f64>,
}

impl FactorOps {
    pub fn new(model: &Model, h: &DepthField) -> Self {
        let eps = model.params().epsilon();
        let b_x = &model.bathymetry().b_x;
        let scale: Vec<f64> = h.h.iter().map(|v| v / SQRT3).collect();
        let shift: Vec<f64> = b_x.iter().map(|v| -SQRT3 * eps * v / 2.0).collect();
        let t1 = model.d1_fd().scale_rows(&scale).add_diagonal(&shift);
        let t2 = b_x.iter().map(|v| eps * v / 2.0).collect();
        Self { t1, t2 }
    }

    pub fn apply_t1(&self, u: &[f64]) -> Vec<f64> {
        self.t1.apply(u)
    }

    pub fn apply_t2(&self, u: &[f64]) -> Vec<f64> {
        self.t2.iter().zip(u).map(|(a, b)| a * b).collect()
    }
}

#[derive(Debug, Clone)]
pub struct TOperator {
    matrix: BandedOperator,
    factor: PeriodicCholesky,
    d1: BandedOperator,
    h_ref: DepthField,
    params_ref: Parameters,
}

/// Assembles and factors `𝔗` for depth `h` over the model's bottom.
pub fn assemble_t(h: &DepthField, model: &Model) -> Result<TOperator> {
    let params = *model.params();
    model.grid().check_len(&h.h)?;
    h.require(&params)?;
    let matrix = assemble_matrix(h, model)?;
    let factor = PeriodicCholesky::factor(&matrix).map_err(|e| Error::NotPositiveDefinite {
        row: e.row,
        pivot: e.pivot,
        min_h: h.min().0,
    })?;
    Ok(TOperator {
        matrix,
        factor,
        d1: model.d1_fd().clone(),
        h_ref: h.clone(),
        params_ref: params,
    })
}

/// The symmetric banded matrix alone, without the depth check or factorization.
pub fn assemble_matrix(h: &DepthField, model: &Model) -> Result<BandedOperator> {
    let mu = model.params().mu();
    let ops = FactorOps::new(model, h);
    let g1 = ops.t1.weighted_gram(&h.h)?;
    let t2_diag: Vec<f64> = ops
        .t2
        .iter()
        .zip(&h.h)
        .map(|(t, hv)| (t * t) * hv)
        .collect();
    Ok(g1
        .combine(mu, &BandedOperator::diagonal(&t2_diag), mu)?
        .add_diagonal(&h.h))
}

impl TOperator {
    pub fn matrix(&self) -> &BandedOperator {
        &self.matrix
    }

    pub fn h_ref(&self) -> &DepthField {
        &self.h_ref
    }

    pub fn params_ref(&self) -> &Parameters {
        &self.params_ref
    }

    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.matrix.apply(w)
    }

    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        self.factor.solve(f)
    }

    /// `𝔗⁻¹ D g` with the banded derivative.
    pub fn solve_dx(&self, g: &[f64]) -> Vec<f64> {
        self.solve(&self.d1.apply(g))
    }
}

pub fn apply_t(op: &TOperator, w: &[f64]) -> Vec<f64> {
    op.apply(w)
}

pub fn solve_t(op: &TOperator, f: &[f64]) -> Vec<f64> {
    op.solve(f)
}

pub fn solve_t_dx(op: &TOperator, g: &[f64]) -> Vec<f64> {
    op.solve_dx(g)
}

/// Lower bound `h0 / max(1, 18 / h0^2)` on `a(v,v) / |v|_*^2`.
pub fn coercivity_bound(h0: f64) -> f64 {
    h0 / f64::max(1.0, 18.0 / (h0 * h0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityReport {
    pub min_ratio: f64,
    pub bound: f64,
    pub trials: usize,
    pub violations: usize,
}

impl CoercivityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// `a(v,v) / |v|_*^2` with `|v|_*^2 = |v|_2^2 + μ |Dv|_2^2`.
pub fn coercivity_ratio(op: &TOperator, model: &Model, v: &[f64]) -> f64 {
    let grid = model.grid();
    let a = inner_product(&op.apply(v), v, grid);
    let dv = model.d1_fd().apply(v);
    let star = inner_product(v, v, grid) + op.params_ref.mu() * inner_product(&dv, &dv, grid);
    a / star
}

/// Samples the coercivity ratio over seeded random fields, mixing white
/// noise, smooth random fields and single Fourier modes.
pub fn coercivity_report(op: &TOperator, model: &Model, trials: usize, seed: u64) -> CoercivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = coercivity_bound(op.params_ref.h0());
    let mut min_ratio = f64::INFINITY;
    let mut violations = 0;
    for t in 0..trials {
        let v = random_field(model, &mut rng, t % 3);
        let r = coercivity_ratio(op, model, &v);
        if !(r >= bound) {
            violations += 1;
        }
        min_ratio = min_ratio.min(r);
    }
    CoercivityReport {
        min_ratio,
        bound,
        trials,
        violations,
    }
}

/// Seeded test field: `kind` 0 is white noise, 1 a random trigonometric sum
/// over low modes, 2 a single mode of random wavenumber and phase.
pub(crate) fn random_field(model: &Model, rng: &mut ChaCha8Rng, kind: usize) -> Vec<f64> {
    let grid = model.grid();
    let n = grid.n();
    let base = 2.0 * std::f64::consts::PI / grid.length();
    match kind {
        0 => (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        1 => {
            let modes = (n / 8).max(2);
            let terms: Vec<(f64, f64, f64)> = (1..=modes)
                .map(|m| {
                    let amp = rng.gen_range(-1.0..1.0) / m as f64;
                    (m as f64 * base, amp, rng.gen_range(0.0..6.3))
                })
                .collect();
            let offset = rng.gen_range(-1.0..1.0);
            grid.sample(|x| {
                offset
                    + terms
                        .iter()
                        .map(|(k, a, ph)| a * (k * x + ph).cos())
                        .sum::<f64>()
            })
        }
        _ => {
            let m = rng.gen_range(0..=n / 2) as f64;
            let ph = rng.gen_range(0.0..6.3);
            grid.sample(|x| (m * base * x + ph).cos())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundSample {
    pub state: usize,
    pub epsilon: f64,
    pub mu: f64,
    /// `(|𝔗⁻¹f|_{H^s} + √μ |D𝔗⁻¹f|_{H^s}) / |f|_{H^s}`, maximized.
    pub r1: f64,
    /// `√μ |𝔗⁻¹Dg|_{H^s} / |g|_{H^s}`, maximized.
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub samples: Vec<BoundSample>,
    pub max_r1: f64,
    pub max_r2: f64,
    /// Largest over states of (max / min) of r1 across the parameter grid.
    pub spread_r1: f64,
    pub spread_r2: f64,
}

/// Options for [`inverse_bound_sweep`].
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub s: f64,
    pub random_trials: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            s: 0.0,
            random_trials: 12,
            power_iterations: 40,
            seed: 7,
        }
    }
}

/// Measures the inverse-operator constants for each state over each
/// `(epsilon, mu)` pair. Candidate test functions are seeded random fields
/// plus the leading right singular vectors found by power iteration, so the
/// reported maxima approach the discrete operator norms from below.
///
/// `states` pairs a depth field with the model (grid and bottom) it lives on;
/// the model's own parameters are replaced by each sweep point, with `h0`
/// set to the state's minimum depth.
pub fn inverse_bound_sweep(
    states: &[(DepthField, Model)],
    params_grid: &[(f64, f64)],
    opts: SweepOptions,
) -> Result<BoundReport> {
    let mut samples = Vec::new();
    let mut spread_r1: f64 = 1.0;
    let mut spread_r2: f64 = 1.0;
    for (idx, (h, base)) in states.iter().enumerate() {
        let h0 = h.min().0;
        let (mut lo1, mut hi1, mut lo2, mut hi2) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
        for &(eps, mu) in params_grid {
            let model = base.with_params(Parameters::new(eps, mu, h0)?);
            let op = assemble_t(h, &model)?;
            let (r1, r2) = measure_bounds(&op, &model, opts);
            lo1 = lo1.min(r1);
            hi1 = hi1.max(r1);
            lo2 = lo2.min(r2);
            hi2 = hi2.max(r2);
            samples.push(BoundSample {
                state: idx,
                epsilon: eps,
                mu,
                r1,
                r2,
            });
        }
        spread_r1 = spread_r1.max(hi1 / lo1);
        spread_r2 = spread_r2.max(hi2 / lo2);
    }
    let max_r1 = samples.iter().map(|s| s.r1).fold(0.0, f64::max);
    let max_r2 = samples.iter().map(|s| s.r2).fold(0.0, f64::max);
    Ok(BoundReport {
        samples,
        max_r1,
        max_r2,
        spread_r1,
        spread_r2,
    })
}

struct BoundOps<'a> {
    op: &'a TOperator,
    model: &'a Model,
    s: f64,
    sqrt_mu: f64,
}

impl BoundOps<'_> {
    fn hs(&self, f: &[f64]) -> f64 {
        let g = self.model.grid();
        self.model.spectral().hs_norm_sq(f, self.s, g.dx()).sqrt()
    }

    fn r1(&self, f: &[f64]) -> f64 {
        let w = self.op.solve(f);
        let dw = self.model.d1_fd().apply(&w);
        (self.hs(&w) + self.sqrt_mu * self.hs(&dw)) / self.hs(f)
    }

    fn r2(&self, g: &[f64]) -> f64 {
        let w = self.op.solve_dx(g);
        self.sqrt_mu * self.hs(&w) / self.hs(g)
    }

    fn lam(&self, f: &[f64], s: f64) -> Vec<f64> {
        self.model.spectral().lambda_s(f, s)
    }

    // In the variable v = Λ^s f each map is an L2 operator M = Λ^s X Λ^{-s};
    // its adjoint Λ^{-s} Xᵀ Λ^s uses 𝔗ᵀ = 𝔗 and Dᵀ = -D.
    fn conjugated(&self, v: &[f64], adjoint: bool, x: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
        let (pre, post) = if adjoint { (self.s, -self.s) } else { (-self.s, self.s) };
        self.lam(&x(&self.lam(v, pre)), post)
    }

    fn inv(&self, v: &[f64], adjoint: bool) -> Vec<f64> {
        self.conjugated(v, adjoint, |f| self.op.solve(f))
    }

    fn d_inv(&self, v: &[f64], adjoint: bool) -> Vec<f64> {
        let d = self.model.d1_fd();
        if adjoint {
            self.conjugated(v, true, |f| {
                let w: Vec<f64> = d.apply(f).iter().map(|x| -x).collect();
                self.op.solve(&w)
            })
        } else {
            self.conjugated(v, false, |f| d.apply(&self.op.solve(f)))
        }
    }

    fn inv_d(&self, v: &[f64], adjoint: bool) -> Vec<f64> {
        let d = self.model.d1_fd();
        if adjoint {
            self.conjugated(v, true, |f| d.apply(&self.op.solve(f)).iter().map(|x| -x).collect())
        } else {
            self.conjugated(v, false, |f| self.op.solve(&d.apply(f)))
        }
    }

    /// Leading right singular vector of `M`, returned as `f = Λ^{-s} v`.
    fn power(&self, start: Vec<f64>, iters: usize, m: impl Fn(&[f64], bool) -> Vec<f64>) -> Vec<f64> {
        let g = self.model.grid();
        let mut v = start;
        for _ in 0..iters {
            let w = m(&m(&v, false), true);
            let norm = crate::grid_ops::l2_norm(&w, g);
            if !(norm > 0.0) {
                break;
            }
            v = w.iter().map(|x| x / norm).collect();
        }
        self.lam(&v, -self.s)
    }
}

fn measure_bounds(op: &TOperator, model: &Model, opts: SweepOptions) -> (f64, f64) {
    let ops = BoundOps {
        op,
        model,
        s: opts.s,
        sqrt_mu: op.params_ref.mu().sqrt(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut candidates: Vec<Vec<f64>> = (0..opts.random_trials)
        .map(|t| random_field(model, &mut rng, t % 3))
        .collect();
    let start: Vec<f64> = random_field(model, &mut rng, 0);
    candidates.push(ops.power(start.clone(), opts.power_iterations, |v, a| ops.inv(v, a)));
    candidates.push(ops.power(start.clone(), opts.power_iterations, |v, a| ops.d_inv(v, a)));
    candidates.push(ops.power(start, opts.power_iterations, |v, a| ops.inv_d(v, a)));

    let mut r1: f64 = 0.0;
    let mut r2: f64 = 0.0;
    for f in &candidates {
        if ops.hs(f) == 0.0 {
            continue;
        }
        r1 = r1.max(ops.r1(f));
        r2 = r2.max(ops.r2(f));
    }
    (r1, r2)
}
