//! Green-Naghdi tendencies.
//!
//! Two equivalent forms are provided. The direct form
//!
//! ```text
//! ζ_t = -∂x(hu)
//! u_t = -ε u u_x - 𝔗⁻¹(h ζ_x + εμ h Q[h,εb](u))
//! ```
//!
//! drives time integration. The quasilinear form `U_t = -(A[U] ∂x U + B(U))`
//! splits `εμ h Q = Q1[U] u_x + q2(U)` and is what the linearized solver
//! freezes. Derivatives here are spectral; only `𝔗` is banded.

use crate::error::{Error, Result};
use crate::model::Model;
use crate::t_operator::{assemble_t, TOperator};
use crate::types::{DepthField, State};

#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub dzeta: Vec<f64>,
    pub du: Vec<f64>,
}

impl Tendency {
    pub fn zeros(n: usize) -> Self {
        Self {
            dzeta: vec![0.0; n],
            du: vec![0.0; n],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.dzeta.iter().chain(&self.du).all(|v| v.is_finite())
    }
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

/// `Q[h,εb](u)`.
pub fn q_total(model: &Model, h: &DepthField, u: &[f64]) -> Vec<f64> {
    let sp = model.spectral();
    let eps = model.params().epsilon();
    let bathy = model.bathymetry();
    let h = &h.h;
    let u_x = sp.d1(u);
    let ux2: Vec<f64> = u_x.iter().map(|v| v * v).collect();

    let flux1: Vec<f64> = h.iter().zip(&ux2).map(|(hv, w)| hv * hv * hv * w).collect();
    let flux3: Vec<f64> = (0..u.len())
        .map(|i| h[i] * h[i] * u[i] * u[i] * bathy.b_xx[i])
        .collect();
    let d1 = sp.d1(&flux1);
    let d3 = sp.d1(&flux3);

    (0..u.len())
        .map(|i| {
            2.0 / (3.0 * h[i]) * d1[i]
                + eps * h[i] * ux2[i] * bathy.b_x[i]
                + eps / (2.0 * h[i]) * d3[i]
                + eps * eps * u[i] * u[i] * bathy.b_xx[i] * bathy.b_x[i]
        })
        .collect()
}

/// Coefficients of the quasilinear form frozen at a reference state `Ū`.
#[derive(Debug, Clone)]
pub struct Frozen {
    pub ubar: State,
    pub h: DepthField,
    pub u_x: Vec<f64>,
    pub op: TOperator,
}

impl Frozen {
    pub fn new(model: &Model, ubar: &State) -> Result<Self> {
        model.check_state(ubar)?;
        let h = model.depth(ubar);
        let op = assemble_t(&h, model)?;
        Ok(Self {
            u_x: model.spectral().d1(&ubar.u),
            ubar: ubar.clone(),
            h,
            op,
        })
    }
}

/// `Q1[Ū] f = (2/3)εμ ∂x(h̄³ ū_x f) + ε²μ h̄² b_x ū_x f + ε²μ h̄² b_xx ū f`.
pub fn q1_apply(model: &Model, frozen: &Frozen, f: &[f64]) -> Vec<f64> {
    let eps = model.params().epsilon();
    let mu = model.params().mu();
    let bathy = model.bathymetry();
    let h = &frozen.h.h;
    let ub = &frozen.ubar.u;
    let ubx = &frozen.u_x;
    let flux: Vec<f64> = (0..f.len())
        .map(|i| h[i] * h[i] * h[i] * ubx[i] * f[i])
        .collect();
    let dflux = model.spectral().d1(&flux);
    (0..f.len())
        .map(|i| {
            let h2 = h[i] * h[i];
            2.0 / 3.0 * eps * mu * dflux[i]
                + eps * eps * mu * h2 * bathy.b_x[i] * ubx[i] * f[i]
                + eps * eps * mu * h2 * bathy.b_xx[i] * ub[i] * f[i]
        })
        .collect()
}

/// `q2(Ū) = ε³μ h̄ b_xx b_x ū² + (1/2)ε²μ ∂x(h̄² b_xx) ū²`.
pub fn q2_eval(model: &Model, frozen: &Frozen) -> Vec<f64> {
    let eps = model.params().epsilon();
    let mu = model.params().mu();
    let bathy = model.bathymetry();
    let h = &frozen.h.h;
    let ub = &frozen.ubar.u;
    let h2bxx: Vec<f64> = h.iter().zip(&bathy.b_xx).map(|(hv, c)| hv * hv * c).collect();
    let d = model.spectral().d1(&h2bxx);
    (0..ub.len())
        .map(|i| {
            let u2 = ub[i] * ub[i];
            eps * eps * eps * mu * h[i] * bathy.b_xx[i] * bathy.b_x[i] * u2
                + 0.5 * eps * eps * mu * d[i] * u2
        })
        .collect()
}

/// Direct tendency of the nonlinear system. Assembles `𝔗(h)` from the
/// current depth.
pub fn nonlinear_rhs(model: &Model, state: &State) -> Result<Tendency> {
    model.check_state(state)?;
    let h = model.depth(state);
    let op = assemble_t(&h, model)?;
    nonlinear_rhs_with(model, state, &h, &op)
}

pub(crate) fn nonlinear_rhs_with(
    model: &Model,
    state: &State,
    h: &DepthField,
    op: &TOperator,
) -> Result<Tendency> {
    let sp = model.spectral();
    let eps = model.params().epsilon();
    let mu = model.params().mu();

    let hu = mul(&h.h, &state.u);
    let mut dzeta: Vec<f64> = sp.d1(&hu).iter().map(|v| -v).collect();

    let zeta_x = sp.d1(&state.zeta);
    let u_x = sp.d1(&state.u);
    let q = q_total(model, h, &state.u);
    let forcing: Vec<f64> = (0..hu.len())
        .map(|i| h.h[i] * zeta_x[i] + eps * mu * h.h[i] * q[i])
        .collect();
    let solved = op.solve(&forcing);
    let mut du: Vec<f64> = (0..hu.len())
        .map(|i| -eps * state.u[i] * u_x[i] - solved[i])
        .collect();

    if model.dealias() {
        dzeta = sp.dealias_two_thirds(&dzeta);
        du = sp.dealias_two_thirds(&du);
    }
    let tendency = Tendency { dzeta, du };
    if !tendency.is_finite() {
        return Err(Error::NonFinite("nonlinear tendency"));
    }
    Ok(tendency)
}

/// `A[Ū] (dζ, du)`:
///
/// ```text
/// row 1: ε ū dζ + h̄ du
/// row 2: 𝔗⁻¹(h̄ dζ) + ε ū du + 𝔗⁻¹ Q1[Ū] du
/// ```
pub fn apply_a(model: &Model, frozen: &Frozen, dzeta: &[f64], du: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let eps = model.params().epsilon();
    let h = &frozen.h.h;
    let ub = &frozen.ubar.u;
    let q1 = q1_apply(model, frozen, du);
    let top: Vec<f64> = (0..du.len()).map(|i| eps * ub[i] * dzeta[i] + h[i] * du[i]).collect();
    let rhs: Vec<f64> = (0..du.len()).map(|i| h[i] * dzeta[i] + q1[i]).collect();
    let solved = frozen.op.solve(&rhs);
    let bottom = (0..du.len()).map(|i| solved[i] + eps * ub[i] * du[i]).collect();
    (top, bottom)
}

/// `B(Ū) = (-ε b_x ū, 𝔗⁻¹ q2(Ū))`.
///
/// The first component carries a minus sign: with `h = 1 + ε(ζ - b)`,
/// `∂x(hu) = ε u ζ_x + h u_x - ε b_x u`, so this is the sign that makes the
/// quasilinear form reproduce the mass equation.
pub fn eval_b(model: &Model, frozen: &Frozen) -> (Vec<f64>, Vec<f64>) {
    let eps = model.params().epsilon();
    let b_x = &model.bathymetry().b_x;
    let top = b_x
        .iter()
        .zip(&frozen.ubar.u)
        .map(|(bx, u)| -eps * bx * u)
        .collect();
    (top, frozen.op.solve(&q2_eval(model, frozen)))
}

/// `-(A[U] ∂x U + B(U))`, the quasilinear form of the nonlinear tendency.
pub fn quasilinear_rhs(model: &Model, state: &State) -> Result<Tendency> {
    let frozen = Frozen::new(model, state)?;
    let sp = model.spectral();
    let (a1, a2) = apply_a(model, &frozen, &sp.d1(&state.zeta), &sp.d1(&state.u));
    let (b1, b2) = eval_b(model, &frozen);
    Ok(Tendency {
        dzeta: a1.iter().zip(&b1).map(|(a, b)| -(a + b)).collect(),
        du: a2.iter().zip(&b2).map(|(a, b)| -(a + b)).collect(),
    })
}
