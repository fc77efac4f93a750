//! Norms and energies.

use crate::error::Result;
use crate::grid_ops::inner_product;
use crate::model::Model;
use crate::t_operator::{assemble_t, FactorOps, TOperator};
use crate::types::State;

/// Default Sobolev index for diagnostics.
pub const DEFAULT_S: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticRecord {
    pub t: f64,
    pub energy: f64,
    pub mass: f64,
    pub min_h: f64,
    pub xs_norm: f64,
    pub es_norm: f64,
}

/// `|ζ|² + (hu,u) + μ(h T1u, T1u) + μ(h T2u, T2u)`, which equals
/// `|ζ|² + (𝔗u, u)` for the assembled operator.
pub fn conserved_energy(model: &Model, state: &State) -> f64 {
    let grid = model.grid();
    let mu = model.params().mu();
    let h = model.depth(state);
    let ops = FactorOps::new(model, &h);
    let t1u = ops.apply_t1(&state.u);
    let t2u = ops.apply_t2(&state.u);
    let weighted = |a: &[f64]| -> f64 {
        grid.dx() * a.iter().zip(&h.h).map(|(v, hv)| hv * v * v).sum::<f64>()
    };
    inner_product(&state.zeta, &state.zeta, grid)
        + weighted(&state.u)
        + mu * weighted(&t1u)
        + mu * weighted(&t2u)
}

/// `dx * sum(zeta)`.
pub fn mass(state: &State, grid: &crate::types::Grid) -> f64 {
    grid.dx() * state.zeta.iter().sum::<f64>()
}

/// `|U|_{X^s} = (|ζ|²_{H^s} + |u|²_{H^s} + μ|∂x u|²_{H^s})^{1/2}`, spectral.
pub fn xs_norm(model: &Model, state: &State, s: f64) -> f64 {
    let sp = model.spectral();
    let dx = model.grid().dx();
    let u_x = sp.d1(&state.u);
    (sp.hs_norm_sq(&state.zeta, s, dx)
        + sp.hs_norm_sq(&state.u, s, dx)
        + model.params().mu() * sp.hs_norm_sq(&u_x, s, dx))
    .sqrt()
}

/// `E^s(U) = (|Λ^sζ|² + (𝔗̄ Λ^s u, Λ^s u))^{1/2}` with the symmetrizer
/// `diag(1, 𝔗̄)` of an already assembled reference operator.
pub fn es_norm_with(model: &Model, state: &State, s: f64, op: &TOperator) -> f64 {
    let sp = model.spectral();
    let grid = model.grid();
    let lz = sp.lambda_s(&state.zeta, s);
    let lu = sp.lambda_s(&state.u, s);
    let value = inner_product(&lz, &lz, grid) + inner_product(&op.apply(&lu), &lu, grid);
    value.max(0.0).sqrt()
}

/// `E^s(U)` with the symmetrizer frozen at `ubar`.
pub fn es_norm(model: &Model, state: &State, s: f64, ubar: &State) -> Result<f64> {
    let op = assemble_t(&model.depth(ubar), model)?;
    Ok(es_norm_with(model, state, s, &op))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceReport {
    /// `max E^s(U) / |U|_{X^s}`.
    pub max_upper_ratio: f64,
    /// `max |U|_{X^s} / E^s(U)`.
    pub max_lower_ratio: f64,
}

pub fn equivalence_report(model: &Model, samples: &[State], s: f64, ubar: &State) -> Result<EquivalenceReport> {
    let op = assemble_t(&model.depth(ubar), model)?;
    let mut rep = EquivalenceReport {
        max_upper_ratio: 0.0,
        max_lower_ratio: 0.0,
    };
    for u in samples {
        let e = es_norm_with(model, u, s, &op);
        let x = xs_norm(model, u, s);
        rep.max_upper_ratio = rep.max_upper_ratio.max(e / x);
        rep.max_lower_ratio = rep.max_lower_ratio.max(x / e);
    }
    Ok(rep)
}

/// Full record for a state, with `E^s` symmetrized at the state itself.
pub fn record(model: &Model, state: &State, s: f64) -> Result<DiagnosticRecord> {
    let h = model.depth(state);
    let op = assemble_t(&h, model)?;
    Ok(record_with(model, state, s, &op))
}

pub(crate) fn record_with(model: &Model, state: &State, s: f64, op: &TOperator) -> DiagnosticRecord {
    DiagnosticRecord {
        t: state.time,
        energy: conserved_energy(model, state),
        mass: mass(state, model.grid()),
        min_h: model.depth(state).min().0,
        xs_norm: xs_norm(model, state, s),
        es_norm: es_norm_with(model, state, s, op),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_ops::fd_wavenumber;
    use crate::types::{Bathymetry, DepthField, Grid, Parameters};
    use std::f64::consts::PI;

    fn flat(n: usize, mu: f64) -> Model {
        let grid = Grid::new(n, 2.0 * PI).unwrap();
        Model::flat(grid, Parameters::new(0.5, mu, 0.5).unwrap()).unwrap()
    }

    fn bumpy(n: usize) -> Model {
        let grid = Grid::new(n, 2.0 * PI).unwrap();
        let bathy = Bathymetry::from_analytic(&grid, |x| 0.2 * x.cos(), |x| -0.2 * x.sin(), |x| -0.2 * x.cos());
        Model::new(grid, Parameters::new(0.6, 0.7, 0.3).unwrap(), bathy).unwrap()
    }

    #[test]
    fn energy_of_zero_and_pure_elevation() {
        let model = flat(32, 0.5);
        assert_eq!(conserved_energy(&model, &State::rest(32)), 0.0);
        let g = model.grid();
        let zeta = g.sample(|x| 0.1 * x.cos());
        let s = State::new(zeta.clone(), vec![0.0; 32], 0.0).unwrap();
        assert!((conserved_energy(&model, &s) - inner_product(&zeta, &zeta, g)).abs() < 1e-16);
    }

    #[test]
    fn energy_flat_cosine() {
        // quadratic-form oracle: (𝔗u,u) = π (1 + μ k_fd²/3) for u = cos(kx), h = 1
        let mu = 0.6;
        let model = flat(64, mu);
        let g = model.grid();
        let k = 4.0;
        let s = State::new(vec![0.0; 64], g.sample(|x| (k * x).cos()), 0.0).unwrap();
        let kfd = fd_wavenumber(k, g.dx());
        let oracle = PI * (1.0 + mu * kfd * kfd / 3.0);
        assert!((conserved_energy(&model, &s) - oracle).abs() < 1e-12);
        let op = assemble_t(&DepthField::uniform(64, 1.0), &model).unwrap();
        let direct = inner_product(&op.apply(&s.u), &s.u, g);
        assert!((direct - oracle).abs() < 1e-12);
    }

    #[test]
    fn energy_matches_assembled_form() {
        let model = bumpy(64);
        let g = model.grid();
        let s = State::new(g.sample(|x| 0.3 * (2.0 * x).sin()), g.sample(|x| (x + 1.0).cos()), 0.0).unwrap();
        let op = assemble_t(&model.depth(&s), &model).unwrap();
        let direct = inner_product(&s.zeta, &s.zeta, g) + inner_product(&op.apply(&s.u), &s.u, g);
        let e = conserved_energy(&model, &s);
        assert!((e - direct).abs() < 1e-13 * e);
        // s = 0 with Ū = U gives the same quadratic form
        let es = es_norm(&model, &s, 0.0, &s).unwrap();
        assert!((es * es - e).abs() < 1e-13 * e);
    }

    #[test]
    fn mass_values() {
        let g = Grid::new(64, 2.0 * PI).unwrap();
        assert_eq!(mass(&State::rest(64), &g), 0.0);
        let s = State::new(g.sample(f64::cos), vec![0.0; 64], 0.0).unwrap();
        assert!(mass(&s, &g).abs() <= 1e-14);
    }

    #[test]
    fn xs_norm_values() {
        let model = flat(64, 0.5);
        let g = model.grid();
        assert_eq!(xs_norm(&model, &State::rest(64), 2.0), 0.0);
        let s = State::new(g.sample(|x| (3.0 * x).cos()), vec![0.0; 64], 0.0).unwrap();
        assert!((xs_norm(&model, &s, 1.0) - (10.0 * PI).sqrt()).abs() < 1e-12);
        // s = 0, small μ: |ζ|² + |u|²
        let tiny = flat(64, 1e-12);
        let s = State::new(g.sample(f64::sin), g.sample(|x| (2.0 * x).cos()), 0.0).unwrap();
        assert!((xs_norm(&tiny, &s, 0.0) - (2.0 * PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn es_norm_zero_and_homogeneity() {
        let model = bumpy(64);
        let g = model.grid();
        let ubar = State::new(g.sample(|x| 0.2 * x.sin()), g.sample(f64::cos), 0.0).unwrap();
        assert_eq!(es_norm(&model, &State::rest(64), 2.0, &ubar).unwrap(), 0.0);
        let s = State::new(g.sample(|x| (2.0 * x).cos()), g.sample(|x| (x - 0.4).sin()), 0.0).unwrap();
        let rep1 = equivalence_report(&model, std::slice::from_ref(&s), 2.0, &ubar).unwrap();
        let rep2 = equivalence_report(&model, &[s.scaled(2.0)], 2.0, &ubar).unwrap();
        assert!((rep1.max_upper_ratio - rep2.max_upper_ratio).abs() < 1e-13);
        assert!((rep1.max_lower_ratio - rep2.max_lower_ratio).abs() < 1e-13);
        assert!(rep1.max_upper_ratio > 0.0 && rep1.max_upper_ratio.is_finite());
    }
}
