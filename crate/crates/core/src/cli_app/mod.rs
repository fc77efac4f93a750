//! Configuration, file formats and run orchestration behind the `gn1d`
//! binary.

mod config;
mod files;

pub use config::{parse_config, Mode, RunConfig, KEYS};
pub use files::{
    emit_snapshot, emit_timeseries, fmt_sig17, load_bathymetry, parse_bathymetry, read_timeseries, snapshot_name,
    FileSink, MIN_BATHYMETRY_ROWS, SNAPSHOT_HEADER, TIMESERIES_HEADER,
};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::diagnostics::{self, DiagnosticRecord};
use crate::error::{Error, Result};
use crate::linearized::{
    fit_envelope, linear_steps, picard_solve, solve_linear_steps, LinearOptions, ReferenceTrajectory,
};
use crate::model::Model;
use crate::scenarios::Scenario;
use crate::time_integrator::{run, Monitors, RunStatus, StepControl};
use crate::types::{Grid, State};
use crate::verify::{format_table, verify_suite, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BLOWUP: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// What a finished command amounts to.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Success,
    Blowup(String),
    VerificationFailed,
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Success => EXIT_OK,
            Verdict::Blowup(_) => EXIT_BLOWUP,
            Verdict::VerificationFailed => EXIT_VERIFY,
        }
    }
}

/// Errors that mean the run itself broke down rather than the input being
/// wrong.
pub fn is_blowup(e: &Error) -> bool {
    matches!(
        e,
        Error::DepthViolation { .. } | Error::NotPositiveDefinite { .. } | Error::NonFinite(_)
    )
}

pub fn exit_code(result: &Result<Verdict>) -> i32 {
    match result {
        Ok(v) => v.exit_code(),
        Err(e) if is_blowup(e) => EXIT_BLOWUP,
        Err(_) => EXIT_CONFIG,
    }
}

/// Model and initial state built from a config.
#[derive(Debug, Clone)]
pub struct Setup {
    pub model: Model,
    pub initial: State,
}

pub fn prepare(cfg: &RunConfig, base: &Path) -> Result<Setup> {
    let grid = Grid::new(cfg.n, cfg.length)?;
    let scenario = Scenario::find(&cfg.scenario)?;
    // provisional floor for building the bottom when h0 is automatic
    let provisional = cfg.parameters(cfg.h0.unwrap_or(f64::MIN_POSITIVE))?;
    let (mut bathy, initial) = scenario.build(&grid, &provisional, &cfg.shape)?;
    if let Some(file) = &cfg.bathymetry_file {
        let path = if file.is_absolute() { file.clone() } else { base.join(file) };
        bathy = load_bathymetry(&path, &grid)?;
    }
    let h0 = match cfg.h0 {
        Some(h0) => h0,
        None => {
            let model = Model::new(grid, provisional, bathy.clone())?;
            0.5 * model.depth(&initial).min().0
        }
    };
    let params = cfg.parameters(h0)?;
    let model = Model::new(grid, params, bathy)?.with_dealiasing(cfg.dealias);
    model.depth(&initial).require(model.params())?;
    Ok(Setup { model, initial })
}

fn control(cfg: &RunConfig) -> Result<StepControl> {
    StepControl::new(cfg.cfl, cfg.dt_max, cfg.t_end)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs the configured mode, writing outputs under `cfg.output_dir`
/// (relative paths resolve against `base`) and a summary to `log`.
pub fn execute(cfg: &RunConfig, base: &Path, log: &mut dyn Write) -> Result<Verdict> {
    let out_dir = if cfg.output_dir.is_absolute() {
        cfg.output_dir.clone()
    } else {
        base.join(&cfg.output_dir)
    };
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let say = |log: &mut dyn Write, msg: String| {
        let _ = writeln!(log, "{msg}");
    };

    if cfg.mode == Mode::Verify {
        let results = verify_suite(&VerifyOptions {
            seed: cfg.seed,
            ..VerifyOptions::default()
        });
        let table = format_table(&results);
        write_text(&out_dir.join("verify.txt"), &table)?;
        say(log, table.trim_end().to_string());
        return Ok(if results.iter().all(|r| r.passed) {
            Verdict::Success
        } else {
            Verdict::VerificationFailed
        });
    }

    let setup = prepare(cfg, base)?;
    let model = &setup.model;
    let control = control(cfg)?;
    let every = cfg.snapshot_every.max(1);

    match cfg.mode {
        Mode::Nonlinear => {
            let mut sink = FileSink::new(
                &out_dir,
                "timeseries.dat",
                *model.grid(),
                model.bathymetry().clone(),
                *model.params(),
            )?;
            let monitors = Monitors {
                emit_every: every,
                ..Monitors::default()
            };
            let outcome = run(model, &setup.initial, &control, &monitors, &mut sink)?;
            sink.finish()?;
            say(
                log,
                format!(
                    "{}: {} steps to t = {}, min h = {}",
                    outcome.status.as_str(),
                    outcome.steps,
                    outcome.final_state.time,
                    outcome.min_h
                ),
            );
            Ok(match outcome.status {
                RunStatus::Completed => Verdict::Success,
                s => Verdict::Blowup(outcome.message.unwrap_or_else(|| s.as_str().to_string())),
            })
        }
        Mode::Linearized => {
            let probe = ReferenceTrajectory::constant(&setup.initial, cfg.t_end, 1)?;
            let steps = linear_steps(model, &probe, &control);
            let reference = ReferenceTrajectory::from_nonlinear(model, &setup.initial, cfg.t_end, steps)?;
            let solution = solve_linear_steps(
                model,
                &reference,
                &setup.initial,
                cfg.t_end,
                steps,
                &LinearOptions::default(),
            )?;
            write_trajectory(model, &solution, every, &out_dir)?;
            let fit = fit_envelope(model, &reference, &solution, diagnostics::DEFAULT_S)?;
            let eps = model.params().epsilon();
            let mut text = format!(
                "# lambda {} C {} E0 {}\n# t E envelope\n",
                fmt_sig17(fit.lambda),
                fmt_sig17(fit.c),
                fmt_sig17(fit.e0)
            );
            for &(t, e) in &fit.samples {
                let env = crate::linearized::envelope(t, eps, fit.lambda, fit.c, fit.e0);
                text.push_str(&format!("{} {} {}\n", fmt_sig17(t), fmt_sig17(e), fmt_sig17(env)));
            }
            write_text(&out_dir.join("envelope.dat"), &text)?;
            say(
                log,
                format!("linearized: {steps} steps, fitted lambda = {}, C = {}", fit.lambda, fit.c),
            );
            Ok(Verdict::Success)
        }
        Mode::Picard => {
            let rep = picard_solve(model, &setup.initial, &control, cfg.picard_max_iters, cfg.picard_tol)?;
            let mut text = String::from("# iteration gap\n");
            for (k, g) in rep.gaps.iter().enumerate() {
                text.push_str(&format!("{} {}\n", k + 1, fmt_sig17(*g)));
            }
            write_text(&out_dir.join("picard.dat"), &text)?;
            write_trajectory(model, &rep.last, every, &out_dir)?;
            say(
                log,
                format!(
                    "picard: {} iterations, last gap {}, converged {}",
                    rep.iterations(),
                    rep.gaps.last().copied().unwrap_or(0.0),
                    rep.converged
                ),
            );
            Ok(if rep.converged {
                Verdict::Success
            } else {
                Verdict::Blowup(format!("no convergence after {} iterations", rep.iterations()))
            })
        }
        Mode::Verify => unreachable!("handled above"),
    }
}

fn write_trajectory(model: &Model, traj: &ReferenceTrajectory, every: usize, dir: &Path) -> Result<()> {
    let snaps = traj.snapshots();
    let last = snaps.len() - 1;
    let mut records: Vec<DiagnosticRecord> = Vec::new();
    for (step, s) in snaps.iter().enumerate() {
        if step % every == 0 || step == last {
            records.push(diagnostics::record(model, s, diagnostics::DEFAULT_S)?);
            emit_snapshot(
                s,
                model.grid(),
                model.bathymetry(),
                model.params(),
                &dir.join(snapshot_name(step)),
            )?;
        }
    }
    emit_timeseries(&records, &dir.join("timeseries.dat"))
}

/// Table of the named scenarios for `gn1d scenarios`.
pub fn scenario_table() -> String {
    let mut out = String::new();
    for s in crate::scenarios::SCENARIOS {
        out.push_str(&format!(
            "{:<18} n = {:<5} L = {:<5} t_end = {:<5} eps = {:<4} mu = {:<4} {}; expect: {}\n",
            s.name, s.n, s.length, s.t_end, s.epsilon, s.mu, s.description, s.expected
        ));
    }
    out
}
