//! `key = value` run configuration.
//!
//! One pair per line, `#` starts a comment. Every key except `scenario` has a
//! default; grid, parameters and end time default to the scenario's own.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scenarios::{Scenario, ShapeOptions};
use crate::types::{Grid, Parameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Nonlinear,
    Linearized,
    Picard,
    Verify,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Nonlinear => "nonlinear",
            Mode::Linearized => "linearized",
            Mode::Picard => "picard",
            Mode::Verify => "verify",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "nonlinear" => Ok(Mode::Nonlinear),
            "linearized" => Ok(Mode::Linearized),
            "picard" => Ok(Mode::Picard),
            "verify" => Ok(Mode::Verify),
            _ => Err(format!("unknown mode '{s}' (expected nonlinear, linearized, picard or verify)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    /// Replaces the scenario's bottom when set.
    pub bathymetry_file: Option<PathBuf>,
    pub n: usize,
    pub length: f64,
    pub epsilon: f64,
    pub mu: f64,
    /// `None` means half the initial minimum depth.
    pub h0: Option<f64>,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub output_dir: PathBuf,
    pub mode: Mode,
    pub seed: u64,
    pub dealias: bool,
    pub shape: ShapeOptions,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
}

pub const KEYS: &[&str] = &[
    "scenario",
    "bathymetry_file",
    "n",
    "length",
    "epsilon",
    "mu",
    "h0",
    "cfl",
    "dt_max",
    "t_end",
    "snapshot_every",
    "output_dir",
    "mode",
    "seed",
    "dealias",
    "amplitude",
    "width",
    "bar_height",
    "bar_width",
    "picard_max_iters",
    "picard_tol",
];

impl RunConfig {
    /// All defaults for a named scenario.
    pub fn for_scenario(name: &str) -> Result<Self> {
        let sc = Scenario::find(name)?;
        Ok(Self {
            scenario: sc.name.to_string(),
            bathymetry_file: None,
            n: sc.n,
            length: sc.length,
            epsilon: sc.epsilon,
            mu: sc.mu,
            h0: None,
            cfl: 0.5,
            dt_max: f64::INFINITY,
            t_end: sc.t_end,
            snapshot_every: 10,
            output_dir: PathBuf::from("out"),
            mode: Mode::Nonlinear,
            seed: 1,
            dealias: sc.dealias,
            shape: ShapeOptions::default(),
            picard_max_iters: 20,
            picard_tol: 1e-7,
        })
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n, self.length)
    }

    /// Parameters with an explicit floor `h0`.
    pub fn parameters(&self, h0: f64) -> Result<Parameters> {
        Parameters::new(self.epsilon, self.mu, h0)
    }

    /// Canonical text form; `parse_config` reads it back to an equal value.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("scenario", self.scenario.clone());
        if let Some(p) = &self.bathymetry_file {
            put("bathymetry_file", p.display().to_string());
        }
        put("n", self.n.to_string());
        put("length", fmt_f64(self.length));
        put("epsilon", fmt_f64(self.epsilon));
        put("mu", fmt_f64(self.mu));
        put("h0", self.h0.map_or_else(|| "auto".to_string(), fmt_f64));
        put("cfl", fmt_f64(self.cfl));
        put("dt_max", fmt_f64(self.dt_max));
        put("t_end", fmt_f64(self.t_end));
        put("snapshot_every", self.snapshot_every.to_string());
        put("output_dir", self.output_dir.display().to_string());
        put("mode", self.mode.as_str().to_string());
        put("seed", self.seed.to_string());
        put("dealias", self.dealias.to_string());
        put("amplitude", fmt_f64(self.shape.amplitude));
        put("width", fmt_f64(self.shape.width));
        put("bar_height", fmt_f64(self.shape.bar_height));
        put("bar_width", fmt_f64(self.shape.bar_width));
        put("picard_max_iters", self.picard_max_iters.to_string());
        put("picard_tol", fmt_f64(self.picard_tol));
        out
    }
}

/// Shortest representation that parses back to the same bits.
fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| Error::Config {
        line,
        msg: format!("cannot parse '{raw}' as a value for '{key}'"),
    })
}

fn range_error(line: usize, key: &str, value: &str, range: &str) -> Error {
    Error::Config {
        line,
        msg: format!("{key} = {value} is out of range: must lie in {range}"),
    }
}

/// Parses config text. `scenario_override` supplies the scenario when the
/// text has none (and wins when both are present).
pub fn parse_config(text: &str, scenario_override: Option<&str>) -> Result<RunConfig> {
    let mut pairs: HashMap<String, (usize, String)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            msg: format!("expected 'key = value', got '{content}'"),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config {
                line,
                msg: format!("unknown key '{k}'"),
            });
        }
        if v.is_empty() {
            return Err(Error::Config {
                line,
                msg: format!("missing value for '{k}'"),
            });
        }
        if let Some((first, _)) = pairs.get(k) {
            return Err(Error::Config {
                line,
                msg: format!("duplicate key '{k}' (first set on line {first})"),
            });
        }
        pairs.insert(k.to_string(), (line, v.to_string()));
    }

    let scenario = match (scenario_override, pairs.get("scenario")) {
        (Some(s), _) => s.to_string(),
        (None, Some((_, s))) => s.clone(),
        (None, None) => return Err(Error::MissingKey("scenario")),
    };
    let mut cfg = RunConfig::for_scenario(&scenario).map_err(|e| match pairs.get("scenario") {
        Some((line, _)) if scenario_override.is_none() => Error::Config {
            line: *line,
            msg: e.to_string(),
        },
        _ => e,
    })?;

    let mut keys: Vec<_> = pairs.iter().collect();
    keys.sort_by_key(|(_, (line, _))| *line);
    for (key, (line, raw)) in keys {
        let line = *line;
        let f = || parse_value::<f64>(line, key, raw);
        match key.as_str() {
            "scenario" => {}
            "bathymetry_file" => cfg.bathymetry_file = Some(PathBuf::from(raw)),
            "n" => cfg.n = parse_value(line, key, raw)?,
            "length" => cfg.length = f()?,
            "epsilon" => cfg.epsilon = f()?,
            "mu" => cfg.mu = f()?,
            "h0" => cfg.h0 = if raw == "auto" { None } else { Some(f()?) },
            "cfl" => cfg.cfl = f()?,
            "dt_max" => cfg.dt_max = f()?,
            "t_end" => cfg.t_end = f()?,
            "snapshot_every" => cfg.snapshot_every = parse_value(line, key, raw)?,
            "output_dir" => cfg.output_dir = PathBuf::from(raw),
            "mode" => {
                cfg.mode = raw.parse().map_err(|msg| Error::Config { line, msg })?;
            }
            "seed" => cfg.seed = parse_value(line, key, raw)?,
            "dealias" => cfg.dealias = parse_value(line, key, raw)?,
            "amplitude" => cfg.shape.amplitude = f()?,
            "width" => cfg.shape.width = f()?,
            "bar_height" => cfg.shape.bar_height = f()?,
            "bar_width" => cfg.shape.bar_width = f()?,
            "picard_max_iters" => cfg.picard_max_iters = parse_value(line, key, raw)?,
            "picard_tol" => cfg.picard_tol = f()?,
            _ => unreachable!("key list checked above"),
        }
        validate_key(&cfg, key, line, raw)?;
    }
    Ok(cfg)
}

fn validate_key(cfg: &RunConfig, key: &str, line: usize, raw: &str) -> Result<()> {
    let bad = |range: &str| Err(range_error(line, key, raw, range));
    match key {
        "n" => {
            if let Err(e) = Grid::new(cfg.n, 1.0) {
                return Err(Error::Config {
                    line,
                    msg: e.to_string(),
                });
            }
        }
        "length" if !(cfg.length > 0.0 && cfg.length.is_finite()) => return bad("(0, inf)"),
        "epsilon" if !(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0) => return bad("(0, 1]"),
        "mu" if !(cfg.mu > 0.0 && cfg.mu <= 1.0) => return bad("(0, 1]"),
        "h0" => {
            if let Some(h0) = cfg.h0 {
                if !(h0 > 0.0 && h0.is_finite()) {
                    return bad("(0, inf)");
                }
            }
        }
        "cfl" if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) => return bad("(0, 1]"),
        "dt_max" if !(cfg.dt_max > 0.0) => return bad("(0, inf]"),
        "t_end" if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) => return bad("[0, inf)"),
        "amplitude" if !(cfg.shape.amplitude >= 0.0 && cfg.shape.amplitude.is_finite()) => return bad("[0, inf)"),
        "width" if !(cfg.shape.width > 0.0 && cfg.shape.width.is_finite()) => return bad("(0, inf)"),
        "bar_width" if !(cfg.shape.bar_width > 0.0 && cfg.shape.bar_width.is_finite()) => return bad("(0, inf)"),
        "bar_height" if !cfg.shape.bar_height.is_finite() => return bad("(-inf, inf)"),
        "picard_max_iters" if cfg.picard_max_iters == 0 => return bad("[1, inf)"),
        "picard_tol" if !(cfg.picard_tol > 0.0) => return bad("(0, inf)"),
        _ => {}
    }
    Ok(())
}
