//! Bathymetry input and the plain-text output formats.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::diagnostics::DiagnosticRecord;
use crate::error::{Error, Result};
use crate::time_integrator::RunSink;
use crate::types::{compute_depth, Bathymetry, Grid, Parameters, State};

pub const TIMESERIES_HEADER: &str = "# t energy mass min_h xs_norm es_norm";
pub const SNAPSHOT_HEADER: &str = "# x zeta u b h";
pub const MIN_BATHYMETRY_ROWS: usize = 8;

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn bathy_err(row: usize, msg: impl Into<String>) -> Error {
    Error::BathymetryFile { row, msg: msg.into() }
}

/// Parses `x b(x)` rows. The samples must be uniformly spaced and cover
/// exactly one period of the grid; they are resampled by evaluating their
/// trigonometric interpolant (and its derivatives) at the grid points.
pub fn parse_bathymetry(text: &str, grid: &Grid) -> Result<Bathymetry> {
    let mut xs = Vec::new();
    let mut bs = Vec::new();
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let cols: Vec<&str> = content.split_whitespace().collect();
        if cols.len() != 2 {
            return Err(bathy_err(row, format!("expected 2 columns, found {}", cols.len())));
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| bathy_err(row, format!("cannot parse '{s}'")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bathy_err(row, format!("non-finite entry '{s}'")))
            }
        };
        let (x, b) = (parse(cols[0])?, parse(cols[1])?);
        if let Some(&prev) = xs.last() {
            if !(x > prev) {
                return Err(bathy_err(row, format!("x must be strictly increasing ({x} after {prev})")));
            }
        }
        xs.push(x);
        bs.push(b);
        rows.push(row);
    }
    let m = xs.len();
    if m < MIN_BATHYMETRY_ROWS {
        return Err(bathy_err(
            rows.last().copied().unwrap_or(0),
            format!("need at least {MIN_BATHYMETRY_ROWS} rows, found {m}"),
        ));
    }
    let spacing = grid.length() / m as f64;
    for j in 1..m {
        let step = xs[j] - xs[j - 1];
        if (step - spacing).abs() > 1e-9 * spacing {
            return Err(bathy_err(
                rows[j],
                format!(
                    "rows must be uniformly spaced over one period: step {step}, expected L / rows = {spacing}"
                ),
            ));
        }
    }
    Ok(resample(&xs, &bs, grid))
}

pub fn load_bathymetry(path: &Path, grid: &Grid) -> Result<Bathymetry> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_bathymetry(&text, grid)
}

fn resample(xs: &[f64], bs: &[f64], grid: &Grid) -> Bathymetry {
    let m = bs.len();
    let mut hat: Vec<Complex64> = bs.iter().map(|&b| Complex64::new(b, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut hat);
    let scale = 1.0 / m as f64;
    let base = 2.0 * std::f64::consts::PI / grid.length();
    let top = m / 2;
    let n = grid.n();
    let (mut b, mut b_x, mut b_xx) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let y = grid.x(i) - xs[0];
        let (mut v, mut d1, mut d2) = (hat[0].re * scale, 0.0, 0.0);
        for (k, c) in hat.iter().enumerate().take(top + 1).skip(1) {
            // conjugate pairs fold into 2 Re(c e^{iky}); the even-m Nyquist term is real
            let w = if m.is_multiple_of(2) && k == top { 1.0 } else { 2.0 } * scale;
            let kk = k as f64 * base;
            let (s, co) = (kk * y).sin_cos();
            let (re, im) = (c.re * w, c.im * w);
            let (cre, cim) = if m.is_multiple_of(2) && k == top { (re, 0.0) } else { (re, im) };
            v += cre * co - cim * s;
            d1 += kk * (-cre * s - cim * co);
            d2 += -kk * kk * (cre * co - cim * s);
        }
        b[i] = v;
        b_x[i] = d1;
        b_xx[i] = d2;
    }
    Bathymetry { b, b_x, b_xx }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(f))
}

fn record_line(r: &DiagnosticRecord) -> String {
    [r.t, r.energy, r.mass, r.min_h, r.xs_norm, r.es_norm]
        .iter()
        .map(|v| fmt_sig17(*v))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn emit_timeseries(records: &[DiagnosticRecord], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{TIMESERIES_HEADER}").map_err(io)?;
    for r in records {
        writeln!(w, "{}", record_line(r)).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a file written by [`emit_timeseries`].
pub fn read_timeseries(path: &Path) -> Result<Vec<DiagnosticRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config {
                line: idx + 1,
                msg: e.to_string(),
            })?;
        if v.len() != 6 {
            return Err(Error::Config {
                line: idx + 1,
                msg: format!("expected 6 columns, found {}", v.len()),
            });
        }
        out.push(DiagnosticRecord {
            t: v[0],
            energy: v[1],
            mass: v[2],
            min_h: v[3],
            xs_norm: v[4],
            es_norm: v[5],
        });
    }
    Ok(out)
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:06}.dat")
}

pub fn emit_snapshot(state: &State, grid: &Grid, bathy: &Bathymetry, params: &Parameters, path: &Path) -> Result<()> {
    let h = compute_depth(state, bathy, params);
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{SNAPSHOT_HEADER}").map_err(io)?;
    for i in 0..grid.n() {
        writeln!(
            w,
            "{} {} {} {} {}",
            fmt_sig17(grid.x(i)),
            fmt_sig17(state.zeta[i]),
            fmt_sig17(state.u[i]),
            fmt_sig17(bathy.b[i]),
            fmt_sig17(h.h[i])
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Writes every record to `timeseries.dat` and a snapshot per emission.
pub struct FileSink {
    dir: PathBuf,
    grid: Grid,
    bathy: Bathymetry,
    params: Parameters,
    timeseries: BufWriter<fs::File>,
    path: PathBuf,
}

impl FileSink {
    pub fn new(dir: &Path, name: &str, grid: Grid, bathy: Bathymetry, params: Parameters) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(name);
        let mut timeseries = create(&path)?;
        writeln!(timeseries, "{TIMESERIES_HEADER}").map_err(|e| Error::io(&path, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            grid,
            bathy,
            params,
            timeseries,
            path,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.timeseries.flush().map_err(|e| Error::io(&self.path, e))
    }
}

impl RunSink for FileSink {
    fn record(&mut self, record: &DiagnosticRecord) -> Result<()> {
        writeln!(self.timeseries, "{}", record_line(record)).map_err(|e| Error::io(&self.path, e))
    }

    fn snapshot(&mut self, step: usize, state: &State) -> Result<()> {
        let path = self.dir.join(snapshot_name(step));
        emit_snapshot(state, &self.grid, &self.bathy, &self.params, &path)
    }
}
