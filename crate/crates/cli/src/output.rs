//! File formats: full-precision CSV tables and pretty JSON.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use cmc_orbit::assembly::{CurvePoint, GeneratingCurve, Seam};
use cmc_orbit::dynamics::rhs_alpha;
use cmc_orbit::geometry::mean_curvature;
use cmc_orbit::shooting::ShotResult;
use cmc_orbit::{Family, OrbitPoint, Params};

use crate::error::CliError;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::config(format!("{}: {other:?}", path.display())),
    }
}

/// `H - lambda` at a trajectory sample, `NaN` at chart singularities.
fn h_residual(params: &Params, state: &cmc_orbit::ShootingState) -> f64 {
    rhs_alpha(params, state)
        .ok()
        .and_then(|ap| mean_curvature(params.family, state, ap).ok())
        .map_or(f64::NAN, |h| h - params.lambda)
}

/// One row per dense sample: `s, r, theta, alpha, H_residual`.
pub fn write_trajectory_csv(path: &Path, params: &Params, shot: &ShotResult) -> Result<usize, CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["s", "r", "theta", "alpha", "H_residual"])
        .map_err(|e| csv_error(path, e))?;
    let mut rows = 0;
    for (s, st) in shot.states() {
        let rec = [s, st.r, st.theta, st.alpha, h_residual(params, &st)].map(fmt_f64);
        w.write_record(&rec).map_err(|e| csv_error(path, e))?;
        rows += 1;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(rows)
}

/// Everything in a [`GeneratingCurve`] except its samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub family: Family,
    pub lambda: f64,
    pub closed: bool,
    pub length: f64,
    pub copies: usize,
    pub seams: Vec<Seam>,
    pub r0_star: Option<f64>,
    pub exit_residual: f64,
    pub samples: usize,
}

impl CurveMeta {
    pub fn of(curve: &GeneratingCurve) -> Self {
        Self {
            family: curve.family,
            lambda: curve.lambda,
            closed: curve.closed,
            length: curve.length,
            copies: curve.copies,
            seams: curve.seams.clone(),
            r0_star: curve.r0_star,
            exit_residual: curve.exit_residual,
            samples: curve.samples.len(),
        }
    }
}

/// JSON sidecar that sits next to a curve CSV.
pub fn curve_meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_curve(csv_path: &Path, curve: &GeneratingCurve) -> Result<(), CliError> {
    let mut w = csv_writer(csv_path)?;
    w.write_record(["s", "r", "theta", "alpha", "copy"])
        .map_err(|e| csv_error(csv_path, e))?;
    for c in &curve.samples {
        let mut rec = [c.s, c.point.r, c.point.theta, c.alpha].map(fmt_f64).to_vec();
        rec.push(c.copy.to_string());
        w.write_record(&rec).map_err(|e| csv_error(csv_path, e))?;
    }
    w.flush().map_err(|e| CliError::io(csv_path, e))?;
    write_json(&curve_meta_path(csv_path), &CurveMeta::of(curve))
}

#[derive(Debug, Deserialize)]
struct CurveRow {
    s: f64,
    r: f64,
    theta: f64,
    alpha: f64,
    copy: usize,
}

pub fn read_curve(csv_path: &Path) -> Result<GeneratingCurve, CliError> {
    let meta: CurveMeta = read_json(&curve_meta_path(csv_path))?;
    let mut rdr = csv::Reader::from_path(csv_path).map_err(|e| csv_error(csv_path, e))?;
    let mut samples = Vec::with_capacity(meta.samples);
    for row in rdr.deserialize() {
        let row: CurveRow = row.map_err(|e| csv_error(csv_path, e))?;
        samples.push(CurvePoint {
            s: row.s,
            point: OrbitPoint::new(row.r, row.theta),
            alpha: row.alpha,
            copy: row.copy,
        });
    }
    if samples.len() != meta.samples || samples.len() < 2 {
        return Err(CliError::config(format!(
            "{}: expected {} samples, found {}",
            csv_path.display(),
            meta.samples,
            samples.len()
        )));
    }
    Ok(GeneratingCurve {
        family: meta.family,
        lambda: meta.lambda,
        samples,
        closed: meta.closed,
        length: meta.length,
        copies: meta.copies,
        seams: meta.seams,
        r0_star: meta.r0_star,
        exit_residual: meta.exit_residual,
    })
}
