use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use cmc_orbit::assembly::{assemble, certify, Certificate, GeneratingCurve};
use cmc_orbit::shooting::{self, ExitClass, MonitorReport, ShotRecord};
use cmc_orbit::verify::{run_claim_suite, ClaimGrid, OracleConfig, SuiteConfig};
use cmc_orbit::{Family, Params, ShootingState};

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, read_curve, write_curve, write_json, write_text, write_trajectory_csv};
use crate::svg;

/// Largest `|H - lambda|` a certified curve may show.
pub const H_TOL: f64 = 1e-6;

#[derive(Debug, Serialize)]
struct ShotJson<'a> {
    family: Family,
    lambda: f64,
    r0: f64,
    exit: ExitClass,
    s_star: f64,
    state_exit: ShootingState,
    coincident: &'a [ExitClass],
    gamma_residual: Option<f64>,
    samples: usize,
    monitors: &'a MonitorReport,
}

#[derive(Debug, Serialize)]
struct SolutionJson<'a> {
    family: Family,
    lambda: f64,
    r0_star: f64,
    class_interval: (f64, f64),
    exit: ExitClass,
    s_star: f64,
    state_exit: ShootingState,
    monitors: &'a MonitorReport,
    history: &'a [ShotRecord],
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        CommandKind::Shoot => cmd_shoot(cfg),
        CommandKind::Solve => cmd_solve(cfg, &cfg.params()?, &cfg.out).map(|_| ()),
        CommandKind::Assemble => cmd_assemble(cfg),
        CommandKind::Verify => cmd_verify(cfg),
        CommandKind::Sweep => cmd_sweep(cfg),
    }
}

pub fn cmd_shoot(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let r0 = cfg.checked_r0()?;
    let shot = shooting::shoot(&params, r0, &cfg.solver)?;
    ensure_dir(&cfg.out)?;
    let samples = write_trajectory_csv(&cfg.out.join("trajectory.csv"), &params, &shot)?;
    write_json(
        &cfg.out.join("shot.json"),
        &ShotJson {
            family: params.family,
            lambda: params.lambda,
            r0,
            exit: shot.exit,
            s_star: shot.s_star,
            state_exit: shot.state_exit,
            coincident: &shot.coincident,
            gamma_residual: (shot.exit == ExitClass::GammaWall).then(|| shot.gamma_residual()),
            samples,
            monitors: &shot.monitors,
        },
    )?;
    if cfg.plot {
        let pts: Vec<(f64, f64)> = shot.states().map(|(_, s)| (s.r, s.theta)).collect();
        let title = format!("{} n={} lambda={} r0={r0}", params.family.label(), params.family.n, params.lambda);
        let doc = svg::render(params.family, &title, &[pts], (r0, std::f64::consts::FRAC_PI_4));
        write_text(&cfg.out.join("trajectory.svg"), &doc)?;
    }
    Ok(())
}

/// Curve, certificate and plot, shared by `solve`, `assemble` and `sweep`.
fn write_curve_outputs(dir: &Path, curve: &GeneratingCurve) -> Result<Certificate, CliError> {
    write_curve(&dir.join("curve.csv"), curve)?;
    let cert = certify(curve);
    write_json(&dir.join("certificate.json"), &cert)?;
    write_text(&dir.join("curve.svg"), &curve_svg(curve))?;
    Ok(cert)
}

fn curve_svg(curve: &GeneratingCurve) -> String {
    let mut copies: Vec<Vec<(f64, f64)>> = vec![Vec::new(); curve.copies];
    for (i, c) in curve.samples.iter().enumerate() {
        let p = (c.point.r, c.point.theta);
        copies[c.copy].push(p);
        // Extend each copy to the next copy's first node so paths join up.
        if let Some(next) = curve.samples.get(i + 1) {
            if next.copy != c.copy {
                copies[c.copy].push((next.point.r, next.point.theta));
            }
        }
    }
    let first = curve.samples[0].point;
    let title = format!("{} n={} lambda={}", curve.family.label(), curve.family.n, curve.lambda);
    svg::render(curve.family, &title, &copies, (first.r, first.theta))
}

fn check_certificate(cert: &Certificate) -> Result<(), CliError> {
    if cert.passes(H_TOL) {
        Ok(())
    } else {
        Err(CliError::Assembly(format!(
            "curve failed certification: closed={} simple={} closure_gap={:e} seam_defect={:e} max|H-lambda|={:e}",
            cert.closed,
            cert.simple,
            cert.closure_gap,
            cert.seam_defect,
            cert.h_residuals.max()
        )))
    }
}

pub fn cmd_solve(cfg: &RunConfig, params: &Params, dir: &Path) -> Result<Certificate, CliError> {
    let sol = shooting::solve(params, &cfg.solver)?;
    ensure_dir(dir)?;
    write_json(
        &dir.join("solution.json"),
        &SolutionJson {
            family: params.family,
            lambda: params.lambda,
            r0_star: sol.r0_star,
            class_interval: sol.class_interval,
            exit: sol.shot.exit,
            s_star: sol.shot.s_star,
            state_exit: sol.shot.state_exit,
            monitors: &sol.shot.monitors,
            history: &sol.history,
        },
    )?;
    let mut curve = assemble(params, &sol.shot.trajectory)?;
    curve.r0_star = Some(sol.r0_star);
    let cert = write_curve_outputs(dir, &curve)?;
    check_certificate(&cert)?;
    Ok(cert)
}

pub fn cmd_assemble(cfg: &RunConfig) -> Result<(), CliError> {
    let curve = match &cfg.curve {
        Some(path) => read_curve(path)?,
        None => {
            let params = cfg.params()?;
            let r0 = cfg.checked_r0()?;
            let shot = shooting::shoot(&params, r0, &cfg.solver)?;
            let mut curve = assemble(&params, &shot.trajectory)?;
            curve.r0_star = Some(r0);
            curve
        }
    };
    ensure_dir(&cfg.out)?;
    let cert = if cfg.curve.is_some() {
        let cert = certify(&curve);
        write_json(&cfg.out.join("certificate.json"), &cert)?;
        write_text(&cfg.out.join("curve.svg"), &curve_svg(&curve))?;
        cert
    } else {
        write_curve_outputs(&cfg.out, &curve)?
    };
    check_certificate(&cert)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let mut grid = ClaimGrid::default();
    if let Some(kind) = cfg.family {
        grid.families = vec![kind];
    }
    if let Some(ns) = &cfg.ns {
        grid.ns = ns.clone();
    } else if let Some(n) = cfg.n {
        grid.ns = vec![n];
    }
    if let Some(ls) = &cfg.lambdas {
        grid.lambdas = ls.clone();
    } else if let Some(l) = cfg.lambda {
        grid.lambdas = vec![l];
    }
    let suite = SuiteConfig {
        solver: cfg.solver,
        oracle: cfg.oracle.then(OracleConfig::default),
    };
    let report = run_claim_suite(&grid, &suite);
    ensure_dir(&cfg.out)?;
    write_json(&cfg.out.join("claims.json"), &report)?;
    let failed = report.failures().count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} claim results failed")));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub r0_star: Option<f64>,
    pub length: Option<f64>,
    pub max_h_residual: Option<f64>,
    pub passed: bool,
    pub error: Option<String>,
}

fn lambda_dir(lambda: f64) -> String {
    format!("lambda_{lambda}")
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let family = cfg.family()?;
    let lambdas = match (&cfg.lambdas, cfg.lambda) {
        (Some(ls), _) => ls.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => Vec::new(),
    };
    ensure_dir(&cfg.out)?;
    let rows: Vec<SweepRow> = lambdas
        .par_iter()
        .map(|&lambda| {
            let dir = cfg.out.join(lambda_dir(lambda));
            let outcome = Params::new(family, lambda)
                .map_err(|e| CliError::config(e.to_string()))
                .and_then(|p| cmd_solve(cfg, &p, &dir));
            match outcome {
                Ok(cert) => SweepRow {
                    lambda,
                    r0_star: cert.r0_star,
                    length: Some(cert.length),
                    max_h_residual: Some(cert.h_residuals.max()),
                    passed: true,
                    error: None,
                },
                Err(e) => SweepRow {
                    lambda,
                    r0_star: None,
                    length: None,
                    max_h_residual: None,
                    passed: false,
                    error: Some(format!("{}: {e}", e.kind())),
                },
            }
        })
        .collect();
    write_summary(&cfg.out, &rows)?;
    let failed = rows.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} sweep points failed", rows.len())));
    }
    Ok(())
}

fn write_summary(dir: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let opt = |x: Option<f64>| x.map(crate::output::fmt_f64).unwrap_or_default();
    let mut text = String::from("lambda,r0_star,length,max_h_residual,passed\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            crate::output::fmt_f64(r.lambda),
            opt(r.r0_star),
            opt(r.length),
            opt(r.max_h_residual),
            r.passed
        ));
    }
    write_text(&dir.join("summary.csv"), &text)?;
    write_json(&dir.join("summary.json"), &rows)
}
