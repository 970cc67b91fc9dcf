//! Single shots from the mirror `theta = pi/4`, exit classification,
//! bracketing and bisection on the initial radius, and the bound monitors
//! evaluated along each shot.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

use crate::dynamics::{rhs, DynamicsError, EventKind, Params, ShootingState};
use crate::geometry::{beta, FamilyKind};
use crate::ode::{integrate_until_event, DenseTrajectory, EventFn, IntegrateError, IntegratorConfig, Stats, Termination};

pub const MONOTONE_TOL: f64 = 1e-12;
pub const THETA_BOUND_SLACK: f64 = 1e-8;
pub const ARC_LENGTH_SLACK: f64 = 1e-8;
/// Exit residual a converged shot must meet.
pub const EXIT_RESIDUAL_TOL: f64 = 1e-6;

/// Exit-radius constant `2 exp(pi / (4n - 4) * cot(1 / (3n)))`.
pub fn c_n(n: u32) -> f64 {
    let n = f64::from(n);
    2.0 * (PI / (4.0 * n - 4.0) / (1.0 / (3.0 * n)).tan()).exp()
}

/// Upper bound `pi / (2 lambda)` on the exit arc length.
pub fn arc_length_bound(lambda: f64) -> f64 {
    PI / (2.0 * lambda)
}

/// Threshold on lambda separating the small and large curvature regimes.
pub fn lambda_threshold(kind: FamilyKind) -> f64 {
    match kind {
        FamilyKind::S2n => 4.0 / PI,
        FamilyKind::S3nMinus1 => 2.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExitClass {
    AlphaZero,
    RWall,
    GammaWall,
    ThetaGuardFault,
    Budget,
}

impl ExitClass {
    pub fn is_wall(self) -> bool {
        matches!(self, ExitClass::RWall | ExitClass::GammaWall)
    }

    fn from_event(kind: EventKind) -> Self {
        match kind {
            EventKind::Alpha => ExitClass::AlphaZero,
            EventKind::RWall => ExitClass::RWall,
            EventKind::Gamma => ExitClass::GammaWall,
            EventKind::ThetaGuard => ExitClass::ThetaGuardFault,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub integrator: IntegratorConfig,
    /// Bisection stops once the bracket is narrower than this.
    pub tol_r0: f64,
    pub max_bisections: usize,
    /// Deepest `k` in the geometric bracket scan.
    pub scan_depth: u32,
    /// Turn monitor failures into errors.
    pub strict_monitors: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            integrator: IntegratorConfig::default(),
            tol_r0: 1e-10,
            max_bisections: 200,
            scan_depth: 40,
            strict_monitors: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.integrator.validate()?;
        if !(self.tol_r0 > 0.0 && self.tol_r0.is_finite()) {
            return Err(format!("tol_r0 must be positive, got {}", self.tol_r0));
        }
        if self.max_bisections == 0 {
            return Err("max_bisections must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MonitorKind {
    /// `dr/ds >= 0`, `dtheta/ds <= 0`, `dalpha/ds > 0` at every accepted step.
    Monotonicity,
    /// `theta >= pi/4 - 1/(lambda sin r0)` above the lambda threshold.
    ThetaLowerBound,
    /// `r(s1) >= 2 r0` implies `theta(s1) < pi/4 - 1/(6n)` below the threshold.
    TwoRadius,
    /// `r(s*) <= c_n r0` below the threshold.
    ExitRadius,
    /// `s* <= pi/(2 lambda)`.
    ArcLength,
}

impl MonitorKind {
    pub const ALL: [MonitorKind; 5] = [
        MonitorKind::Monotonicity,
        MonitorKind::ThetaLowerBound,
        MonitorKind::TwoRadius,
        MonitorKind::ExitRadius,
        MonitorKind::ArcLength,
    ];
}

/// Outcome of one monitor. A positive margin means the bound holds with
/// room to spare; `None` means the monitor had nothing to check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonitorOutcome {
    pub kind: MonitorKind,
    pub applicable: bool,
    pub passed: bool,
    pub worst_margin: Option<f64>,
    pub worst_s: Option<f64>,
    pub worst_state: Option<ShootingState>,
}

impl MonitorOutcome {
    fn skipped(kind: MonitorKind) -> Self {
        Self {
            kind,
            applicable: false,
            passed: true,
            worst_margin: None,
            worst_s: None,
            worst_state: None,
        }
    }

    fn vacuous(kind: MonitorKind) -> Self {
        Self {
            applicable: true,
            ..Self::skipped(kind)
        }
    }

    fn measured(kind: MonitorKind, margin: f64, s: f64, state: ShootingState, passed: bool) -> Self {
        Self {
            kind,
            applicable: true,
            passed,
            worst_margin: Some(margin),
            worst_s: Some(s),
            worst_state: Some(state),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub entries: Vec<MonitorOutcome>,
}

impl MonitorReport {
    pub fn get(&self, kind: MonitorKind) -> &MonitorOutcome {
        self.entries
            .iter()
            .find(|e| e.kind == kind)
            .expect("every monitor kind is reported")
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &MonitorOutcome> {
        self.entries.iter().filter(|e| !e.passed)
    }
}

#[derive(Debug, Clone)]
pub struct ShotResult {
    pub r0: f64,
    pub exit: ExitClass,
    pub s_star: f64,
    pub state_exit: ShootingState,
    /// Further exit classes reached within `event_tol` of `s_star`.
    pub coincident: Vec<ExitClass>,
    pub trajectory: DenseTrajectory<3>,
    pub monitors: MonitorReport,
    pub stats: Stats,
}

impl ShotResult {
    pub fn state_at(&self, s: f64) -> Option<ShootingState> {
        self.trajectory.eval(s).map(ShootingState::from_array)
    }

    pub fn states(&self) -> impl Iterator<Item = (f64, ShootingState)> + '_ {
        self.trajectory
            .s_samples()
            .iter()
            .zip(self.trajectory.y_samples())
            .map(|(&s, y)| (s, ShootingState::from_array(*y)))
    }

    /// Orthogonality residual `alpha(s*) - beta` at the exit point.
    pub fn gamma_residual(&self) -> f64 {
        self.state_exit.alpha - beta(self.state_exit.point())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShootError {
    #[error("initial radius {r0} outside ({lo}, {hi})")]
    InvalidR0 { r0: f64, lo: f64, hi: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Integrate(#[from] IntegrateError<DynamicsError>),
    #[error("monitor {kind:?} failed at r0={r0} with margin {margin:?}")]
    Monitor {
        r0: f64,
        kind: MonitorKind,
        margin: Option<f64>,
    },
}

/// Integrate from `(r0, pi/4, -pi/2)` until the trajectory leaves the
/// family's shooting domain.
pub fn shoot(params: &Params, r0: f64, cfg: &SolverConfig) -> Result<ShotResult, ShootError> {
    let upper = params.family.r0_upper();
    if !(r0 > 0.0 && r0 < upper) {
        return Err(ShootError::InvalidR0 { r0, lo: 0.0, hi: upper });
    }
    cfg.validate().map_err(ShootError::InvalidConfig)?;

    let kinds = params.domain().events();
    let closures: Vec<_> = kinds
        .iter()
        .map(|&k| move |y: &[f64; 3]| k.value(&ShootingState::from_array(*y)))
        .collect();
    let events: Vec<EventFn<'_, 3>> = closures.iter().map(|c| c as EventFn<'_, 3>).collect();
    let run = integrate_until_event(
        |y: &[f64; 3]| rhs(params, &ShootingState::from_array(*y)),
        ShootingState::initial(r0).to_array(),
        &events,
        &cfg.integrator,
    )?;

    let trajectory = run.trajectory;
    let (exit, coincident, s_star, state_exit) = match run.termination {
        Termination::Events(hits) => {
            let first = hits[0];
            let coincident = hits[1..]
                .iter()
                .map(|h| ExitClass::from_event(kinds[h.event]))
                .collect();
            (
                ExitClass::from_event(kinds[first.event]),
                coincident,
                first.s_hit,
                ShootingState::from_array(first.state_hit),
            )
        }
        Termination::Budget | Termination::ReachedEnd => (
            ExitClass::Budget,
            Vec::new(),
            trajectory.s_end(),
            ShootingState::from_array(trajectory.last()),
        ),
    };

    let mut shot = ShotResult {
        r0,
        exit,
        s_star,
        state_exit,
        coincident,
        trajectory,
        monitors: MonitorReport { entries: Vec::new() },
        stats: run.stats,
    };
    shot.monitors = evaluate_monitors(params, &shot)?;
    enforce_monitors(shot, cfg.strict_monitors)
}

fn enforce_monitors(shot: ShotResult, strict: bool) -> Result<ShotResult, ShootError> {
    if strict {
        if let Some(f) = shot.monitors.failures().next() {
            return Err(ShootError::Monitor {
                r0: shot.r0,
                kind: f.kind,
                margin: f.worst_margin,
            });
        }
    }
    Ok(shot)
}

/// Evaluate every bound monitor on a finished shot.
pub fn evaluate_monitors(params: &Params, shot: &ShotResult) -> Result<MonitorReport, ShootError> {
    let entries = MonitorKind::ALL
        .iter()
        .map(|&kind| match kind {
            MonitorKind::Monotonicity => monotonicity(params, shot),
            MonitorKind::ThetaLowerBound => Ok(theta_lower_bound(params, shot)),
            MonitorKind::TwoRadius => Ok(two_radius(params, shot)),
            MonitorKind::ExitRadius => Ok(exit_radius(params, shot)),
            MonitorKind::ArcLength => Ok(arc_length(params, shot)),
        })
        .collect::<Result<Vec<_>, ShootError>>()?;
    Ok(MonitorReport { entries })
}

fn rhs_at(params: &Params, s: f64, st: &ShootingState) -> Result<[f64; 3], ShootError> {
    rhs(params, st).map_err(|source| ShootError::Integrate(IntegrateError::Rhs { s, source }))
}

fn monotonicity(params: &Params, shot: &ShotResult) -> Result<MonitorOutcome, ShootError> {
    let mut worst: Option<(f64, f64, ShootingState)> = None;
    let mut passed = true;
    for (s, st) in shot.states() {
        let d = rhs_at(params, s, &st)?;
        let margins = [d[0] + MONOTONE_TOL, MONOTONE_TOL - d[1], d[2]];
        passed &= margins[0] >= 0.0 && margins[1] >= 0.0 && margins[2] > 0.0;
        let m = margins[0].min(margins[1]).min(margins[2]);
        if worst.is_none_or(|w| m < w.0) {
            worst = Some((m, s, st));
        }
    }
    let (m, s, st) = worst.expect("trajectory has samples");
    Ok(MonitorOutcome::measured(MonitorKind::Monotonicity, m, s, st, passed))
}

fn above_threshold(params: &Params) -> bool {
    params.lambda > lambda_threshold(params.family.kind)
}

/// Largest initial radius for the small-data bounds of each family.
fn small_r0_limit(params: &Params) -> f64 {
    match params.family.kind {
        FamilyKind::S2n => FRAC_PI_4,
        FamilyKind::S3nMinus1 => PI / 8.0,
    }
}

fn theta_lower_bound(params: &Params, shot: &ShotResult) -> MonitorOutcome {
    let kind = MonitorKind::ThetaLowerBound;
    let gap = 1.0 / (params.lambda * shot.r0.sin());
    if !above_threshold(params) || gap >= FRAC_PI_4 {
        return MonitorOutcome::skipped(kind);
    }
    let bound = FRAC_PI_4 - gap - THETA_BOUND_SLACK;
    let (m, s, st) = shot
        .states()
        .map(|(s, st)| (st.theta - bound, s, st))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("trajectory has samples");
    MonitorOutcome::measured(kind, m, s, st, m >= 0.0)
}

fn two_radius(params: &Params, shot: &ShotResult) -> MonitorOutcome {
    let kind = MonitorKind::TwoRadius;
    if above_threshold(params) || shot.r0 >= small_r0_limit(params) {
        return MonitorOutcome::skipped(kind);
    }
    let target = 2.0 * shot.r0;
    if shot.state_exit.r < target {
        return MonitorOutcome::vacuous(kind);
    }
    // r is nondecreasing, so theta is largest at the first crossing
    let (mut lo, mut hi) = (0.0, shot.s_star);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shot.state_at(mid).expect("inside trajectory").r >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let st = shot.state_at(hi).expect("inside trajectory");
    let bound = FRAC_PI_4 - 1.0 / (6.0 * f64::from(params.family.n));
    let m = bound - st.theta;
    MonitorOutcome::measured(kind, m, hi, st, m > 0.0)
}

fn exit_radius(params: &Params, shot: &ShotResult) -> MonitorOutcome {
    let kind = MonitorKind::ExitRadius;
    if above_threshold(params) || shot.r0 >= small_r0_limit(params) {
        return MonitorOutcome::skipped(kind);
    }
    let m = c_n(params.family.n) * shot.r0 - shot.state_exit.r;
    MonitorOutcome::measured(kind, m, shot.s_star, shot.state_exit, m >= 0.0)
}

fn arc_length(params: &Params, shot: &ShotResult) -> MonitorOutcome {
    let kind = MonitorKind::ArcLength;
    if params.family.kind != FamilyKind::S2n {
        return MonitorOutcome::skipped(kind);
    }
    let m = arc_length_bound(params.lambda) + ARC_LENGTH_SLACK - shot.s_star;
    MonitorOutcome::measured(kind, m, shot.s_star, shot.state_exit, m >= 0.0)
}

/// One shot taken while bracketing or bisecting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub r0: f64,
    pub exit: ExitClass,
    pub s_star: f64,
    pub state_exit: ShootingState,
    /// `alpha(s*) - beta` for `GammaWall` exits.
    pub gamma_residual: Option<f64>,
}

impl ShotRecord {
    fn of(shot: &ShotResult) -> Self {
        Self {
            r0: shot.r0,
            exit: shot.exit,
            s_star: shot.s_star,
            state_exit: shot.state_exit,
            gamma_residual: (shot.exit == ExitClass::GammaWall).then(|| shot.gamma_residual()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Shoot(#[from] ShootError),
    #[error("solver needs family {expected}, got {got}")]
    FamilyMismatch { expected: &'static str, got: &'static str },
    #[error("no bracket found after scanning to depth {depth}")]
    NoBracket { depth: u32, history: Vec<ShotRecord> },
    #[error("bisection did not converge: {reason}")]
    NonConvergence { reason: String, history: Vec<ShotRecord> },
    #[error("both bracket ends exit as {class:?}")]
    InconsistentClassification { class: ExitClass, history: Vec<ShotRecord> },
    #[error("no wall exit with negative orthogonality residual found")]
    Stage2Bracket { history: Vec<ShotRecord> },
    #[error("exit residual {residual:e} exceeds {tol:e} at r0={r0}")]
    ResidualTooLarge {
        r0: f64,
        residual: f64,
        tol: f64,
        history: Vec<ShotRecord>,
    },
}

impl SolveError {
    pub fn history(&self) -> &[ShotRecord] {
        match self {
            SolveError::Shoot(_) | SolveError::FamilyMismatch { .. } => &[],
            SolveError::NoBracket { history, .. }
            | SolveError::NonConvergence { history, .. }
            | SolveError::InconsistentClassification { history, .. }
            | SolveError::Stage2Bracket { history }
            | SolveError::ResidualTooLarge { history, .. } => history,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Bracket {
    /// Shot exiting through `alpha = 0`.
    pub low: ShotResult,
    /// Shot exiting through the family's mirror wall.
    pub high: ShotResult,
    pub history: Vec<ShotRecord>,
}

fn wall_class(params: &Params) -> ExitClass {
    match params.family.kind {
        FamilyKind::S2n => ExitClass::RWall,
        FamilyKind::S3nMinus1 => ExitClass::GammaWall,
    }
}

fn scan_from_below(params: &Params, k: u32) -> f64 {
    0.5 * params.family.r0_upper() * 0.5f64.powi(k as i32 + 1)
}

fn scan_from_above(params: &Params, k: u32) -> f64 {
    let upper = params.family.r0_upper();
    upper - 0.5 * upper * 0.5f64.powi(k as i32)
}

/// Find one shot exiting through `alpha = 0` by scanning `a 2^-k`
/// upwards from zero and one exiting through the wall by scanning
/// `upper - a 2^-k`, with `a` half the admissible interval.
pub fn bracket(params: &Params, cfg: &SolverConfig) -> Result<Bracket, SolveError> {
    cfg.validate().map_err(|e| SolveError::Shoot(ShootError::InvalidConfig(e)))?;
    let mut history = Vec::new();
    let mut find = |pick: &dyn Fn(u32) -> f64, want: ExitClass| -> Option<ShotResult> {
        for k in 0..=cfg.scan_depth {
            let r0 = pick(k);
            // deep in the scan r0 can reach the coordinate singularity
            let Ok(shot) = shoot(params, r0, cfg) else { break };
            history.push(ShotRecord::of(&shot));
            if shot.exit == want {
                return Some(shot);
            }
        }
        None
    };
    let low = find(&|k| scan_from_below(params, k), ExitClass::AlphaZero);
    let high = find(&|k| scan_from_above(params, k + 1), wall_class(params));
    match (low, high) {
        (Some(low), Some(high)) => Ok(Bracket { low, high, history }),
        _ => Err(SolveError::NoBracket {
            depth: cfg.scan_depth,
            history,
        }),
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub r0_star: f64,
    pub shot: ShotResult,
    /// Final class-change interval `(alpha side, wall side)`.
    pub class_interval: (f64, f64),
    pub history: Vec<ShotRecord>,
}

/// Bisect on exit class between an `AlphaZero` end and a wall end.
/// Returns the final `(alpha side, wall side)` pair.
fn class_bisection(
    params: &Params,
    cfg: &SolverConfig,
    mut a: f64,
    mut b: f64,
    history: &mut Vec<ShotRecord>,
) -> Result<(f64, f64), SolveError> {
    let wall = wall_class(params);
    let mut iterations = 0;
    while (b - a).abs() >= cfg.tol_r0 {
        if iterations == cfg.max_bisections {
            return Err(SolveError::NonConvergence {
                reason: format!("bracket width {:e} after {iterations} bisections", (b - a).abs()),
                history: std::mem::take(history),
            });
        }
        iterations += 1;
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let shot = shoot(params, m, cfg)?;
        history.push(ShotRecord::of(&shot));
        match shot.exit {
            ExitClass::AlphaZero => a = m,
            c if c == wall => b = m,
            other => {
                return Err(SolveError::NonConvergence {
                    reason: format!("shot at r0={m} exited as {other:?}"),
                    history: std::mem::take(history),
                })
            }
        }
    }
    Ok((a, b))
}

fn check_family(params: &Params, kind: FamilyKind) -> Result<(), SolveError> {
    if params.family.kind != kind {
        let label = |k| match k {
            FamilyKind::S2n => "s2n",
            FamilyKind::S3nMinus1 => "s3n-1",
        };
        return Err(SolveError::FamilyMismatch {
            expected: label(kind),
            got: label(params.family.kind),
        });
    }
    Ok(())
}

/// Residual of the corner condition `alpha = 0`, `r = pi/2` at an exit.
pub fn corner_residual(state: &ShootingState) -> f64 {
    state.alpha.abs().max((state.r - FRAC_PI_2).abs())
}

/// Find `r0` whose shot leaves the box through the corner
/// `{alpha = 0} x {r = pi/2}`.
pub fn solve_s2n(params: &Params, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    check_family(params, FamilyKind::S2n)?;
    cfg.validate().map_err(|e| SolveError::Shoot(ShootError::InvalidConfig(e)))?;
    let br = bracket(params, cfg)?;
    let mut history = br.history;
    let (a, b) = class_bisection(params, cfg, br.low.r0, br.high.r0, &mut history)?;
    let r0_star = 0.5 * (a + b);
    let shot = shoot(params, r0_star, cfg)?;
    history.push(ShotRecord::of(&shot));
    let residual = corner_residual(&shot.state_exit);
    if residual > EXIT_RESIDUAL_TOL {
        return Err(SolveError::ResidualTooLarge {
            r0: r0_star,
            residual,
            tol: EXIT_RESIDUAL_TOL,
            history,
        });
    }
    Ok(Solution {
        r0_star,
        shot,
        class_interval: (a, b),
        history,
    })
}

/// Find `r0` whose shot meets `tan r cos theta = 1` orthogonally.
///
/// Stage one locates the boundary between `AlphaZero` and `GammaWall`
/// exits. Stage two bisects `h = alpha(s*) - beta` between the wall side
/// of that boundary, where `h > 0`, and a wall exit near the upper end of
/// the admissible interval with `h < 0`. Shots exiting through
/// `alpha = 0` during stage two count as `h >= 0`.
pub fn solve_s3n_minus_1(params: &Params, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    check_family(params, FamilyKind::S3nMinus1)?;
    cfg.validate().map_err(|e| SolveError::Shoot(ShootError::InvalidConfig(e)))?;
    let br = bracket(params, cfg)?;
    let mut history = br.history;
    let (a, b) = class_bisection(params, cfg, br.low.r0, br.high.r0, &mut history)?;

    let b_shot = shoot(params, b, cfg)?;
    history.push(ShotRecord::of(&b_shot));
    if b_shot.exit != ExitClass::GammaWall || b_shot.gamma_residual() < -EXIT_RESIDUAL_TOL {
        return Err(SolveError::Stage2Bracket { history });
    }

    // negative end: a wall exit beyond the class boundary with h < 0
    let mut c = None;
    for k in 0..=cfg.scan_depth {
        let r0 = scan_from_above(params, k);
        if (r0 - b) * (br.high.r0 - br.low.r0) <= 0.0 {
            continue;
        }
        let shot = shoot(params, r0, cfg)?;
        history.push(ShotRecord::of(&shot));
        if shot.exit == ExitClass::GammaWall && shot.gamma_residual() < 0.0 {
            c = Some(r0);
            break;
        }
    }
    let Some(c) = c else {
        return Err(SolveError::Stage2Bracket { history });
    };

    // p: h >= 0 side, q: h < 0 side
    let (mut p, mut q) = (b, c);
    let mut iterations = 0;
    while (q - p).abs() >= cfg.tol_r0 {
        if iterations == cfg.max_bisections {
            return Err(SolveError::NonConvergence {
                reason: format!("stage-2 width {:e} after {iterations} bisections", (q - p).abs()),
                history,
            });
        }
        iterations += 1;
        let m = 0.5 * (p + q);
        if m == p || m == q {
            break;
        }
        let shot = shoot(params, m, cfg)?;
        history.push(ShotRecord::of(&shot));
        match shot.exit {
            ExitClass::AlphaZero => p = m,
            ExitClass::GammaWall if shot.gamma_residual() >= 0.0 => p = m,
            ExitClass::GammaWall => q = m,
            other => {
                return Err(SolveError::NonConvergence {
                    reason: format!("shot at r0={m} exited as {other:?}"),
                    history,
                })
            }
        }
    }
    let r0_star = 0.5 * (p + q);
    let shot = shoot(params, r0_star, cfg)?;
    history.push(ShotRecord::of(&shot));
    let residual = if shot.exit == ExitClass::GammaWall {
        shot.gamma_residual().abs()
    } else {
        f64::INFINITY
    };
    if residual > EXIT_RESIDUAL_TOL {
        return Err(SolveError::ResidualTooLarge {
            r0: r0_star,
            residual,
            tol: EXIT_RESIDUAL_TOL,
            history,
        });
    }
    Ok(Solution {
        r0_star,
        shot,
        class_interval: (a, b),
        history,
    })
}

/// Dispatch on the family.
pub fn solve(params: &Params, cfg: &SolverConfig) -> Result<Solution, SolveError> {
    match params.family.kind {
        FamilyKind::S2n => solve_s2n(params, cfg),
        FamilyKind::S3nMinus1 => solve_s3n_minus_1(params, cfg),
    }
}
