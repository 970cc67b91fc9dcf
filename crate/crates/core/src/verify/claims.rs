//! Claim-by-claim checks of the qualitative and quantitative statements
//! about the shooting trajectories, over a grid of parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::dynamics::{Params, ShootingState};
use crate::geometry::{Family, FamilyKind};
use crate::shooting::{shoot, ExitClass, MonitorKind, ShotResult, SolverConfig};
use crate::verify::curvature::check_h_trajectory;
use crate::verify::oracle::{oracle_shoot, OracleConfig};

/// Tolerance of the on-shell curvature identity along shots.
pub const H_IDENTITY_TOL: f64 = 1e-10;
/// Sup-norm agreement required between the adaptive engine and the oracle.
pub const ORACLE_AGREEMENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimId {
    Monotonicity,
    ExitDichotomy,
    SmallDataAlphaExit,
    LargeDataWallExit,
    ThetaLowerBound,
    TwoRadiusImplication,
    ExitRadiusBound,
    ArcLengthBound,
    MeanCurvatureIdentity,
    OracleAgreement,
}

impl ClaimId {
    pub const ALL: [ClaimId; 10] = [
        ClaimId::Monotonicity,
        ClaimId::ExitDichotomy,
        ClaimId::SmallDataAlphaExit,
        ClaimId::LargeDataWallExit,
        ClaimId::ThetaLowerBound,
        ClaimId::TwoRadiusImplication,
        ClaimId::ExitRadiusBound,
        ClaimId::ArcLengthBound,
        ClaimId::MeanCurvatureIdentity,
        ClaimId::OracleAgreement,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Monotonicity => "monotonicity",
            ClaimId::ExitDichotomy => "exit-dichotomy",
            ClaimId::SmallDataAlphaExit => "small-data-alpha-exit",
            ClaimId::LargeDataWallExit => "large-data-wall-exit",
            ClaimId::ThetaLowerBound => "theta-lower-bound",
            ClaimId::TwoRadiusImplication => "two-radius-implication",
            ClaimId::ExitRadiusBound => "exit-radius-bound",
            ClaimId::ArcLengthBound => "arc-length-bound",
            ClaimId::MeanCurvatureIdentity => "mean-curvature-identity",
            ClaimId::OracleAgreement => "oracle-agreement",
        }
    }

    /// The statement being checked.
    pub fn anchor(self) -> &'static str {
        match self {
            ClaimId::Monotonicity => {
                "dr/ds >= 0, dtheta/ds <= 0 and dalpha/ds > 0 for s in [0, s*]"
            }
            ClaimId::ExitDichotomy => {
                "the shot leaves the box through alpha(s*) = 0 or through the mirror wall: r(s*) = pi/2 (S^2n), tan r(s*) cos theta(s*) = 1 (S^3n-1)"
            }
            ClaimId::SmallDataAlphaExit => "for r0 sufficiently small, alpha(s*) = 0",
            ClaimId::LargeDataWallExit => {
                "for r0 sufficiently close to the upper end, the shot reaches the mirror wall; on tan r cos theta = 1 it arrives with alpha(s*) < -pi/4"
            }
            ClaimId::ThetaLowerBound => {
                "lambda above the threshold (4/pi for S^2n, 2 for S^3n-1) and 1/(lambda sin r0) < pi/4: 0 <= cot(2 theta(s)) <= cot(pi/2 - 2/(lambda sin r0))"
            }
            ClaimId::TwoRadiusImplication => {
                "lambda at most the threshold, r0 < pi/4 (S^2n) or pi/8 (S^3n-1): r(s1) >= 2 r0 implies theta(s1) < pi/4 - 1/(6n)"
            }
            ClaimId::ExitRadiusBound => {
                "lambda at most the threshold, r0 small: r(s*) <= c_n r0 with c_n = 2 exp(pi/(4n-4) cot(1/(3n)))"
            }
            ClaimId::ArcLengthBound => "s* <= pi/(2 lambda), hence L(C) <= 2 pi/lambda (S^2n)",
            ClaimId::MeanCurvatureIdentity => {
                "sum of principal curvatures with multiplicities equals lambda along the solution"
            }
            ClaimId::OracleAgreement => {
                "adaptive and fixed-step trajectories agree in sup norm to 1e-7 up to the exit"
            }
        }
    }

    fn monitor(self) -> Option<MonitorKind> {
        match self {
            ClaimId::Monotonicity => Some(MonitorKind::Monotonicity),
            ClaimId::ThetaLowerBound => Some(MonitorKind::ThetaLowerBound),
            ClaimId::TwoRadiusImplication => Some(MonitorKind::TwoRadius),
            ClaimId::ExitRadiusBound => Some(MonitorKind::ExitRadius),
            ClaimId::ArcLengthBound => Some(MonitorKind::ArcLength),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClaimStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scope {
    pub family: Family,
    pub lambda: f64,
    pub r0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub s: f64,
    pub state: ShootingState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimResult {
    pub claim: ClaimId,
    pub scope: Scope,
    pub status: ClaimStatus,
    /// Positive when the claim holds with room to spare.
    pub worst_margin: Option<f64>,
    pub evidence: Option<Evidence>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimGrid {
    pub families: Vec<FamilyKind>,
    pub ns: Vec<u32>,
    pub lambdas: Vec<f64>,
    pub small_r0: Vec<f64>,
    /// Offsets below the upper end of the admissible `r0` interval.
    pub large_offsets: Vec<f64>,
}

impl Default for ClaimGrid {
    fn default() -> Self {
        Self {
            families: vec![FamilyKind::S2n, FamilyKind::S3nMinus1],
            ns: vec![2, 3, 4],
            lambdas: vec![0.5, 1.0, 4.0 / PI + 0.1, 2.0, 3.0, 5.0],
            small_r0: vec![0.005, 0.01],
            large_offsets: vec![0.02, 0.005],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
enum Regime {
    Small,
    Large,
}

#[derive(Debug, Clone, Copy)]
struct GridPoint {
    params: Params,
    r0: f64,
    regime: Regime,
}

impl ClaimGrid {
    fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &kind in &self.families {
            for &n in &self.ns {
                let Ok(family) = Family::new(kind, n) else { continue };
                for &lambda in &self.lambdas {
                    let Ok(params) = Params::new(family, lambda) else { continue };
                    let upper = family.r0_upper();
                    let small = self.small_r0.iter().map(|&r0| (r0, Regime::Small));
                    let large = self.large_offsets.iter().map(|&d| (upper - d, Regime::Large));
                    for (r0, regime) in small.chain(large) {
                        if r0 > 0.0 && r0 < upper {
                            out.push(GridPoint { params, r0, regime });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub solver: SolverConfig,
    /// Cross-check every shot against the fixed-step oracle.
    pub oracle: Option<OracleConfig>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            oracle: Some(OracleConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimEntry {
    pub anchor: String,
    pub results: Vec<ClaimResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub all_passed: bool,
    pub shots: usize,
    pub claims: BTreeMap<ClaimId, ClaimEntry>,
}

impl ClaimReport {
    pub fn results(&self) -> impl Iterator<Item = &ClaimResult> {
        self.claims.values().flat_map(|e| e.results.iter())
    }

    pub fn failures(&self) -> impl Iterator<Item = &ClaimResult> {
        self.results().filter(|r| r.status == ClaimStatus::Fail)
    }
}

fn result(
    claim: ClaimId,
    point: &GridPoint,
    passed: bool,
    worst_margin: Option<f64>,
    evidence: Option<Evidence>,
    note: Option<String>,
) -> ClaimResult {
    ClaimResult {
        claim,
        scope: Scope {
            family: point.params.family,
            lambda: point.params.lambda,
            r0: point.r0,
        },
        status: if passed { ClaimStatus::Pass } else { ClaimStatus::Fail },
        worst_margin,
        evidence,
        note,
    }
}

fn evidence_at(s: f64, state: ShootingState) -> Option<Evidence> {
    Some(Evidence { s, state })
}

fn wall_of(kind: FamilyKind) -> ExitClass {
    match kind {
        FamilyKind::S2n => ExitClass::RWall,
        FamilyKind::S3nMinus1 => ExitClass::GammaWall,
    }
}

fn oracle_gap(point: &GridPoint, shot: &ShotResult, cfg: &OracleConfig) -> Result<(f64, f64), String> {
    let reference = oracle_shoot(&point.params, point.r0, cfg).map_err(|e| e.to_string())?;
    let Some(exit) = reference.exit else {
        return Err("oracle shot did not exit".into());
    };
    let s_common = shot.s_star.min(exit.s);
    let mut worst = (0.0f64, 0.0);
    for (&s, st) in reference.s.iter().zip(&reference.states) {
        if s > s_common {
            break;
        }
        let a = shot.state_at(s).expect("inside the adaptive trajectory");
        let d = (a.r - st.r).abs().max((a.theta - st.theta).abs()).max((a.alpha - st.alpha).abs());
        if d > worst.0 {
            worst = (d, s);
        }
    }
    let e = shot.state_exit;
    let d_exit = (e.r - exit.state.r)
        .abs()
        .max((e.theta - exit.state.theta).abs())
        .max((e.alpha - exit.state.alpha).abs())
        .max((shot.s_star - exit.s).abs());
    if d_exit > worst.0 {
        worst = (d_exit, shot.s_star);
    }
    Ok(worst)
}

fn evaluate_point(point: &GridPoint, cfg: &SuiteConfig) -> Vec<ClaimResult> {
    let params = &point.params;
    let kind = params.family.kind;
    let mut out = Vec::new();
    let shot = match shoot(params, point.r0, &cfg.solver) {
        Ok(shot) => shot,
        Err(e) => {
            out.push(result(ClaimId::ExitDichotomy, point, false, None, None, Some(e.to_string())));
            return out;
        }
    };
    let exit_ev = evidence_at(shot.s_star, shot.state_exit);
    let exit_note = Some(format!("{:?}", shot.exit));

    for claim in ClaimId::ALL {
        match claim {
            ClaimId::ExitDichotomy => {
                let ok = shot.exit == ExitClass::AlphaZero || shot.exit == wall_of(kind);
                out.push(result(claim, point, ok, None, exit_ev, exit_note.clone()));
            }
            ClaimId::SmallDataAlphaExit if point.regime == Regime::Small => {
                let ok = shot.exit == ExitClass::AlphaZero;
                out.push(result(claim, point, ok, None, exit_ev, exit_note.clone()));
            }
            ClaimId::LargeDataWallExit if point.regime == Regime::Large => {
                let mut ok = shot.exit == wall_of(kind);
                let mut margin = None;
                if kind == FamilyKind::S3nMinus1 {
                    let m = -FRAC_PI_4 - shot.state_exit.alpha;
                    ok &= m > 0.0;
                    margin = Some(m);
                }
                out.push(result(claim, point, ok, margin, exit_ev, exit_note.clone()));
            }
            ClaimId::MeanCurvatureIdentity => {
                let h = check_h_trajectory(params, &shot.trajectory, 256);
                let m = H_IDENTITY_TOL - h.algebraic;
                out.push(result(claim, point, m >= 0.0, Some(m), None, None));
            }
            ClaimId::OracleAgreement => {
                let Some(oracle) = &cfg.oracle else { continue };
                match oracle_gap(point, &shot, oracle) {
                    Ok((gap, s)) => {
                        let m = ORACLE_AGREEMENT_TOL - gap;
                        let ev = shot.state_at(s).and_then(|st| evidence_at(s, st));
                        out.push(result(claim, point, m >= 0.0, Some(m), ev, None));
                    }
                    Err(note) => out.push(result(claim, point, false, None, None, Some(note))),
                }
            }
            _ => {
                let Some(kind) = claim.monitor() else { continue };
                let m = shot.monitors.get(kind);
                if !m.applicable {
                    continue;
                }
                let ev = m.worst_s.zip(m.worst_state).and_then(|(s, st)| evidence_at(s, st));
                let note = m.worst_margin.is_none().then(|| {
                    format!("premise not reached: r(s*)/r0 = {:.4}", shot.state_exit.r / point.r0)
                });
                out.push(result(claim, point, m.passed, m.worst_margin, ev, note));
            }
        }
    }
    out
}

/// Shoot every grid point and evaluate every applicable claim. Grid
/// points run in parallel; the report is ordered by claim id and then by
/// grid index.
pub fn run_claim_suite(grid: &ClaimGrid, cfg: &SuiteConfig) -> ClaimReport {
    let points = grid.points();
    let per_point: Vec<Vec<ClaimResult>> = points.par_iter().map(|p| evaluate_point(p, cfg)).collect();

    let mut claims: BTreeMap<ClaimId, ClaimEntry> = BTreeMap::new();
    for r in per_point.into_iter().flatten() {
        claims
            .entry(r.claim)
            .or_insert_with(|| ClaimEntry {
                anchor: r.claim.anchor().to_string(),
                results: Vec::new(),
            })
            .results
            .push(r);
    }
    let all_passed = claims
        .values()
        .all(|e| e.results.iter().all(|r| r.status == ClaimStatus::Pass));
    ClaimReport {
        all_passed,
        shots: points.len(),
        claims,
    }
}
