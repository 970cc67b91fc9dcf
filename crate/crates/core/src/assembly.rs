//! Closed generating curves built from a converged arc by reflection, and
//! their certificates.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use thiserror::Error;

use crate::dynamics::{
    alpha_from_tangent, symmetry, tangent_from_alpha, AmbientSwap, DynamicsError, Params, ShootingState,
    SymmetryMap,
};
use crate::geometry::{beta, Family, FamilyKind, OrbitPoint};
use crate::ode::DenseTrajectory;
use crate::shooting::{corner_residual, EXIT_RESIDUAL_TOL};
use crate::verify::{check_h_curve, HResiduals};

pub const CLOSURE_TOL: f64 = 1e-6;
pub const SEAM_TOL: f64 = 1e-6;
/// Default number of uniform segments of an assembled curve.
pub const DEFAULT_SEGMENTS: usize = 2048;
pub const MAX_COPIES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub s: f64,
    pub point: OrbitPoint,
    /// Tangent angle, continuous along the curve.
    pub alpha: f64,
    /// Index of the arc copy the sample lies on.
    pub copy: usize,
}

impl CurvePoint {
    pub fn state(&self) -> ShootingState {
        ShootingState::new(self.point.r, self.point.theta, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Seam {
    pub s: f64,
    /// Chart distance between the two copies at the seam.
    pub gap: f64,
    /// Tangent angle jump, reduced to `(-pi, pi]`, in absolute value.
    pub angle_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingCurve {
    pub family: Family,
    pub lambda: f64,
    pub samples: Vec<CurvePoint>,
    pub closed: bool,
    pub length: f64,
    pub copies: usize,
    /// Junctions between consecutive copies, including the closing one.
    pub seams: Vec<Seam>,
    pub r0_star: Option<f64>,
    /// Matching-condition residual of the arc the curve was built from.
    pub exit_residual: f64,
}

impl GeneratingCurve {
    pub fn params(&self) -> Params {
        Params {
            family: self.family,
            lambda: self.lambda,
        }
    }

    pub fn max_seam_defect(&self) -> f64 {
        self.seams.iter().map(|s| s.angle_defect).fold(0.0, f64::max)
    }

    pub fn closure_gap(&self) -> f64 {
        let (a, b) = (self.samples[0].point, self.samples[self.samples.len() - 1].point);
        chart_distance(a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssemblyError {
    #[error("assembler for {expected} given a {got} arc")]
    FamilyMismatch { expected: &'static str, got: &'static str },
    #[error("arc has degenerate length {0}")]
    EmptyArc(f64),
    #[error("arc exit residual {residual:e} exceeds {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("curve did not close within {copies} copies (gap {gap:e})")]
    NotClosed { copies: usize, gap: f64 },
    #[error("seam at s={s} has angle defect {defect:e}")]
    SeamMismatch { s: f64, defect: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

fn chart_distance(a: OrbitPoint, b: OrbitPoint) -> f64 {
    (a.r - b.r).hypot(a.theta - b.theta)
}

fn wrap_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TAU);
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// How one copy is obtained from the arc.
#[derive(Debug, Clone, Copy)]
enum CopyMap {
    /// State maps applied in order; each reverses the parameter.
    State(&'static [SymmetryMap]),
    /// Ambient coordinate permutation, `out[i] = v[perm[i]]`.
    Perm([usize; 3]),
}

#[derive(Debug, Clone, Copy)]
struct ArcCopy {
    map: CopyMap,
    reversed: bool,
}

impl ArcCopy {
    fn eval(&self, arc: &Arc<'_>, tau: f64) -> Result<(OrbitPoint, f64), DynamicsError> {
        let local = if self.reversed { arc.length - tau } else { tau };
        let st = arc.state(local);
        match self.map {
            CopyMap::State(maps) => {
                let out = maps.iter().fold(st, |acc, &m| symmetry(m, &acc));
                Ok((out.point(), out.alpha))
            }
            CopyMap::Perm(p) => {
                let permute = |v: [f64; 3]| [v[p[0]], v[p[1]], v[p[2]]];
                let q = permute(st.point().ambient());
                if q[0].hypot(q[1]) < crate::geometry::SINGULAR_TOL {
                    return Err(DynamicsError::Pole);
                }
                let mut t = permute(tangent_from_alpha(st.point(), st.alpha));
                if self.reversed {
                    t = t.map(|v| -v);
                }
                let point = OrbitPoint::from_ambient(q);
                Ok((point, alpha_from_tangent(point, t)))
            }
        }
    }
}

struct Arc<'a> {
    traj: &'a DenseTrajectory<3>,
    length: f64,
}

impl Arc<'_> {
    fn state(&self, s: f64) -> ShootingState {
        let s = s.clamp(0.0, self.length);
        ShootingState::from_array(self.traj.eval(s).expect("clamped into the arc"))
    }
}

fn check_arc(family: Family, expected: FamilyKind, arc: &DenseTrajectory<3>) -> Result<f64, AssemblyError> {
    if family.kind != expected {
        let label = |k| match k {
            FamilyKind::S2n => "s2n",
            FamilyKind::S3nMinus1 => "s3n-1",
        };
        return Err(AssemblyError::FamilyMismatch {
            expected: label(expected),
            got: label(family.kind),
        });
    }
    let length = arc.s_end();
    if length.is_nan() || length <= 0.0 {
        return Err(AssemblyError::EmptyArc(length));
    }
    Ok(length)
}

fn segments_for(copies: usize, min_segments: usize) -> usize {
    min_segments.div_ceil(copies) * copies
}

/// Sample `copies` on a uniform grid whose nodes include every seam.
fn build(
    params: &Params,
    arc: &Arc<'_>,
    copies: &[ArcCopy],
    min_segments: usize,
    closed: bool,
    exit_residual: f64,
) -> Result<GeneratingCurve, AssemblyError> {
    let total = segments_for(copies.len(), min_segments);
    let per_copy = total / copies.len();
    let length = arc.length * copies.len() as f64;
    let h = arc.length / per_copy as f64;

    let mut samples = Vec::with_capacity(total + 1);
    for (c, copy) in copies.iter().enumerate() {
        let last = if c + 1 == copies.len() { per_copy } else { per_copy - 1 };
        for j in 0..=last {
            let (point, alpha) = copy.eval(arc, j as f64 * h)?;
            samples.push(CurvePoint {
                s: (c * per_copy + j) as f64 * h,
                point,
                alpha,
                copy: c,
            });
        }
    }
    unwrap_alpha(&mut samples);

    let mut seams = Vec::new();
    let junctions = if closed { copies.len() } else { copies.len() - 1 };
    for c in 0..junctions {
        let next = (c + 1) % copies.len();
        let (p_in, a_in) = copies[c].eval(arc, arc.length)?;
        let (p_out, a_out) = copies[next].eval(arc, 0.0)?;
        seams.push(Seam {
            s: (c + 1) as f64 * arc.length,
            gap: chart_distance(p_in, p_out),
            angle_defect: wrap_angle(a_out - a_in).abs(),
        });
    }
    if let Some(bad) = seams.iter().find(|s| s.angle_defect > SEAM_TOL) {
        return Err(AssemblyError::SeamMismatch {
            s: bad.s,
            defect: bad.angle_defect,
        });
    }

    Ok(GeneratingCurve {
        family: params.family,
        lambda: params.lambda,
        samples,
        closed,
        length,
        copies: copies.len(),
        seams,
        r0_star: Some(arc.state(0.0).r),
        exit_residual,
    })
}

/// Make `alpha` continuous by removing jumps of `2 pi`.
fn unwrap_alpha(samples: &mut [CurvePoint]) {
    for i in 1..samples.len() {
        let prev = samples[i - 1].alpha;
        samples[i].alpha = prev + wrap_angle(samples[i].alpha - prev);
    }
}

/// Close an `S^(2n)` arc meeting `{alpha = 0} x {r = pi/2}` with the
/// mirrors `r = pi/2` and `theta = pi/4`.
pub fn assemble_s2n(params: &Params, arc: &DenseTrajectory<3>) -> Result<GeneratingCurve, AssemblyError> {
    assemble_s2n_with(params, arc, DEFAULT_SEGMENTS)
}

pub fn assemble_s2n_with(
    params: &Params,
    arc: &DenseTrajectory<3>,
    min_segments: usize,
) -> Result<GeneratingCurve, AssemblyError> {
    let length = check_arc(params.family, FamilyKind::S2n, arc)?;
    let residual = corner_residual(&ShootingState::from_array(arc.last()));
    if residual > EXIT_RESIDUAL_TOL {
        return Err(AssemblyError::ResidualTooLarge {
            residual,
            tol: EXIT_RESIDUAL_TOL,
        });
    }
    use SymmetryMap::{ReflectR, ReflectTheta};
    let copies = [
        ArcCopy { map: CopyMap::State(&[]), reversed: false },
        ArcCopy { map: CopyMap::State(&[ReflectR]), reversed: true },
        ArcCopy { map: CopyMap::State(&[ReflectR, ReflectTheta]), reversed: false },
        ArcCopy { map: CopyMap::State(&[ReflectTheta]), reversed: true },
    ];
    let arc = Arc { traj: arc, length };
    build(params, &arc, &copies, min_segments, true, residual)
}

/// Close an `S^(3n-1)` arc meeting `tan r cos theta = 1` orthogonally by
/// alternately reflecting through the mirror at its far end, until the
/// curve returns to its starting point.
pub fn assemble_s3n(params: &Params, arc: &DenseTrajectory<3>) -> Result<GeneratingCurve, AssemblyError> {
    assemble_s3n_with(params, arc, DEFAULT_SEGMENTS)
}

pub fn assemble_s3n_with(
    params: &Params,
    arc: &DenseTrajectory<3>,
    min_segments: usize,
) -> Result<GeneratingCurve, AssemblyError> {
    let length = check_arc(params.family, FamilyKind::S3nMinus1, arc)?;
    let end = ShootingState::from_array(arc.last());
    let residual = (end.alpha - beta(end.point())).abs();
    if residual > EXIT_RESIDUAL_TOL {
        return Err(AssemblyError::ResidualTooLarge {
            residual,
            tol: EXIT_RESIDUAL_TOL,
        });
    }
    let arc = Arc { traj: arc, length };
    let start = arc.state(0.0);

    let swap_perm = |s: AmbientSwap| {
        let mut p = [0, 1, 2];
        let (i, j) = s.indices();
        p.swap(i, j);
        p
    };
    let mut copies = vec![ArcCopy {
        map: CopyMap::Perm([0, 1, 2]),
        reversed: false,
    }];
    loop {
        let c = copies.len() - 1;
        let (end_point, end_alpha) = copies[c].eval(&arc, length)?;
        let gap = chart_distance(end_point, start.point());
        if gap <= CLOSURE_TOL && wrap_angle(end_alpha - start.alpha).abs() <= SEAM_TOL {
            break;
        }
        if copies.len() == MAX_COPIES {
            return Err(AssemblyError::NotClosed { copies: MAX_COPIES, gap });
        }
        // forward copies end on the Gamma mirror, reversed ones on theta = pi/4
        let swap = if c % 2 == 0 { AmbientSwap::XZ } else { AmbientSwap::XY };
        let s = swap_perm(swap);
        let CopyMap::Perm(p) = copies[c].map else {
            unreachable!("only permutation copies here")
        };
        copies.push(ArcCopy {
            map: CopyMap::Perm([s[p[0]], s[p[1]], s[p[2]]]),
            reversed: c % 2 == 0,
        });
    }
    build(params, &arc, &copies, min_segments, true, residual)
}

/// Dispatch on the family.
pub fn assemble(params: &Params, arc: &DenseTrajectory<3>) -> Result<GeneratingCurve, AssemblyError> {
    match params.family.kind {
        FamilyKind::S2n => assemble_s2n(params, arc),
        FamilyKind::S3nMinus1 => assemble_s3n(params, arc),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub closed: bool,
    pub closure_gap: f64,
    pub seam_defect: f64,
    pub simple: bool,
    pub min_boundary_dist: f64,
    pub length: f64,
    pub r0_star: Option<f64>,
    pub h_residuals: HResiduals,
    pub exit_residual: f64,
    pub copies: usize,
}

impl Certificate {
    /// Closed, simple, interior, with seams and curvature within tolerance.
    pub fn passes(&self, h_tol: f64) -> bool {
        self.closed
            && self.closure_gap <= CLOSURE_TOL
            && self.seam_defect <= SEAM_TOL
            && self.simple
            && self.min_boundary_dist > 0.0
            && self.h_residuals.max() <= h_tol
    }
}

/// Distance of a chart point to the boundary of the family's quotient.
pub fn boundary_distance(family: Family, p: OrbitPoint) -> f64 {
    let r_max = match family.kind {
        FamilyKind::S2n => PI,
        FamilyKind::S3nMinus1 => FRAC_PI_2,
    };
    p.theta.min(FRAC_PI_2 - p.theta).min(p.r).min(r_max - p.r)
}

pub fn certify(curve: &GeneratingCurve) -> Certificate {
    let pts: Vec<(f64, f64)> = curve.samples.iter().map(|c| (c.point.r, c.point.theta)).collect();
    let closure_gap = curve.closure_gap();
    Certificate {
        closed: curve.closed && closure_gap <= CLOSURE_TOL,
        closure_gap,
        seam_defect: curve.max_seam_defect(),
        simple: polyline_is_simple(&pts, curve.closed),
        min_boundary_dist: curve
            .samples
            .iter()
            .map(|c| boundary_distance(curve.family, c.point))
            .fold(f64::INFINITY, f64::min),
        length: curve.length,
        r0_star: curve.r0_star,
        h_residuals: check_h_curve(curve),
        exit_residual: curve.exit_residual,
        copies: curve.copies,
    }
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed-segment intersection test, touching included.
pub fn segments_intersect(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// True when no two non-adjacent segments of the polyline meet. For a
/// closed polyline the last point must repeat the first, and the first
/// and last segments count as adjacent.
pub fn polyline_is_simple(points: &[(f64, f64)], closed: bool) -> bool {
    let m = points.len().saturating_sub(1);
    if m < 2 {
        return true;
    }
    let seg = |i: usize| (points[i], points[i + 1]);
    let adjacent = |i: usize, j: usize| j == i + 1 || (closed && i == 0 && j == m - 1);

    let mean_len = (0..m)
        .map(|i| {
            let (a, b) = seg(i);
            (a.0 - b.0).hypot(a.1 - b.1)
        })
        .sum::<f64>()
        / m as f64;
    let cell = if mean_len > 0.0 { 2.0 * mean_len } else { 1.0 };
    let key = |v: f64| (v / cell).floor() as i64;

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..m {
        let (a, b) = seg(i);
        for gx in key(a.0.min(b.0))..=key(a.0.max(b.0)) {
            for gy in key(a.1.min(b.1))..=key(a.1.max(b.1)) {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut cells: Vec<_> = grid.into_iter().collect();
    cells.sort_unstable_by_key(|(k, _)| *k);
    for (_, members) in &cells {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                let (i, j) = (i.min(j), i.max(j));
                if i == j || adjacent(i, j) {
                    continue;
                }
                let (p1, p2) = seg(i);
                let (q1, q2) = seg(j);
                if segments_intersect(p1, p2, q1, q2) {
                    return false;
                }
            }
        }
    }
    true
}
