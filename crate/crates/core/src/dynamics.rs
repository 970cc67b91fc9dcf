//! Reduced ODE systems for the generating curves, their reflection
//! symmetries, the shooting domains and the exit event functions.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use thiserror::Error;

use crate::geometry::{Family, FamilyKind, GeometryError, OrbitPoint, SINGULAR_TOL};

/// Trajectories crossing `theta = THETA_MIN` are integration faults.
pub const THETA_MIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("mean curvature target must be positive and finite, got {0}")]
    InvalidLambda(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("phase coordinates need x > 0, y >= 0, z >= 0; got ({x}, {y}, {z})")]
    PhaseDomain { x: f64, y: f64, z: f64 },
    #[error("state ({r}, {theta}, {alpha}) is outside the phase chart: {reason}")]
    PhaseChart {
        r: f64,
        theta: f64,
        alpha: f64,
        reason: &'static str,
    },
    #[error("phase system is only defined for the S^(2n) family")]
    PhaseFamily,
    #[error("reflected point is at a pole of the chart")]
    Pole,
}

/// Phase point `(r, theta, alpha)`; `alpha` is the angle of the unit
/// tangent against `d/dr` and is never reduced modulo `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingState {
    pub r: f64,
    pub theta: f64,
    pub alpha: f64,
}

impl ShootingState {
    pub fn new(r: f64, theta: f64, alpha: f64) -> Self {
        Self { r, theta, alpha }
    }

    /// Start of every shot: on the mirror `theta = pi/4`, moving orthogonally.
    pub fn initial(r0: f64) -> Self {
        Self::new(r0, FRAC_PI_4, -FRAC_PI_2)
    }

    pub fn point(&self) -> OrbitPoint {
        OrbitPoint::new(self.r, self.theta)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.r, self.theta, self.alpha]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.r.is_finite() && self.theta.is_finite() && self.alpha.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub family: Family,
    pub lambda: f64,
}

impl Params {
    pub fn new(family: Family, lambda: f64) -> Result<Self, DynamicsError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(DynamicsError::InvalidLambda(lambda));
        }
        Ok(Self { family, lambda })
    }

    /// The shooting domain used by this family.
    pub fn domain(&self) -> DomainBox {
        match self.family.kind {
            FamilyKind::S2n => DomainBox::B,
            FamilyKind::S3nMinus1 => DomainBox::BHat,
        }
    }
}

fn singular(what: &'static str, s: &ShootingState) -> DynamicsError {
    DynamicsError::Geometry(GeometryError::Singular {
        what,
        r: s.r,
        theta: s.theta,
    })
}

/// `d(alpha)/ds` from the constant mean curvature condition.
pub fn rhs_alpha(params: &Params, state: &ShootingState) -> Result<f64, DynamicsError> {
    let (sr, cr) = state.r.sin_cos();
    let (sa, ca) = state.alpha.sin_cos();
    if sr.abs() < SINGULAR_TOL {
        return Err(singular("sin r", state));
    }
    let m = f64::from(params.family.n);

    // cot(2 theta) * cos(alpha): exactly zero on the mirror theta = pi/4,
    // and only singular when cos(alpha) does not vanish.
    let cot2t_term = if state.theta == FRAC_PI_4 || ca == 0.0 {
        0.0
    } else {
        let (s2, c2) = (2.0 * state.theta).sin_cos();
        if s2.abs() < SINGULAR_TOL {
            return Err(singular("sin 2theta", state));
        }
        (c2 / s2) * ca
    };

    let mut d = (2.0 * m - 2.0) * cot2t_term / sr - (2.0 * m - 1.0) * (cr / sr) * sa + params.lambda;
    if params.family.kind == FamilyKind::S3nMinus1 {
        if cr.abs() < SINGULAR_TOL {
            return Err(singular("cos r", state));
        }
        d += (m - 1.0) * (sr / cr) * sa;
    }
    Ok(d)
}

/// Full right-hand side `(dr/ds, dtheta/ds, dalpha/ds)`.
pub fn rhs(params: &Params, state: &ShootingState) -> Result<[f64; 3], DynamicsError> {
    let alpha_dot = rhs_alpha(params, state)?;
    let (sa, ca) = state.alpha.sin_cos();
    Ok([ca, sa / state.r.sin(), alpha_dot])
}

/// Transformed coordinates `x = tan r`, `y = cot 2theta`, `z = -cot alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

pub fn rhs_phase(params: &Params, phase: &PhaseState) -> Result<[f64; 3], DynamicsError> {
    if params.family.kind != FamilyKind::S2n {
        return Err(DynamicsError::PhaseFamily);
    }
    let PhaseState { x, y, z } = *phase;
    if !(x > 0.0 && y >= 0.0 && z >= 0.0) {
        return Err(DynamicsError::PhaseDomain { x, y, z });
    }
    let m = f64::from(params.family.n);
    let sx = (x * x + 1.0).sqrt();
    let sz = (z * z + 1.0).sqrt();
    let dx = (x * x + 1.0) * z / sz;
    let dy = 2.0 * (y * y + 1.0) * sx / (x * sz);
    let dz = (z * z + 1.0)
        * ((2.0 * m - 2.0) * y * z * sx / (x * sz) + (2.0 * m - 1.0) / (x * sz) + params.lambda);
    Ok([dx, dy, dz])
}

pub fn to_phase(state: &ShootingState) -> Result<PhaseState, DynamicsError> {
    let ShootingState { r, theta, alpha } = *state;
    let err = |reason| DynamicsError::PhaseChart {
        r,
        theta,
        alpha,
        reason,
    };
    if !(r > 0.0 && r < FRAC_PI_2) || (FRAC_PI_2 - r) < SINGULAR_TOL {
        return Err(err("r must lie in (0, pi/2)"));
    }
    if !(theta > 0.0 && theta <= FRAC_PI_4) {
        return Err(err("theta must lie in (0, pi/4]"));
    }
    if !(-FRAC_PI_2..0.0).contains(&alpha) || alpha.abs() < SINGULAR_TOL {
        return Err(err("alpha must lie in [-pi/2, 0)"));
    }
    let y = if theta == FRAC_PI_4 {
        0.0
    } else {
        1.0 / (2.0 * theta).tan()
    };
    let z = if alpha == -FRAC_PI_2 {
        0.0
    } else {
        -1.0 / alpha.tan()
    };
    Ok(PhaseState::new(r.tan(), y, z))
}

pub fn from_phase(phase: &PhaseState) -> Result<ShootingState, DynamicsError> {
    let PhaseState { x, y, z } = *phase;
    if !(x > 0.0 && y >= 0.0 && z >= 0.0) || !(x.is_finite() && y.is_finite() && z.is_finite()) {
        return Err(DynamicsError::PhaseDomain { x, y, z });
    }
    Ok(ShootingState::new(
        x.atan(),
        0.5 * 1f64.atan2(y),
        (-1f64).atan2(z),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryMap {
    /// Mirror `theta = pi/4`.
    ReflectTheta,
    /// Mirror `r = pi/2`.
    ReflectR,
    /// Orientation reversal, which flips the sign of the mean curvature.
    Reverse,
}

/// Pointwise action of a symmetry; callers pair it with `s -> L - s`.
pub fn symmetry(map: SymmetryMap, s: &ShootingState) -> ShootingState {
    match map {
        SymmetryMap::ReflectTheta => ShootingState::new(s.r, FRAC_PI_2 - s.theta, PI - s.alpha),
        SymmetryMap::ReflectR => ShootingState::new(PI - s.r, s.theta, -s.alpha),
        SymmetryMap::Reverse => ShootingState::new(s.r, s.theta, PI + s.alpha),
    }
}

/// Unit tangent in ambient `R^3` for tangent angle `alpha` at `p`.
pub fn tangent_from_alpha(p: OrbitPoint, alpha: f64) -> [f64; 3] {
    let (sr, cr) = p.r.sin_cos();
    let (st, ct) = p.theta.sin_cos();
    let (sa, ca) = alpha.sin_cos();
    let e_r = [cr * ct, cr * st, -sr];
    let e_t = [-st, ct, 0.0];
    std::array::from_fn(|i| ca * e_r[i] + sa * e_t[i])
}

/// Tangent angle in `(-pi, pi]` of an ambient tangent vector at `p`.
pub fn alpha_from_tangent(p: OrbitPoint, t: [f64; 3]) -> f64 {
    let (sr, cr) = p.r.sin_cos();
    let (st, ct) = p.theta.sin_cos();
    let along_r = t[0] * cr * ct + t[1] * cr * st - t[2] * sr;
    let along_t = -t[0] * st + t[1] * ct;
    along_t.atan2(along_r)
}

/// Coordinate swap of the ambient quotient triple; each one is a mirror
/// symmetry of the `S^(3n-1)` system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AmbientSwap {
    /// Mirror `theta = pi/4`.
    XY,
    /// Mirror `tan r cos theta = 1`.
    XZ,
    /// Mirror `tan r sin theta = 1`.
    YZ,
}

impl AmbientSwap {
    pub fn indices(self) -> (usize, usize) {
        match self {
            AmbientSwap::XY => (0, 1),
            AmbientSwap::XZ => (0, 2),
            AmbientSwap::YZ => (1, 2),
        }
    }

    pub fn apply(self, mut v: [f64; 3]) -> [f64; 3] {
        let (i, j) = self.indices();
        v.swap(i, j);
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub point: OrbitPoint,
    /// Unit tangent in ambient coordinates.
    pub tangent: [f64; 3],
}

pub fn reflect_samples(
    swap: AmbientSwap,
    samples: &[CurveSample],
) -> Result<Vec<CurveSample>, DynamicsError> {
    samples
        .iter()
        .map(|s| {
            let q = swap.apply(s.point.ambient());
            if (q[0] * q[0] + q[1] * q[1]).sqrt() < SINGULAR_TOL {
                return Err(DynamicsError::Pole);
            }
            Ok(CurveSample {
                point: OrbitPoint::from_ambient(q),
                tangent: swap.apply(s.tangent),
            })
        })
        .collect()
}

/// Reflection through the mirror `{x = z}`.
pub fn reflect_curve_xz(samples: &[CurveSample]) -> Result<Vec<CurveSample>, DynamicsError> {
    reflect_samples(AmbientSwap::XZ, samples)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainBox {
    /// `(0, pi/2] x (0, pi/4] x [-pi/2, 0]`.
    B,
    /// Same ranges with `r <= atan(sqrt 2)` and `tan r cos theta <= 1`.
    BHat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    Alpha,
    RWall,
    Gamma,
    ThetaGuard,
}

impl EventKind {
    /// Event function; the event fires when it crosses zero upwards.
    pub fn value(self, s: &ShootingState) -> f64 {
        match self {
            EventKind::Alpha => s.alpha,
            EventKind::RWall => s.r - FRAC_PI_2,
            EventKind::Gamma => s.r.tan() * s.theta.cos() - 1.0,
            EventKind::ThetaGuard => THETA_MIN - s.theta,
        }
    }
}

impl DomainBox {
    pub fn events(self) -> &'static [EventKind] {
        match self {
            DomainBox::B => &[EventKind::Alpha, EventKind::RWall, EventKind::ThetaGuard],
            DomainBox::BHat => &[EventKind::Alpha, EventKind::Gamma, EventKind::ThetaGuard],
        }
    }

    pub fn contains(self, s: &ShootingState) -> bool {
        let base = s.theta > 0.0
            && s.theta <= FRAC_PI_4
            && (-FRAC_PI_2..=0.0).contains(&s.alpha)
            && s.r > 0.0;
        match self {
            DomainBox::B => base && s.r <= FRAC_PI_2,
            DomainBox::BHat => {
                base && s.r <= 2f64.sqrt().atan() && s.r.tan() * s.theta.cos() <= 1.0
            }
        }
    }
}

pub fn events(domain: DomainBox) -> &'static [EventKind] {
    domain.events()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(family: Family, lambda: f64) -> Params {
        Params::new(family, lambda).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let s2 = p(Family::s2n(2).unwrap(), 1.0);
        let d = rhs(&s2, &ShootingState::new(FRAC_PI_4, FRAC_PI_4, -FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], -2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(d[2], 4.0, epsilon = 1e-14);

        let s3 = p(Family::s3n_minus_1(2).unwrap(), 1.0);
        let d = rhs(&s3, &ShootingState::new(FRAC_PI_4, FRAC_PI_4, -FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(d[1], -2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(d[2], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_radius_is_stationary() {
        let params = p(Family::s2n(2).unwrap(), 3.0);
        for theta in [0.3, FRAC_PI_4, 1.2] {
            let d = rhs(&params, &ShootingState::new(FRAC_PI_4, theta, FRAC_PI_2)).unwrap();
            assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(d[1], 2f64.sqrt(), epsilon = 1e-14);
            assert_abs_diff_eq!(d[2], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn lambda_must_be_positive() {
        let f = Family::s2n(2).unwrap();
        assert!(Params::new(f, 0.0).is_err());
        assert!(Params::new(f, -1.0).is_err());
        assert!(Params::new(f, f64::NAN).is_err());
    }

    #[test]
    fn rhs_reports_singularities() {
        let params = p(Family::s2n(2).unwrap(), 1.0);
        assert!(rhs(&params, &ShootingState::new(0.0, 0.5, -0.3)).is_err());
        assert!(rhs(&params, &ShootingState::new(0.5, 0.0, -0.3)).is_err());
        let s3 = p(Family::s3n_minus_1(2).unwrap(), 1.0);
        assert!(rhs(&s3, &ShootingState::new(FRAC_PI_2, 0.5, -0.3)).is_err());
    }

    #[test]
    fn phase_rhs_examples() {
        let params = p(Family::s2n(2).unwrap(), 1.0);
        let d = rhs_phase(&params, &PhaseState::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(d[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[1], 2.0 * 2f64.sqrt(), epsilon = 1e-14);
        // (z^2 + 1) * dalpha/ds at (pi/4, pi/4, -pi/2), which is 4
        assert_abs_diff_eq!(d[2], 4.0, epsilon = 1e-14);
        let d = rhs_phase(&params, &PhaseState::new(1.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d[0], 2f64.sqrt(), epsilon = 1e-14);

        assert!(rhs_phase(&params, &PhaseState::new(0.0, 0.0, 0.0)).is_err());
        let s3 = p(Family::s3n_minus_1(2).unwrap(), 1.0);
        assert!(matches!(
            rhs_phase(&s3, &PhaseState::new(1.0, 0.0, 0.0)),
            Err(DynamicsError::PhaseFamily)
        ));
    }

    #[test]
    fn phase_chart_examples() {
        let q = to_phase(&ShootingState::new(FRAC_PI_4, FRAC_PI_4, -FRAC_PI_2)).unwrap();
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-15);
        assert_eq!((q.y, q.z), (0.0, 0.0));
        let q = to_phase(&ShootingState::new(PI / 3.0, PI / 8.0, -FRAC_PI_4)).unwrap();
        assert_abs_diff_eq!(q.x, 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(q.y, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.z, 1.0, epsilon = 1e-14);

        assert!(to_phase(&ShootingState::new(0.5, 0.5, 0.0)).is_err());
        assert!(to_phase(&ShootingState::new(FRAC_PI_2, 0.5, -0.5)).is_err());
    }

    /// Pushforward of `rhs` through the phase chart: fourth-order central
    /// differences of the chart along the vector field.
    fn pushforward(params: &Params, s: &ShootingState) -> [f64; 3] {
        let v = rhs(params, s).unwrap();
        let vmax = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let h = 2e-4 / vmax;
        let at = |t: f64| {
            let q = to_phase(&ShootingState::from_array(std::array::from_fn(|i| {
                s.to_array()[i] + t * v[i]
            })))
            .unwrap();
            [q.x, q.y, q.z]
        };
        let (p1, m1, p2, m2) = (at(h), at(-h), at(2.0 * h), at(-2.0 * h));
        std::array::from_fn(|i| (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h))
    }

    #[test]
    fn phase_rhs_matches_chain_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            let params = p(Family::s2n(n).unwrap(), rng.gen_range(0.2..4.0));
            for _ in 0..100 {
                let s = ShootingState::new(
                    rng.gen_range(0.2..1.3),
                    rng.gen_range(0.2..0.75),
                    rng.gen_range(-1.4..-0.2),
                );
                let fd = pushforward(&params, &s);
                let exact = rhs_phase(&params, &to_phase(&s).unwrap()).unwrap();
                for i in 0..3 {
                    let scale = exact[i].abs().max(1.0);
                    assert!(
                        (fd[i] - exact[i]).abs() <= 1e-9 * scale,
                        "component {i}: fd={} exact={} at {s:?}",
                        fd[i],
                        exact[i]
                    );
                }
            }
        }
    }

    #[test]
    fn symmetry_examples() {
        let s = ShootingState::new(0.6, 0.3, -1.0);
        let t = symmetry(SymmetryMap::ReflectTheta, &s);
        assert_eq!(t, ShootingState::new(0.6, FRAC_PI_2 - 0.3, PI + 1.0));
        let rr = symmetry(SymmetryMap::Reverse, &symmetry(SymmetryMap::Reverse, &s));
        assert_abs_diff_eq!(rr.alpha - s.alpha, 2.0 * PI, epsilon = 1e-15);
    }

    #[test]
    fn symmetries_map_solutions_to_solutions() {
        // A reflected, time-reversed solution must satisfy the same ODE:
        // d/ds of the image equals rhs evaluated at the image.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = p(Family::s2n(3).unwrap(), 1.7);
        for _ in 0..200 {
            let s = ShootingState::new(
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..1.4),
                rng.gen_range(-3.0..3.0),
            );
            let v = rhs(&params, &s).unwrap();
            // images of (r, theta, alpha)(L - s): derivative picks a minus sign
            let t = symmetry(SymmetryMap::ReflectTheta, &s);
            let vt = rhs(&params, &t).unwrap();
            assert_abs_diff_eq!(vt[0], -v[0], epsilon = 1e-9);
            assert_abs_diff_eq!(vt[1], v[1], epsilon = 1e-9);
            assert_abs_diff_eq!(vt[2], v[2], epsilon = 1e-9);
            let b = symmetry(SymmetryMap::ReflectR, &s);
            let vb = rhs(&params, &b).unwrap();
            assert_abs_diff_eq!(vb[0], v[0], epsilon = 1e-9);
            assert_abs_diff_eq!(vb[1], -v[1], epsilon = 1e-9);
            assert_abs_diff_eq!(vb[2], v[2], epsilon = 1e-9);
        }
    }

    #[test]
    fn reverse_flips_mean_curvature() {
        let params = p(Family::s2n(2).unwrap(), 1.3);
        let neg = Params {
            lambda: -1.3,
            ..params
        };
        let s = ShootingState::new(0.8, 0.5, -0.4);
        let v = rhs(&params, &s).unwrap();
        let w = rhs(&neg, &symmetry(SymmetryMap::Reverse, &s)).unwrap();
        assert_abs_diff_eq!(w[0], -v[0], epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], -v[1], epsilon = 1e-12);
        assert_abs_diff_eq!(w[2], -v[2], epsilon = 1e-12);
    }

    #[test]
    fn xz_reflection_examples() {
        let on_mirror_r = (1.0f64 / 0.5f64.cos()).atan();
        let p0 = OrbitPoint::new(on_mirror_r, 0.5);
        let s = CurveSample {
            point: p0,
            tangent: tangent_from_alpha(p0, -0.3),
        };
        let q = reflect_curve_xz(&[s]).unwrap()[0];
        assert_abs_diff_eq!(q.point.r, p0.r, epsilon = 1e-12);
        assert_abs_diff_eq!(q.point.theta, p0.theta, epsilon = 1e-12);

        let p1 = OrbitPoint::new(FRAC_PI_2, FRAC_PI_4);
        let s = CurveSample {
            point: p1,
            tangent: tangent_from_alpha(p1, 0.0),
        };
        let q = reflect_curve_xz(&[s]).unwrap()[0];
        assert_abs_diff_eq!(q.point.r, FRAC_PI_4, epsilon = 1e-12);
        assert_abs_diff_eq!(q.point.theta, FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn xz_reflection_at_pole_errors() {
        // ambient (1, 0, 0) is sent to the pole (0, 0, 1)
        let p = OrbitPoint::new(FRAC_PI_2, 0.0);
        let s = CurveSample {
            point: p,
            tangent: [0.0, 1.0, 0.0],
        };
        assert!(matches!(reflect_curve_xz(&[s]), Err(DynamicsError::Pole)));
    }

    #[test]
    fn xz_mirror_preserves_the_ode() {
        // The mirror image of a solution, traversed backwards, is again a
        // solution: compare its tangent-angle derivative by finite differences.
        let params = p(Family::s3n_minus_1(2).unwrap(), 1.0);
        let s0 = ShootingState::new(0.7, 0.5, -0.6);
        let h = 1e-5;
        let step = |s: ShootingState, h: f64| {
            // RK4, enough for a local finite-difference check
            let f = |x: [f64; 3]| rhs(&params, &ShootingState::from_array(x)).unwrap();
            let y = s.to_array();
            let k1 = f(y);
            let k2 = f(std::array::from_fn(|i| y[i] + 0.5 * h * k1[i]));
            let k3 = f(std::array::from_fn(|i| y[i] + 0.5 * h * k2[i]));
            let k4 = f(std::array::from_fn(|i| y[i] + h * k3[i]));
            ShootingState::from_array(std::array::from_fn(|i| {
                y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            }))
        };
        let img = |s: ShootingState| {
            let c = CurveSample {
                point: s.point(),
                tangent: tangent_from_alpha(s.point(), s.alpha),
            };
            let q = reflect_curve_xz(&[c]).unwrap()[0];
            let back = q.tangent.map(|t| -t);
            (q.point, alpha_from_tangent(q.point, back))
        };
        let (p_mid, a_mid) = img(s0);
        // reversed parameter: the image at +sigma is the source at -sigma
        let (_, a_plus) = img(step(s0, -h));
        let (_, a_minus) = img(step(s0, h));
        let fd = (a_plus - a_minus) / (2.0 * h);
        let image = ShootingState::new(p_mid.r, p_mid.theta, a_mid);
        let exact = rhs_alpha(&params, &image).unwrap();
        assert_abs_diff_eq!(fd, exact, epsilon = 1e-6);
    }

    #[test]
    fn event_values() {
        let g = ShootingState::new(2f64.sqrt().atan(), FRAC_PI_4, -1.0);
        assert_abs_diff_eq!(EventKind::Gamma.value(&g), 0.0, epsilon = 1e-15);
        assert_eq!(EventKind::RWall.value(&ShootingState::new(FRAC_PI_2, 0.2, -1.0)), 0.0);
        assert_eq!(DomainBox::B.events().len(), 3);
        assert!(DomainBox::BHat.events().contains(&EventKind::Gamma));
    }

    #[test]
    fn domain_membership() {
        let s = ShootingState::initial(0.5);
        assert!(DomainBox::B.contains(&s));
        assert!(DomainBox::BHat.contains(&s));
        assert!(!DomainBox::BHat.contains(&ShootingState::initial(1.0)));
        assert!(DomainBox::B.contains(&ShootingState::initial(1.0)));
    }

    fn interior(domain: DomainBox) -> impl Strategy<Value = ShootingState> {
        let r_hi = match domain {
            DomainBox::B => FRAC_PI_2,
            DomainBox::BHat => 2f64.sqrt().atan(),
        };
        (1e-3..r_hi, 1e-3..FRAC_PI_4, -FRAC_PI_2..0.0)
            .prop_map(|(r, t, a)| ShootingState::new(r, t, a))
            .prop_filter("inside box", move |s| domain.contains(s))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn sign_structure_in_b(s in interior(DomainBox::B), n in 2u32..6, lambda in 1e-3..10.0f64) {
            let d = rhs(&p(Family::s2n(n).unwrap(), lambda), &s).unwrap();
            prop_assert!(d[0] >= 0.0 && d[1] <= 0.0 && d[2] > 0.0);
        }

        #[test]
        fn sign_structure_in_bhat(s in interior(DomainBox::BHat), n in 2u32..6, lambda in 1e-3..10.0f64) {
            let d = rhs(&p(Family::s3n_minus_1(n).unwrap(), lambda), &s).unwrap();
            prop_assert!(d[0] >= 0.0 && d[1] <= 0.0 && d[2] > 0.0);
        }
    }

    proptest! {
        #[test]
        fn phase_chart_inverse(r in 1e-3..1.5f64, t in 1e-3..FRAC_PI_4, a in -FRAC_PI_2..-1e-3f64) {
            let s = ShootingState::new(r, t, a);
            let back = from_phase(&to_phase(&s).unwrap()).unwrap();
            prop_assert!((back.r - r).abs() < 1e-12);
            prop_assert!((back.theta - t).abs() < 1e-12);
            prop_assert!((back.alpha - a).abs() < 1e-12);
        }

        #[test]
        fn reflect_r_is_involution(r in -5.0..5.0f64, t in -5.0..5.0f64, a in -9.0..9.0f64) {
            let s = ShootingState::new(r, t, a);
            let back = symmetry(SymmetryMap::ReflectR, &symmetry(SymmetryMap::ReflectR, &s));
            prop_assert!((back.r - r).abs() < 1e-14 && back.theta == t && back.alpha == a);
            let back = symmetry(SymmetryMap::ReflectTheta, &symmetry(SymmetryMap::ReflectTheta, &s));
            prop_assert!((back.theta - t).abs() < 1e-14 && (back.alpha - a).abs() < 1e-14);
        }

        #[test]
        fn xz_double_reflection(r in 0.01..FRAC_PI_2 - 0.01, t in 0.01..FRAC_PI_2 - 0.01, a in -PI..PI) {
            let p0 = OrbitPoint::new(r, t);
            let s = CurveSample { point: p0, tangent: tangent_from_alpha(p0, a) };
            let back = reflect_curve_xz(&reflect_curve_xz(&[s]).unwrap()).unwrap()[0];
            prop_assert!((back.point.r - r).abs() < 1e-12);
            prop_assert!((back.point.theta - t).abs() < 1e-12);
            for i in 0..3 {
                prop_assert!((back.tangent[i] - s.tangent[i]).abs() < 1e-12);
            }
        }
    }
}
