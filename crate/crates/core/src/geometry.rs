//! Orbit-space geometry: quotient coordinates, the ambient lift, and the
//! principal curvatures of the equivariant hypersurfaces.
//!
//! Both quotients are pieces of the unit 2-sphere carrying the metric
//! `dr^2 + sin^2 r dtheta^2`. A chart point `(r, theta)` corresponds to the
//! ambient triple `(x, y, z) = (sin r cos theta, sin r sin theta, cos r)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::dynamics::ShootingState;

/// Denominators smaller than this are reported as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("n must be at least 2, got {0}")]
    InvalidDimension(u32),
    #[error("expected {expected} direction vectors, got {got}")]
    DirectionCount { expected: usize, got: usize },
    #[error("direction {index} has length {len}, expected {expected}")]
    DirectionLength {
        index: usize,
        len: usize,
        expected: usize,
    },
    #[error("direction {index} is not a unit vector (norm {norm})")]
    NonUnitDirection { index: usize, norm: f64 },
    #[error("singular coordinates: {what} vanishes at r={r}, theta={theta}")]
    Singular {
        what: &'static str,
        r: f64,
        theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    /// `O(n) x O(n)` acting on the sphere of dimension `2n`.
    S2n,
    /// `O(n) x O(n) x O(n)` acting on the sphere of dimension `3n - 1`.
    S3nMinus1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Family {
    pub kind: FamilyKind,
    pub n: u32,
}

impl Family {
    pub fn new(kind: FamilyKind, n: u32) -> Result<Self, GeometryError> {
        if n < 2 {
            return Err(GeometryError::InvalidDimension(n));
        }
        Ok(Self { kind, n })
    }

    pub fn s2n(n: u32) -> Result<Self, GeometryError> {
        Self::new(FamilyKind::S2n, n)
    }

    pub fn s3n_minus_1(n: u32) -> Result<Self, GeometryError> {
        Self::new(FamilyKind::S3nMinus1, n)
    }

    /// Dimension of the ambient round sphere.
    pub fn ambient_dim(&self) -> u32 {
        match self.kind {
            FamilyKind::S2n => 2 * self.n,
            FamilyKind::S3nMinus1 => 3 * self.n - 1,
        }
    }

    pub fn hypersurface_dim(&self) -> u32 {
        self.ambient_dim() - 1
    }

    /// Number of `S^{n-1}` factors in the group orbit.
    pub fn sphere_factors(&self) -> usize {
        match self.kind {
            FamilyKind::S2n => 2,
            FamilyKind::S3nMinus1 => 3,
        }
    }

    /// Upper end of the admissible initial radius interval.
    pub fn r0_upper(&self) -> f64 {
        match self.kind {
            FamilyKind::S2n => FRAC_PI_2,
            FamilyKind::S3nMinus1 => 2f64.sqrt().atan(),
        }
    }

    /// Upper end of the chart range for `r`.
    pub fn r_max(&self) -> f64 {
        match self.kind {
            FamilyKind::S2n => std::f64::consts::PI,
            FamilyKind::S3nMinus1 => FRAC_PI_2,
        }
    }

    /// Short machine label used in file names and reports.
    pub fn label(&self) -> &'static str {
        match self.kind {
            FamilyKind::S2n => "s2n",
            FamilyKind::S3nMinus1 => "s3n-1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub r: f64,
    pub theta: f64,
}

impl OrbitPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    /// The ambient quotient triple `(x, y, z)` on the unit 2-sphere.
    pub fn ambient(&self) -> [f64; 3] {
        let (sr, cr) = self.r.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        [sr * ct, sr * st, cr]
    }

    /// Inverse of [`OrbitPoint::ambient`] for a unit triple with `x, y >= 0`.
    pub fn from_ambient(p: [f64; 3]) -> Self {
        let r = p[2].clamp(-1.0, 1.0).acos();
        let theta = p[1].atan2(p[0]);
        Self { r, theta }
    }

    pub fn in_quotient(&self, family: Family) -> bool {
        let r_ok = (0.0..=family.r_max()).contains(&self.r);
        r_ok && (0.0..=FRAC_PI_2).contains(&self.theta)
    }
}

/// Lift a quotient point to the ambient sphere through the given unit
/// directions in `S^{n-1}`, one per sphere factor.
pub fn lift(family: Family, p: OrbitPoint, dirs: &[&[f64]]) -> Result<Vec<f64>, GeometryError> {
    let n = family.n as usize;
    let factors = family.sphere_factors();
    if dirs.len() != factors {
        return Err(GeometryError::DirectionCount {
            expected: factors,
            got: dirs.len(),
        });
    }
    for (index, d) in dirs.iter().enumerate() {
        if d.len() != n {
            return Err(GeometryError::DirectionLength {
                index,
                len: d.len(),
                expected: n,
            });
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::NonUnitDirection { index, norm });
        }
    }

    let [x, y, z] = p.ambient();
    let mut out = Vec::with_capacity(family.ambient_dim() as usize + 1);
    out.extend(dirs[0].iter().map(|v| x * v));
    out.extend(dirs[1].iter().map(|v| y * v));
    match family.kind {
        FamilyKind::S2n => out.push(z),
        FamilyKind::S3nMinus1 => out.extend(dirs[2].iter().map(|v| z * v)),
    }
    Ok(out)
}

/// [`lift`] with every direction set to the first coordinate axis.
pub fn lift_default(family: Family, p: OrbitPoint) -> Vec<f64> {
    let mut e1 = vec![0.0; family.n as usize];
    e1[0] = 1.0;
    let dirs: Vec<&[f64]> = (0..family.sphere_factors()).map(|_| e1.as_slice()).collect();
    lift(family, p, &dirs).expect("axis directions are valid")
}

/// Tangent angle a curve must have to cross `{tan r cos theta = 1}`
/// orthogonally at `p`.
pub fn beta(p: OrbitPoint) -> f64 {
    -(p.r.sin() * p.theta.sin()).atan()
}

/// Distinct principal curvatures of an equivariant hypersurface.
///
/// `kappa_x` and `kappa_y` each have multiplicity `n - 1`, as does
/// `kappa_z` when present; `kappa_profile` is simple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVector {
    pub n: u32,
    pub kappa_x: f64,
    pub kappa_y: f64,
    pub kappa_z: Option<f64>,
    pub kappa_profile: f64,
}

impl CurvatureVector {
    /// Total multiplicity, which equals the hypersurface dimension.
    pub fn multiplicity(&self) -> u32 {
        let orbit = if self.kappa_z.is_some() { 3 } else { 2 };
        orbit * (self.n - 1) + 1
    }

    /// Multiplicity-weighted sum of the principal curvatures.
    pub fn mean(&self) -> f64 {
        let m = f64::from(self.n - 1);
        m * (self.kappa_x + self.kappa_y + self.kappa_z.unwrap_or(0.0)) + self.kappa_profile
    }
}

fn nonzero(what: &'static str, v: f64, p: &ShootingState) -> Result<f64, GeometryError> {
    if v.abs() < SINGULAR_TOL {
        Err(GeometryError::Singular {
            what,
            r: p.r,
            theta: p.theta,
        })
    } else {
        Ok(v)
    }
}

pub fn principal_curvatures(
    family: Family,
    state: &ShootingState,
    alpha_prime: f64,
) -> Result<CurvatureVector, GeometryError> {
    let (sr, cr) = state.r.sin_cos();
    let (st, ct) = state.theta.sin_cos();
    let (sa, ca) = state.alpha.sin_cos();
    let sr = nonzero("sin r", sr, state)?;
    let st = nonzero("sin theta", st, state)?;
    let ct = nonzero("cos theta", ct, state)?;

    let kappa_x = (cr * ct * sa + st * ca) / (sr * ct);
    let kappa_y = (cr * st * sa - ct * ca) / (sr * st);
    let kappa_z = match family.kind {
        FamilyKind::S2n => None,
        FamilyKind::S3nMinus1 => {
            let cr = nonzero("cos r", cr, state)?;
            Some(-(sr / cr) * sa)
        }
    };
    let kappa_profile = alpha_prime + (cr / sr) * sa;
    Ok(CurvatureVector {
        n: family.n,
        kappa_x,
        kappa_y,
        kappa_z,
        kappa_profile,
    })
}

pub fn mean_curvature(
    family: Family,
    state: &ShootingState,
    alpha_prime: f64,
) -> Result<f64, GeometryError> {
    principal_curvatures(family, state, alpha_prime).map(|k| k.mean())
}
