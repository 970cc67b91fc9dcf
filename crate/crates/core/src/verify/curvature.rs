//! Mean curvature residuals along curves and trajectories.

use serde::{Deserialize, Serialize};

use crate::assembly::GeneratingCurve;
use crate::dynamics::{rhs_alpha, Params, ShootingState};
use crate::geometry::mean_curvature;
use crate::ode::DenseTrajectory;

/// Worst `|H - lambda|` from the two independent evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HResiduals {
    /// `alpha'` taken from the vector field.
    pub algebraic: f64,
    /// `alpha'` from central differences of the sampled tangent angle.
    pub finite_difference: f64,
    /// Samples at coordinate singularities, left out of both maxima.
    pub skipped: usize,
}

impl HResiduals {
    pub fn max(&self) -> f64 {
        self.algebraic.max(self.finite_difference)
    }
}

/// Fourth-order central difference on a uniform grid.
fn central(a: [f64; 5], h: f64) -> f64 {
    (a[0] - 8.0 * a[1] + 8.0 * a[3] - a[4]) / (12.0 * h)
}

fn residuals(
    params: &Params,
    states: &[ShootingState],
    fd_prime: impl Fn(usize) -> Option<f64>,
) -> HResiduals {
    let mut out = HResiduals {
        algebraic: 0.0,
        finite_difference: 0.0,
        skipped: 0,
    };
    for (i, st) in states.iter().enumerate() {
        let Ok(ap) = rhs_alpha(params, st) else {
            out.skipped += 1;
            continue;
        };
        let Ok(h_alg) = mean_curvature(params.family, st, ap) else {
            out.skipped += 1;
            continue;
        };
        out.algebraic = out.algebraic.max((h_alg - params.lambda).abs());
        if let Some(fd) = fd_prime(i) {
            if let Ok(h_fd) = mean_curvature(params.family, st, fd) {
                out.finite_difference = out.finite_difference.max((h_fd - params.lambda).abs());
            }
        }
    }
    out
}

/// Curvature residuals on a uniformly sampled generating curve. On a
/// closed curve the stencil wraps around, shifting `alpha` by the
/// curve's total turning.
pub fn check_h_curve(curve: &GeneratingCurve) -> HResiduals {
    let params = curve.params();
    let states: Vec<ShootingState> = curve.samples.iter().map(|c| c.state()).collect();
    let n = states.len();
    if n < 5 {
        return residuals(&params, &states, |_| None);
    }
    let h = curve.length / (n - 1) as f64;
    let m = n - 1;
    let turning = states[m].alpha - states[0].alpha;
    let alpha_at = |k: isize| -> Option<f64> {
        if (0..n as isize).contains(&k) {
            return Some(states[k as usize].alpha);
        }
        if !curve.closed {
            return None;
        }
        let wraps = k.div_euclid(m as isize);
        Some(states[k.rem_euclid(m as isize) as usize].alpha + wraps as f64 * turning)
    };
    residuals(&params, &states, |i| {
        let i = i as isize;
        let a = [
            alpha_at(i - 2)?,
            alpha_at(i - 1)?,
            0.0,
            alpha_at(i + 1)?,
            alpha_at(i + 2)?,
        ];
        Some(central(a, h))
    })
}

/// Curvature residuals along a dense trajectory, resampled uniformly with
/// `segments` steps; the difference stencil is skipped at the two ends.
pub fn check_h_trajectory(params: &Params, traj: &DenseTrajectory<3>, segments: usize) -> HResiduals {
    let len = traj.s_end();
    let segments = segments.max(4);
    let h = len / segments as f64;
    let states: Vec<ShootingState> = (0..=segments)
        .map(|k| {
            let s = if k == segments { len } else { k as f64 * h };
            ShootingState::from_array(traj.eval(s).expect("inside trajectory"))
        })
        .collect();
    residuals(params, &states, |i| {
        if i < 2 || i + 2 > segments {
            return None;
        }
        let a = [
            states[i - 2].alpha,
            states[i - 1].alpha,
            0.0,
            states[i + 1].alpha,
            states[i + 2].alpha,
        ];
        Some(central(a, h))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Family;
    use crate::ode::{integrate, IntegratorConfig};
    use crate::shooting::{shoot, SolverConfig};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn constant_radius_sphere() {
        for (n, lambda) in [(2u32, 1.0), (3, 3.0)] {
            let params = Params::new(Family::s2n(n).unwrap(), lambda).unwrap();
            let r = (f64::from(2 * n - 1) / lambda).atan();
            let run = integrate(
                |y: &[f64; 3]| crate::dynamics::rhs(&params, &ShootingState::from_array(*y)),
                [r, FRAC_PI_4, FRAC_PI_2],
                1.0,
                &[],
                &IntegratorConfig::default(),
            )
            .unwrap();
            let h = check_h_trajectory(&params, &run.trajectory, 512);
            assert!(h.algebraic <= 1e-10 && h.finite_difference <= 1e-10, "{h:?}");
        }
    }

    #[test]
    fn shot_identity_is_exact() {
        let params = Params::new(Family::s3n_minus_1(3).unwrap(), 2.5).unwrap();
        let shot = shoot(&params, 0.4, &SolverConfig::default()).unwrap();
        let h = check_h_trajectory(&params, &shot.trajectory, 1024);
        assert!(h.algebraic <= 1e-12, "{h:?}");
        assert!(h.finite_difference <= 1e-5, "{h:?}");
        assert_eq!(h.skipped, 0);
    }
}
