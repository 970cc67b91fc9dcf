//! Fixed-step classical Runge-Kutta reference integrator.
//!
//! Shares nothing with the adaptive engine except the vector field: no
//! step control, no continuous extension. Exit crossings are located by
//! bisecting the length of a single partial step from the last state
//! inside the domain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::beta;
use crate::dynamics::{rhs, DynamicsError, EventKind, Params, ShootingState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub step: f64,
    /// Spacing of recorded samples; rounded to a whole number of steps.
    pub record_spacing: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            step: 1e-6,
            record_spacing: 1e-4,
        }
    }
}

impl OracleConfig {
    pub const MAX_STEP: f64 = 1e-5;

    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    fn stride(&self) -> usize {
        ((self.record_spacing / self.step).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle step must lie in (0, {max}], got {step}")]
    Step { step: f64, max: f64 },
    #[error("vector field failed at s={s}: {source}")]
    Dynamics { s: f64, source: DynamicsError },
    #[error("trajectory crossed the theta guard at s={s}")]
    GuardCrossing { s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleExit {
    pub kind: EventKind,
    pub s: f64,
    pub state: ShootingState,
}

/// Recorded samples with derivatives for cubic Hermite lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTrajectory {
    pub s: Vec<f64>,
    pub states: Vec<ShootingState>,
    derivs: Vec<[f64; 3]>,
    pub exit: Option<OracleExit>,
}

impl OracleTrajectory {
    pub fn s_end(&self) -> f64 {
        *self.s.last().unwrap()
    }

    pub fn last(&self) -> ShootingState {
        *self.states.last().unwrap()
    }

    /// Cubic Hermite interpolation between recorded samples.
    pub fn eval(&self, s: f64) -> Option<ShootingState> {
        if !(0.0..=self.s_end()).contains(&s) {
            return None;
        }
        let i = self.s.partition_point(|&x| x <= s).clamp(1, self.s.len() - 1) - 1;
        let (s0, s1) = (self.s[i], self.s[i + 1]);
        let h = s1 - s0;
        if h <= 0.0 {
            return Some(self.states[i]);
        }
        let t = (s - s0) / h;
        let (y0, y1) = (self.states[i].to_array(), self.states[i + 1].to_array());
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        Some(ShootingState::from_array(std::array::from_fn(|k| {
            h00 * y0[k] + h10 * h * d0[k] + h01 * y1[k] + h11 * h * d1[k]
        })))
    }
}

fn rk4(params: &Params, y: &ShootingState, h: f64, s: f64) -> Result<ShootingState, OracleError> {
    let f = |x: [f64; 3]| {
        rhs(params, &ShootingState::from_array(x))
            .map_err(|source| OracleError::Dynamics { s, source })
    };
    let y0 = y.to_array();
    let k1 = f(y0)?;
    let k2 = f(std::array::from_fn(|i| y0[i] + 0.5 * h * k1[i]))?;
    let k3 = f(std::array::from_fn(|i| y0[i] + 0.5 * h * k2[i]))?;
    let k4 = f(std::array::from_fn(|i| y0[i] + h * k3[i]))?;
    Ok(ShootingState::from_array(std::array::from_fn(|i| {
        y0[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    })))
}

/// Integrate from `state0` with fixed steps until `s_max`, or, when
/// `stop_on_exit` is set, until the trajectory leaves the family's
/// shooting domain.
pub fn oracle_integrate(
    params: &Params,
    state0: ShootingState,
    s_max: f64,
    cfg: &OracleConfig,
    stop_on_exit: bool,
) -> Result<OracleTrajectory, OracleError> {
    if !(cfg.step > 0.0 && cfg.step <= OracleConfig::MAX_STEP) {
        return Err(OracleError::Step {
            step: cfg.step,
            max: OracleConfig::MAX_STEP,
        });
    }
    let exits: Vec<EventKind> = params
        .domain()
        .events()
        .iter()
        .copied()
        .filter(|k| *k != EventKind::ThetaGuard)
        .collect();
    let deriv = |y: &ShootingState, s: f64| {
        rhs(params, y).map_err(|source| OracleError::Dynamics { s, source })
    };

    let stride = cfg.stride();
    let mut out = OracleTrajectory {
        s: vec![0.0],
        states: vec![state0],
        derivs: vec![deriv(&state0, 0.0)?],
        exit: None,
    };
    let mut y = state0;
    let mut k: u64 = 0;
    loop {
        let s = k as f64 * cfg.step;
        if s >= s_max {
            break;
        }
        let h = cfg.step.min(s_max - s);
        let next = rk4(params, &y, h, s)?;
        let s_next = if h < cfg.step { s_max } else { (k + 1) as f64 * cfg.step };

        if EventKind::ThetaGuard.value(&next) >= 0.0 {
            return Err(OracleError::GuardCrossing { s: s_next });
        }
        if stop_on_exit {
            let crossed = exits
                .iter()
                .filter(|e| e.value(&y) < 0.0 && e.value(&next) >= 0.0)
                .map(|&e| {
                    // bisect the partial step length
                    let (mut lo, mut hi) = (0.0, h);
                    let mut y_lo = y;
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if mid <= lo || mid >= hi {
                            break;
                        }
                        let ym = rk4(params, &y, mid, s)?;
                        if e.value(&ym) >= 0.0 {
                            hi = mid;
                        } else {
                            lo = mid;
                            y_lo = ym;
                        }
                    }
                    Ok((e, s + lo, y_lo))
                })
                .collect::<Result<Vec<_>, OracleError>>()?;
            if let Some(&(kind, s_hit, state)) =
                crossed.iter().min_by(|a, b| a.1.total_cmp(&b.1))
            {
                if s_hit > *out.s.last().unwrap() {
                    out.s.push(s_hit);
                    out.derivs.push(deriv(&state, s_hit)?);
                    out.states.push(state);
                }
                out.exit = Some(OracleExit {
                    kind,
                    s: s_hit,
                    state,
                });
                return Ok(out);
            }
        }

        y = next;
        k += 1;
        if (k as usize).is_multiple_of(stride) || s_next >= s_max {
            out.s.push(s_next);
            out.derivs.push(deriv(&y, s_next)?);
            out.states.push(y);
        }
    }
    Ok(out)
}

/// Fixed-step shot from the mirror `theta = pi/4`.
pub fn oracle_shoot(params: &Params, r0: f64, cfg: &OracleConfig) -> Result<OracleTrajectory, OracleError> {
    // every exit happens before s = pi / (2 lambda)
    let s_max = std::f64::consts::PI / params.lambda + 1.0;
    oracle_integrate(params, ShootingState::initial(r0), s_max, cfg, true)
}

/// Bisect on the exit class between `alpha_side` (exits through
/// `alpha = 0`) and `wall_side` until narrower than `tol`; returns the
/// final pair.
pub fn oracle_class_boundary(
    params: &Params,
    mut alpha_side: f64,
    mut wall_side: f64,
    tol: f64,
    cfg: &OracleConfig,
) -> Result<(f64, f64), OracleError> {
    while (wall_side - alpha_side).abs() >= tol {
        let m = 0.5 * (alpha_side + wall_side);
        if m == alpha_side || m == wall_side {
            break;
        }
        match oracle_shoot(params, m, cfg)?.exit.map(|e| e.kind) {
            Some(EventKind::Alpha) => alpha_side = m,
            _ => wall_side = m,
        }
    }
    Ok((alpha_side, wall_side))
}

/// Bisect the orthogonality residual `alpha - beta` at `Gamma` exits
/// between `pos` (residual `>= 0` or an `alpha = 0` exit) and `neg`.
pub fn oracle_orthogonal_exit(
    params: &Params,
    mut pos: f64,
    mut neg: f64,
    tol: f64,
    cfg: &OracleConfig,
) -> Result<(f64, f64), OracleError> {
    while (neg - pos).abs() >= tol {
        let m = 0.5 * (pos + neg);
        if m == pos || m == neg {
            break;
        }
        match oracle_shoot(params, m, cfg)?.exit {
            Some(OracleExit {
                kind: EventKind::Gamma,
                state,
                ..
            }) if state.alpha - beta(state.point()) < 0.0 => neg = m,
            _ => pos = m,
        }
    }
    Ok((pos, neg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Family;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn constant_solution_drift() {
        for (n, lambda) in [(2u32, 1.0), (3, 3.0)] {
            let params = Params::new(Family::s2n(n).unwrap(), lambda).unwrap();
            let r = (f64::from(2 * n - 1) / lambda).atan();
            let start = ShootingState::new(r, FRAC_PI_4, FRAC_PI_2);
            let tr = oracle_integrate(&params, start, 1.0, &OracleConfig::default(), false).unwrap();
            let end = tr.last();
            assert_abs_diff_eq!(tr.s_end(), 1.0, epsilon = 1e-12);
            assert!((end.r - r).abs() <= 1e-10 && (end.alpha - FRAC_PI_2).abs() <= 1e-10);
        }
    }

    #[test]
    fn fourth_order_under_step_halving() {
        let params = Params::new(Family::s2n(2).unwrap(), 1.0).unwrap();
        let start = ShootingState::new(0.6, 0.7, -1.0);
        let run = |h: f64| {
            // step sizes above the oracle limit are only used here to measure the order
            let cfg = OracleConfig { step: h, record_spacing: h };
            let mut y = start;
            let steps = (0.2 / h).round() as usize;
            for i in 0..steps {
                y = rk4(&params, &y, cfg.step, i as f64 * h).unwrap();
            }
            y
        };
        let reference = run(1e-5);
        let err = |h: f64| {
            let y = run(h);
            (y.r - reference.r).abs() + (y.theta - reference.theta).abs() + (y.alpha - reference.alpha).abs()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn rejects_coarse_steps() {
        let params = Params::new(Family::s2n(2).unwrap(), 1.0).unwrap();
        assert!(matches!(
            oracle_shoot(&params, 0.5, &OracleConfig::with_step(1e-4)),
            Err(OracleError::Step { .. })
        ));
    }

    #[test]
    fn exit_is_localized() {
        let params = Params::new(Family::s2n(2).unwrap(), 1.0).unwrap();
        let tr = oracle_shoot(&params, 1.55, &OracleConfig::with_step(1e-5)).unwrap();
        let exit = tr.exit.unwrap();
        assert_eq!(exit.kind, EventKind::RWall);
        assert!((exit.state.r - FRAC_PI_2).abs() < 1e-12);
        assert!(exit.state.alpha < 0.0);
        // Hermite lookup reproduces recorded samples
        let mid = tr.s[tr.s.len() / 2];
        assert_eq!(tr.eval(mid).unwrap(), tr.states[tr.s.len() / 2]);
    }
}
