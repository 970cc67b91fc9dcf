//! Adaptive Dormand-Prince 5(4) integrator with continuous output and
//! event localization.
//!
//! Systems are autonomous, `y' = f(y)`, with a fixed state dimension `N`.
//! Every accepted step keeps its fourth-order continuous extension, so a
//! finished [`DenseTrajectory`] can be queried anywhere in its range.
//! Events are scalar functions of the state that fire when they cross zero
//! from below; crossings are located by bisection on the interpolant.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Width of the final bracket around an event crossing.
    pub event_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: 1e-4,
            h_min: 1e-14,
            h_max: 0.05,
            max_steps: 2_000_000,
            event_tol: 1e-12,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !(ok(self.rtol) && ok(self.atol)) {
            return Err(format!(
                "tolerances must be positive (rtol={}, atol={})",
                self.rtol, self.atol
            ));
        }
        if !ok(self.event_tol) {
            return Err(format!("event_tol must be positive, got {}", self.event_tol));
        }
        if !(ok(self.h_min) && self.h_min <= self.h_init && self.h_init <= self.h_max && self.h_max.is_finite()) {
            return Err(format!(
                "need 0 < h_min <= h_init <= h_max (got {}, {}, {})",
                self.h_min, self.h_init, self.h_max
            ));
        }
        if self.max_steps == 0 {
            return Err("max_steps must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError<E> {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("step size {h:e} fell below h_min at s={s}")]
    StepUnderflow { s: f64, h: f64 },
    #[error("right-hand side failed at s={s}: {source}")]
    Rhs { s: f64, source: E },
    #[error("non-finite state at s={s}")]
    NonFinite { s: f64 },
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
struct Segment<const N: usize> {
    s0: f64,
    h: f64,
    /// Upper end of the valid range; below `s0 + h` on a truncated step.
    s_end: f64,
    coeffs: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn eval(&self, s: f64) -> [f64; N] {
        let t = (s - self.s0) / self.h;
        let t1 = 1.0 - t;
        let c = &self.coeffs;
        std::array::from_fn(|i| c[0][i] + t * (c[1][i] + t1 * (c[2][i] + t * (c[3][i] + t1 * c[4][i]))))
    }
}

/// Accepted steps of one integration plus the continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory<const N: usize> {
    s: Vec<f64>,
    y: Vec<[f64; N]>,
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseTrajectory<N> {
    fn new(y0: [f64; N]) -> Self {
        Self {
            s: vec![0.0],
            y: vec![y0],
            segments: Vec::new(),
        }
    }

    /// Arc lengths of the stored samples, strictly increasing from 0.
    pub fn s_samples(&self) -> &[f64] {
        &self.s
    }

    pub fn y_samples(&self) -> &[[f64; N]] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn s_end(&self) -> f64 {
        *self.s.last().expect("trajectory has a first sample")
    }

    pub fn last(&self) -> [f64; N] {
        *self.y.last().expect("trajectory has a first sample")
    }

    /// Interpolated state at `s`, or `None` outside `[0, s_end]`.
    pub fn eval(&self, s: f64) -> Option<[f64; N]> {
        if !(0.0..=self.s_end()).contains(&s) {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.y[0]);
        }
        let idx = self.segments.partition_point(|seg| seg.s_end < s);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        if s == seg.s_end {
            return Some(self.y[idx.min(self.segments.len() - 1) + 1]);
        }
        Some(seg.eval(s))
    }

    fn push(&mut self, seg: Segment<N>, y_end: [f64; N]) {
        self.s.push(seg.s_end);
        self.y.push(y_end);
        self.segments.push(seg);
    }

    fn truncate_last(&mut self, s_end: f64, y_end: [f64; N]) {
        let seg = self.segments.last_mut().expect("at least one step");
        seg.s_end = s_end;
        *self.s.last_mut().unwrap() = s_end;
        *self.y.last_mut().unwrap() = y_end;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventHit<const N: usize> {
    /// Index into the event slice passed to the integrator.
    pub event: usize,
    pub s_hit: f64,
    pub state_hit: [f64; N],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination<const N: usize> {
    /// One or more events crossed; all hits within `event_tol` of the
    /// earliest, ordered by arc length.
    Events(Vec<EventHit<N>>),
    ReachedEnd,
    /// `max_steps` accepted steps without an event.
    Budget,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Integration<const N: usize> {
    pub trajectory: DenseTrajectory<N>,
    pub termination: Termination<N>,
    pub stats: Stats,
}

pub type EventFn<'a, const N: usize> = &'a dyn Fn(&[f64; N]) -> f64;

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Result of a single trial step.
#[derive(Debug, Clone, Copy)]
pub struct Dp5Step<const N: usize> {
    pub y: [f64; N],
    /// `f(y)` at the new point (first stage of the next step).
    pub f_new: [f64; N],
    /// Embedded error estimate, component-wise.
    pub err: [f64; N],
    coeffs: [[f64; N]; 5],
}

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// One Dormand-Prince step of size `h` from `y` with `f0 = f(y)`.
pub fn dp5_step<const N: usize, E>(
    f: &mut impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
) -> Result<Dp5Step<N>, E> {
    let k1 = *f0;
    let k2 = f(&comb(y, h, &[(A21, &k1)]))?;
    let k3 = f(&comb(y, h, &[(A31, &k1), (A32, &k2)]))?;
    let k4 = f(&comb(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&comb(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&comb(
        y,
        h,
        &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
    ))?;
    let y_new = comb(
        y,
        h,
        &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = f(&y_new)?;
    let err = std::array::from_fn(|i| {
        h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
    });
    let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
    let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
    let coeffs = [
        *y,
        ydiff,
        bspl,
        std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]),
        std::array::from_fn(|i| {
            h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
        }),
    ];
    Ok(Dp5Step {
        y: y_new,
        f_new: k7,
        err,
        coeffs,
    })
}

impl<const N: usize> Dp5Step<N> {
    /// Continuous extension evaluated at fraction `t` of the step.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        Segment {
            s0: 0.0,
            h: 1.0,
            s_end: 1.0,
            coeffs: self.coeffs,
        }
        .eval(t)
    }
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], cfg: &IntegratorConfig) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

/// Bisect `g` on `[lo, hi]` where `g(lo) < 0 <= g(hi)`; returns the last
/// point with `g < 0` and its state.
fn locate<const N: usize>(
    seg: &Segment<N>,
    g: EventFn<'_, N>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, [f64; N]) {
    let mut y_lo = seg.eval(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = seg.eval(mid);
        if g(&y_mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            y_lo = y_mid;
        }
    }
    (lo, y_lo)
}

/// Integrate from `s = 0` until an event fires, `s_end` is reached, or the
/// step budget runs out.
pub fn integrate<const N: usize, E>(
    mut f: impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
    y0: [f64; N],
    s_end: f64,
    events: &[EventFn<'_, N>],
    cfg: &IntegratorConfig,
) -> Result<Integration<N>, IntegrateError<E>> {
    cfg.validate().map_err(IntegrateError::InvalidConfig)?;
    let mut stats = Stats::default();
    let mut traj = DenseTrajectory::new(y0);
    let mut eval = |y: &[f64; N], stats: &mut Stats| {
        stats.evaluations += 1;
        f(y)
    };

    let mut s = 0.0;
    let mut y = y0;
    let mut f0 = eval(&y, &mut stats).map_err(|source| IntegrateError::Rhs { s, source })?;
    let mut g_prev: Vec<f64> = events.iter().map(|g| g(&y)).collect();
    let mut h = cfg.h_init;

    loop {
        if s >= s_end {
            return Ok(Integration {
                trajectory: traj,
                termination: Termination::ReachedEnd,
                stats,
            });
        }
        if stats.accepted >= cfg.max_steps {
            return Ok(Integration {
                trajectory: traj,
                termination: Termination::Budget,
                stats,
            });
        }
        let mut last_rhs_error = None;
        let step = loop {
            let h_try = h.min(s_end - s);
            if h < cfg.h_min {
                return Err(match last_rhs_error {
                    Some(source) => IntegrateError::Rhs { s, source },
                    None => IntegrateError::StepUnderflow { s, h },
                });
            }
            let mut counted = |y: &[f64; N]| eval(y, &mut stats);
            match dp5_step(&mut counted, &y, &f0, h_try) {
                Err(e) => {
                    // a stage left the region where f is defined
                    stats.rejected += 1;
                    last_rhs_error = Some(e);
                    h *= 0.25;
                }
                Ok(st) => {
                    let finite = st.y.iter().all(|v| v.is_finite());
                    let err = if finite {
                        error_norm(&st.err, &y, &st.y, cfg)
                    } else {
                        f64::INFINITY
                    };
                    if err <= 1.0 {
                        let fac = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        h = (h_try * fac).min(cfg.h_max);
                        break (st, h_try);
                    }
                    stats.rejected += 1;
                    let fac = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                    } else {
                        0.1
                    };
                    h = h_try * fac;
                }
            }
        };
        let (st, h_used) = step;
        stats.accepted += 1;
        let s_new = if h_used == s_end - s { s_end } else { s + h_used };
        let seg = Segment {
            s0: s,
            h: h_used,
            s_end: s_new,
            coeffs: st.coeffs,
        };

        let g_new: Vec<f64> = events.iter().map(|g| g(&st.y)).collect();
        let mut hits: Vec<EventHit<N>> = Vec::new();
        for (i, g) in events.iter().enumerate() {
            if g_prev[i] < 0.0 && g_new[i] >= 0.0 {
                let (s_hit, state_hit) = locate(&seg, *g, s, s_new, cfg.event_tol);
                hits.push(EventHit {
                    event: i,
                    s_hit,
                    state_hit,
                });
            }
        }

        traj.push(seg, st.y);
        if !hits.is_empty() {
            hits.sort_by(|a, b| a.s_hit.total_cmp(&b.s_hit).then(a.event.cmp(&b.event)));
            let first = hits[0];
            hits.retain(|h| h.s_hit - first.s_hit <= cfg.event_tol);
            if first.s_hit > s {
                traj.truncate_last(first.s_hit, first.state_hit);
            } else {
                // crossing inside the first ulp of the step: drop the step
                traj.s.pop();
                traj.y.pop();
                traj.segments.pop();
            }
            return Ok(Integration {
                trajectory: traj,
                termination: Termination::Events(hits),
                stats,
            });
        }

        s = s_new;
        y = st.y;
        f0 = st.f_new;
        g_prev = g_new;
    }
}

/// [`integrate`] without an arc-length limit; at least one event is needed.
pub fn integrate_until_event<const N: usize, E>(
    f: impl FnMut(&[f64; N]) -> Result<[f64; N], E>,
    y0: [f64; N],
    events: &[EventFn<'_, N>],
    cfg: &IntegratorConfig,
) -> Result<Integration<N>, IntegrateError<E>> {
    if events.is_empty() {
        return Err(IntegrateError::InvalidConfig(
            "at least one event function is required".into(),
        ));
    }
    integrate(f, y0, f64::INFINITY, events, cfg)
}
