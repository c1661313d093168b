//! Brute-force reference integrator: fixed-step RK4 with a switch-type
//! friction model. Shares no propagation code with the closed-form engine.

use crate::error::{check_finite, Error, Result};
use crate::model::{State, SystemMatrices};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Fixed step (s).
    pub dt: f64,
    /// Stick-detection velocity band (m/s).
    pub v_eps: f64,
    /// Locate velocity zero crossings and stick breakaways inside a step
    /// instead of relying on the velocity band alone.
    pub localize: bool,
}

impl OracleConfig {
    /// Band mode with `v_eps = 10 · dt · fc`.
    pub fn band(dt: f64, fc: f64) -> Result<Self> {
        let v_eps = if fc > 0.0 { 10.0 * dt * fc } else { 10.0 * dt };
        Self::new(dt, v_eps, false)
    }

    /// Event-localising mode; `v_eps` only caps the at-rest test.
    pub fn localized(dt: f64, fc: f64) -> Result<Self> {
        let v_eps = if fc > 0.0 { 10.0 * dt * fc } else { 10.0 * dt };
        Self::new(dt, v_eps, true)
    }

    pub fn new(dt: f64, v_eps: f64, localize: bool) -> Result<Self> {
        let cfg = Self {
            dt,
            v_eps,
            localize,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("dt", self.dt), ("v_eps", self.v_eps)] {
            check_finite(name, value)?;
            if value <= 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSample {
    pub t: f64,
    pub state: State,
    pub at_rest: bool,
}

fn rhs(sys: &SystemMatrices, s: &State, u: f64) -> State {
    let (kd, kp, ki) = (sys.kd(), sys.kp(), sys.ki());
    State::new(
        s.x2,
        s.x3,
        -(ki * s.x1 + kp * s.x2 + kd * s.x3) + sys.fc * u,
    )
}

fn axpy(s: &State, h: f64, k: &State) -> State {
    State::new(s.x1 + h * k.x1, s.x2 + h * k.x2, s.x3 + h * k.x3)
}

fn rk4(sys: &SystemMatrices, s: &State, u: f64, h: f64) -> State {
    let k1 = rhs(sys, s, u);
    let k2 = rhs(sys, &axpy(s, 0.5 * h, &k1), u);
    let k3 = rhs(sys, &axpy(s, 0.5 * h, &k2), u);
    let k4 = rhs(sys, &axpy(s, h, &k3), u);
    let w = h / 6.0;
    State::new(
        s.x1 + w * (k1.x1 + 2.0 * k2.x1 + 2.0 * k3.x1 + k4.x1),
        s.x2 + w * (k1.x2 + 2.0 * k2.x2 + 2.0 * k3.x2 + k4.x2),
        s.x3 + w * (k1.x3 + 2.0 * k2.x3 + 2.0 * k3.x3 + k4.x3),
    )
}

/// Net drive the friction has to hold, `ki x1 + kp x2`.
fn drive(sys: &SystemMatrices, s: &State) -> f64 {
    sys.ki() * s.x1 + sys.kp() * s.x2
}

fn holds(sys: &SystemMatrices, s: &State) -> bool {
    drive(sys, s).abs() <= sys.fc
}

fn signum0(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One fixed step of length `cfg.dt`.
///
/// Inside the velocity band with the drive below the friction bound the
/// velocity is held at zero and `x1` drifts by `x2 · dt`. Otherwise
/// friction is `fc · sign(x3)`, or inside the band the saturated force
/// opposing the drive, and one RK4 step is taken.
pub fn oracle_step(state: &State, system: &SystemMatrices, cfg: &OracleConfig) -> State {
    if cfg.localize {
        localized_step(state, system, cfg.dt, cfg.v_eps)
    } else {
        band_step(state, system, cfg)
    }
}

fn band_step(s: &State, sys: &SystemMatrices, cfg: &OracleConfig) -> State {
    if s.x3.abs() < cfg.v_eps && holds(sys, s) {
        return State::new(s.x1 + s.x2 * cfg.dt, s.x2, 0.0);
    }
    let u = if s.x3.abs() >= cfg.v_eps {
        -signum0(s.x3)
    } else {
        signum0(drive(sys, s))
    };
    rk4(sys, s, u, cfg.dt)
}

fn localized_step(s: &State, sys: &SystemMatrices, dt: f64, v_eps: f64) -> State {
    let mut s = *s;
    let mut left = dt;
    // A step holds at most a few phase changes; the cap guards degenerate input.
    for _ in 0..8 {
        if left <= 0.0 {
            break;
        }
        let u = if s.x3 == 0.0 || s.x3.abs() < v_eps.min(f64::EPSILON * s.norm()) {
            s.x3 = 0.0;
            if holds(sys, &s) {
                match stick_break(sys, &s, left) {
                    None => return State::new(s.x1 + s.x2 * left, s.x2, 0.0),
                    Some(h) => {
                        s = State::new(s.x1 + s.x2 * h, s.x2, 0.0);
                        left -= h;
                    }
                }
            }
            signum0(drive(sys, &s))
        } else {
            -signum0(s.x3)
        };
        match slip_until_rest(sys, &s, u, left) {
            (next, None) => return next,
            (next, Some(h)) => {
                s = next;
                left -= h;
            }
        }
    }
    s
}

/// Time within `(0, h]` at which a resting state's drift pushes the drive
/// onto the friction bound.
fn stick_break(sys: &SystemMatrices, s: &State, h: f64) -> Option<f64> {
    let rate = sys.ki() * s.x2;
    if rate == 0.0 {
        return None;
    }
    let target = sys.fc * signum0(rate);
    let tau = (target - drive(sys, s)) / rate;
    (tau >= 0.0 && tau < h).then_some(tau)
}

/// Slips with relay `u` for up to `h`. If the velocity returns to zero
/// first, returns the state there (velocity zeroed) and the elapsed time.
fn slip_until_rest(sys: &SystemMatrices, s: &State, u: f64, h: f64) -> (State, Option<f64>) {
    let dir = -u;
    let end = rk4(sys, s, u, h);
    if dir * end.x3 >= 0.0 || u == 0.0 {
        return (end, None);
    }
    // The step started at rest or moving along `dir`; x3 now opposes it.
    let (mut lo, mut hi) = (0.0, h);
    if s.x3 == 0.0 {
        // Leaving rest: x3 first moves along dir, find where it is still positive.
        let probe = rk4(sys, s, u, hi * 1e-3);
        if dir * probe.x3 <= 0.0 {
            return (State::new(end.x1, end.x2, 0.0), Some(h));
        }
        lo = hi * 1e-3;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dir * rk4(sys, s, u, mid).x3 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let at = rk4(sys, s, u, hi);
    (State::new(at.x1, at.x2, 0.0), Some(hi))
}

/// Repeated [`oracle_step`] from `initial` over `[0, t_end]`, sampling every
/// `sample_every` steps and always at both ends.
pub fn oracle_run(
    initial: State,
    system: &SystemMatrices,
    cfg: &OracleConfig,
    t_end: f64,
    sample_every: usize,
) -> Vec<OracleSample> {
    let every = sample_every.max(1);
    let steps = (t_end / cfg.dt).round().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps / every + 2);
    let mut s = initial;
    out.push(OracleSample {
        t: 0.0,
        state: s,
        at_rest: s.x3 == 0.0,
    });
    for k in 1..=steps {
        s = oracle_step(&s, system, cfg);
        if k % every == 0 || k == steps {
            out.push(OracleSample {
                t: k as f64 * cfg.dt,
                state: s,
                at_rest: s.x3 == 0.0,
            });
        }
    }
    out
}

/// Whether the oracle keeps a resting state at rest for `duration`.
pub fn oracle_rests_for(
    state: &State,
    system: &SystemMatrices,
    cfg: &OracleConfig,
    duration: f64,
) -> bool {
    let steps = (duration / cfg.dt).ceil() as usize;
    let mut s = State::new(state.x1, state.x2, 0.0);
    for _ in 0..steps {
        s = oracle_step(&s, system, cfg);
        if s.x3 != 0.0 {
            return false;
        }
    }
    true
}
