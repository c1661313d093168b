//! Slip phase: closed-form propagation under a constant relay input and
//! localisation of the next velocity zero crossing.

use nalgebra::{DMatrix, Matrix4, SMatrix, Vector3, Vector4};

use crate::error::{check_finite, Error, Result};
use crate::model::{State, SystemMatrices};
use crate::stiction::{default_velocity_tolerance, in_stiction, sticks_at_landing};

/// Relay value `u = -sign(x3)` held during a slip segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relay {
    Plus,
    Minus,
}

impl Relay {
    pub fn value(self) -> f64 {
        match self {
            Relay::Plus => 1.0,
            Relay::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Relay::Plus => Relay::Minus,
            Relay::Minus => Relay::Plus,
        }
    }

    /// Relay for a mass moving with velocity sign `sign(x3)`; `None` at rest.
    pub fn opposing(x3: f64) -> Option<Self> {
        if x3 > 0.0 {
            Some(Relay::Minus)
        } else if x3 < 0.0 {
            Some(Relay::Plus)
        } else {
            None
        }
    }

    /// Relay for a breakaway from rest: motion follows the net drive
    /// `-(ki x1 + kp x2)`, friction opposes it.
    pub fn for_breakaway(state: &State, system: &SystemMatrices) -> Option<Self> {
        let force = system.restoring_force(state);
        if force > 0.0 {
            Some(Relay::Plus)
        } else if force < 0.0 {
            Some(Relay::Minus)
        } else {
            None
        }
    }

    /// Sign of the velocity this relay value opposes.
    pub fn direction(self) -> f64 {
        -self.value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    EnterStiction,
    RelayFlip,
}

/// Velocity zero crossing found along a slip segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipEvent {
    /// Time since the start of the searched flow.
    pub time: f64,
    /// State at the crossing with `x3` projected to zero.
    pub state: State,
    pub kind: EventKind,
}

// Higham (2005) Padé degree thresholds for the 1-norm.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

type Square<const N: usize> = SMatrix<f64, N, N>;

/// `(U, V)` of a low-degree diagonal Padé approximant, `e^A ≈ (V - U)⁻¹ (V + U)`.
fn pade_low<const N: usize>(a: &Square<N>, coeffs: &[f64]) -> (Square<N>, Square<N>) {
    let a2 = a * a;
    let mut even = Square::<N>::identity() * coeffs[0];
    let mut odd = Square::<N>::identity() * coeffs[1];
    let mut power = Square::<N>::identity();
    for k in (2..coeffs.len()).step_by(2) {
        power *= a2;
        even += power * coeffs[k];
        odd += power * coeffs[k + 1];
    }
    (a * odd, even)
}

fn pade_13<const N: usize>(a: &Square<N>) -> (Square<N>, Square<N>) {
    let b = &PADE_13;
    let id = Square::<N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner =
        a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1];
    let u = a * u_inner;
    let v =
        a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    (u, v)
}

/// `e^{m t}` by scaling and squaring with a diagonal Padé kernel.
pub fn matrix_exponential<const N: usize>(m: &Square<N>, t: f64) -> Result<Square<N>> {
    check_finite("t", t)?;
    if let Some(bad) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "matrix entry",
            value: *bad,
            reason: "must be finite",
        });
    }
    if t == 0.0 {
        return Ok(Square::<N>::identity());
    }
    let (balanced, scale) = balance(&(m * t));
    let e = pade_exponential(&balanced);
    // e^{M t} = D e^{D⁻¹ M t D} D⁻¹ with D = diag(scale), exact in binary.
    Ok(Square::<N>::from_fn(|i, j| e[(i, j)] * scale[i] / scale[j]))
}

/// Diagonal similarity by powers of two that evens out row and column
/// norms. Returns `D⁻¹ A D` and the diagonal of `D`.
fn balance<const N: usize>(a: &Square<N>) -> (Square<N>, [f64; N]) {
    let mut b = *a;
    let mut scale = [1.0; N];
    for _ in 0..64 {
        let mut changed = false;
        for i in 0..N {
            let col: f64 = (0..N).filter(|&k| k != i).map(|k| b[(k, i)].abs()).sum();
            let row: f64 = (0..N).filter(|&k| k != i).map(|k| b[(i, k)].abs()).sum();
            if col == 0.0 || row == 0.0 {
                continue;
            }
            let mut f = 1.0;
            let (mut c, mut r) = (col, row);
            while c < r / 2.0 {
                c *= 2.0;
                r /= 2.0;
                f *= 2.0;
            }
            while c > r * 2.0 {
                c /= 2.0;
                r *= 2.0;
                f /= 2.0;
            }
            if (c + r) < 0.95 * (col + row) {
                changed = true;
                scale[i] *= f;
                for k in 0..N {
                    b[(k, i)] *= f;
                    b[(i, k)] /= f;
                }
            }
        }
        if !changed {
            break;
        }
    }
    (b, scale)
}

fn pade_exponential<const N: usize>(a: &Square<N>) -> Square<N> {
    let a = *a;
    let norm = (0..N)
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);

    let low = THETA.iter().find(|(_, theta)| norm < *theta);
    let (u, v, squarings) = match low {
        Some(&(degree, _)) => {
            let coeffs: &[f64] = match degree {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            let (u, v) = pade_low(&a, coeffs);
            (u, v, 0)
        }
        None => {
            let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
            let scaled = a * 2f64.powi(-s);
            let (u, v) = pade_13(&scaled);
            (u, v, s)
        }
    };
    let q = DMatrix::from_column_slice(N, N, (v - u).as_slice());
    let p = DMatrix::from_column_slice(N, N, (v + u).as_slice());
    let r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for the selected degree");
    let mut result = Square::<N>::from_column_slice(r.as_slice());
    for _ in 0..squarings {
        result = result * result;
    }
    result
}

/// Closed-form flow of `x' = A x + B u` from a fixed origin state.
///
/// With `ki ≠ 0` the flow is written about the equilibrium
/// `x* = -A⁻¹ B u = (u fc / ki, 0, 0)` as `x(t) = x* + e^{At} (x0 - x*)`, which
/// keeps relative precision when the motion is small compared with `x*`.
/// With `ki = 0` (`A` singular) the forced response comes from the exponential
/// of the augmented matrix `[[A, B u], [0, 0]]`.
#[derive(Debug, Clone)]
pub(crate) struct SlipFlow<'a> {
    system: &'a SystemMatrices,
    origin: State,
    relay: Relay,
    route: FlowRoute,
}

#[derive(Debug, Clone)]
enum FlowRoute {
    Equilibrium {
        anchor: Vector3<f64>,
        offset: Vector3<f64>,
    },
    Augmented {
        generator: Matrix4<f64>,
    },
}

impl<'a> SlipFlow<'a> {
    pub(crate) fn new(system: &'a SystemMatrices, origin: State, relay: Relay) -> Self {
        let ki = system.ki();
        let route = if ki != 0.0 {
            let anchor = Vector3::new(relay.value() * system.fc / ki, 0.0, 0.0);
            FlowRoute::Equilibrium {
                anchor,
                offset: origin.to_vector() - anchor,
            }
        } else {
            let mut generator = Matrix4::zeros();
            generator.fixed_view_mut::<3, 3>(0, 0).copy_from(&system.a);
            generator
                .fixed_view_mut::<3, 1>(0, 3)
                .copy_from(&(system.b * relay.value()));
            FlowRoute::Augmented { generator }
        };
        Self {
            system,
            origin,
            relay,
            route,
        }
    }

    pub(crate) fn origin(&self) -> State {
        self.origin
    }

    pub(crate) fn relay(&self) -> Relay {
        self.relay
    }

    /// Magnitude of the motion about the flow's rest point.
    /// Whether the origin sits on the slip equilibrium to rounding level,
    /// where velocity sign changes carry no information.
    pub(crate) fn settled(&self) -> bool {
        match &self.route {
            FlowRoute::Equilibrium { anchor, offset } => {
                offset.norm() <= 64.0 * f64::EPSILON * anchor.norm()
            }
            FlowRoute::Augmented { .. } => false,
        }
    }

    fn motion_scale(&self) -> f64 {
        match &self.route {
            FlowRoute::Equilibrium { offset, .. } => offset.norm(),
            FlowRoute::Augmented { .. } => self.origin.norm() + self.system.fc / self.system.kp(),
        }
    }

    pub(crate) fn at(&self, t: f64) -> State {
        if t == 0.0 {
            return self.origin;
        }
        match &self.route {
            FlowRoute::Equilibrium { anchor, offset } => {
                let e = matrix_exponential(&self.system.a, t).expect("finite system and time");
                State::from_vector(&(anchor + e * offset))
            }
            FlowRoute::Augmented { generator } => {
                let e = matrix_exponential(generator, t).expect("finite system and time");
                let x = self.origin.to_vector();
                let lifted = e * Vector4::new(x[0], x[1], x[2], 1.0);
                State::new(lifted[0], lifted[1], lifted[2])
            }
        }
    }

    fn acceleration(&self, state: &State) -> f64 {
        self.system.derivative(state, self.relay.value()).x3
    }
}

fn check_duration(dt: f64) -> Result<()> {
    check_finite("dt", dt)?;
    if dt < 0.0 {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be non-negative",
        });
    }
    Ok(())
}

/// State after `dt` seconds of slip with the relay held at `input`.
pub fn propagate(state: &State, input: Relay, dt: f64, system: &SystemMatrices) -> Result<State> {
    check_duration(dt)?;
    Ok(SlipFlow::new(system, *state, input).at(dt))
}

/// Forced response through the augmented 4×4 exponential; valid for every `ki`.
pub fn propagate_augmented(
    state: &State,
    input: Relay,
    dt: f64,
    system: &SystemMatrices,
) -> Result<State> {
    check_duration(dt)?;
    let mut generator = Matrix4::zeros();
    generator.fixed_view_mut::<3, 3>(0, 0).copy_from(&system.a);
    generator
        .fixed_view_mut::<3, 1>(0, 3)
        .copy_from(&(system.b * input.value()));
    let e = matrix_exponential(&generator, dt)?;
    let x = state.to_vector();
    let lifted = e * Vector4::new(x[0], x[1], x[2], 1.0);
    Ok(State::new(lifted[0], lifted[1], lifted[2]))
}

/// `e^{A dt} x + A⁻¹ (e^{A dt} - I) B u`; requires `ki ≠ 0`.
pub fn propagate_particular(
    state: &State,
    input: Relay,
    dt: f64,
    system: &SystemMatrices,
) -> Result<State> {
    check_duration(dt)?;
    let inv = system.a.try_inverse().ok_or(Error::InvalidParameter {
        name: "ki",
        value: system.ki(),
        reason: "A is singular",
    })?;
    let e = matrix_exponential(&system.a, dt)?;
    let forced = inv * (e - nalgebra::Matrix3::identity()) * system.b * input.value();
    Ok(State::from_vector(&(e * state.to_vector() + forced)))
}

/// Time step of the bracketing scan.
pub fn slip_stride(system: &SystemMatrices) -> f64 {
    let rho = system.spectral_radius();
    if rho > 0.0 {
        (0.25 / rho).min(0.1)
    } else {
        0.1
    }
}

/// Outcome of scanning one flow for the next velocity zero.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Landing {
    Crossing {
        time: f64,
        state: State,
    },
    /// `x3` touches zero without changing sign at a point that does not stick.
    None,
}

/// Bisects `[lo, hi]` on `pred` (true at `lo`, false at `hi`) down to adjacent floats.
fn bisect(mut lo: f64, mut hi: f64, mut positive: impl FnMut(f64) -> bool) -> (f64, f64) {
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return (lo, hi);
        }
        if positive(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Earliest `t ∈ (0, horizon]` with `x3(t) = 0` along `flow`, moving in
/// direction `-u`. Tangential touches count only where the state sticks.
pub(crate) fn scan_for_landing(flow: &SlipFlow<'_>, horizon: f64) -> Landing {
    let d = flow.relay().direction();
    let system = flow.system;
    let h = slip_stride(system);
    let touch_tol = 1e-12 * flow.motion_scale() * system.spectral_radius().max(1.0);

    let g = |s: &State| d * s.x3;
    let gd = |s: &State| d * flow.acceleration(s);

    let crossing = |lo: f64, hi: f64| -> Landing {
        let (lo, hi) = bisect(lo, hi, |t| g(&flow.at(t)) > 0.0);
        let s_hi = flow.at(hi);
        let (time, state) = if lo > 0.0 {
            let s_lo = flow.at(lo);
            if g(&s_lo).abs() < g(&s_hi).abs() {
                (lo, s_lo)
            } else {
                (hi, s_hi)
            }
        } else {
            (hi, s_hi)
        };
        Landing::Crossing { time, state }
    };

    let mut t0 = 0.0;
    let mut gd0 = gd(&flow.origin());
    while t0 < horizon {
        let t1 = (t0 + h).min(horizon);
        let s1 = flow.at(t1);
        if g(&s1) <= 0.0 {
            return crossing(t0, t1);
        }
        let gd1 = gd(&s1);
        if gd0 < 0.0 && gd1 > 0.0 {
            let (_, tm) = bisect(t0, t1, |t| gd(&flow.at(t)) < 0.0);
            let sm = flow.at(tm);
            let gm = g(&sm);
            // Leaving rest exactly on the stiction edge: a first dip at
            // rounding level is the departure itself, not a landing.
            let departure = t0 == 0.0 && flow.origin().x3 == 0.0 && gm >= -touch_tol;
            if !departure && gm <= 0.0 {
                return crossing(t0, tm);
            }
            if !departure && gm <= touch_tol {
                let landed = State::new(sm.x1, sm.x2, 0.0);
                if sticks_at_landing(&landed, system) {
                    return Landing::Crossing {
                        time: tm,
                        state: sm,
                    };
                }
            }
        }
        t0 = t1;
        gd0 = gd1;
    }
    Landing::None
}

fn classify(time: f64, state: State, system: &SystemMatrices) -> SlipEvent {
    let landed = State::new(state.x1, state.x2, 0.0);
    let kind = if sticks_at_landing(&landed, system) {
        EventKind::EnterStiction
    } else {
        EventKind::RelayFlip
    };
    SlipEvent {
        time,
        state: landed,
        kind,
    }
}

pub(crate) fn event_from_flow(flow: &SlipFlow<'_>, horizon: f64) -> Option<SlipEvent> {
    match scan_for_landing(flow, horizon) {
        Landing::Crossing { time, state } => Some(classify(time, state, flow.system)),
        Landing::None => None,
    }
}

/// Next velocity zero crossing within `horizon` seconds of slip.
///
/// A state already at rest inside the stiction set returns an
/// `EnterStiction` event at `t = 0`. A moving state must carry the relay value
/// opposing its velocity.
pub fn next_event(
    state: &State,
    input: Relay,
    system: &SystemMatrices,
    horizon: f64,
) -> Result<Option<SlipEvent>> {
    check_duration(horizon)?;
    let tol = default_velocity_tolerance(state);
    if state.x3.abs() <= tol {
        if in_stiction(state, system, tol) {
            return Ok(Some(SlipEvent {
                time: 0.0,
                state: State::new(state.x1, state.x2, 0.0),
                kind: EventKind::EnterStiction,
            }));
        }
    } else if state.x3 * input.direction() < 0.0 {
        return Err(Error::InconsistentRelay {
            u: input.value(),
            x3: state.x3,
        });
    }
    next_event_after_breakaway(state, input, system, horizon)
}

/// Next velocity zero crossing, excluding `t = 0`. Used when motion restarts
/// from `x3 = 0` at a breakaway or relay flip.
pub fn next_event_after_breakaway(
    state: &State,
    input: Relay,
    system: &SystemMatrices,
    horizon: f64,
) -> Result<Option<SlipEvent>> {
    check_duration(horizon)?;
    if !state.is_finite() {
        return Err(Error::InvalidParameter {
            name: "state",
            value: state.norm(),
            reason: "must be finite",
        });
    }
    Ok(event_from_flow(
        &SlipFlow::new(system, *state, input),
        horizon,
    ))
}
