//! Event-driven simulation: alternates closed-form slip segments with
//! sliding-mode stick segments and records the resulting trace.

use crate::error::{check_finite, Error, Result};
use crate::model::{
    build_system, is_linearly_stable, FrictionParams, Gains, State, SystemMatrices,
};
use crate::slip::{event_from_flow, slip_stride, EventKind, Relay, SlipFlow};
use crate::stiction::{
    default_velocity_tolerance, in_stiction, stick_exit, stick_state_at, StickOutcome,
};

/// Termination and fault thresholds for [`simulate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub t_max: f64,
    pub max_cycles: usize,
    /// `|x2|` below which a stick phase counts as arrival on the equilibrium
    /// set. `None` selects `1e-12 · max(1, fc/kp)`.
    pub eps_lambda: Option<f64>,
    /// State norm above which the run is declared divergent.
    pub divergence_bound: f64,
    /// Relay flips tolerated within `chatter_span` seconds.
    pub chatter_flips: usize,
    pub chatter_span: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            t_max: 120.0,
            max_cycles: usize::MAX,
            eps_lambda: None,
            divergence_bound: 1e9,
            chatter_flips: 16,
            chatter_span: 1e-9,
        }
    }
}

impl Limits {
    fn validate(&self) -> Result<()> {
        positive("t_max", self.t_max)?;
        if let Some(eps) = self.eps_lambda {
            positive("eps_lambda", eps)?;
        }
        positive("divergence_bound", self.divergence_bound)?;
        positive("chatter_span", self.chatter_span)?;
        if self.max_cycles == 0 {
            return Err(Error::InvalidParameter {
                name: "max_cycles",
                value: 0.0,
                reason: "must be positive",
            });
        }
        Ok(())
    }

    pub fn eps_lambda_for(&self, system: &SystemMatrices) -> f64 {
        self.eps_lambda
            .unwrap_or_else(|| 1e-12 * (system.fc / system.kp()).max(1.0))
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        });
    }
    Ok(value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseKind {
    Stick,
    Slip,
}

impl PhaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseKind::Stick => "stick",
            PhaseKind::Slip => "slip",
        }
    }
}

/// One output sample. `u` is the relay value, zero while sticking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub phase: PhaseKind,
    pub u: f64,
}

/// Constant-relay stretch of a slip segment, starting at a segment start,
/// relay flip or search-window restart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlipPiece {
    pub t_start: f64,
    pub state_start: State,
    pub relay: Relay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSegment {
    pub kind: PhaseKind,
    pub t_start: f64,
    pub t_end: f64,
    pub state_start: State,
    pub state_end: State,
    /// Relay at the start of a slip segment; `None` for stick.
    pub relay_u: Option<Relay>,
    /// Slip only: closed-form pieces, first one starting at `t_start`.
    pub pieces: Vec<SlipPiece>,
    /// Slip only: times of relay flips inside the segment.
    pub flips: Vec<f64>,
    pub samples: Vec<Sample>,
    /// Stick segment cut by the time limit or never left.
    pub open_ended: bool,
}

impl PhaseSegment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseEventKind {
    Start,
    EnterStiction,
    StickExit,
    RelayFlip,
    End,
}

impl PhaseEventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseEventKind::Start => "start",
            PhaseEventKind::EnterStiction => "enter_stiction",
            PhaseEventKind::StickExit => "stick_exit",
            PhaseEventKind::RelayFlip => "relay_flip",
            PhaseEventKind::End => "end",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEvent {
    pub kind: PhaseEventKind,
    pub t: f64,
    pub state: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ConvergedToLambda,
    MaxTime,
    MaxCycles,
    NeverExitStick,
    ChatterDetected,
    DivergenceDetected,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ConvergedToLambda => "ConvergedToLambda",
            Termination::MaxTime => "MaxTime",
            Termination::MaxCycles => "MaxCycles",
            Termination::NeverExitStick => "NeverExitStick",
            Termination::ChatterDetected => "ChatterDetected",
            Termination::DivergenceDetected => "DivergenceDetected",
        }
    }
}

/// Stick-phase energy bookkeeping and Coulomb dissipation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyReport {
    pub v_at_stick_onsets: Vec<f64>,
    pub v_at_stick_exits: Vec<f64>,
    /// Semi-axes `(a, b)` of the level ellipse through each stick exit, along
    /// `x2` and `x1`. `b` is `None` without integral action.
    pub ellipse_axes: Vec<(f64, Option<f64>)>,
    /// Total `∫ fc |x3| dt`.
    pub dissipated: f64,
    /// `(t, cumulative dissipation)` at every slip piece boundary.
    pub dissipation_history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub system: SystemMatrices,
    pub initial: State,
    pub segments: Vec<PhaseSegment>,
    pub events: Vec<PhaseEvent>,
    pub cycle_count: usize,
    pub termination: Termination,
    pub energy: EnergyReport,
    pub eps_lambda: f64,
    pub t_end: f64,
    /// Detail for fault terminations.
    pub fault: Option<Error>,
}

impl Trace {
    pub fn gains(&self) -> Gains {
        self.system.gains()
    }

    pub fn stick_segments(&self) -> impl Iterator<Item = &PhaseSegment> {
        self.segments.iter().filter(|s| s.kind == PhaseKind::Stick)
    }

    pub fn slip_segments(&self) -> impl Iterator<Item = &PhaseSegment> {
        self.segments.iter().filter(|s| s.kind == PhaseKind::Slip)
    }

    pub fn stick_count(&self) -> usize {
        self.stick_segments().count()
    }

    /// `(t, state)` at every entry into stiction.
    pub fn stick_onsets(&self) -> Vec<(f64, State)> {
        self.events
            .iter()
            .filter(|e| e.kind == PhaseEventKind::EnterStiction)
            .map(|e| (e.t, e.state))
            .collect()
    }

    /// Durations of the stick phases that ended in a breakaway.
    pub fn stick_durations(&self) -> Vec<f64> {
        self.stick_segments()
            .filter(|s| !s.open_ended)
            .map(PhaseSegment::duration)
            .collect()
    }

    pub fn samples(&self) -> impl Iterator<Item = &Sample> {
        self.segments.iter().flat_map(|s| s.samples.iter())
    }

    /// Exact state at time `t` within the simulated span.
    pub fn state_at(&self, t: f64) -> Option<State> {
        let idx = self
            .segments
            .partition_point(|s| s.t_end < t)
            .min(self.segments.len().checked_sub(1)?);
        let seg = &self.segments[idx];
        if t < seg.t_start || t > seg.t_end {
            return None;
        }
        match seg.kind {
            PhaseKind::Stick => Some(stick_state_at(&seg.state_start, seg.t_start, t)),
            PhaseKind::Slip => {
                let p = seg.pieces.partition_point(|p| p.t_start <= t).max(1) - 1;
                let piece = &seg.pieces[p];
                let flow = SlipFlow::new(&self.system, piece.state_start, piece.relay);
                Some(flow.at(t - piece.t_start))
            }
        }
    }

    /// Converts fault terminations into errors.
    pub fn into_result(self) -> Result<Trace> {
        match self.fault.clone() {
            Some(err) => Err(err),
            None => Ok(self),
        }
    }
}

/// Stick-phase energy `½ ki x1² + ½ kp x2²`.
pub fn stiction_energy(state: &State, gains: &Gains) -> f64 {
    0.5 * gains.ki * state.x1 * state.x1 + 0.5 * gains.kp * state.x2 * state.x2
}

/// Coulomb work `fc |x3| dt` over a step of constant rate.
pub fn dissipation_increment(x3: f64, fc: f64, dt: f64) -> f64 {
    debug_assert!(dt >= 0.0);
    fc * x3.abs() * dt
}

/// Uniform grid times `k / rate` strictly inside `(a, b)`.
fn grid_between(a: f64, b: f64, rate: f64) -> impl Iterator<Item = f64> {
    let first = (a * rate).floor() as i64 + 1;
    (first..)
        .map(move |k| k as f64 / rate)
        .skip_while(move |&t| t <= a)
        .take_while(move |&t| t < b)
}

enum Phase {
    Stick,
    Slip { relay: Relay },
}

struct Run {
    system: SystemMatrices,
    limits: Limits,
    rate: f64,
    eps_lambda: f64,
    window: f64,
    segments: Vec<PhaseSegment>,
    events: Vec<PhaseEvent>,
    energy: EnergyReport,
    cycle_count: usize,
    zero_dwell_at: Option<f64>,
    stable: bool,
}

enum Step {
    Continue(f64, State, Phase),
    Done(f64, Termination, Option<Error>),
}

impl Run {
    fn event(&mut self, kind: PhaseEventKind, t: f64, state: State) {
        self.events.push(PhaseEvent { kind, t, state });
    }

    fn stick_phase(&mut self, t: f64, state: State) -> Result<Step> {
        let gains = self.system.gains();
        self.event(PhaseEventKind::EnterStiction, t, state);
        self.energy
            .v_at_stick_onsets
            .push(stiction_energy(&state, &gains));
        if self.cycle_count >= self.limits.max_cycles {
            return Ok(Step::Done(t, Termination::MaxCycles, None));
        }

        let t_max = self.limits.t_max;
        if state.x2.abs() <= self.eps_lambda {
            self.push_stick(t, t_max.max(t), state, None);
            return Ok(Step::Done(
                t_max.max(t),
                Termination::ConvergedToLambda,
                None,
            ));
        }
        match stick_exit(&state, t, &self.system)? {
            StickOutcome::Never(_) => {
                self.push_stick(t, t_max.max(t), state, None);
                Ok(Step::Done(t_max.max(t), Termination::NeverExitStick, None))
            }
            StickOutcome::Exit(exit) if exit.exit_time >= t_max => {
                self.push_stick(t, t_max, state, None);
                Ok(Step::Done(t_max, Termination::MaxTime, None))
            }
            StickOutcome::Exit(exit) => {
                let relay = breakaway_relay(&state);
                if exit.exit_time > t {
                    self.push_stick(t, exit.exit_time, state, Some(exit.exit_state));
                    let v = stiction_energy(&exit.exit_state, &gains);
                    self.energy.v_at_stick_exits.push(v);
                    let a = (2.0 * v / gains.kp).sqrt();
                    let b = (gains.ki > 0.0).then(|| (2.0 * v / gains.ki).sqrt());
                    self.energy.ellipse_axes.push((a, b));
                    self.event(PhaseEventKind::StickExit, exit.exit_time, exit.exit_state);
                    self.cycle_count += 1;
                    Ok(Step::Continue(
                        exit.exit_time,
                        exit.exit_state,
                        Phase::Slip { relay },
                    ))
                } else {
                    // Landed on the breakaway edge itself: no dwell, motion resumes.
                    self.energy.v_at_stick_onsets.pop();
                    self.events.pop();
                    if self.zero_dwell_at == Some(t) {
                        let fault = Error::ChatterDetected {
                            time: t,
                            flips: 2,
                            span: 0.0,
                        };
                        return Ok(Step::Done(t, Termination::ChatterDetected, Some(fault)));
                    }
                    self.zero_dwell_at = Some(t);
                    Ok(Step::Continue(t, state, Phase::Slip { relay }))
                }
            }
        }
    }

    /// Records a stick segment; `exit` is the breakaway state, `None` when
    /// the segment runs to the end of the simulation.
    fn push_stick(&mut self, t0: f64, t1: f64, state: State, exit: Option<State>) {
        let open_ended = exit.is_none();
        let end = exit.unwrap_or_else(|| stick_state_at(&state, t0, t1));
        let mut samples = vec![sample_stick(t0, state)];
        samples.extend(
            grid_between(t0, t1, self.rate).map(|t| sample_stick(t, stick_state_at(&state, t0, t))),
        );
        if t1 > t0 {
            samples.push(sample_stick(t1, end));
        }
        self.segments.push(PhaseSegment {
            kind: PhaseKind::Stick,
            t_start: t0,
            t_end: t1,
            state_start: state,
            state_end: if t1 > t0 { end } else { state },
            relay_u: None,
            pieces: Vec::new(),
            flips: Vec::new(),
            samples,
            open_ended,
        });
    }

    fn slip_phase(&mut self, t: f64, state: State, relay: Relay) -> Step {
        let fc = self.system.fc;
        let t_max = self.limits.t_max;
        let mut segment = PhaseSegment {
            kind: PhaseKind::Slip,
            t_start: t,
            t_end: t,
            state_start: state,
            state_end: state,
            relay_u: Some(relay),
            pieces: Vec::new(),
            flips: Vec::new(),
            samples: vec![Sample {
                t,
                state,
                phase: PhaseKind::Slip,
                u: relay.value(),
            }],
            open_ended: false,
        };
        let mut t0 = t;
        let mut origin = state;
        let mut relay = relay;

        let outcome = loop {
            segment.pieces.push(SlipPiece {
                t_start: t0,
                state_start: origin,
                relay,
            });
            let system = &self.system;
            let flow = SlipFlow::new(system, origin, relay);
            let settled = flow.settled() && self.stable;
            let horizon = if settled {
                t_max - t0
            } else {
                self.window.min(t_max - t0)
            };
            let event = if settled {
                None
            } else {
                event_from_flow(&flow, horizon)
            };
            let (dt, end_state) = match &event {
                Some(ev) => (ev.time, ev.state),
                None => (horizon, flow.at(horizon)),
            };
            let reaches_limit = event.is_none() && horizon >= t_max - t0;
            let t1 = if reaches_limit { t_max } else { t0 + dt };
            segment
                .samples
                .extend(grid_between(t0, t1, self.rate).map(|ts| Sample {
                    t: ts,
                    state: flow.at(ts - t0),
                    phase: PhaseKind::Slip,
                    u: relay.value(),
                }));
            // x3 keeps its sign inside a piece, so ∫|x3| dt = |Δx2|.
            self.energy.dissipated += fc * (end_state.x2 - origin.x2).abs();
            self.energy
                .dissipation_history
                .push((t1, self.energy.dissipated));

            match event {
                Some(ev)
                    if ev.kind == EventKind::EnterStiction && !zero_dwell(&ev.state, system) =>
                {
                    break Step::Continue(t1, ev.state, Phase::Stick);
                }
                Some(ev) if ev.kind == EventKind::EnterStiction => {
                    // Grazes the breakaway edge: motion resumes at once.
                    if self.zero_dwell_at == Some(t1) {
                        let fault = Error::ChatterDetected {
                            time: t1,
                            flips: 2,
                            span: 0.0,
                        };
                        break Step::Done(t1, Termination::ChatterDetected, Some(fault));
                    }
                    self.zero_dwell_at = Some(t1);
                    let next = breakaway_relay(&ev.state);
                    if next != relay {
                        self.event(PhaseEventKind::RelayFlip, t1, ev.state);
                        segment.flips.push(t1);
                        segment.samples.push(Sample {
                            t: t1,
                            state: ev.state,
                            phase: PhaseKind::Slip,
                            u: relay.value(),
                        });
                    }
                    relay = next;
                    origin = ev.state;
                    t0 = t1;
                }
                Some(ev) => {
                    segment.samples.push(Sample {
                        t: t1,
                        state: ev.state,
                        phase: PhaseKind::Slip,
                        u: relay.value(),
                    });
                    self.event(PhaseEventKind::RelayFlip, t1, ev.state);
                    segment.flips.push(t1);
                    relay = relay.flipped();
                    origin = ev.state;
                    t0 = t1;
                    if let Some(fault) = self.chatter(&segment.flips) {
                        break Step::Done(t1, Termination::ChatterDetected, Some(fault));
                    }
                }
                None => {
                    origin = end_state;
                    t0 = t1;
                    if settled {
                        break Step::Done(t1, Termination::ConvergedToLambda, None);
                    }
                    if reaches_limit {
                        break Step::Done(t1, Termination::MaxTime, None);
                    }
                }
            }
            let norm = origin.norm();
            if !origin.is_finite() || norm > self.limits.divergence_bound {
                let fault = Error::DivergenceDetected { time: t0, norm };
                break Step::Done(t0, Termination::DivergenceDetected, Some(fault));
            }
            if fc == 0.0 && norm <= self.eps_lambda {
                break Step::Done(t0, Termination::ConvergedToLambda, None);
            }
        };

        let (t_end, state_end) = match &outcome {
            Step::Continue(t1, s, _) => (*t1, *s),
            Step::Done(..) => (t0, origin),
        };
        if segment.samples.last().map(|s| s.t) != Some(t_end) {
            segment.samples.push(Sample {
                t: t_end,
                state: state_end,
                phase: PhaseKind::Slip,
                u: relay.value(),
            });
        }
        segment.t_end = t_end;
        segment.state_end = state_end;
        self.segments.push(segment);
        outcome
    }

    fn chatter(&self, flips: &[f64]) -> Option<Error> {
        let n = self.limits.chatter_flips;
        if flips.len() <= n {
            return None;
        }
        let last = flips[flips.len() - 1];
        let span = last - flips[flips.len() - 1 - n];
        (span <= self.limits.chatter_span).then_some(Error::ChatterDetected {
            time: last,
            flips: n + 1,
            span,
        })
    }
}

/// Relay after leaving a stick on its edge: the drive points along `x2`.
fn breakaway_relay(state: &State) -> Relay {
    if state.x2 > 0.0 {
        Relay::Plus
    } else {
        Relay::Minus
    }
}

fn zero_dwell(state: &State, system: &SystemMatrices) -> bool {
    matches!(
        stick_exit(state, 0.0, system),
        Ok(StickOutcome::Exit(exit)) if exit.exit_time <= 0.0
    )
}

fn sample_stick(t: f64, state: State) -> Sample {
    Sample {
        t,
        state,
        phase: PhaseKind::Stick,
        u: 0.0,
    }
}

/// Simulates the closed loop from `initial` until a termination rule fires.
///
/// Slip segments run in closed form until `x3` returns to zero. A landing
/// where the force balance `|ki x1 + kp x2| ≤ fc` holds starts a stick
/// segment; otherwise the relay flips and the slip continues. Stick segments
/// end at the closed-form breakaway time. Samples are taken on the uniform
/// grid `k / output_rate` plus every phase boundary.
///
/// Chatter and divergence end the run early with the matching
/// [`Termination`] and the error in [`Trace::fault`].
pub fn simulate(
    initial: State,
    gains: Gains,
    friction: FrictionParams,
    limits: &Limits,
    output_rate: f64,
) -> Result<Trace> {
    if !initial.is_finite() {
        return Err(Error::InvalidParameter {
            name: "initial state",
            value: initial.norm(),
            reason: "must be finite",
        });
    }
    limits.validate()?;
    positive("output_rate", output_rate)?;
    let system = build_system(gains, friction)?;
    let eps_lambda = limits.eps_lambda_for(&system);
    let window = 64.0 * slip_stride(&system);

    let mut run = Run {
        system,
        limits: *limits,
        rate: output_rate,
        eps_lambda,
        window,
        segments: Vec::new(),
        events: Vec::new(),
        energy: EnergyReport::default(),
        cycle_count: 0,
        zero_dwell_at: None,
        stable: is_linearly_stable(gains),
    };
    run.event(PhaseEventKind::Start, 0.0, initial);

    let tol = default_velocity_tolerance(&initial);
    let mut phase = if initial.x3.abs() <= tol {
        let at_rest = State::new(initial.x1, initial.x2, 0.0);
        if in_stiction(&at_rest, &run.system, tol) {
            Phase::Stick
        } else {
            let relay = Relay::for_breakaway(&at_rest, &run.system)
                .expect("nonzero net force outside the stiction set");
            Phase::Slip { relay }
        }
    } else {
        Phase::Slip {
            relay: Relay::opposing(initial.x3).expect("moving state"),
        }
    };
    let mut t = 0.0;
    let mut state = if initial.x3.abs() <= tol {
        State::new(initial.x1, initial.x2, 0.0)
    } else {
        initial
    };

    let (t_end, termination, fault) = loop {
        let step = match phase {
            Phase::Stick => run.stick_phase(t, state)?,
            Phase::Slip { relay } => run.slip_phase(t, state, relay),
        };
        match step {
            Step::Continue(t1, s1, next) => {
                t = t1;
                state = s1;
                phase = next;
            }
            Step::Done(t1, termination, fault) => break (t1, termination, fault),
        }
    };
    let final_state = run.segments.last().map(|s| s.state_end).unwrap_or(state);
    run.event(PhaseEventKind::End, t_end, final_state);

    Ok(Trace {
        system: run.system,
        initial,
        segments: run.segments,
        events: run.events,
        cycle_count: run.cycle_count,
        termination,
        energy: run.energy,
        eps_lambda,
        t_end,
        fault,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(kd: f64, kp: f64, ki: f64) -> Gains {
        Gains::new(kd, kp, ki).unwrap()
    }

    fn fc(v: f64) -> FrictionParams {
        FrictionParams::new(v).unwrap()
    }

    #[test]
    fn energy_hand_values() {
        let g = gains(20.0, 100.0, 1000.0);
        assert_eq!(stiction_energy(&State::ORIGIN, &g), 0.0);
        let v = stiction_energy(&State::new(0.01, 0.1, 0.0), &g);
        assert!((v - 0.55).abs() < 1e-15);
        let x = State::new(-0.3, 0.7, 2.0);
        let scaled = stiction_energy(&x, &g.scaled(3.5));
        assert!((scaled - 3.5 * stiction_energy(&x, &g)).abs() < 1e-14);
    }

    #[test]
    fn dissipation_hand_values() {
        assert_eq!(dissipation_increment(0.0, 50.0, 3.0), 0.0);
        assert_eq!(dissipation_increment(2.0, 0.0, 3.0), 0.0);
        assert_eq!(dissipation_increment(2.0, 1.0, 0.5), 1.0);
        assert_eq!(dissipation_increment(-2.0, 1.0, 0.5), 1.0);
    }

    #[test]
    fn grid_is_strictly_inside() {
        let v: Vec<f64> = grid_between(0.0, 0.35, 10.0).collect();
        assert_eq!(v, vec![0.1, 0.2, 0.3]);
        let v: Vec<f64> = grid_between(0.1, 0.3, 10.0).collect();
        assert_eq!(v, vec![0.2]);
        assert_eq!(grid_between(0.5, 0.5, 10.0).count(), 0);
    }

    #[test]
    fn rejects_bad_limits() {
        let bad = Limits {
            t_max: -1.0,
            ..Limits::default()
        };
        assert!(simulate(State::ORIGIN, gains(1.0, 1.0, 0.5), fc(1.0), &bad, 10.0).is_err());
        assert!(simulate(
            State::ORIGIN,
            gains(1.0, 1.0, 0.5),
            fc(1.0),
            &Limits::default(),
            0.0
        )
        .is_err());
    }

    #[test]
    fn starting_at_rest_on_lambda_converges_immediately() {
        let trace = simulate(
            State::new(0.01, 0.0, 0.0),
            gains(20.0, 100.0, 1000.0),
            fc(50.0),
            &Limits {
                t_max: 5.0,
                ..Limits::default()
            },
            10.0,
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::ConvergedToLambda);
        assert_eq!(trace.segments.len(), 1);
        assert_eq!(trace.cycle_count, 0);
    }

    #[test]
    fn pd_only_first_landing_is_terminal() {
        let trace = simulate(
            State::new(0.0, 1.0, 0.1),
            gains(0.0, 1.0, 0.0),
            fc(0.5),
            &Limits {
                t_max: 50.0,
                ..Limits::default()
            },
            20.0,
        )
        .unwrap();
        assert_eq!(trace.termination, Termination::NeverExitStick);
        assert_eq!(trace.stick_count(), 1);
        let last = trace.segments.last().unwrap();
        assert_eq!(last.kind, PhaseKind::Stick);
        assert!(last.state_start.x2.abs() <= 0.5);
        assert_eq!(
            last.state_end.x1,
            last.state_start.x1 + last.state_start.x2 * (50.0 - last.t_start)
        );
    }

    #[test]
    fn state_at_matches_samples() {
        let trace = simulate(
            State::new(0.0, -1.1, 0.0),
            gains(20.0, 100.0, 1000.0),
            fc(50.0),
            &Limits {
                t_max: 6.0,
                ..Limits::default()
            },
            50.0,
        )
        .unwrap();
        for s in trace.samples() {
            let x = trace.state_at(s.t).unwrap();
            assert!(x.max_abs_diff(&s.state) < 1e-12, "t = {}", s.t);
        }
        assert!(trace.state_at(7.0).is_none());
    }

    #[test]
    fn chatter_is_detected() {
        let run = Run {
            system: build_system(gains(1.0, 1.0, 0.5), fc(1.0)).unwrap(),
            limits: Limits {
                chatter_flips: 2,
                chatter_span: 1e-6,
                ..Limits::default()
            },
            rate: 1.0,
            eps_lambda: 1e-12,
            window: 1.0,
            segments: Vec::new(),
            events: Vec::new(),
            energy: EnergyReport::default(),
            cycle_count: 0,
            zero_dwell_at: None,
            stable: true,
        };
        assert!(run.chatter(&[1.0, 2.0, 3.0]).is_none());
        assert!(matches!(
            run.chatter(&[1.0, 2.0, 2.0 + 1e-7, 2.0 + 2e-7]),
            Some(Error::ChatterDetected { flips: 3, .. })
        ));
    }
}
