//! Stick phase: stiction predicate, region geometry, sliding-mode dynamics and
//! the closed-form breakaway point.
//!
//! While stuck, `x3 ≡ 0` and the relay is replaced by its equivalent control
//! `u_e = (ki x1 + kp x2 + kd x3) / fc`. The sliding mode persists while
//! `|u_e| ≤ 1`; the integral error drifts as `x1' = x2` until the force balance
//! reaches the friction level and the mass breaks away.
//!
//! Two sets are exposed. [`in_stiction`] is the force-balance test
//! `|ki x1 + kp x2| ≤ fc` that decides whether a landing actually sticks.
//! [`StictionRegion`] is the rhombus `|ki x1| + |kp x2| ≤ fc`; it is contained
//! in the force-balance strip and shares its boundary in the first and third
//! quadrants, where every breakaway happens.

use crate::error::{Error, Result};
use crate::model::{State, SystemMatrices};

/// Default tolerance for treating `x3` as zero.
pub fn default_velocity_tolerance(state: &State) -> f64 {
    1e-10 * state.norm().max(1.0)
}

/// Rhombus `{x3 = 0, |ki x1| + |kp x2| ≤ fc}` in the `(x1, x2)` projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StictionRegion {
    pub fc: f64,
    pub kp: f64,
    pub ki: f64,
}

/// Shape of the stiction rhombus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionShape {
    /// Vertices `(±fc/ki, 0)` and `(0, ±fc/kp)`, ordered counter-clockwise from `+x1`.
    Rhombus { vertices: [(f64, f64); 4] },
    /// `ki = 0`: the strip `|x2| ≤ half_width`, unbounded in `x1`.
    Strip { half_width: f64 },
}

impl StictionRegion {
    pub fn new(system: &SystemMatrices) -> Self {
        Self {
            fc: system.fc,
            kp: system.kp(),
            ki: system.ki(),
        }
    }

    /// Half-diagonal along `x1`, `None` when `ki = 0`.
    pub fn x1_half_diagonal(&self) -> Option<f64> {
        (self.ki > 0.0).then(|| self.fc / self.ki)
    }

    pub fn x2_half_diagonal(&self) -> f64 {
        self.fc / self.kp
    }

    /// Rhombus membership of the `(x1, x2)` projection (boundary inclusive).
    pub fn contains_projection(&self, x1: f64, x2: f64) -> bool {
        (self.ki * x1).abs() + (self.kp * x2).abs() <= self.fc
    }

    pub fn contains(&self, state: &State, tol_v: f64) -> bool {
        state.x3.abs() <= tol_v && self.contains_projection(state.x1, state.x2)
    }

    pub fn shape(&self) -> RegionShape {
        let d2 = self.x2_half_diagonal();
        match self.x1_half_diagonal() {
            Some(d1) => RegionShape::Rhombus {
                vertices: [(d1, 0.0), (0.0, d2), (-d1, 0.0), (0.0, -d2)],
            },
            None => RegionShape::Strip { half_width: d2 },
        }
    }
}

/// Force-balance stiction test: `|x3| ≤ tol_v` and `|ki x1 + kp x2| ≤ fc`.
pub fn in_stiction(state: &State, system: &SystemMatrices, tol_v: f64) -> bool {
    debug_assert!(tol_v >= 0.0);
    state.x3.abs() <= tol_v && sliding_force(state, system).abs() <= system.fc
}

/// Rhombus test `|x3| ≤ tol_v` and `|ki x1| + |kp x2| ≤ fc`.
pub fn in_rhombus(state: &State, system: &SystemMatrices, tol_v: f64) -> bool {
    StictionRegion::new(system).contains(state, tol_v)
}

/// `ki x1 + kp x2`: spring force on the sticking manifold `x3 = 0`.
pub(crate) fn sliding_force(state: &State, system: &SystemMatrices) -> f64 {
    system.ki() * state.x1 + system.kp() * state.x2
}

/// Force-balance test with a rounding allowance, for landing states produced by
/// the event search.
pub(crate) fn sticks_at_landing(state: &State, system: &SystemMatrices) -> bool {
    let a = system.ki() * state.x1;
    let b = system.kp() * state.x2;
    let slack = 16.0 * f64::EPSILON * (a.abs() + b.abs() + system.fc);
    (a + b).abs() <= system.fc + slack
}

pub fn region_vertices(system: &SystemMatrices) -> RegionShape {
    StictionRegion::new(system).shape()
}

/// Sliding-mode dynamics `(x2, 0, 0)`.
pub fn stick_derivative(state: &State) -> State {
    State::new(state.x2, 0.0, 0.0)
}

/// Equivalent control `-(CB)⁻¹ C A x`.
pub fn equivalent_control(state: &State, system: &SystemMatrices) -> Result<f64> {
    if system.fc == 0.0 {
        return Err(Error::Frictionless);
    }
    Ok(system.restoring_force(state) / system.fc)
}

/// Edge of the stiction set through which the state breaks away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryEdge {
    /// `ki x1 + kp x2 = +fc` (`x2 > 0`, first-quadrant edge of the rhombus).
    Upper,
    /// `ki x1 + kp x2 = -fc` (`x2 < 0`, third-quadrant edge).
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StickExit {
    pub exit_state: State,
    pub exit_time: f64,
    pub edge: BoundaryEdge,
}

/// Why a stick phase never ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeverReason {
    /// `x2 = 0`: the state is on the equilibrium set and `x1` does not drift.
    EquilibriumSet,
    /// `ki = 0`: no integral action builds up force.
    NoIntegralAction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StickOutcome {
    Exit(StickExit),
    Never(NeverReason),
}

impl StickOutcome {
    pub fn exit(&self) -> Option<&StickExit> {
        match self {
            StickOutcome::Exit(e) => Some(e),
            StickOutcome::Never(_) => None,
        }
    }
}

/// Breakaway point and time of a stick phase entered at `entry_time`.
///
/// `x1` drifts at rate `x2` until `ki x1 + kp x2 = fc sign(x2)`, giving
/// `x1(tc) = x2 (fc/|x2| - kp) / ki` and `tc = ts + (x1(tc) - x1(ts)) / x2`.
/// `x2` and `x3` are carried over unchanged.
pub fn stick_exit(entry: &State, entry_time: f64, system: &SystemMatrices) -> Result<StickOutcome> {
    let tol = default_velocity_tolerance(entry);
    if entry.x3.abs() > tol || !sticks_at_landing(entry, system) {
        return Err(Error::NotInStiction {
            x1: entry.x1,
            x2: entry.x2,
            x3: entry.x3,
        });
    }
    let ki = system.ki();
    if ki == 0.0 {
        return Ok(StickOutcome::Never(NeverReason::NoIntegralAction));
    }
    if entry.x2 == 0.0 {
        return Ok(StickOutcome::Never(NeverReason::EquilibriumSet));
    }
    let x2 = entry.x2;
    let x1_exit = x2 * (system.fc / x2.abs() - system.kp()) / ki;
    let dwell = ((x1_exit - entry.x1) / x2).max(0.0);
    let edge = if x2 > 0.0 {
        BoundaryEdge::Upper
    } else {
        BoundaryEdge::Lower
    };
    Ok(StickOutcome::Exit(StickExit {
        exit_state: State::new(x1_exit, x2, 0.0),
        exit_time: entry_time + dwell,
        edge,
    }))
}

/// State at time `t` of a stick phase entered at `(entry_time, entry)`.
pub fn stick_state_at(entry: &State, entry_time: f64, t: f64) -> State {
    State::new(entry.x1 + entry.x2 * (t - entry_time), entry.x2, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system, FrictionParams, Gains};

    fn sys(kd: f64, kp: f64, ki: f64, fc: f64) -> SystemMatrices {
        build_system(
            Gains::new(kd, kp, ki).unwrap(),
            FrictionParams::new(fc).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn origin_sticks() {
        for s in [sys(20.0, 100.0, 1000.0, 50.0), sys(0.0, 1.0, 0.0, 0.0)] {
            assert!(in_stiction(&State::ORIGIN, &s, 1e-10));
            assert!(in_rhombus(&State::ORIGIN, &s, 1e-10));
        }
    }

    #[test]
    fn hand_evaluated_membership() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        // 10 + 30 = 40 <= 50
        assert!(in_stiction(&State::new(0.01, 0.3, 0.0), &s, 1e-10));
        // 10 + 50 = 60 > 50
        assert!(!in_stiction(&State::new(0.01, 0.5, 0.0), &s, 1e-10));
        // moving states never stick
        assert!(!in_stiction(&State::new(0.0, 0.0, 1e-3), &s, 1e-10));
    }

    #[test]
    fn rhombus_is_stricter_off_diagonal() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        // ki x1 = -78, kp x2 = 65: rhombus sum 143, force balance |-13| <= 50
        let x = State::new(-0.078, 0.65, 0.0);
        assert!(in_stiction(&x, &s, 1e-10));
        assert!(!in_rhombus(&x, &s, 1e-10));
    }

    #[test]
    fn stick_derivative_structure() {
        assert_eq!(
            stick_derivative(&State::new(1.0, 2.0, 0.0)),
            State::new(2.0, 0.0, 0.0)
        );
        assert_eq!(stick_derivative(&State::new(5.0, 0.0, 0.0)), State::ORIGIN);
        assert_eq!(
            stick_derivative(&State::new(-0.04, -0.1, 0.0)),
            State::new(-0.1, 0.0, 0.0)
        );
    }

    #[test]
    fn stick_exit_hand_value() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        let out = stick_exit(&State::new(0.0, 0.1, 0.0), 0.0, &s).unwrap();
        let e = out.exit().unwrap();
        assert!((e.exit_state.x1 - 0.04).abs() < 1e-15);
        assert!((e.exit_time - 0.4).abs() < 1e-12);
        assert_eq!(e.exit_state.x2, 0.1);
        assert_eq!(e.exit_state.x3, 0.0);
        assert_eq!(e.edge, BoundaryEdge::Upper);
    }

    #[test]
    fn stick_exit_lower_edge_and_offset_entry_time() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        let e = *stick_exit(&State::new(0.01, -0.2, 0.0), 3.0, &s)
            .unwrap()
            .exit()
            .unwrap();
        // x1c = -0.2 (250 - 100) / 1000 = -0.03, dwell = (-0.03 - 0.01) / -0.2 = 0.2
        assert!((e.exit_state.x1 + 0.03).abs() < 1e-15);
        assert!((e.exit_time - 3.2).abs() < 1e-12);
        assert_eq!(e.edge, BoundaryEdge::Lower);
    }

    #[test]
    fn stick_exit_never() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        assert_eq!(
            stick_exit(&State::new(0.02, 0.0, 0.0), 0.0, &s).unwrap(),
            StickOutcome::Never(NeverReason::EquilibriumSet)
        );
        let pd = sys(2.0, 100.0, 0.0, 50.0);
        assert_eq!(
            stick_exit(&State::new(7.0, 0.3, 0.0), 1.0, &pd).unwrap(),
            StickOutcome::Never(NeverReason::NoIntegralAction)
        );
    }

    #[test]
    fn stick_exit_rejects_non_sticking_entry() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        assert!(matches!(
            stick_exit(&State::new(0.01, 0.5, 0.0), 0.0, &s),
            Err(Error::NotInStiction { .. })
        ));
        assert!(stick_exit(&State::new(0.0, 0.1, 0.5), 0.0, &s).is_err());
    }

    #[test]
    fn equivalent_control_values() {
        let s = sys(20.0, 100.0, 1000.0, 50.0);
        assert_eq!(equivalent_control(&State::ORIGIN, &s).unwrap(), 0.0);
        let ue = equivalent_control(&State::new(0.01, 0.3, 0.0), &s).unwrap();
        assert!((ue - 0.8).abs() < 1e-15);
        // boundary with matching signs: 1000 * 0.02 + 100 * 0.3 = 50
        let ue = equivalent_control(&State::new(0.02, 0.3, 0.0), &s).unwrap();
        assert!((ue - 1.0).abs() < 1e-15);
        let ue = equivalent_control(&State::new(-0.02, -0.3, 0.0), &s).unwrap();
        assert!((ue + 1.0).abs() < 1e-15);
        assert_eq!(
            equivalent_control(&State::ORIGIN, &sys(1.0, 1.0, 1.0, 0.0)),
            Err(Error::Frictionless)
        );
    }

    #[test]
    fn vertices() {
        match region_vertices(&sys(20.0, 100.0, 1000.0, 50.0)) {
            RegionShape::Rhombus { vertices } => {
                assert_eq!(
                    vertices,
                    [(0.05, 0.0), (0.0, 0.5), (-0.05, 0.0), (0.0, -0.5)]
                );
            }
            other => panic!("{other:?}"),
        }
        match region_vertices(&sys(20.0, 100.0, 1000.0, 0.0)) {
            RegionShape::Rhombus { vertices } => {
                assert!(vertices.iter().all(|&(a, b)| a == 0.0 && b == 0.0))
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            region_vertices(&sys(20.0, 100.0, 0.0, 50.0)),
            RegionShape::Strip { half_width: 0.5 }
        );
    }

    #[test]
    fn frictionless_region_is_a_point() {
        let s = sys(20.0, 100.0, 1000.0, 0.0);
        let r = StictionRegion::new(&s);
        assert!(r.contains(&State::ORIGIN, 1e-12));
        assert!(!r.contains(&State::new(1e-9, 0.0, 0.0), 1e-12));
        assert!(!r.contains(&State::new(0.0, 1e-9, 0.0), 1e-12));
    }
}
