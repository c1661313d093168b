//! Exact, event-driven simulation of stick-slip motion in PID-controlled
//! systems with discontinuous Coulomb friction.
//!
//! The closed loop `x'' + kd x' + kp x + ki ∫x + fc sign(x') = 0` is written in
//! the state `(x1, x2, x3) = (∫x, x, x')`. Slip phases are propagated in closed
//! form with the matrix exponential under a constant relay input; stick phases
//! follow the sliding-mode (equivalent control) dynamics, where only the
//! integral error moves. The [`engine`] alternates both, and the [`oracle`]
//! provides an independent fixed-step integrator for cross-validation.
//!
//! ```
//! use stickslip::{simulate, FrictionParams, Gains, Limits, State};
//!
//! let gains = Gains::new(20.0, 100.0, 1000.0).unwrap();
//! let trace = simulate(
//!     State::new(0.0, -1.1, 0.0),
//!     gains,
//!     FrictionParams::new(50.0).unwrap(),
//!     &Limits { t_max: 12.0, ..Limits::default() },
//!     100.0,
//! )
//! .unwrap();
//! assert!(trace.stick_count() > 0);
//! ```

pub mod engine;
pub mod error;
pub mod model;
pub mod oracle;
pub mod slip;
pub mod stiction;

pub use engine::{
    dissipation_increment, simulate, stiction_energy, EnergyReport, Limits, PhaseEvent,
    PhaseEventKind, PhaseKind, PhaseSegment, Sample, SlipPiece, Termination, Trace,
};
pub use error::{Error, Result};
pub use model::{
    build_system, eigenvalues, is_linearly_stable, FrictionParams, Gains, State, SystemMatrices,
};
pub use oracle::{oracle_rests_for, oracle_run, oracle_step, OracleConfig, OracleSample};
pub use slip::{
    matrix_exponential, next_event, next_event_after_breakaway, propagate, propagate_augmented,
    propagate_particular, slip_stride, EventKind, Relay, SlipEvent,
};
pub use stiction::{
    equivalent_control, in_rhombus, in_stiction, region_vertices, stick_derivative, stick_exit,
    stick_state_at, BoundaryEdge, RegionShape, StickExit, StickOutcome, StictionRegion,
};
