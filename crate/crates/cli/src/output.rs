//! CSV and report emission. Every number is written with 17 significant
//! digits so that parsing it back restores the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use stickslip::{
    eigenvalues, is_linearly_stable, stiction_energy, OracleSample, PhaseKind, State,
    SystemMatrices, Trace,
};

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: &str = "t,x1,x2,x3,phase,u,V";
pub const EVENTS_HEADER: &str = "n,kind,t,x1,x2,x3";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub state: State,
    pub phase: PhaseKind,
    pub u: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventRow {
    pub kind: String,
    pub t: f64,
    pub state: State,
}

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn phase_label(p: PhaseKind) -> &'static str {
    match p {
        PhaseKind::Stick => "stick",
        PhaseKind::Slip => "slip",
    }
}

pub fn engine_rows(trace: &Trace) -> Vec<TraceRow> {
    let gains = trace.gains();
    trace
        .samples()
        .map(|s| TraceRow {
            t: s.t,
            state: s.state,
            phase: s.phase,
            u: s.u,
            v: stiction_energy(&s.state, &gains),
        })
        .collect()
}

pub fn oracle_rows(samples: &[OracleSample], system: &SystemMatrices) -> Vec<TraceRow> {
    let gains = system.gains();
    samples
        .iter()
        .map(|s| TraceRow {
            t: s.t,
            state: s.state,
            phase: if s.at_rest {
                PhaseKind::Stick
            } else {
                PhaseKind::Slip
            },
            u: if s.at_rest { 0.0 } else { -s.state.x3.signum() },
            v: stiction_energy(&s.state, &gains),
        })
        .collect()
}

pub fn engine_events(trace: &Trace) -> Vec<EventRow> {
    trace
        .events
        .iter()
        .map(|e| EventRow {
            kind: e.kind.as_str().to_string(),
            t: e.t,
            state: e.state,
        })
        .collect()
}

/// Rest/motion transitions seen at the oracle's sample resolution.
pub fn oracle_events(samples: &[OracleSample]) -> Vec<EventRow> {
    let mut out = Vec::new();
    let Some(first) = samples.first() else {
        return out;
    };
    let row = |kind: &str, s: &OracleSample| EventRow {
        kind: kind.to_string(),
        t: s.t,
        state: s.state,
    };
    out.push(row("start", first));
    for w in samples.windows(2) {
        match (w[0].at_rest, w[1].at_rest) {
            (false, true) => out.push(row("enter_stiction", &w[1])),
            (true, false) => out.push(row("stick_exit", &w[0])),
            _ => {}
        }
    }
    out.push(row("end", samples.last().unwrap_or(first)));
    out
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = String::with_capacity(rows.len() * 120 + 32);
    s.push_str(TRACE_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.t),
            num(r.state.x1),
            num(r.state.x2),
            num(r.state.x3),
            phase_label(r.phase),
            num(r.u),
            num(r.v)
        );
    }
    s
}

pub fn events_csv(rows: &[EventRow]) -> String {
    let mut s = String::from(EVENTS_HEADER);
    s.push('\n');
    for (n, e) in rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "{n},{},{},{},{},{}",
            e.kind,
            num(e.t),
            num(e.state.x1),
            num(e.state.x2),
            num(e.state.x3)
        );
    }
    s
}

fn field(line: usize, parts: &[&str], i: usize) -> CliResult<f64> {
    parts
        .get(i)
        .and_then(|p| p.parse().ok())
        .ok_or_else(|| CliError::Parse {
            line,
            msg: format!("column {} is not a number", i + 1),
        })
}

pub fn parse_trace_csv(text: &str) -> CliResult<Vec<TraceRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == TRACE_HEADER => {}
        _ => {
            return Err(CliError::Parse {
                line: 1,
                msg: format!("expected header `{TRACE_HEADER}`"),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let line = i + 1;
            let p: Vec<&str> = l.trim().split(',').collect();
            if p.len() != 7 {
                return Err(CliError::Parse {
                    line,
                    msg: format!("expected 7 columns, got {}", p.len()),
                });
            }
            let phase = match p[4] {
                "stick" => PhaseKind::Stick,
                "slip" => PhaseKind::Slip,
                other => {
                    return Err(CliError::Parse {
                        line,
                        msg: format!("unknown phase `{other}`"),
                    })
                }
            };
            Ok(TraceRow {
                t: field(line, &p, 0)?,
                state: State::new(
                    field(line, &p, 1)?,
                    field(line, &p, 2)?,
                    field(line, &p, 3)?,
                ),
                phase,
                u: field(line, &p, 5)?,
                v: field(line, &p, 6)?,
            })
        })
        .collect()
}

pub fn parse_events_csv(text: &str) -> CliResult<Vec<EventRow>> {
    let mut out = Vec::new();
    for (i, l) in text.lines().enumerate().skip(1) {
        if l.trim().is_empty() {
            continue;
        }
        let p: Vec<&str> = l.trim().split(',').collect();
        if p.len() != 6 {
            return Err(CliError::Parse {
                line: i + 1,
                msg: format!("expected 6 columns, got {}", p.len()),
            });
        }
        out.push(EventRow {
            kind: p[1].to_string(),
            t: field(i + 1, &p, 2)?,
            state: State::new(
                field(i + 1, &p, 3)?,
                field(i + 1, &p, 4)?,
                field(i + 1, &p, 5)?,
            ),
        });
    }
    Ok(out)
}

/// Plant section shared by engine and oracle reports.
pub fn plant_report(name: &str, system: &SystemMatrices, initial: &State) -> String {
    let g = system.gains();
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {name}");
    let _ = writeln!(
        s,
        "gains: kd = {}, kp = {}, ki = {}",
        num(g.kd),
        num(g.kp),
        num(g.ki)
    );
    let _ = writeln!(s, "friction: fc = {}", num(system.fc));
    let _ = writeln!(
        s,
        "initial state: x1 = {}, x2 = {}, x3 = {}",
        num(initial.x1),
        num(initial.x2),
        num(initial.x3)
    );
    let stable = is_linearly_stable(g);
    let _ = writeln!(
        s,
        "linear stability (kd*kp > ki, all gains positive): {} ({} vs {})",
        if stable { "stable" } else { "not satisfied" },
        num(g.kd * g.kp),
        num(g.ki)
    );
    s.push_str("eigenvalues of A:\n");
    for l in eigenvalues(system) {
        let _ = writeln!(
            s,
            "  {} {} {}j",
            num(l.re),
            if l.im < 0.0 { "-" } else { "+" },
            num(l.im.abs())
        );
    }
    s
}

/// Final-state lines: `|x1|` against the integral bound `fc/ki`.
pub fn final_report(system: &SystemMatrices, t_end: f64, last: &State) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "t_end: {}", num(t_end));
    let _ = writeln!(
        s,
        "final state: x1 = {}, x2 = {}, x3 = {}",
        num(last.x1),
        num(last.x2),
        num(last.x3)
    );
    let ki = system.ki();
    if ki > 0.0 {
        let bound = system.fc / ki;
        let _ = writeln!(
            s,
            "final |x1| = {} vs fc/ki = {}: {}",
            num(last.x1.abs()),
            num(bound),
            if last.x1.abs() <= bound {
                "within"
            } else {
                "outside"
            }
        );
    } else {
        let _ = writeln!(
            s,
            "final |x1| = {} (no integral bound, ki = 0)",
            num(last.x1.abs())
        );
    }
    s
}

pub fn engine_report(name: &str, trace: &Trace) -> String {
    let mut s = plant_report(name, &trace.system, &trace.initial);
    let _ = writeln!(s, "cycles: {}", trace.cycle_count);
    let _ = writeln!(s, "stick phases: {}", trace.stick_count());
    let _ = writeln!(s, "termination: {}", trace.termination.as_str());
    if let Some(fault) = &trace.fault {
        let _ = writeln!(s, "fault: {fault}");
    }
    let _ = writeln!(s, "eps_lambda: {}", num(trace.eps_lambda));
    let _ = writeln!(s, "dissipated: {}", num(trace.energy.dissipated));
    let last = trace
        .segments
        .last()
        .map_or(trace.initial, |seg| seg.state_end);
    s += &final_report(&trace.system, trace.t_end, &last);
    s
}

pub fn oracle_report(
    name: &str,
    system: &SystemMatrices,
    samples: &[OracleSample],
    dt: f64,
) -> String {
    let initial = samples.first().map_or(State::ORIGIN, |s| s.state);
    let mut s = plant_report(name, system, &initial);
    let rests = oracle_events(samples)
        .iter()
        .filter(|e| e.kind == "enter_stiction")
        .count();
    let _ = writeln!(s, "oracle: RK4, dt = {}", num(dt));
    let _ = writeln!(s, "stick phases (sampled): {rests}");
    let last = samples.last().copied().unwrap_or(OracleSample {
        t: 0.0,
        state: initial,
        at_rest: false,
    });
    s += &final_report(system, last.t, &last.state);
    s
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
