//! Engine against oracle on a common time grid.

use std::fmt::Write as _;

use stickslip::{OracleSample, State, SystemMatrices, Trace};

use crate::error::{CliError, CliResult};
use crate::output::num;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub t: f64,
    pub engine: State,
    pub oracle: State,
}

impl DeviationRow {
    pub fn deviation(&self) -> f64 {
        self.engine.max_abs_diff(&self.oracle)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    pub rows: Vec<DeviationRow>,
    /// Per-component sup norms for `x1`, `x2`, `x3`.
    pub sup_components: [f64; 3],
    pub sup: f64,
    pub worst_t: f64,
    pub tolerance: f64,
}

impl Deviation {
    pub fn passed(&self) -> bool {
        self.sup <= self.tolerance
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("t,e_x1,e_x2,e_x3,o_x1,o_x2,o_x3,deviation\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                num(r.t),
                num(r.engine.x1),
                num(r.engine.x2),
                num(r.engine.x3),
                num(r.oracle.x1),
                num(r.oracle.x2),
                num(r.oracle.x3),
                num(r.deviation())
            );
        }
        s
    }

    pub fn summary(&self) -> String {
        let [d1, d2, d3] = self.sup_components;
        format!(
            "comparison: {} samples\nsup |dx1| = {}\nsup |dx2| = {}\nsup |dx3| = {}\nsup-norm deviation = {} at t = {}\ntolerance = {}\nverdict: {}\n",
            self.rows.len(),
            num(d1),
            num(d2),
            num(d3),
            num(self.sup),
            num(self.worst_t),
            num(self.tolerance),
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

/// Evaluates the exact engine state at every oracle sample time.
///
/// Both runs must describe the same plant; differing gains or friction are
/// an error rather than a large deviation.
pub fn compare_runs(
    engine: &Trace,
    oracle_system: &SystemMatrices,
    samples: &[OracleSample],
    tolerance: f64,
) -> CliResult<Deviation> {
    let (ga, gb) = (engine.gains(), oracle_system.gains());
    if ga != gb || engine.system.fc != oracle_system.fc {
        return Err(CliError::PlantMismatch {
            a: (ga, engine.system.fc),
            b: (gb, oracle_system.fc),
        });
    }
    let mut rows = Vec::with_capacity(samples.len());
    for o in samples {
        // The oracle clock is k·dt and may overshoot the horizon by rounding.
        let t = o.t.min(engine.t_end);
        let Some(e) = engine.state_at(t) else {
            continue;
        };
        rows.push(DeviationRow {
            t: o.t,
            engine: e,
            oracle: o.state,
        });
    }
    let mut sup_components = [0.0_f64; 3];
    let (mut sup, mut worst_t) = (0.0_f64, 0.0);
    for r in &rows {
        let d = [
            (r.engine.x1 - r.oracle.x1).abs(),
            (r.engine.x2 - r.oracle.x2).abs(),
            (r.engine.x3 - r.oracle.x3).abs(),
        ];
        for (acc, v) in sup_components.iter_mut().zip(d) {
            *acc = acc.max(v);
        }
        let dev = r.deviation();
        if dev > sup {
            sup = dev;
            worst_t = r.t;
        }
    }
    Ok(Deviation {
        rows,
        sup_components,
        sup,
        worst_t,
        tolerance,
    })
}
