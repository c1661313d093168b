//! Scenario execution, file emission and parameter sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use stickslip::{
    build_system, oracle_run, simulate, OracleConfig, OracleSample, SystemMatrices, Termination,
    Trace,
};

use crate::compare::{compare_runs, Deviation};
use crate::config::{Mode, ScenarioConfig};
use crate::error::{CliError, CliResult, EXIT_CHATTER, EXIT_DIVERGENCE, EXIT_FAILURE, EXIT_OK};
use crate::output::{
    engine_events, engine_report, engine_rows, events_csv, num, oracle_events, oracle_report,
    oracle_rows, trace_csv, write_file,
};

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub system: SystemMatrices,
    pub config: OracleConfig,
    pub samples: Vec<OracleSample>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub config: ScenarioConfig,
    pub engine: Option<Trace>,
    pub oracle: Option<OracleRun>,
    pub deviation: Option<Deviation>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// 3 on divergence, 4 on chatter, otherwise 0.
    pub fn exit_code(&self) -> i32 {
        match self.engine.as_ref().map(|t| t.termination) {
            Some(Termination::DivergenceDetected) => EXIT_DIVERGENCE,
            Some(Termination::ChatterDetected) => EXIT_CHATTER,
            _ => EXIT_OK,
        }
    }

    pub fn headline(&self) -> String {
        let mut s = format!("{}:", self.config.name);
        if let Some(t) = &self.engine {
            let _ = write!(
                s,
                " {} after {} cycles at t = {}",
                t.termination.as_str(),
                t.cycle_count,
                t.t_end
            );
        }
        if let Some(o) = &self.oracle {
            let _ = write!(s, "; oracle {} samples", o.samples.len());
        }
        if let Some(d) = &self.deviation {
            let _ = write!(
                s,
                "; deviation {:e} ({})",
                d.sup,
                if d.passed() { "pass" } else { "FAIL" }
            );
        }
        s
    }
}

fn oracle_for(cfg: &ScenarioConfig, t_end: f64) -> CliResult<OracleRun> {
    let system = build_system(cfg.gains, cfg.friction())?;
    let config = OracleConfig::localized(cfg.oracle_dt, cfg.fc)?;
    let every = (1.0 / (cfg.output_rate * cfg.oracle_dt)).round().max(1.0) as usize;
    let samples = oracle_run(cfg.x0, &system, &config, t_end, every);
    Ok(OracleRun {
        system,
        config,
        samples,
    })
}

/// Runs the scenario without touching the file system.
pub fn execute(cfg: &ScenarioConfig) -> CliResult<RunOutcome> {
    cfg.validate()?;
    let engine = match cfg.mode {
        Mode::Engine | Mode::Both => Some(simulate(
            cfg.x0,
            cfg.gains,
            cfg.friction(),
            &cfg.limits(),
            cfg.output_rate,
        )?),
        Mode::Oracle => None,
    };
    let oracle = match cfg.mode {
        Mode::Engine => None,
        Mode::Oracle => Some(oracle_for(cfg, cfg.t_max)?),
        Mode::Both => Some(oracle_for(
            cfg,
            engine.as_ref().map_or(cfg.t_max, |t| t.t_end),
        )?),
    };
    let deviation = match (&engine, &oracle) {
        (Some(e), Some(o)) => Some(compare_runs(e, &o.system, &o.samples, cfg.tolerance)?),
        _ => None,
    };
    Ok(RunOutcome {
        config: cfg.clone(),
        engine,
        oracle,
        deviation,
        files: Vec::new(),
    })
}

/// Writes `trace.csv`, `events.csv` and `report.txt` (engine, or oracle when
/// run alone). With both, the oracle goes to `oracle_*.csv` and the
/// comparison to `deviation.csv` plus a section of the report.
pub fn write_outputs(outcome: &RunOutcome, dir: &Path) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files = Vec::new();
    let mut emit = |name: &str, body: String| -> CliResult<()> {
        let path = dir.join(name);
        write_file(&path, &body)?;
        files.push(path);
        Ok(())
    };
    let name = &outcome.config.name;
    let mut report = String::new();
    match (&outcome.engine, &outcome.oracle) {
        (Some(trace), oracle) => {
            emit("trace.csv", trace_csv(&engine_rows(trace)))?;
            emit("events.csv", events_csv(&engine_events(trace)))?;
            report = engine_report(name, trace);
            if let Some(o) = oracle {
                emit(
                    "oracle_trace.csv",
                    trace_csv(&oracle_rows(&o.samples, &o.system)),
                )?;
                emit("oracle_events.csv", events_csv(&oracle_events(&o.samples)))?;
            }
        }
        (None, Some(o)) => {
            emit("trace.csv", trace_csv(&oracle_rows(&o.samples, &o.system)))?;
            emit("events.csv", events_csv(&oracle_events(&o.samples)))?;
            report = oracle_report(name, &o.system, &o.samples, o.config.dt);
        }
        (None, None) => {}
    }
    if let Some(d) = &outcome.deviation {
        emit("deviation.csv", d.csv())?;
        let dt = outcome.oracle.as_ref().map_or(0.0, |o| o.config.dt);
        let _ = writeln!(report, "oracle dt: {}", num(dt));
        report.push_str(&d.summary());
    }
    emit("report.txt", report)?;
    emit("scenario.cfg", outcome.config.to_text())?;
    Ok(files)
}

/// [`execute`] followed by [`write_outputs`] into `cfg.out`.
pub fn run(cfg: &ScenarioConfig) -> CliResult<RunOutcome> {
    let mut outcome = execute(cfg)?;
    outcome.files = write_outputs(&outcome, &cfg.out)?;
    Ok(outcome)
}

/// Engine and oracle on the same scenario; the outcome carries the verdict.
pub fn compare(cfg: &ScenarioConfig) -> CliResult<RunOutcome> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::Both;
    run(&cfg)
}

/// One scenario per value of `key`, run on worker threads. Each writes into
/// `out/<key>=<value>/`; `out/sweep.csv` summarises all of them.
pub fn sweep(
    base: &ScenarioConfig,
    key: &str,
    values: &[String],
) -> CliResult<Vec<(String, CliResult<RunOutcome>)>> {
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut cfg = base.clone();
        cfg.set(key, v)?;
        cfg.name = format!("{}-{key}={v}", base.name);
        cfg.out = base.out.join(format!("{key}={v}"));
        cfg.validate()?;
        configs.push(cfg);
    }
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(configs.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<CliResult<RunOutcome>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                let r = run(cfg);
                results.lock().expect("sweep worker panicked")[i] = Some(r);
            });
        }
    });
    let results: Vec<(String, CliResult<RunOutcome>)> = values
        .iter()
        .cloned()
        .zip(
            results
                .into_inner()
                .expect("sweep worker panicked")
                .into_iter()
                .map(|r| r.expect("every sweep slot is filled")),
        )
        .collect();
    fs::create_dir_all(&base.out).map_err(|e| CliError::io(&base.out, e))?;
    write_file(&base.out.join("sweep.csv"), &sweep_csv(key, &results))?;
    Ok(results)
}

fn sweep_csv(key: &str, results: &[(String, CliResult<RunOutcome>)]) -> String {
    let mut s = String::from("param,value,exit_code,termination,cycles,t_end,x1,x2,x3,deviation\n");
    for (v, r) in results {
        match r {
            Ok(o) => {
                let (term, cycles, t_end, last) = match &o.engine {
                    Some(t) => (
                        t.termination.as_str().to_string(),
                        t.cycle_count.to_string(),
                        t.t_end,
                        t.segments.last().map_or(t.initial, |seg| seg.state_end),
                    ),
                    None => {
                        let last = o.oracle.as_ref().and_then(|x| x.samples.last()).copied();
                        let (t, st) = last.map_or((0.0, o.config.x0), |x| (x.t, x.state));
                        ("oracle".to_string(), String::new(), t, st)
                    }
                };
                let dev = o.deviation.as_ref().map_or(String::new(), |d| num(d.sup));
                let _ = writeln!(
                    s,
                    "{key},{v},{},{term},{cycles},{},{},{},{},{dev}",
                    o.exit_code(),
                    num(t_end),
                    num(last.x1),
                    num(last.x2),
                    num(last.x3)
                );
            }
            Err(e) => {
                let _ = writeln!(s, "{key},{v},{},error,,,,,,", e.exit_code());
            }
        }
    }
    s
}

/// Combined exit status of a sweep: the largest individual code.
pub fn sweep_exit_code(results: &[(String, CliResult<RunOutcome>)]) -> i32 {
    results
        .iter()
        .map(|(_, r)| match r {
            Ok(o) => o.exit_code(),
            Err(e) => e.exit_code().max(EXIT_FAILURE),
        })
        .max()
        .unwrap_or(EXIT_OK)
}
