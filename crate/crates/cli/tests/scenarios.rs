use stickslip::{build_system, FrictionParams, Gains, OracleConfig, State};
use stickslip_cli::{
    compare, compare_runs, execute, parse_events_csv, parse_trace_csv, preset, read_file, run,
    sweep, sweep_exit_code, CliError, Mode, ScenarioConfig, EXIT_CONFIG,
};

fn in_tempdir(mut cfg: ScenarioConfig) -> (tempfile::TempDir, ScenarioConfig) {
    let dir = tempfile::tempdir().unwrap();
    cfg.out = dir.path().join("out");
    (dir, cfg)
}

#[test]
fn emitted_trace_round_trips_bit_exactly() {
    let (_dir, cfg) = in_tempdir(preset("example2b").unwrap());
    let outcome = run(&cfg).unwrap();
    let trace = outcome.engine.as_ref().unwrap();
    let rows = parse_trace_csv(&read_file(&cfg.out.join("trace.csv")).unwrap()).unwrap();
    let samples: Vec<_> = trace.samples().collect();
    assert_eq!(rows.len(), samples.len());
    for (r, s) in rows.iter().zip(samples) {
        assert_eq!(r.t.to_bits(), s.t.to_bits());
        assert_eq!(r.state.x1.to_bits(), s.state.x1.to_bits());
        assert_eq!(r.state.x2.to_bits(), s.state.x2.to_bits());
        assert_eq!(r.state.x3.to_bits(), s.state.x3.to_bits());
        assert_eq!(r.phase, s.phase);
        assert_eq!(r.u.to_bits(), s.u.to_bits());
    }
    let events = parse_events_csv(&read_file(&cfg.out.join("events.csv")).unwrap()).unwrap();
    assert_eq!(events.len(), trace.events.len());
    assert_eq!(events.first().unwrap().kind, "start");
    assert_eq!(events.last().unwrap().kind, "end");
}

#[test]
fn example2b_convergence_phase_shrinks_x2_at_each_stick() {
    let (_dir, cfg) = in_tempdir(preset("example2b").unwrap());
    run(&cfg).unwrap();
    let events = parse_events_csv(&read_file(&cfg.out.join("events.csv")).unwrap()).unwrap();
    let late: Vec<f64> = events
        .iter()
        .filter(|e| e.kind == "enter_stiction" && e.t >= 12.0)
        .map(|e| e.state.x2.abs())
        .collect();
    assert!(late.len() >= 2, "{late:?}");
    assert!(late.windows(2).all(|w| w[1] < w[0]), "{late:?}");
}

#[test]
fn example5_stick_durations_grow() {
    let (_dir, cfg) = in_tempdir(preset("example5").unwrap());
    run(&cfg).unwrap();
    let events = parse_events_csv(&read_file(&cfg.out.join("events.csv")).unwrap()).unwrap();
    let mut durations = Vec::new();
    let mut onset = None;
    for e in &events {
        match e.kind.as_str() {
            "enter_stiction" => onset = Some(e.t),
            "stick_exit" => durations.push(e.t - onset.take().unwrap()),
            _ => {}
        }
    }
    assert!(durations.len() >= 10, "{durations:?}");
    assert!(durations.windows(2).all(|w| w[1] > w[0]), "{durations:?}");
}

#[test]
fn frictionless_stable_run_reports_zero_cycles() {
    let text = "gains = 20, 100, 1000\nfc = 0\nx0 = 0, -1.1, 0\nt_max = 120\noutput_rate = 10\n";
    let (_dir, cfg) = in_tempdir(ScenarioConfig::parse(text).unwrap());
    let outcome = run(&cfg).unwrap();
    let report = read_file(&cfg.out.join("report.txt")).unwrap();
    assert!(report.contains("cycles: 0"), "{report}");
    assert!(
        report.contains("termination: ConvergedToLambda"),
        "{report}"
    );
    assert!(report.contains("stable"), "{report}");
    assert_eq!(outcome.exit_code(), 0);
}

#[test]
fn report_carries_the_integral_bound() {
    let (_dir, cfg) = in_tempdir(preset("example4a").unwrap());
    run(&cfg).unwrap();
    let report = read_file(&cfg.out.join("report.txt")).unwrap();
    for needle in [
        "eigenvalues",
        "termination:",
        "cycles:",
        "vs fc/ki",
        "within",
    ] {
        assert!(report.contains(needle), "{needle}: {report}");
    }
}

#[test]
fn compare_example2a_on_the_transient() {
    let mut cfg = preset("example2a").unwrap();
    cfg.t_max = 12.0;
    cfg.oracle_dt = 1e-6;
    cfg.mode = Mode::Both;
    let outcome = execute(&cfg).unwrap();
    let d = outcome.deviation.unwrap();
    assert!(d.rows.len() > 1000);
    assert!(d.passed(), "{}", d.summary());
    assert!(d.sup <= 1e-6);
}

#[test]
fn compare_without_friction_is_rk4_limited() {
    let text = "gains = 20, 100, 1000\nfc = 0\nx0 = 0, -1.1, 0\nt_max = 5\n";
    let mut cfg = ScenarioConfig::parse(text).unwrap();
    let mut sups = Vec::new();
    for dt in [1e-3, 5e-4] {
        cfg.oracle_dt = dt;
        cfg.mode = Mode::Both;
        sups.push(execute(&cfg).unwrap().deviation.unwrap().sup);
    }
    // Fourth-order: halving the step cuts the error about sixteenfold.
    let ratio = sups[0] / sups[1];
    assert!(sups[0] < 1e-6, "{sups:?}");
    assert!((10.0..24.0).contains(&ratio), "{sups:?}");
}

#[test]
fn compare_rejects_mismatched_plants() {
    let cfg = preset("example2a").unwrap();
    let outcome = execute(&cfg).unwrap();
    let trace = outcome.engine.unwrap();
    let other = build_system(
        Gains {
            kd: 20.0,
            kp: 101.0,
            ki: 1000.0,
        },
        FrictionParams::new(50.0).unwrap(),
    )
    .unwrap();
    let cfg_o = OracleConfig::localized(1e-3, 50.0).unwrap();
    let samples = stickslip::oracle_run(State::new(0.0, -1.1, 0.0), &other, &cfg_o, 1.0, 10);
    let err = compare_runs(&trace, &other, &samples, 1e-6).unwrap_err();
    assert!(matches!(err, CliError::PlantMismatch { .. }));
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn oracle_mode_writes_the_same_files() {
    let mut cfg = preset("example4b").unwrap();
    cfg.mode = Mode::Oracle;
    cfg.t_max = 2.0;
    cfg.oracle_dt = 1e-4;
    let (_dir, cfg) = in_tempdir(cfg);
    let outcome = run(&cfg).unwrap();
    assert!(outcome.engine.is_none());
    let rows = parse_trace_csv(&read_file(&cfg.out.join("trace.csv")).unwrap()).unwrap();
    assert!(rows.len() > 100);
    let events = parse_events_csv(&read_file(&cfg.out.join("events.csv")).unwrap()).unwrap();
    assert!(events.iter().any(|e| e.kind == "enter_stiction"));
}

#[test]
fn compare_writes_deviation_files() {
    let mut cfg = preset("example3").unwrap();
    cfg.t_max = 0.5;
    cfg.oracle_dt = 1e-5;
    let (_dir, cfg) = in_tempdir(cfg);
    let outcome = compare(&cfg).unwrap();
    for f in [
        "trace.csv",
        "oracle_trace.csv",
        "deviation.csv",
        "report.txt",
    ] {
        assert!(cfg.out.join(f).exists(), "{f}");
    }
    let report = read_file(&cfg.out.join("report.txt")).unwrap();
    assert!(report.contains("sup-norm deviation"));
    assert!(outcome.deviation.unwrap().passed());
}

#[test]
fn sweep_fans_out_and_joins() {
    let (_dir, cfg) = in_tempdir(preset("example2a").unwrap());
    let values: Vec<String> = ["50", "75", "100"].map(String::from).to_vec();
    let results = sweep(&cfg, "fc", &values).unwrap();
    assert_eq!(results.len(), 3);
    assert_eq!(sweep_exit_code(&results), 0);
    for ((v, r), fc) in results.iter().zip([50.0, 75.0, 100.0]) {
        let o = r.as_ref().unwrap();
        assert_eq!(o.config.fc, fc, "{v}");
        assert!(cfg.out.join(format!("fc={v}")).join("trace.csv").exists());
        // Same answer as a direct run of the corresponding preset.
        let name = match v.as_str() {
            "50" => "example2a",
            "75" => "example2b",
            _ => "example2c",
        };
        let direct = execute(&preset(name).unwrap()).unwrap();
        assert_eq!(
            direct.engine.unwrap().events,
            o.engine.as_ref().unwrap().events
        );
    }
    let summary = read_file(&cfg.out.join("sweep.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
}

#[test]
fn sweep_rejects_bad_values_before_running() {
    let (_dir, cfg) = in_tempdir(preset("example2a").unwrap());
    let err = sweep(&cfg, "fc", &["-1".to_string()]).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(!cfg.out.exists());
}
