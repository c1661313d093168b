use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stickslip_cli::{
    compare, parse_sweep, preset, read_file, run, sweep, sweep_exit_code, CliError, CliResult,
    Mode, ScenarioConfig, EXIT_FAILURE, PRESET_NAMES,
};

#[derive(Parser)]
#[command(
    name = "stickslip",
    version,
    about = "Event-driven stick-slip simulation of a PID loop with Coulomb friction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write trace.csv, events.csv and report.txt.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// engine, oracle or both.
        #[arg(long)]
        mode: Option<String>,
        /// Run once per value, e.g. `--sweep fc=50,75,100`.
        #[arg(long, value_name = "PARAM=a,b,c")]
        sweep: Option<String>,
    },
    /// Run engine and oracle on the same scenario and report their deviation.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Oracle step in seconds.
        #[arg(long)]
        oracle_dt: Option<f64>,
        /// Sup-norm tolerance for the verdict.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Output sample rate in Hz.
    #[arg(long, value_name = "HZ")]
    rate: Option<f64>,
    /// Simulated time span in seconds.
    #[arg(long)]
    t_max: Option<f64>,
}

impl ScenarioArgs {
    fn load(&self) -> CliResult<ScenarioConfig> {
        let mut cfg = match (&self.preset, &self.config) {
            (Some(name), _) => preset(name).ok_or_else(|| {
                CliError::config(format!(
                    "unknown preset `{name}` (one of {})",
                    PRESET_NAMES.join(", ")
                ))
            })?,
            (None, Some(path)) => {
                ScenarioConfig::parse(&read_file(path)?).map_err(|e| match e {
                    CliError::Parse { line, msg } => {
                        CliError::config(format!("{}:{line}: {msg}", path.display()))
                    }
                    other => other,
                })?
            }
            (None, None) => {
                return Err(CliError::config("one of --preset or --config is required"))
            }
        };
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        } else if self.preset.is_some() {
            cfg.out = PathBuf::from("out").join(&cfg.name);
        }
        if let Some(rate) = self.rate {
            cfg.output_rate = rate;
        }
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn execute(command: Command) -> CliResult<i32> {
    match command {
        Command::Presets => {
            for name in PRESET_NAMES {
                let cfg = preset(name).expect("listed preset");
                let g = cfg.gains;
                println!(
                    "{name:10} kd={} kp={} ki={} fc={} x0=({}, {}, {}) t_max={}",
                    g.kd, g.kp, g.ki, cfg.fc, cfg.x0.x1, cfg.x0.x2, cfg.x0.x3, cfg.t_max
                );
            }
            Ok(0)
        }
        Command::Run {
            scenario,
            mode,
            sweep: sweep_spec,
        } => {
            let mut cfg = scenario.load()?;
            if let Some(m) = mode {
                cfg.mode = m.parse::<Mode>()?;
            }
            cfg.validate()?;
            if let Some(spec) = sweep_spec {
                let (key, values) = parse_sweep(&spec)?;
                let results = sweep(&cfg, &key, &values)?;
                for (v, r) in &results {
                    match r {
                        Ok(o) => println!("{}", o.headline()),
                        Err(e) => eprintln!("{key}={v}: error: {e}"),
                    }
                }
                println!("wrote {}", cfg.out.join("sweep.csv").display());
                return Ok(sweep_exit_code(&results));
            }
            let outcome = run(&cfg)?;
            println!("{}", outcome.headline());
            println!("wrote {}", cfg.out.display());
            Ok(outcome.exit_code())
        }
        Command::Compare {
            scenario,
            oracle_dt,
            tolerance,
        } => {
            let mut cfg = scenario.load()?;
            if let Some(dt) = oracle_dt {
                cfg.oracle_dt = dt;
            }
            if let Some(tol) = tolerance {
                cfg.tolerance = tol;
            }
            cfg.validate()?;
            let outcome = compare(&cfg)?;
            println!("{}", outcome.headline());
            if let Some(d) = &outcome.deviation {
                print!("{}", d.summary());
            }
            println!("wrote {}", cfg.out.display());
            let code = outcome.exit_code();
            let passed = outcome.deviation.as_ref().is_some_and(|d| d.passed());
            Ok(if code == 0 && !passed {
                EXIT_FAILURE
            } else {
                code
            })
        }
    }
}
