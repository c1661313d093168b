//! Command-line front end for the `stickslip` simulator: scenario files,
//! the built-in example presets, CSV traces, reports and engine/oracle
//! comparison.

mod compare;
mod config;
mod error;
mod output;
mod presets;
mod run;

pub use compare::{compare_runs, Deviation, DeviationRow};
pub use config::{parse_sweep, Mode, ScenarioConfig, SWEEP_KEYS};
pub use error::{
    CliError, CliResult, EXIT_CHATTER, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_FAILURE, EXIT_OK,
};
pub use output::{
    engine_events, engine_report, engine_rows, events_csv, num, oracle_events, oracle_rows,
    parse_events_csv, parse_trace_csv, read_file, trace_csv, EventRow, TraceRow, EVENTS_HEADER,
    TRACE_HEADER,
};
pub use presets::{preset, PRESET_NAMES};
pub use run::{
    compare, execute, run, sweep, sweep_exit_code, write_outputs, OracleRun, RunOutcome,
};
