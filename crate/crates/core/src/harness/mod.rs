//! Configuration, seeded experiment execution, file output and the built-in
//! verification suites.

pub mod config;
pub mod output;
pub mod run;
pub mod sweep;
pub mod verify;

pub use config::{parse_config, parse_config_str, Config, Field, OmegaMode, RunConfig, SweepConfig};
pub use output::{run_summary, sweep_summary, timeseries_csv, write_run, write_sweep, write_timeseries, CSV_HEADER};
pub use run::{build_params, execute, gen_initial, prepare, run_single, Prepared, RunOutput, TimeseriesRow};
pub use sweep::{run_sweep, OrderingReport, SweepReport, SweepRun};
pub use verify::{run_suite, Check, Suite};
