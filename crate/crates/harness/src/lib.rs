//! Experiment runner: configs, single runs, sweeps, scaling fits and the
//! good-group lemma grid.

pub mod config;
pub mod lemmas;
pub mod run;
pub mod scaling;
pub mod sweep;

pub use config::{Budget, ConfigError, ExperimentConfig, FaultCount, InputPolicy};
pub use run::{fingerprint, run_one, sim_config, ResultRow, RunError, RunResult, CSV_HEADER};
pub use scaling::{check_scaling, fit_power_law, FitReport, ScalingError};
pub use sweep::{read_rows, sweep, write_rows, Grid, SweepError, SweepReport};
