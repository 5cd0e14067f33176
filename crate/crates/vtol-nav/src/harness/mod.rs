//! Scenario configuration, the closed-loop runner, CSV logging, and
//! summary metrics.

pub mod config;
pub mod csvlog;
pub mod metrics;
pub mod runner;

pub use config::{Backend, ScenarioConfig};
pub use csvlog::{write_csv, write_csv_to, write_plot_data, CSV_HEADER};
pub use metrics::{fit_decay_rate, summarize, DecayFit, Summary};
pub use runner::{run_scenario, run_scenario_with, RunOutput, StepLog};
