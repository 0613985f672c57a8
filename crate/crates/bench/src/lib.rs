//! Experiment harness for partitioned optimisation.
//!
//! For each seeded instance it runs the full solve, POP-k for a list of
//! sub-problem counts, and the domain's heuristic, checks every allocation
//! against the original constraints, and writes tradeoff records and
//! plot-ready summaries. Record files that carry no wall-clock data are
//! byte-identical across repeated runs of one configuration.

mod config;
mod plot;
mod problem;
mod records;
mod run;
mod sweep;

use thiserror::Error;

pub use config::{ExperimentConfig, TIME_LIMIT_ENV};
pub use plot::{emit_plot_data, plot_series, Series, PLOT_SCHEMA};
pub use problem::{Domain, Outcome, Partitioner, Problem, Status, Timing, TrafficParams};
pub use records::{quarantine_csv, records_csv, timings_csv, TradeoffRecord, RECORDS_SCHEMA, TIMINGS_SCHEMA};
pub use run::{run_experiment, RunReport};
pub use sweep::{log_log_slope, scaling_sweep, SweepPoint, SweepReport};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Cluster(#[from] pop_cluster::ClusterError),
    #[error(transparent)]
    Traffic(#[from] pop_traffic::TrafficError),
    #[error(transparent)]
    LoadBalance(#[from] pop_loadbalance::LbError),
    #[error(transparent)]
    Pop(#[from] pop_core::PopError),
}
