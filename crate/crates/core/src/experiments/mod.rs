//! Monte Carlo harness: configuration, trials, sweeps, statistics and exports.

pub mod config;
pub mod export;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use config::{Preset, SimConfig};
pub use export::{export_maps, RunManifest};
pub use stats::{bootstrap_mean_ci, paired_difference_ci, summarize, ErrorStats, Interval};
pub use sweep::{rows_to_csv, run_point, run_sweep, write_csv, PointResult, StatsRow, SweepOutput, SweepParam, SweepSpec};
pub use trial::{sample_target, Deployment, Outcome, RidgeRatios, TrialResult, TrialSetup};
