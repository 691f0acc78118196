//! The active querying loop, evaluation, experiment drivers and theory
//! diagnostics.

mod active;
mod config;
mod diagnostics;
mod experiments;
mod metrics;

pub use active::{run_active_loop, GridCheck, IterationRow, RunRecord};
pub use config::{ExperimentConfig, GpSettings, Method, SearchSettings, TabularSource};
pub use diagnostics::{c1_constant, c1_scaled, theory_diagnostics, AveragedAcquisitionCheck, Inequality, TheoryReport};
pub use experiments::{
    aggregate_curve, grid_compare, mean_pairwise_distance, run_replicates, run_replicates_on, sweep_epsilon, CurvePoint, GridCompareRow,
    ReplicateSummary, SweepRow,
};
pub use metrics::{evaluate_f1, metrics_from_predictions, predict_truth, MetricsRow};
