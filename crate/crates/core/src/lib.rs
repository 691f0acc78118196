//! Active level set estimation with Gaussian processes.
//!
//! The crate queries an expensive black-box function to classify a
//! continuous box domain into its superlevel and sublevel sets. The core
//! acquisition scores a point by its posterior standard deviation over its
//! margin to the threshold, `σ / max(ε, |μ − h|)`, maximized directly over
//! the continuous domain.
//!
//! Modules:
//! - [`gp`]: exact GP regression, marginal-likelihood fitting, information gain.
//! - [`acquisition`]: acquisition scores, classification confidence, β-band labels.
//! - [`search`]: acquisition maximization over a box or a candidate grid.
//! - [`problems`]: synthetic benchmarks and tabular datasets.
//! - [`harness`]: the active loop, F1 evaluation, experiment drivers, diagnostics.

pub mod acquisition;
pub mod error;
mod golden;
pub mod gp;
pub mod harness;
pub mod problems;
pub mod search;

pub use acquisition::{AcquisitionMethod, AcquisitionSpec, Label};
pub use error::{Error, Result};
pub use gp::{GPosterior, KernelFamily, KernelSpec, ObservationSet};
pub use problems::{GroundTruth, LevelSetProblem, TruthLabel};
pub use search::{DomainBounds, SearchBudget};
