//! Exact Gaussian-process regression.

mod cholesky;
mod hyper;
mod info;
mod kernel;
mod posterior;

pub use cholesky::{Cholesky, JITTER_LADDER};
pub use hyper::{fit_hyperparameters, HyperBounds, HyperFit, HyperFitOptions};
pub use info::{information_gain, information_gain_gram};
pub use kernel::{KernelFamily, KernelSpec};
pub use posterior::{log_marginal_likelihood, log_marginal_likelihood_centered, GPosterior, ObservationSet};
