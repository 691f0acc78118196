use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::acquisition::{AcquisitionMethod, AcquisitionSpec, STRADDLE_MULTIPLIER};
use crate::error::{Error, Result};
use crate::gp::KernelFamily;
use crate::problems::{load_tabular_dataset, LevelSetProblem};
use crate::search::SearchBudget;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    C2lse,
    Straddle,
    LseAmbiguity,
    /// Uniform queries from the box (or candidate list).
    Random,
}

impl Method {
    pub fn acquisition(self) -> Option<AcquisitionMethod> {
        match self {
            Self::C2lse => Some(AcquisitionMethod::C2lse),
            Self::Straddle => Some(AcquisitionMethod::Straddle),
            Self::LseAmbiguity => Some(AcquisitionMethod::LseAmbiguity),
            Self::Random => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::C2lse => "c2lse",
            Self::Straddle => "straddle",
            Self::LseAmbiguity => "lse_ambiguity",
            Self::Random => "random",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A CSV dataset used as the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TabularSource {
    pub path: PathBuf,
    pub point_columns: Vec<String>,
    pub value_column: String,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSettings {
    /// Defaults to `512·d` once the problem dimension is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_raw_samples: Option<usize>,
    pub n_restarts: usize,
    pub max_refine_iters: usize,
}

impl Default for SearchSettings {
    fn default() -> Self {
        Self {
            n_raw_samples: None,
            n_restarts: 10,
            max_refine_iters: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GpSettings {
    pub kernel: KernelFamily,
    /// Coordinate sweeps of the likelihood ascent per start.
    pub fit_sweeps: usize,
}

impl Default for GpSettings {
    fn default() -> Self {
        Self {
            kernel: KernelFamily::Matern52,
            fit_sweeps: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Built-in benchmark name (`mc2d`, `mc3d`, `sin2d`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<TabularSource>,
    pub method: Method,
    pub epsilon: f64,
    pub beta: f64,
    pub straddle_multiplier: f64,
    /// Number of active queries `T` after the initial design.
    pub budget: usize,
    /// Defaults to `2·d + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_init: Option<usize>,
    pub noise_variance: f64,
    pub seeds: Vec<u64>,
    pub refit_every: usize,
    pub eval_every: usize,
    /// Restrict queries of an analytic problem to this endpoint-inclusive grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate_grid: Option<Vec<usize>>,
    /// Record per-iteration wall-clock time. Off by default so traces are
    /// byte-reproducible.
    pub record_wall_time: bool,
    pub search: SearchSettings,
    pub gp: GpSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            problem: None,
            data: None,
            method: Method::C2lse,
            epsilon: 0.1,
            beta: 3.0,
            straddle_multiplier: STRADDLE_MULTIPLIER,
            budget: 100,
            n_init: None,
            noise_variance: 1e-4,
            seeds: (0..10).collect(),
            refit_every: 1,
            eval_every: 1,
            candidate_grid: None,
            record_wall_time: false,
            search: SearchSettings::default(),
            gp: GpSettings::default(),
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl ExperimentConfig {
    pub fn for_problem(name: &str, method: Method) -> Self {
        Self {
            problem: Some(name.into()),
            method,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.problem, &self.data) {
            (None, None) => return Err(invalid("one of `problem` or `data` must be set")),
            (Some(_), Some(_)) => return Err(invalid("`problem` and `data` are mutually exclusive")),
            _ => {}
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid(format!("epsilon > 0 required, got {}", self.epsilon)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta > 0 required, got {}", self.beta)));
        }
        if !(self.noise_variance > 0.0 && self.noise_variance.is_finite()) {
            return Err(invalid(format!("noise_variance > 0 required, got {}", self.noise_variance)));
        }
        if self.budget == 0 {
            return Err(invalid("budget >= 1 required"));
        }
        if self.n_init == Some(0) {
            return Err(invalid("n_init >= 1 required"));
        }
        if self.eval_every == 0 || self.refit_every == 0 {
            return Err(invalid("eval_every >= 1 and refit_every >= 1 required"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds must not be empty"));
        }
        if self.search.n_restarts == 0 || self.search.max_refine_iters == 0 || self.search.n_raw_samples == Some(0) {
            return Err(invalid("search budget counts must be >= 1"));
        }
        if let Some(g) = &self.candidate_grid {
            if g.is_empty() || g.contains(&0) {
                return Err(invalid("candidate_grid entries must be >= 1"));
            }
        }
        Ok(())
    }

    /// Build the configured problem with the configured noise level.
    pub fn load_problem(&self) -> Result<LevelSetProblem> {
        let problem = match (&self.problem, &self.data) {
            (Some(name), None) => LevelSetProblem::by_name(name)?,
            (None, Some(src)) => load_tabular_dataset(&src.path, &src.point_columns, &src.value_column, src.threshold)?,
            _ => return Err(invalid("exactly one of `problem` or `data` must be set")),
        };
        if let Some(g) = &self.candidate_grid {
            if g.len() != problem.dim() {
                return Err(Error::DimensionMismatch {
                    expected: problem.dim(),
                    actual: g.len(),
                });
            }
        }
        Ok(problem.with_noise(self.noise_variance))
    }

    /// Copy with every dimension-dependent default filled in.
    pub fn resolved(&self, dim: usize) -> Self {
        let mut c = self.clone();
        c.n_init.get_or_insert(2 * dim + 1);
        c.search.n_raw_samples.get_or_insert(512 * dim);
        c
    }

    pub fn n_init_for(&self, dim: usize) -> usize {
        self.n_init.unwrap_or(2 * dim + 1)
    }

    pub fn search_budget(&self, dim: usize, seed: u64) -> SearchBudget {
        SearchBudget {
            n_restarts: self.search.n_restarts,
            n_raw_samples: self.search.n_raw_samples.unwrap_or(512 * dim),
            max_refine_iters: self.search.max_refine_iters,
            seed,
        }
    }

    pub fn acquisition(&self) -> Option<AcquisitionSpec> {
        self.method.acquisition().map(|method| AcquisitionSpec {
            method,
            epsilon: self.epsilon,
            beta: self.beta,
            straddle_multiplier: self.straddle_multiplier,
        })
    }
}
