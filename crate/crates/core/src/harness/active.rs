//! The active querying loop.

use std::cell::Cell;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::metrics::{metrics_from_predictions, MetricsRow};
use crate::acquisition::{c2lse_score, classify_point, confidence_score, two_sided_mass, AcquisitionMethod, Label};
use crate::error::Result;
use crate::gp::{fit_hyperparameters, GPosterior, HyperBounds, HyperFitOptions, KernelSpec, ObservationSet};
use crate::problems::{GroundTruth, LevelSetProblem, Oracle};
use crate::search::{argmax_index, maximize_continuous, sample_initial_design};

/// Theorem-linkage check of one posterior against the truth grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    /// `max_x σ(x) / max(ε, |μ(x) − h|)` over the truth grid.
    pub max_acquisition: f64,
    /// `max_acquisition ≤ 1/β`; the counts below are only populated then.
    pub confident: bool,
    /// Unknown-labelled points with `|μ − h| > ε`.
    pub unknown_outside_epsilon: usize,
    /// Points with `|μ − h| > ε` whose confidence is below `2Φ(β) − 1`.
    pub low_confidence_outside_epsilon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRow {
    pub iteration: usize,
    pub query: Vec<f64>,
    pub observation: f64,
    /// Score of the configured acquisition at the query; `None` for random queries.
    pub acquisition_value: Option<f64>,
    /// Posterior mean and variance at the query before observing it.
    pub pre_query_mean: f64,
    pub pre_query_variance: f64,
    /// Outputscale of the posterior that chose the query.
    pub outputscale: f64,
    pub cumulative_info_gain: f64,
    /// Metrics of the posterior updated with this observation.
    pub metrics: Option<MetricsRow>,
    pub grid_check: Option<GridCheck>,
    pub wall_ms: Option<f64>,
    /// Posterior evaluations spent choosing this query.
    pub gp_inferences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub method: Method,
    pub threshold: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub noise_variance: f64,
    pub initial_design: Vec<(Vec<f64>, f64)>,
    /// Metrics of the posterior fitted on the initial design only.
    pub initial_metrics: Option<MetricsRow>,
    pub initial_grid_check: Option<GridCheck>,
    pub rows: Vec<IterationRow>,
    /// Hyperparameter fits that fell back to their first start.
    pub hyper_fallbacks: usize,
    /// Set when the run aborted; `rows` then holds the completed prefix.
    pub failure: Option<String>,
}

impl RunRecord {
    pub fn final_metrics(&self) -> Option<MetricsRow> {
        self.rows.iter().rev().find_map(|r| r.metrics).or(self.initial_metrics)
    }

    pub fn queries(&self) -> impl Iterator<Item = &[f64]> {
        self.rows.iter().map(|r| r.query.as_slice())
    }

    pub fn total_inferences(&self) -> usize {
        self.rows.iter().map(|r| r.gp_inferences).sum()
    }
}

enum QueryMode {
    Continuous,
    Grid(Vec<Vec<f64>>),
}

struct Loop<'a> {
    config: &'a ExperimentConfig,
    problem: &'a LevelSetProblem,
    truth: Option<&'a GroundTruth>,
    hyper_opts: HyperFitOptions,
    h: f64,
}

impl Loop<'_> {
    fn default_starts(&self, obs: &ObservationSet) -> Vec<KernelSpec> {
        let widths = self.problem.bounds.widths();
        let n = obs.len().max(1) as f64;
        let second_moment = obs.responses().iter().map(|y| (y - self.h).powi(2)).sum::<f64>() / n;
        let scale = if second_moment > 0.0 { second_moment.clamp(1e-6, 1e3) } else { 1.0 };
        [0.1, 0.3]
            .iter()
            .map(|frac| KernelSpec {
                family: self.config.gp.kernel,
                lengthscales: widths.iter().map(|w| frac * w).collect(),
                outputscale: scale,
            })
            .collect()
    }

    fn refit(&self, obs: &ObservationSet, warm: Option<&KernelSpec>, fallbacks: &mut usize) -> Result<KernelSpec> {
        let mut starts: Vec<KernelSpec> = warm.into_iter().cloned().collect();
        starts.extend(self.default_starts(obs));
        let fit = fit_hyperparameters(obs, &starts, &self.hyper_opts)?;
        if fit.fell_back {
            *fallbacks += 1;
        }
        Ok(fit.kernel)
    }

    fn evaluate(&self, gp: &GPosterior) -> Option<(MetricsRow, GridCheck)> {
        let truth = self.truth?;
        let preds: Vec<(f64, f64)> = truth
            .points
            .iter()
            .map(|p| {
                let (m, v) = gp.mean_var_unchecked(p);
                (m, v.sqrt())
            })
            .collect();
        let metrics = metrics_from_predictions(&truth.labels, &preds, self.h, self.config.beta);
        Some((metrics, self.grid_check(&preds)))
    }

    fn grid_check(&self, preds: &[(f64, f64)]) -> GridCheck {
        let (eps, beta, h) = (self.config.epsilon, self.config.beta, self.h);
        let max_acquisition = preds.iter().map(|&(m, s)| c2lse_score(m, s, h, eps)).fold(0.0, f64::max);
        let confident = max_acquisition <= 1.0 / beta;
        let mut check = GridCheck {
            max_acquisition,
            confident,
            unknown_outside_epsilon: 0,
            low_confidence_outside_epsilon: 0,
        };
        if confident {
            let floor = two_sided_mass(beta);
            for &(m, s) in preds.iter().filter(|(m, _)| (m - h).abs() > eps) {
                if classify_point(m, s, h, beta) == Label::Unknown {
                    check.unknown_outside_epsilon += 1;
                }
                if confidence_score(m, s, h).value < floor {
                    check.low_confidence_outside_epsilon += 1;
                }
            }
        }
        check
    }
}

struct Choice {
    point: Vec<f64>,
    value: Option<f64>,
}

/// Run the active loop for one seed.
///
/// The initial design is observed first; then for `t = 1..=T` the current
/// posterior chooses `x_t`, the oracle is observed, and the posterior is
/// updated (hyperparameters every `refit_every` iterations). Metrics are
/// recorded every `eval_every` iterations and at `T`.
pub fn run_active_loop(config: &ExperimentConfig, problem: &LevelSetProblem, truth: Option<&GroundTruth>, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let dim = problem.dim();
    let h = problem.threshold;
    let mut hyper_opts = HyperFitOptions::new(HyperBounds::for_widths(&problem.bounds.widths()));
    hyper_opts.sweeps = config.gp.fit_sweeps;
    hyper_opts.prior_mean = h;
    let lp = Loop {
        config,
        problem,
        truth,
        hyper_opts,
        h,
    };

    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let design_seed = master.next_u64();
    let mut noise_rng = ChaCha8Rng::seed_from_u64(master.next_u64());
    let mut query_rng = ChaCha8Rng::seed_from_u64(master.next_u64());

    let mode = match (&problem.oracle, &config.candidate_grid) {
        (Oracle::Tabular(t), _) => QueryMode::Grid(t.points()),
        (Oracle::Analytic(_), Some(shape)) => QueryMode::Grid(problem.bounds.grid(shape)?),
        (Oracle::Analytic(_), None) => QueryMode::Continuous,
    };

    let n_init = config.n_init_for(dim);
    let design = match &problem.oracle {
        Oracle::Tabular(t) => {
            let mut rng = ChaCha8Rng::seed_from_u64(design_seed);
            let n = n_init.min(t.len());
            let pts = t.points();
            index::sample(&mut rng, t.len(), n).into_iter().map(|i| pts[i].clone()).collect()
        }
        Oracle::Analytic(_) => sample_initial_design(&problem.bounds, n_init, design_seed)?,
    };

    let mut record = RunRecord {
        seed,
        method: config.method,
        threshold: h,
        epsilon: config.epsilon,
        beta: config.beta,
        noise_variance: config.noise_variance,
        initial_design: Vec::with_capacity(design.len()),
        initial_metrics: None,
        initial_grid_check: None,
        rows: Vec::with_capacity(config.budget),
        hyper_fallbacks: 0,
        failure: None,
    };

    let mut obs = ObservationSet::new(config.noise_variance)?;
    for x in design {
        let y = problem.observe(&x, &mut noise_rng)?;
        obs.push(x.clone(), y)?;
        record.initial_design.push((x, y));
    }

    let mut kernel = lp.refit(&obs, None, &mut record.hyper_fallbacks)?;
    let mut gp = match GPosterior::fit_with_prior_mean(kernel.clone(), obs.clone(), h) {
        Ok(gp) => gp,
        Err(e) => {
            record.failure = Some(e.to_string());
            return Ok(record);
        }
    };
    if let Some((m, c)) = lp.evaluate(&gp) {
        record.initial_metrics = Some(m);
        record.initial_grid_check = Some(c);
    }

    let acquisition = config.acquisition();
    // Candidates permanently classified by the grid-mode ambiguity baseline.
    let mut classified = match &mode {
        QueryMode::Grid(c) => vec![false; c.len()],
        QueryMode::Continuous => Vec::new(),
    };
    let mut cumulative_info_gain = 0.0;

    for t in 1..=config.budget {
        let started = Instant::now();
        let inferences = Cell::new(0usize);
        let posterior = |x: &[f64]| {
            inferences.set(inferences.get() + 1);
            let (m, v) = gp.mean_var_unchecked(x);
            (m, v.sqrt())
        };

        let choice = match (&mode, acquisition) {
            (QueryMode::Continuous, None) => Choice {
                point: (0..dim)
                    .map(|i| query_rng.random_range(problem.bounds.lower()[i]..=problem.bounds.upper()[i]))
                    .collect(),
                value: None,
            },
            (QueryMode::Grid(cands), None) => Choice {
                point: cands[query_rng.random_range(0..cands.len())].clone(),
                value: None,
            },
            (QueryMode::Continuous, Some(acq)) => {
                let budget = config.search_budget(dim, query_rng.next_u64());
                let res = maximize_continuous(
                    |x| {
                        let (m, s) = posterior(x);
                        acq.score(m, s, h)
                    },
                    &problem.bounds,
                    &budget,
                )?;
                Choice {
                    point: res.point,
                    value: Some(res.value),
                }
            }
            (QueryMode::Grid(cands), Some(acq)) if acq.method == AcquisitionMethod::LseAmbiguity => {
                let mut open = Vec::new();
                let mut open_scores = Vec::new();
                for (i, c) in cands.iter().enumerate() {
                    if classified[i] {
                        continue;
                    }
                    let (m, s) = posterior(c);
                    if classify_point(m, s, h, acq.beta) == Label::Unknown {
                        open.push(i);
                        open_scores.push(acq.score(m, s, h));
                    } else {
                        classified[i] = true;
                    }
                }
                if open.is_empty() {
                    // Every candidate is classified; keep spending budget on the full grid.
                    let score = |x: &[f64]| {
                        let (m, s) = posterior(x);
                        acq.score(m, s, h)
                    };
                    let (i, v) = argmax_index(&score, cands)?;
                    Choice {
                        point: cands[i].clone(),
                        value: Some(v),
                    }
                } else {
                    let mut k = 0;
                    for j in 1..open.len() {
                        if open_scores[j] > open_scores[k] {
                            k = j;
                        }
                    }
                    Choice {
                        point: cands[open[k]].clone(),
                        value: Some(open_scores[k]),
                    }
                }
            }
            (QueryMode::Grid(cands), Some(acq)) => {
                let score = |x: &[f64]| {
                    let (m, s) = posterior(x);
                    acq.score(m, s, h)
                };
                let (i, v) = argmax_index(&score, cands)?;
                Choice {
                    point: cands[i].clone(),
                    value: Some(v),
                }
            }
        };

        let gp_inferences = inferences.get();
        let (pre_mean, pre_var) = gp.mean_var_unchecked(&choice.point);
        let outputscale = gp.kernel().outputscale;
        let y = problem.observe(&choice.point, &mut noise_rng)?;
        cumulative_info_gain += 0.5 * (pre_var / config.noise_variance).ln_1p();
        obs.push(choice.point.clone(), y)?;

        if t % config.refit_every == 0 {
            kernel = lp.refit(&obs, Some(&kernel), &mut record.hyper_fallbacks)?;
        }
        let updated = GPosterior::fit_with_prior_mean(kernel.clone(), obs.clone(), h);
        let mut row = IterationRow {
            iteration: t,
            query: choice.point,
            observation: y,
            acquisition_value: choice.value,
            pre_query_mean: pre_mean,
            pre_query_variance: pre_var,
            outputscale,
            cumulative_info_gain,
            metrics: None,
            grid_check: None,
            wall_ms: None,
            gp_inferences,
        };
        match updated {
            Ok(next) => gp = next,
            Err(e) => {
                record.rows.push(row);
                record.failure = Some(e.to_string());
                return Ok(record);
            }
        }
        if t % config.eval_every == 0 || t == config.budget {
            if let Some((m, c)) = lp.evaluate(&gp) {
                row.metrics = Some(m);
                row.grid_check = Some(c);
            }
        }
        if config.record_wall_time {
            row.wall_ms = Some(started.elapsed().as_secs_f64() * 1e3);
        }
        record.rows.push(row);
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(method: Method) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_problem("mc2d", method);
        c.budget = 6;
        c.search.n_raw_samples = Some(128);
        c.search.n_restarts = 2;
        c.search.max_refine_iters = 5;
        c
    }

    fn small_truth(problem: &LevelSetProblem) -> GroundTruth {
        let mut p = problem.clone();
        p.truth_grid_shape = Some(vec![20, 20]);
        p.build_ground_truth().unwrap()
    }

    #[test]
    fn single_iteration_run() {
        let mut c = small_config(Method::C2lse);
        c.budget = 1;
        c.n_init = Some(1);
        let p = c.load_problem().unwrap();
        let r = run_active_loop(&c, &p, None, 0).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].iteration, 1);
        assert!(p.bounds.contains(&r.rows[0].query));
        assert!(r.failure.is_none());
    }

    #[test]
    fn deterministic_per_seed() {
        for method in [Method::C2lse, Method::Random, Method::Straddle] {
            let c = small_config(method);
            let p = c.load_problem().unwrap();
            let truth = small_truth(&p);
            let a = run_active_loop(&c, &p, Some(&truth), 3).unwrap();
            let b = run_active_loop(&c, &p, Some(&truth), 3).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rows_are_contiguous_with_monotone_info_gain() {
        let c = small_config(Method::C2lse);
        let p = c.load_problem().unwrap();
        let truth = small_truth(&p);
        let r = run_active_loop(&c, &p, Some(&truth), 1).unwrap();
        assert_eq!(r.initial_design.len(), 5);
        let mut last = 0.0;
        for (i, row) in r.rows.iter().enumerate() {
            assert_eq!(row.iteration, i + 1);
            assert!(row.cumulative_info_gain >= last);
            last = row.cumulative_info_gain;
            assert!(row.metrics.is_some());
            assert!(p.bounds.contains(&row.query));
            assert!(row.gp_inferences >= 128);
        }
        assert!(r.initial_metrics.is_some());
    }

    #[test]
    fn eval_cadence() {
        let mut c = small_config(Method::Random);
        c.eval_every = 4;
        let p = c.load_problem().unwrap();
        let truth = small_truth(&p);
        let r = run_active_loop(&c, &p, Some(&truth), 1).unwrap();
        let evaluated: Vec<usize> = r.rows.iter().filter(|r| r.metrics.is_some()).map(|r| r.iteration).collect();
        assert_eq!(evaluated, vec![4, 6]);
        assert!(r.rows.iter().all(|r| r.acquisition_value.is_none() && r.gp_inferences == 0));
    }

    #[test]
    fn grid_mode_queries_candidates_and_shrinks_open_set() {
        let mut c = ExperimentConfig::for_problem("sin2d", Method::LseAmbiguity);
        c.candidate_grid = Some(vec![10, 10]);
        c.budget = 8;
        let p = c.load_problem().unwrap();
        let grid = p.bounds.grid(&[10, 10]).unwrap();
        let r = run_active_loop(&c, &p, None, 2).unwrap();
        let mut last = usize::MAX;
        for row in &r.rows {
            assert!(grid.contains(&row.query));
            // Once every candidate is classified the full grid is rescored.
            assert!(row.gp_inferences <= last || row.gp_inferences >= 100);
            assert!(row.gp_inferences <= 200);
            last = row.gp_inferences;
        }
        assert_eq!(r.rows[0].gp_inferences, 100);
        assert!(r.rows.iter().any(|r| r.gp_inferences < 100));
    }
}
