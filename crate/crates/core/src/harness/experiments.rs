//! Replicate, ε-sweep and discretization-comparison drivers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::active::{run_active_loop, RunRecord};
use super::config::{ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::problems::{GroundTruth, LevelSetProblem};

/// Mean and population standard deviation of macro-F1 across seeds at one
/// iteration (0 is the initial design).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub mean_f1: f64,
    pub std_f1: f64,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateSummary {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub curve: Vec<CurvePoint>,
}

impl ReplicateSummary {
    /// `(seed, reason)` for every run that aborted.
    pub fn aborted(&self) -> Vec<(u64, &str)> {
        self.records
            .iter()
            .filter_map(|r| r.failure.as_deref().map(|f| (r.seed, f)))
            .collect()
    }

    pub fn final_point(&self) -> Option<CurvePoint> {
        self.curve.last().copied()
    }

    pub fn initial_point(&self) -> Option<CurvePoint> {
        self.curve.first().copied().filter(|p| p.iteration == 0)
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn aggregate_curve(records: &[RunRecord]) -> Vec<CurvePoint> {
    let max_t = records.iter().map(|r| r.rows.len()).max().unwrap_or(0);
    let mut curve = Vec::new();
    for t in 0..=max_t {
        let values: Vec<f64> = records
            .iter()
            .filter_map(|r| {
                if t == 0 {
                    r.initial_metrics
                } else {
                    r.rows.get(t - 1).and_then(|row| row.metrics)
                }
            })
            .map(|m| m.f1_macro)
            .collect();
        if values.is_empty() {
            continue;
        }
        let (mean_f1, std_f1) = mean_std(&values);
        curve.push(CurvePoint {
            iteration: t,
            mean_f1,
            std_f1,
            runs: values.len(),
        });
    }
    curve
}

/// One run per seed against a prepared problem and truth set. Runs execute
/// in parallel; results keep seed order.
pub fn run_replicates_on(config: &ExperimentConfig, problem: &LevelSetProblem, truth: &GroundTruth) -> Result<ReplicateSummary> {
    config.validate()?;
    let records = config
        .seeds
        .par_iter()
        .map(|&seed| run_active_loop(config, problem, Some(truth), seed))
        .collect::<Result<Vec<_>>>()?;
    for r in records.iter().filter(|r| r.failure.is_some()) {
        log::warn!("seed {} aborted: {}", r.seed, r.failure.as_deref().unwrap_or(""));
    }
    let curve = aggregate_curve(&records);
    Ok(ReplicateSummary {
        config: config.clone(),
        records,
        curve,
    })
}

pub fn run_replicates(config: &ExperimentConfig) -> Result<ReplicateSummary> {
    config.validate()?;
    let problem = config.load_problem()?;
    let truth = problem.build_ground_truth()?;
    run_replicates_on(config, &problem, &truth)
}

/// Mean Euclidean distance over all unordered pairs; 0 for fewer than two points.
pub fn mean_pairwise_distance<P: AsRef<[f64]>>(points: &[P]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            total += a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        }
    }
    total / (n * (n - 1) / 2) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub summary: ReplicateSummary,
}

pub fn sweep_epsilon(base: &ExperimentConfig, epsilons: &[f64]) -> Result<Vec<SweepRow>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("epsilon list is empty".into()));
    }
    if let Some(e) = epsilons.iter().find(|e| e.is_nan() || **e <= 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon > 0 required, got {e}")));
    }
    base.validate()?;
    let problem = base.load_problem()?;
    let truth = problem.build_ground_truth()?;
    epsilons
        .iter()
        .map(|&epsilon| {
            let config = ExperimentConfig { epsilon, ..base.clone() };
            Ok(SweepRow {
                epsilon,
                summary: run_replicates_on(&config, &problem, &truth)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCompareRow {
    pub method: Method,
    /// Candidate grid the method was restricted to; `None` for continuous search.
    pub candidate_grid: Option<Vec<usize>>,
    /// The grid entry of the comparison this row belongs to.
    pub grid_entry: Vec<usize>,
    pub final_f1_mean: f64,
    pub final_f1_std: f64,
    /// Mean over seeds of the posterior evaluations spent on query selection.
    pub total_inferences_mean: f64,
    pub summary: ReplicateSummary,
}

fn compare_row(method: Method, candidate_grid: Option<Vec<usize>>, grid_entry: Vec<usize>, summary: ReplicateSummary) -> GridCompareRow {
    let finals: Vec<f64> = summary
        .records
        .iter()
        .filter_map(|r| r.final_metrics())
        .map(|m| m.f1_macro)
        .collect();
    let (final_f1_mean, final_f1_std) = if finals.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_std(&finals)
    };
    let total_inferences_mean =
        summary.records.iter().map(|r| r.total_inferences() as f64).sum::<f64>() / summary.records.len().max(1) as f64;
    GridCompareRow {
        method,
        candidate_grid,
        grid_entry,
        final_f1_mean,
        final_f1_std,
        total_inferences_mean,
        summary,
    }
}

/// Grid-restricted LSE-ambiguity per candidate grid against continuous
/// C2LSE, all scored on the problem's own truth grid. The C2LSE run does not
/// depend on the grid and is executed once.
pub fn grid_compare(base: &ExperimentConfig, grid_shapes: &[Vec<usize>]) -> Result<Vec<GridCompareRow>> {
    if grid_shapes.is_empty() {
        return Err(Error::InvalidArgument("grid shape list is empty".into()));
    }
    base.validate()?;
    let problem = base.load_problem()?;
    if problem.is_tabular() {
        return Err(Error::InvalidArgument("grid comparison needs an analytic problem".into()));
    }
    let truth = problem.build_ground_truth()?;
    let continuous = ExperimentConfig {
        method: Method::C2lse,
        candidate_grid: None,
        ..base.clone()
    };
    let c2lse = run_replicates_on(&continuous, &problem, &truth)?;
    let mut rows = Vec::with_capacity(2 * grid_shapes.len());
    for shape in grid_shapes {
        if shape.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                actual: shape.len(),
            });
        }
        let config = ExperimentConfig {
            method: Method::LseAmbiguity,
            candidate_grid: Some(shape.clone()),
            ..base.clone()
        };
        let summary = run_replicates_on(&config, &problem, &truth)?;
        rows.push(compare_row(Method::LseAmbiguity, Some(shape.clone()), shape.clone(), summary));
        rows.push(compare_row(Method::C2lse, None, shape.clone(), c2lse.clone()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_distance_examples() {
        assert_eq!(mean_pairwise_distance::<Vec<f64>>(&[]), 0.0);
        assert_eq!(mean_pairwise_distance(&[vec![1.0, 2.0]]), 0.0);
        // Right triangle 3-4-5: (3 + 4 + 5) / 3.
        let pts = [vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]];
        assert!((mean_pairwise_distance(&pts) - 4.0).abs() < 1e-15);
    }

    fn tiny(method: Method) -> ExperimentConfig {
        let mut c = ExperimentConfig::for_problem("mc2d", method);
        c.budget = 4;
        c.search.n_raw_samples = Some(64);
        c.search.n_restarts = 2;
        c.search.max_refine_iters = 3;
        c.seeds = vec![5];
        c
    }

    fn tiny_problem(c: &ExperimentConfig) -> (LevelSetProblem, GroundTruth) {
        let mut p = c.load_problem().unwrap();
        p.truth_grid_shape = Some(vec![15, 15]);
        let t = p.build_ground_truth().unwrap();
        (p, t)
    }

    #[test]
    fn single_seed_aggregate_equals_run() {
        let c = tiny(Method::C2lse);
        let (p, t) = tiny_problem(&c);
        let s = run_replicates_on(&c, &p, &t).unwrap();
        assert_eq!(s.records.len(), 1);
        assert_eq!(s.curve.len(), 5);
        for pt in &s.curve {
            assert_eq!(pt.std_f1, 0.0);
            let expected = if pt.iteration == 0 {
                s.records[0].initial_metrics.unwrap().f1_macro
            } else {
                s.records[0].rows[pt.iteration - 1].metrics.unwrap().f1_macro
            };
            assert_eq!(pt.mean_f1, expected);
        }
    }

    #[test]
    fn identical_seeds_give_identical_records() {
        let mut c = tiny(Method::Straddle);
        c.seeds = vec![8, 8];
        let (p, t) = tiny_problem(&c);
        let s = run_replicates_on(&c, &p, &t).unwrap();
        assert_eq!(s.records[0], s.records[1]);
        assert!(s.curve.iter().all(|pt| pt.std_f1 == 0.0 && pt.runs == 2));
    }

    #[test]
    fn sweep_single_epsilon_matches_replicates() {
        let mut c = tiny(Method::C2lse);
        c.problem = Some("sin2d".into());
        c.budget = 2;
        let sweep = sweep_epsilon(&c, &[c.epsilon]).unwrap();
        let direct = run_replicates(&c).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].summary, direct);
        assert!(sweep_epsilon(&c, &[]).is_err());
        assert!(sweep_epsilon(&c, &[0.1, 0.0]).is_err());
    }

    #[test]
    fn grid_compare_reuses_continuous_row() {
        let mut c = tiny(Method::C2lse);
        c.problem = Some("sin2d".into());
        c.budget = 2;
        let rows = grid_compare(&c, &[vec![2, 2], vec![5, 5]]).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[1].summary, rows[3].summary);
        assert_eq!(rows[1].final_f1_mean, rows[3].final_f1_mean);
        assert_eq!(rows[0].candidate_grid, Some(vec![2, 2]));
        assert!(grid_compare(&c, &[]).is_err());
        assert!(grid_compare(&c, &[vec![3]]).is_err());
    }
}
