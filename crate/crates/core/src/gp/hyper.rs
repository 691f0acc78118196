//! Maximum-likelihood kernel hyperparameters by derivative-free multistart
//! coordinate ascent in log space.

use super::kernel::KernelSpec;
use super::posterior::{log_marginal_likelihood_centered, ObservationSet};
use crate::error::{Error, Result};
use crate::golden;

/// Box constraints on the kernel hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperBounds {
    pub lengthscale_lower: Vec<f64>,
    pub lengthscale_upper: Vec<f64>,
    pub outputscale_lower: f64,
    pub outputscale_upper: f64,
}

impl HyperBounds {
    /// Lengthscales in `[1e-3, 1e3]` times the domain width per dimension,
    /// outputscale in `[1e-6, 1e3]`.
    pub fn for_widths(widths: &[f64]) -> Self {
        Self {
            lengthscale_lower: widths.iter().map(|w| 1e-3 * w).collect(),
            lengthscale_upper: widths.iter().map(|w| 1e3 * w).collect(),
            outputscale_lower: 1e-6,
            outputscale_upper: 1e3,
        }
    }

    fn log_box(&self) -> Vec<(f64, f64)> {
        self.lengthscale_lower
            .iter()
            .zip(&self.lengthscale_upper)
            .map(|(lo, hi)| (lo.ln(), hi.ln()))
            .chain(std::iter::once((self.outputscale_lower.ln(), self.outputscale_upper.ln())))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperFitOptions {
    pub bounds: HyperBounds,
    /// Coordinate sweeps per start; zero returns the best start unchanged.
    pub sweeps: usize,
    /// Golden-section reductions per line search.
    pub line_iters: usize,
    /// Half-width of the first sweep's line-search window, in log units.
    /// Each later sweep halves it.
    pub initial_step: f64,
    /// Constant prior mean the responses are centered on.
    pub prior_mean: f64,
}

impl HyperFitOptions {
    pub fn new(bounds: HyperBounds) -> Self {
        Self {
            bounds,
            sweeps: 3,
            line_iters: 12,
            initial_step: 1.5,
            prior_mean: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperFit {
    pub kernel: KernelSpec,
    pub log_likelihood: f64,
    /// Every start failed to factorize; `kernel` is the first grid entry.
    pub fell_back: bool,
}

struct Objective<'a> {
    template: &'a KernelSpec,
    obs: &'a ObservationSet,
    prior_mean: f64,
}

impl Objective<'_> {
    fn spec(&self, theta: &[f64]) -> KernelSpec {
        let d = theta.len() - 1;
        KernelSpec {
            family: self.template.family,
            lengthscales: theta[..d].iter().map(|v| v.exp()).collect(),
            outputscale: theta[d].exp(),
        }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        match log_marginal_likelihood_centered(&self.spec(theta), self.obs, self.prior_mean) {
            Ok(v) if v.is_finite() => v,
            _ => f64::NEG_INFINITY,
        }
    }
}

const MAX_WINDOW_SHIFTS: usize = 4;

fn ascend(obj: &Objective<'_>, mut theta: Vec<f64>, mut value: f64, bounds: &[(f64, f64)], opts: &HyperFitOptions) -> (Vec<f64>, f64) {
    for sweep in 0..opts.sweeps {
        let step = opts.initial_step * 0.5f64.powi(sweep as i32);
        for i in 0..theta.len() {
            let (lb, ub) = bounds[i];
            let mut center = theta[i];
            // Re-center the window when the optimum lands on its edge, so a
            // single sweep can travel further than `step`.
            for _ in 0..=MAX_WINDOW_SHIFTS {
                let lo = (center - step).max(lb);
                let hi = (center + step).min(ub);
                if hi <= lo {
                    break;
                }
                let mut probe = theta.clone();
                let (x, v) = golden::maximize(
                    |s| {
                        probe[i] = s;
                        obj.value(&probe)
                    },
                    lo,
                    hi,
                    opts.line_iters,
                );
                if v > value {
                    theta[i] = x;
                    value = v;
                } else {
                    break;
                }
                let margin = 0.05 * (hi - lo);
                let at_upper = x > hi - margin && hi < ub;
                let at_lower = x < lo + margin && lo > lb;
                if !(at_upper || at_lower) {
                    break;
                }
                center = x;
            }
        }
    }
    (theta, value)
}

/// Multistart local ascent of the log marginal likelihood.
///
/// Each entry of `init_grid` is a start (clamped into the bounds). The
/// returned likelihood is at least that of every start.
pub fn fit_hyperparameters(obs: &ObservationSet, init_grid: &[KernelSpec], opts: &HyperFitOptions) -> Result<HyperFit> {
    if obs.is_empty() {
        return Err(Error::InvalidArgument("hyperparameter fitting needs observations".into()));
    }
    let Some(first) = init_grid.first() else {
        return Err(Error::InvalidArgument("init grid is empty".into()));
    };
    let bounds = opts.bounds.log_box();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in init_grid {
        if start.dim() + 1 != bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: bounds.len() - 1,
                actual: start.dim(),
            });
        }
        let obj = Objective {
            template: start,
            obs,
            prior_mean: opts.prior_mean,
        };
        let theta: Vec<f64> = start
            .lengthscales
            .iter()
            .map(|l| l.ln())
            .chain(std::iter::once(start.outputscale.ln()))
            .zip(&bounds)
            .map(|(v, (lo, hi))| v.clamp(*lo, *hi))
            .collect();
        let value = obj.value(&theta);
        if !value.is_finite() {
            continue;
        }
        let (theta, value) = ascend(&obj, theta, value, &bounds, opts);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((theta, value));
        }
    }
    let template = Objective {
        template: first,
        obs,
        prior_mean: opts.prior_mean,
    };
    Ok(match best {
        Some((theta, log_likelihood)) => HyperFit {
            kernel: template.spec(&theta),
            log_likelihood,
            fell_back: false,
        },
        None => {
            log::warn!("all hyperparameter starts failed; keeping the first grid entry");
            HyperFit {
                kernel: first.clone(),
                log_likelihood: f64::NEG_INFINITY,
                fell_back: true,
            }
        }
    })
}
