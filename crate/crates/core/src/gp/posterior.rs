use std::f64::consts::PI;

use super::cholesky::Cholesky;
use super::kernel::KernelSpec;
use crate::error::{check_dim, Error, Result};

/// Queried points and their noisy responses.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationSet {
    points: Vec<Vec<f64>>,
    responses: Vec<f64>,
    noise_variance: f64,
}

impl ObservationSet {
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise variance must be >= 0, got {noise_variance}")));
        }
        Ok(Self {
            points: Vec::new(),
            responses: Vec::new(),
            noise_variance,
        })
    }

    pub fn from_parts(points: Vec<Vec<f64>>, responses: Vec<f64>, noise_variance: f64) -> Result<Self> {
        let mut obs = Self::new(noise_variance)?;
        if points.len() != responses.len() {
            return Err(Error::InvalidArgument(format!(
                "{} points but {} responses",
                points.len(),
                responses.len()
            )));
        }
        for (p, y) in points.into_iter().zip(responses) {
            obs.push(p, y)?;
        }
        Ok(obs)
    }

    pub fn push(&mut self, point: Vec<f64>, response: f64) -> Result<()> {
        if let Some(first) = self.points.first() {
            check_dim(first.len(), point.len())?;
        }
        if !response.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite response {response}")));
        }
        self.points.push(point);
        self.responses.push(response);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn responses(&self) -> &[f64] {
        &self.responses
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// Factorized `K + σ²I` for a fixed kernel and observation set.
///
/// The prior mean is the constant `prior_mean`; responses are centered on it
/// before solving and predictions are shifted back.
#[derive(Debug, Clone)]
pub struct GPosterior {
    kernel: KernelSpec,
    observations: ObservationSet,
    prior_mean: f64,
    factor: Cholesky,
    alpha: Vec<f64>,
}

fn factor_gram(kernel: &KernelSpec, obs: &ObservationSet) -> Result<Cholesky> {
    let n = obs.len();
    let mut k = kernel.gram(obs.points())?;
    for i in 0..n {
        k[i * n + i] += obs.noise_variance();
    }
    Cholesky::factor(&k, n)
}

impl GPosterior {
    /// Condition a zero-mean GP prior on `obs`.
    pub fn fit(kernel: KernelSpec, obs: ObservationSet) -> Result<Self> {
        Self::fit_with_prior_mean(kernel, obs, 0.0)
    }

    pub fn fit_with_prior_mean(kernel: KernelSpec, obs: ObservationSet, prior_mean: f64) -> Result<Self> {
        let factor = factor_gram(&kernel, &obs)?;
        let centered: Vec<f64> = obs.responses().iter().map(|y| y - prior_mean).collect();
        let alpha = factor.solve(&centered);
        Ok(Self {
            kernel,
            observations: obs,
            prior_mean,
            factor,
            alpha,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn observations(&self) -> &ObservationSet {
        &self.observations
    }

    pub fn prior_mean(&self) -> f64 {
        self.prior_mean
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    /// `(K + σ²I)⁻¹ (y − μ₀)`.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    /// Posterior mean and variance at `x`; the variance is clamped to
    /// `[0, outputscale]`.
    pub fn mean_var(&self, x: &[f64]) -> Result<(f64, f64)> {
        check_dim(self.dim(), x.len())?;
        Ok(self.mean_var_unchecked(x))
    }

    pub(crate) fn mean_var_unchecked(&self, x: &[f64]) -> (f64, f64) {
        let prior_var = self.kernel.outputscale;
        if self.observations.is_empty() {
            return (self.prior_mean, prior_var);
        }
        let mut kx: Vec<f64> = self
            .observations
            .points()
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, x))
            .collect();
        let mean = self.prior_mean + kx.iter().zip(&self.alpha).map(|(k, a)| k * a).sum::<f64>();
        self.factor.solve_lower_in_place(&mut kx);
        let reduction: f64 = kx.iter().map(|v| v * v).sum();
        let var = (prior_var - reduction).clamp(0.0, prior_var);
        (mean, var)
    }

    pub fn mean_std(&self, x: &[f64]) -> Result<(f64, f64)> {
        let (m, v) = self.mean_var(x)?;
        Ok((m, v.sqrt()))
    }

    /// Log marginal likelihood of the conditioned observations.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let t = self.observations.len();
        if t == 0 {
            return 0.0;
        }
        let fit: f64 = self
            .observations
            .responses()
            .iter()
            .zip(&self.alpha)
            .map(|(y, a)| (y - self.prior_mean) * a)
            .sum();
        -0.5 * fit - 0.5 * self.factor.log_det() - 0.5 * t as f64 * (2.0 * PI).ln()
    }
}

/// `−½ yᵀ(K+σ²I)⁻¹y − ½ log det(K+σ²I) − (t/2) log 2π`, zero for no data.
pub fn log_marginal_likelihood(kernel: &KernelSpec, obs: &ObservationSet) -> Result<f64> {
    log_marginal_likelihood_centered(kernel, obs, 0.0)
}

/// Log marginal likelihood with responses centered on `prior_mean`.
pub fn log_marginal_likelihood_centered(kernel: &KernelSpec, obs: &ObservationSet, prior_mean: f64) -> Result<f64> {
    if obs.is_empty() {
        return Ok(0.0);
    }
    let factor = factor_gram(kernel, obs)?;
    let mut z: Vec<f64> = obs.responses().iter().map(|y| y - prior_mean).collect();
    factor.solve_lower_in_place(&mut z);
    let fit: f64 = z.iter().map(|v| v * v).sum();
    let t = obs.len() as f64;
    Ok(-0.5 * fit - 0.5 * factor.log_det() - 0.5 * t * (2.0 * PI).ln())
}
