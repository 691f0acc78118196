use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

const SQRT_5: f64 = 2.236_067_977_499_79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    /// Matérn with smoothness ν = 5/2.
    #[default]
    Matern52,
    SquaredExponential,
}

/// Stationary ARD kernel: one lengthscale per input dimension and a prior
/// variance (`outputscale`) equal to `k(x, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub lengthscales: Vec<f64>,
    pub outputscale: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, lengthscales: Vec<f64>, outputscale: f64) -> Result<Self> {
        if lengthscales.is_empty() {
            return Err(Error::InvalidArgument("kernel needs at least one lengthscale".into()));
        }
        if let Some(l) = lengthscales.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidArgument(format!("lengthscale must be > 0, got {l}")));
        }
        if !(outputscale.is_finite() && outputscale > 0.0) {
            return Err(Error::InvalidArgument(format!("outputscale must be > 0, got {outputscale}")));
        }
        Ok(Self {
            family,
            lengthscales,
            outputscale,
        })
    }

    /// Isotropic kernel with the same lengthscale in every dimension.
    pub fn isotropic(family: KernelFamily, dim: usize, lengthscale: f64, outputscale: f64) -> Result<Self> {
        Self::new(family, vec![lengthscale; dim], outputscale)
    }

    pub fn dim(&self) -> usize {
        self.lengthscales.len()
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        check_dim(self.dim(), a.len())?;
        check_dim(self.dim(), b.len())?;
        Ok(self.eval_unchecked(a, b))
    }

    /// Covariance without the dimension check; callers guarantee matching lengths.
    #[inline]
    pub(crate) fn eval_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a
            .iter()
            .zip(b)
            .zip(&self.lengthscales)
            .map(|((x, y), l)| {
                let d = (x - y) / l;
                d * d
            })
            .sum();
        self.outputscale * self.profile(r2)
    }

    /// Unit-variance correlation as a function of the squared scaled distance.
    #[inline]
    fn profile(&self, r2: f64) -> f64 {
        match self.family {
            KernelFamily::Matern52 => {
                let r = r2.sqrt();
                let s = SQRT_5 * r;
                (1.0 + s + 5.0 * r2 / 3.0) * (-s).exp()
            }
            KernelFamily::SquaredExponential => (-0.5 * r2).exp(),
        }
    }

    /// Dense symmetric Gram matrix in row-major order.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        for p in points {
            check_dim(self.dim(), p.len())?;
        }
        let n = points.len();
        let mut k = vec![0.0; n * n];
        for i in 0..n {
            k[i * n + i] = self.outputscale;
            for j in 0..i {
                let v = self.eval_unchecked(&points[i], &points[j]);
                k[i * n + j] = v;
                k[j * n + i] = v;
            }
        }
        Ok(k)
    }
}
