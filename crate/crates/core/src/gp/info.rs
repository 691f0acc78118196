//! Realized information gain of a query sequence.

use super::cholesky::Cholesky;
use super::kernel::KernelSpec;
use crate::error::{Error, Result};

/// Sequential form `½ Σ log(1 + σ⁻² σ²_{t−1}(x_t))` from the pre-query
/// posterior variances at each queried point.
pub fn information_gain(pre_query_variances: &[f64], noise_variance: f64) -> f64 {
    0.5 * pre_query_variances
        .iter()
        .map(|v| (v.max(0.0) / noise_variance).ln_1p())
        .sum::<f64>()
}

/// Determinant form `½ log det(I + σ⁻² K_T)` over the queried points.
pub fn information_gain_gram(kernel: &KernelSpec, points: &[Vec<f64>], noise_variance: f64) -> Result<f64> {
    if noise_variance.is_nan() || noise_variance <= 0.0 {
        return Err(Error::InvalidArgument("information gain needs noise variance > 0".into()));
    }
    let n = points.len();
    let mut m = kernel.gram(points)?;
    for v in m.iter_mut() {
        *v /= noise_variance;
    }
    for i in 0..n {
        m[i * n + i] += 1.0;
    }
    Ok(0.5 * Cholesky::factor(&m, n)?.log_det())
}
