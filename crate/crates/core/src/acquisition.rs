//! Scores that rank candidate queries, and the β-band classification rule.

use libm::erf;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::GPosterior;

pub const STRADDLE_MULTIPLIER: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcquisitionMethod {
    C2lse,
    Straddle,
    LseAmbiguity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionSpec {
    pub method: AcquisitionMethod,
    pub epsilon: f64,
    pub beta: f64,
    pub straddle_multiplier: f64,
}

impl AcquisitionSpec {
    pub fn new(method: AcquisitionMethod, epsilon: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("beta > 0 required, got {beta}")));
        }
        if method == AcquisitionMethod::C2lse && !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon > 0 required, got {epsilon}")));
        }
        Ok(Self {
            method,
            epsilon,
            beta,
            straddle_multiplier: STRADDLE_MULTIPLIER,
        })
    }

    pub fn score(&self, mean: f64, stddev: f64, h: f64) -> f64 {
        match self.method {
            AcquisitionMethod::C2lse => c2lse_score(mean, stddev, h, self.epsilon),
            AcquisitionMethod::Straddle => self.straddle_multiplier * stddev - (mean - h).abs(),
            AcquisitionMethod::LseAmbiguity => lse_ambiguity_score(mean, stddev, h, self.beta),
        }
    }
}

/// `σ / max(ε, |μ − h|)`.
#[inline]
pub fn c2lse_score(mean: f64, stddev: f64, h: f64, epsilon: f64) -> f64 {
    stddev / epsilon.max((mean - h).abs())
}

/// `1.96 σ − |μ − h|`.
#[inline]
pub fn straddle_score(mean: f64, stddev: f64, h: f64) -> f64 {
    STRADDLE_MULTIPLIER * stddev - (mean - h).abs()
}

/// Ambiguity of the band `μ ± βσ` around `h`: `min(ucb − h, h − lcb)`.
#[inline]
pub fn lse_ambiguity_score(mean: f64, stddev: f64, h: f64, beta: f64) -> f64 {
    (mean + beta * stddev - h).min(h - mean + beta * stddev)
}

/// `2Φ(r) − 1`, the probability mass of a standard normal within `±r`.
#[inline]
pub fn two_sided_mass(r: f64) -> f64 {
    erf(r / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    pub value: f64,
    /// The posterior was a point mass (`σ = 0`) and `value` is 1 by convention.
    pub degenerate: bool,
}

/// `|P(f > h) − P(f < h)| = 2Φ(|μ − h| / σ) − 1`.
pub fn confidence_score(mean: f64, stddev: f64, h: f64) -> Confidence {
    if stddev <= 0.0 {
        return Confidence {
            value: 1.0,
            degenerate: true,
        };
    }
    Confidence {
        value: two_sided_mass((mean - h).abs() / stddev),
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Super,
    Sub,
    Unknown,
}

/// Super when `μ − βσ > h`, sub when `μ + βσ < h`, unknown otherwise
/// (ties included).
#[inline]
pub fn classify_point(mean: f64, stddev: f64, h: f64, beta: f64) -> Label {
    if mean - beta * stddev > h {
        Label::Super
    } else if mean + beta * stddev < h {
        Label::Sub
    } else {
        Label::Unknown
    }
}

pub fn classify_set(gp: &GPosterior, points: &[Vec<f64>], h: f64, beta: f64) -> Result<Vec<Label>> {
    points
        .iter()
        .map(|p| {
            let (m, s) = gp.mean_std(p)?;
            Ok(classify_point(m, s, h, beta))
        })
        .collect()
}
