//! Numeric checks of the convergence inequalities on a completed run.
//!
//! Variances are measured in units of the outputscale of the posterior that
//! produced them, so the per-query variance is at most 1. Under that
//! normalization the realized information gain `½ Σ log(1 + σ⁻² v_t)` is
//! bounded below termwise by `½ (v_t/s_t) log(1 + s_t/σ²)`, which is the
//! textbook bound `log(1+σ⁻²)/2 · Σ v_t` when `s_t = 1`. The averaged
//! acquisition bound is checked with the realized gain in place of the
//! maximum information gain; since the maximum is never smaller, a violation
//! would falsify the bound, but passing does not certify it with the true
//! maximum.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::active::RunRecord;
use crate::acquisition::{c2lse_score, two_sided_mass};

/// Relative slack for round-off in inequalities that can hold with equality.
const REL_TOL: f64 = 1e-12;

/// `C₁ = 2 / log(1 + σ⁻²)` with unit outputscale.
pub fn c1_constant(noise_variance: f64) -> f64 {
    2.0 / (1.0 / noise_variance).ln_1p()
}

/// `C₁` expressed in raw units for a posterior with outputscale `s`:
/// `s · 2 / log(1 + s/σ²)`.
pub fn c1_scaled(noise_variance: f64, outputscale: f64) -> f64 {
    outputscale * c1_constant(noise_variance / outputscale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub smaller: f64,
    pub larger: f64,
    pub holds: bool,
}

impl Inequality {
    fn check(smaller: f64, larger: f64) -> Self {
        let slack = REL_TOL * smaller.abs().max(larger.abs());
        Self {
            smaller,
            larger,
            holds: smaller <= larger + slack,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.holds { "holds" } else { "VIOLATED" };
        write!(f, "{:.6e} <= {:.6e}  [{verdict}]", self.smaller, self.larger)
    }
}

/// Links of `ε²(Σa_t)² ≤ (Σσ_t)² ≤ T Σσ_t² ≤ T C₁ I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedAcquisitionCheck {
    pub sum_acquisition: f64,
    /// `ε Σ a_t ≤ Σ σ_{t−1}(x_t)`
    pub margin_floor: Inequality,
    /// `(Σ σ)² ≤ T Σ σ²`
    pub cauchy_schwarz: Inequality,
    /// `Σ σ² ≤ C₁ I`
    pub variance_to_gain: Inequality,
    /// `(Σ a_t)² ≤ T C₁ I / ε²`
    pub bound: Inequality,
    /// Recorded acquisition values that disagree with `σ / max(ε, |μ − h|)`
    /// recomputed from the stored posterior summaries (C2LSE runs only).
    pub recorded_mismatches: usize,
}

impl AveragedAcquisitionCheck {
    pub fn holds(&self) -> bool {
        self.margin_floor.holds && self.cauchy_schwarz.holds && self.variance_to_gain.holds && self.bound.holds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub seed: u64,
    pub iterations: usize,
    pub noise_variance: f64,
    pub epsilon: f64,
    pub beta: f64,
    /// `max_t s_t · 2/log(1 + s_t/σ²)`; equals `2/log(1+σ⁻²)` at unit outputscale.
    pub c1: f64,
    pub information_gain: f64,
    /// `I ≥ ½ Σ (v_t/s_t) log(1 + s_t/σ²)`
    pub gain_lower_bound: Inequality,
    /// Iterations where the per-term form of the same bound fails.
    pub gain_termwise_violations: Vec<usize>,
    pub averaged_acquisition: Option<AveragedAcquisitionCheck>,
    /// First evaluated iteration whose truth-grid acquisition maximum is ≤ 1/β.
    pub first_confident_iteration: Option<usize>,
    pub confident_iterations_checked: usize,
    /// Unknown truth points with `|μ − h| > ε` at confident iterations.
    pub unknown_outside_epsilon: usize,
    /// Points with `|μ − h| > ε` below confidence `2Φ(β) − 1` at confident iterations.
    pub low_confidence_outside_epsilon: usize,
    pub confidence_floor: f64,
    /// The run's own ε/β differ from the ones passed in; grid checks used the run's.
    pub parameter_mismatch: bool,
}

impl TheoryReport {
    pub fn all_hold(&self) -> bool {
        self.gain_lower_bound.holds
            && self.gain_termwise_violations.is_empty()
            && self.averaged_acquisition.as_ref().is_none_or(|c| c.holds())
            && self.unknown_outside_epsilon == 0
            && self.low_confidence_outside_epsilon == 0
    }
}

pub fn theory_diagnostics(record: &RunRecord, noise_variance: f64, epsilon: f64, beta: f64) -> TheoryReport {
    let rows = &record.rows;
    let t = rows.len();
    let h = record.threshold;

    let mut gain = 0.0;
    let mut lower = 0.0;
    let mut termwise = Vec::new();
    let mut c1 = if t == 0 { c1_constant(noise_variance) } else { 0.0 };
    let (mut sum_std, mut sum_var, mut sum_acq) = (0.0, 0.0, 0.0);
    let mut mismatches = 0;
    for row in rows {
        let v = row.pre_query_variance.max(0.0);
        let s = row.outputscale;
        let term = 0.5 * (v / noise_variance).ln_1p();
        let bound = 0.5 * (v / s) * (s / noise_variance).ln_1p();
        if !Inequality::check(bound, term).holds {
            termwise.push(row.iteration);
        }
        gain += term;
        lower += bound;
        c1 = f64::max(c1, c1_scaled(noise_variance, s));

        let std = v.sqrt();
        let a = c2lse_score(row.pre_query_mean, std, h, epsilon);
        if record.method == super::Method::C2lse && epsilon == record.epsilon {
            if let Some(recorded) = row.acquisition_value {
                if (recorded - a).abs() > 1e-9 * a.abs().max(1e-300) {
                    mismatches += 1;
                }
            }
        }
        sum_std += std;
        sum_var += v;
        sum_acq += a;
    }

    let averaged_acquisition = (t > 0).then(|| {
        let tf = t as f64;
        AveragedAcquisitionCheck {
            sum_acquisition: sum_acq,
            margin_floor: Inequality::check(epsilon * sum_acq, sum_std),
            cauchy_schwarz: Inequality::check(sum_std * sum_std, tf * sum_var),
            variance_to_gain: Inequality::check(sum_var, c1 * gain),
            bound: Inequality::check(sum_acq * sum_acq, tf * c1 * gain / (epsilon * epsilon)),
            recorded_mismatches: mismatches,
        }
    });

    let checks = record
        .initial_grid_check
        .iter()
        .map(|c| (0, c))
        .chain(rows.iter().filter_map(|r| r.grid_check.as_ref().map(|c| (r.iteration, c))));
    let mut first_confident_iteration = None;
    let mut confident_iterations_checked = 0;
    let (mut unknown_outside_epsilon, mut low_confidence_outside_epsilon) = (0, 0);
    for (it, c) in checks.filter(|(_, c)| c.confident) {
        first_confident_iteration.get_or_insert(it);
        confident_iterations_checked += 1;
        unknown_outside_epsilon += c.unknown_outside_epsilon;
        low_confidence_outside_epsilon += c.low_confidence_outside_epsilon;
    }

    TheoryReport {
        seed: record.seed,
        iterations: t,
        noise_variance,
        epsilon,
        beta,
        c1,
        information_gain: gain,
        gain_lower_bound: Inequality::check(lower, gain),
        gain_termwise_violations: termwise,
        averaged_acquisition,
        first_confident_iteration,
        confident_iterations_checked,
        unknown_outside_epsilon,
        low_confidence_outside_epsilon,
        confidence_floor: two_sided_mass(beta),
        parameter_mismatch: epsilon != record.epsilon || beta != record.beta,
    }
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "seed {}: T = {}, noise variance = {:e}, epsilon = {}, beta = {}",
            self.seed, self.iterations, self.noise_variance, self.epsilon, self.beta
        )?;
        writeln!(f, "  C1 (outputscale-normalized) = {:.6}", self.c1)?;
        writeln!(f, "  realized information gain I = {:.6}", self.information_gain)?;
        writeln!(f, "  gain lower bound: {}", self.gain_lower_bound)?;
        if !self.gain_termwise_violations.is_empty() {
            writeln!(
                f,
                "  gain bound VIOLATED termwise at iterations {:?}",
                self.gain_termwise_violations
            )?;
        }
        match &self.averaged_acquisition {
            Some(c) => {
                writeln!(f, "  averaged acquisition (realized gain stands in for its maximum):")?;
                writeln!(f, "    eps * sum a_t <= sum sigma_t:       {}", c.margin_floor)?;
                writeln!(f, "    (sum sigma)^2 <= T sum sigma^2:     {}", c.cauchy_schwarz)?;
                writeln!(f, "    sum sigma^2 <= C1 I:                {}", c.variance_to_gain)?;
                writeln!(f, "    (sum a_t)^2 <= T C1 I / eps^2:      {}", c.bound)?;
                if c.recorded_mismatches > 0 {
                    writeln!(
                        f,
                        "    {} recorded acquisition values disagree with the recomputed score",
                        c.recorded_mismatches
                    )?;
                }
            }
            None => writeln!(f, "  averaged acquisition: no iterations")?,
        }
        match self.first_confident_iteration {
            Some(it) => {
                writeln!(
                    f,
                    "  first iteration with max grid acquisition <= 1/beta: {it} ({} such iterations checked)",
                    self.confident_iterations_checked
                )?;
                writeln!(f, "    unknown points with |mu - h| > eps: {}", self.unknown_outside_epsilon)?;
                writeln!(
                    f,
                    "    points with |mu - h| > eps below confidence {:.6}: {}",
                    self.confidence_floor, self.low_confidence_outside_epsilon
                )?;
            }
            None => writeln!(f, "  max grid acquisition never reached 1/beta; confidence linkage not exercised")?,
        }
        if self.parameter_mismatch {
            writeln!(f, "  note: grid checks used the run's own epsilon/beta")?;
        }
        write!(
            f,
            "  overall: {}",
            if self.all_hold() { "all checks hold" } else { "VIOLATIONS FOUND" }
        )
    }
}
