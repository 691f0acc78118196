//! Acquisition maximization over a box or a finite candidate list, and
//! Latin-hypercube initial designs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::golden;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl DomainBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dim(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::InvalidArgument("domain needs at least one dimension".into()));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidArgument(format!("dimension {i}: lower {l} must be < upper {u}")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval in every dimension.
    pub fn cube(dim: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn widths(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| u - l).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.lower).zip(&self.upper).all(|((v, l), u)| l <= v && v <= u)
    }

    /// Map a point of the unit cube into the box.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .map(|((t, l), h)| (l + t * (h - l)).clamp(*l, *h))
            .collect()
    }

    /// Endpoint-inclusive grid with `shape[i]` points along dimension `i`,
    /// enumerated in row-major order (last dimension fastest).
    pub fn grid(&self, shape: &[usize]) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim(), shape.len())?;
        if shape.contains(&0) {
            return Err(Error::InvalidArgument("grid shape entries must be >= 1".into()));
        }
        let axes: Vec<Vec<f64>> = shape
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&n, (&l, &u))| linspace(l, u, n))
            .collect();
        let total: usize = shape.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            out.push(idx.iter().zip(&axes).map(|(&i, a)| a[i]).collect());
            for d in (0..shape.len()).rev() {
                idx[d] += 1;
                if idx[d] < shape[d] {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(out)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub n_restarts: usize,
    pub n_raw_samples: usize,
    pub max_refine_iters: usize,
    pub seed: u64,
}

impl SearchBudget {
    /// `512·d` raw probes, 10 restarts, 40 refinement sweeps.
    pub fn for_dim(dim: usize, seed: u64) -> Self {
        Self {
            n_restarts: 10,
            n_raw_samples: 512 * dim,
            max_refine_iters: 40,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_restarts == 0 || self.n_raw_samples == 0 || self.max_refine_iters == 0 {
            return Err(Error::InvalidArgument("search budget counts must all be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    /// Number of score evaluations spent.
    pub evaluations: usize,
}

/// Golden-section reductions per coordinate line search.
const LINE_ITERS: usize = 16;

/// Coordinate-search refinement settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub n_restarts: usize,
    pub max_sweeps: usize,
}

/// Seeded quasi-random probe sequence in the unit cube.
///
/// Additive recurrence with the generalized golden ratio and a random
/// offset; every prefix of a longer sequence equals the shorter sequence.
pub fn probe_sequence(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    // φ_d solves x^(d+1) = x + 1.
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|j| phi.powi(-(j as i32)).fract()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offset: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    (0..n)
        .map(|i| offset.iter().zip(&alpha).map(|(o, a)| (o + a * i as f64).fract()).collect())
        .collect()
}

/// Best of `probes` (lowest index on ties), optionally refined by
/// coordinate-wise golden-section search from the top probes.
pub fn maximize_from_probes<F>(score: F, probes: &[Vec<f64>], bounds: &DomainBounds, refine: Option<Refinement>) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64,
{
    let mut evaluations = 0;
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(probes.len());
    for (i, p) in probes.iter().enumerate() {
        let v = score(p);
        evaluations += 1;
        if v.is_finite() {
            scored.push((i, v));
        }
    }
    if scored.is_empty() {
        return Err(Error::NoFiniteProbe);
    }
    // Stable sort keeps the lower probe index first among equal scores.
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (best_idx, best_val) = scored[0];
    let mut best = (best_idx, probes[best_idx].clone(), best_val);

    if let Some(refine) = refine {
        let widths = bounds.widths();
        for &(idx, value) in scored.iter().take(refine.n_restarts) {
            let (point, value, used) = coordinate_search(&score, probes[idx].clone(), value, bounds, &widths, refine.max_sweeps);
            evaluations += used;
            if value > best.2 || (value == best.2 && idx < best.0) {
                best = (idx, point, value);
            }
        }
    }
    Ok(SearchResult {
        point: best.1,
        value: best.2,
        evaluations,
    })
}

fn coordinate_search<F>(
    score: &F,
    mut x: Vec<f64>,
    mut value: f64,
    bounds: &DomainBounds,
    widths: &[f64],
    max_sweeps: usize,
) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let mut used = 0;
    let mut step: Vec<f64> = widths.iter().map(|w| 0.25 * w).collect();
    let min_step: Vec<f64> = widths.iter().map(|w| 1e-6 * w).collect();
    for _ in 0..max_sweeps {
        let mut improved = false;
        for i in 0..x.len() {
            let lo = (x[i] - step[i]).max(bounds.lower()[i]);
            let hi = (x[i] + step[i]).min(bounds.upper()[i]);
            let mut probe = x.clone();
            let (s, v) = golden::maximize(
                |s| {
                    probe[i] = s;
                    score(&probe)
                },
                lo,
                hi,
                LINE_ITERS,
            );
            used += LINE_ITERS + 2;
            if v > value {
                x[i] = s;
                value = v;
                improved = true;
            }
        }
        let mut converged = true;
        for (s, m) in step.iter_mut().zip(&min_step) {
            *s *= if improved { 0.5 } else { 0.25 };
            converged &= *s < *m;
        }
        if converged {
            break;
        }
    }
    (x, value, used)
}

/// Maximize `score` over the box: quasi-random probes, then coordinate
/// refinement of the best `n_restarts` of them. Deterministic in the seed.
pub fn maximize_continuous<F>(score: F, bounds: &DomainBounds, budget: &SearchBudget) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64,
{
    budget.validate()?;
    let probes: Vec<Vec<f64>> = probe_sequence(bounds.dim(), budget.n_raw_samples, budget.seed)
        .iter()
        .map(|u| bounds.from_unit(u))
        .collect();
    maximize_from_probes(
        score,
        &probes,
        bounds,
        Some(Refinement {
            n_restarts: budget.n_restarts,
            max_sweeps: budget.max_refine_iters,
        }),
    )
}

/// Exact argmax over `candidates`; the first index wins ties.
pub fn maximize_on_grid<F>(score: F, candidates: &[Vec<f64>]) -> Result<SearchResult>
where
    F: Fn(&[f64]) -> f64,
{
    let (idx, value) = argmax_index(&score, candidates)?;
    Ok(SearchResult {
        point: candidates[idx].clone(),
        value,
        evaluations: candidates.len(),
    })
}

/// Index and value of the best candidate; non-finite scores are skipped.
pub fn argmax_index<F>(score: &F, candidates: &[Vec<f64>]) -> Result<(usize, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("candidate list is empty".into()));
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let v = score(c);
        if v.is_finite() && best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.ok_or(Error::NoFiniteProbe)
}

/// Latin-hypercube design: each dimension's `n` strata hold exactly one point.
pub fn sample_initial_design(bounds: &DomainBounds, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("initial design size must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = bounds.dim();
    let mut unit = vec![vec![0.0; d]; n];
    for j in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        for (row, s) in unit.iter_mut().zip(strata) {
            row[j] = (s as f64 + rng.random::<f64>()) / n as f64;
        }
    }
    Ok(unit.iter().map(|u| bounds.from_unit(u)).collect())
}
