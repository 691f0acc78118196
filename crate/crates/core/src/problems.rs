//! Benchmark level-set problems: analytic synthetic functions and a
//! tabular oracle for finite datasets.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::search::DomainBounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticFunction {
    /// `exp(sin²x₁ · sin²x₂)`
    Mc2d,
    /// `exp(sin²x₁ · sin²x₂ · sin²x₃)`
    Mc3d,
    /// `sin(10x₁) + cos(4x₂) − cos(3x₁x₂)`
    Sin2d,
}

impl AnalyticFunction {
    pub fn dim(self) -> usize {
        match self {
            Self::Mc2d | Self::Sin2d => 2,
            Self::Mc3d => 3,
        }
    }

    pub fn eval(self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            Self::Mc2d => mc2d_eval(x[0], x[1]),
            Self::Mc3d => mc3d_eval(x[0], x[1], x[2]),
            Self::Sin2d => sin2d_eval(x[0], x[1]),
        })
    }
}

pub fn mc2d_eval(x1: f64, x2: f64) -> f64 {
    (x1.sin().powi(2) * x2.sin().powi(2)).exp()
}

pub fn mc3d_eval(x1: f64, x2: f64, x3: f64) -> f64 {
    (x1.sin().powi(2) * x2.sin().powi(2) * x3.sin().powi(2)).exp()
}

pub fn sin2d_eval(x1: f64, x2: f64) -> f64 {
    (10.0 * x1).sin() + (4.0 * x2).cos() - (3.0 * x1 * x2).cos()
}

/// Default absolute per-coordinate tolerance for tabular lookups.
pub const LOOKUP_TOLERANCE: f64 = 1e-9;

/// Finite dataset of `(point, value)` rows. Queries must hit a stored point.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularOracle {
    rows: Vec<(Vec<f64>, f64)>,
    tolerance: f64,
    /// Row indices sorted by first coordinate.
    order: Vec<usize>,
}

impl TabularOracle {
    pub fn new(rows: Vec<(Vec<f64>, f64)>, tolerance: f64) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("tabular dataset has no rows".into()));
        }
        let dim = rows[0].0.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("tabular points need at least one coordinate".into()));
        }
        for (p, v) in &rows {
            check_dim(dim, p.len())?;
            if !v.is_finite() || p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidArgument("tabular rows must be finite".into()));
            }
        }
        let mut order: Vec<usize> = (0..rows.len()).collect();
        order.sort_by(|&a, &b| rows[a].0[0].total_cmp(&rows[b].0[0]).then(a.cmp(&b)));
        let oracle = Self { rows, tolerance, order };
        for (pos, &i) in oracle.order.iter().enumerate() {
            for &j in oracle.order[pos + 1..].iter() {
                if oracle.rows[j].0[0] - oracle.rows[i].0[0] > tolerance {
                    break;
                }
                if oracle.matches(&oracle.rows[j].0, &oracle.rows[i].0) {
                    return Err(Error::DuplicatePoint {
                        first: i.min(j),
                        second: i.max(j),
                    });
                }
            }
        }
        Ok(oracle)
    }

    pub fn dim(&self) -> usize {
        self.rows[0].0.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[(Vec<f64>, f64)] {
        &self.rows
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    fn matches(&self, a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= self.tolerance)
    }

    /// Index of the stored row within tolerance of `x`.
    pub fn find(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let lo = x[0] - self.tolerance;
        let start = self.order.partition_point(|&i| self.rows[i].0[0] < lo);
        self.order[start..]
            .iter()
            .take_while(|&&i| self.rows[i].0[0] <= x[0] + self.tolerance)
            .copied()
            .find(|&i| self.matches(&self.rows[i].0, x))
    }

    pub fn lookup(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        match self.find(x) {
            Some(i) => Ok(self.rows[i].1),
            None => Err(Error::TabularMiss {
                query: x.to_vec(),
                nearest: self.nearest(x).to_vec(),
            }),
        }
    }

    fn nearest(&self, x: &[f64]) -> &[f64] {
        let dist = |p: &[f64]| p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        self.rows
            .iter()
            .map(|(p, _)| p.as_slice())
            .min_by(|a, b| dist(a).total_cmp(&dist(b)))
            .expect("oracle is never empty")
    }

    /// Per-coordinate minimum and maximum over the stored points.
    pub fn extent(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for (p, _) in &self.rows {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Analytic(AnalyticFunction),
    Tabular(TabularOracle),
}

impl Oracle {
    /// Noiseless value at `x`.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Self::Analytic(f) => f.eval(x),
            Self::Tabular(t) => t.lookup(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetProblem {
    pub name: String,
    pub bounds: DomainBounds,
    pub threshold: f64,
    pub oracle: Oracle,
    pub noise_variance: f64,
    /// Per-dimension truth-grid point counts; `None` means every stored
    /// tabular row is a truth point.
    pub truth_grid_shape: Option<Vec<usize>>,
}

impl LevelSetProblem {
    pub fn mc2d() -> Self {
        Self::analytic("mc2d", AnalyticFunction::Mc2d, DomainBounds::cube(2, 0.0, 9.0), 2.2, vec![100, 100])
    }

    pub fn mc3d() -> Self {
        Self::analytic(
            "mc3d",
            AnalyticFunction::Mc3d,
            DomainBounds::cube(3, 0.0, 6.0),
            1.6,
            vec![30, 30, 30],
        )
    }

    pub fn sin2d() -> Self {
        Self::analytic(
            "sin2d",
            AnalyticFunction::Sin2d,
            DomainBounds::new(vec![0.0, 0.0], vec![2.0, 3.0]),
            0.5,
            vec![100, 100],
        )
    }

    fn analytic(name: &str, f: AnalyticFunction, bounds: Result<DomainBounds>, threshold: f64, grid: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            bounds: bounds.expect("benchmark bounds are valid"),
            threshold,
            oracle: Oracle::Analytic(f),
            noise_variance: 0.0,
            truth_grid_shape: Some(grid),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "mc2d" => Ok(Self::mc2d()),
            "mc3d" => Ok(Self::mc3d()),
            "sin2d" => Ok(Self::sin2d()),
            _ => Err(Error::UnknownProblem(name.into())),
        }
    }

    pub fn with_noise(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn is_tabular(&self) -> bool {
        matches!(self.oracle, Oracle::Tabular(_))
    }

    /// Noisy observation `f(x) + η`, `η ~ N(0, noise_variance)`.
    pub fn observe<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        if let Oracle::Analytic(_) = self.oracle {
            if !self.bounds.contains(x) {
                return Err(Error::InvalidArgument(format!("query {x:?} is outside the domain")));
            }
        }
        let value = self.oracle.value(x)?;
        if self.noise_variance > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            Ok(value + self.noise_variance.sqrt() * z)
        } else {
            Ok(value)
        }
    }

    pub fn build_ground_truth(&self) -> Result<GroundTruth> {
        let points = match (&self.truth_grid_shape, &self.oracle) {
            (Some(shape), _) => self.bounds.grid(shape)?,
            (None, Oracle::Tabular(t)) => t.points(),
            (None, Oracle::Analytic(_)) => return Err(Error::InvalidArgument("analytic problem needs a truth grid shape".into())),
        };
        let mut values = Vec::with_capacity(points.len());
        let mut gaps = Vec::new();
        for p in &points {
            match self.oracle.value(p) {
                Ok(v) => values.push(v),
                Err(Error::TabularMiss { query, .. }) => gaps.push(query),
                Err(e) => return Err(e),
            }
        }
        if !gaps.is_empty() {
            return Err(Error::MissingGridPoints { gaps });
        }
        let labels = values.iter().map(|v| TruthLabel::of(*v, self.threshold)).collect();
        Ok(GroundTruth { points, values, labels })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TruthLabel {
    Super,
    Sub,
}

impl TruthLabel {
    /// Strict superlevel membership; `f(x) = h` is sub.
    pub fn of(value: f64, threshold: f64) -> Self {
        if value > threshold {
            Self::Super
        } else {
            Self::Sub
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub labels: Vec<TruthLabel>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn superlevel_fraction(&self) -> f64 {
        let n = self.labels.iter().filter(|l| **l == TruthLabel::Super).count();
        n as f64 / self.labels.len().max(1) as f64
    }
}

/// Load a CSV dataset (header row required) as a tabular problem. Bounds are
/// the per-column extremes and the truth grid is every row.
pub fn load_tabular_dataset(path: &Path, point_columns: &[String], value_column: &str, threshold: f64) -> Result<LevelSetProblem> {
    if !threshold.is_finite() {
        return Err(Error::InvalidArgument("threshold must be finite".into()));
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row: 1,
            column: name.into(),
            message: "column not found in header".into(),
        })
    };
    if point_columns.is_empty() {
        return Err(Error::InvalidArgument("at least one point column is required".into()));
    }
    let point_idx = point_columns.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;
    let value_idx = column(value_column)?;

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        // Line 1 is the header.
        let line = i + 2;
        let record = record?;
        let cell = |idx: usize| -> Result<f64> {
            let raw = record.get(idx).unwrap_or("");
            raw.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                row: line,
                column: headers[idx].to_string(),
                message: format!("`{raw}` is not a finite number"),
            })
        };
        let point = point_idx.iter().map(|&c| cell(c)).collect::<Result<Vec<_>>>()?;
        rows.push((point, cell(value_idx)?));
    }
    let oracle = TabularOracle::new(rows, LOOKUP_TOLERANCE)?;
    let (lo, hi) = oracle.extent();
    // A constant column still needs a non-empty interval.
    let hi: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| if h > *l { h } else { l + 1.0 }).collect();
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("tabular").to_string();
    Ok(LevelSetProblem {
        name,
        bounds: DomainBounds::new(lo, hi)?,
        threshold,
        oracle: Oracle::Tabular(oracle),
        noise_variance: 0.0,
        truth_grid_shape: None,
    })
}
