//! Dense Cholesky factorization with a diagonal jitter ladder.

use crate::error::{Error, Result};

/// Jitter values tried, in order, after a plain factorization fails.
pub const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

/// Lower-triangular factor `L` with `L Lᵀ = A + jitter·I`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
    jitter: f64,
}

enum Attempt {
    Ok(Vec<f64>),
    Failed { index: usize, pivot: f64 },
}

fn try_factor(a: &[f64], n: usize, jitter: f64) -> Attempt {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let row_j = j * n;
        let mut d = a[row_j + j] + jitter;
        for k in 0..j {
            d -= l[row_j + k] * l[row_j + k];
        }
        if !(d > 0.0 && d.is_finite()) {
            return Attempt::Failed { index: j, pivot: d };
        }
        let djj = d.sqrt();
        l[row_j + j] = djj;
        for i in (j + 1)..n {
            let row_i = i * n;
            let mut s = a[row_i + j];
            for k in 0..j {
                s -= l[row_i + k] * l[row_j + k];
            }
            l[row_i + j] = s / djj;
        }
    }
    Attempt::Ok(l)
}

impl Cholesky {
    /// Factor a symmetric `n × n` row-major matrix, escalating through
    /// [`JITTER_LADDER`] on failure.
    pub fn factor(a: &[f64], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage does not match n");
        let mut last = (0, f64::NAN, 0.0);
        for jitter in std::iter::once(0.0).chain(JITTER_LADDER) {
            match try_factor(a, n, jitter) {
                Attempt::Ok(lower) => return Ok(Self { n, lower, jitter }),
                Attempt::Failed { index, pivot } => last = (index, pivot, jitter),
            }
        }
        Err(Error::NotPositiveDefinite {
            index: last.0,
            pivot: last.1,
            jitter: last.2,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Diagonal jitter that was needed for the factorization to succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Row-major lower-triangular factor.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Solve `L v = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, x)| l * x).sum();
            b[i] = (b[i] - s) / self.lower[i * n + i];
        }
    }

    /// Solve `Lᵀ v = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            let mut s = b[i];
            for (k, bk) in b.iter().enumerate().skip(i + 1) {
                s -= self.lower[k * n + i] * bk;
            }
            b[i] = s / self.lower[i * n + i];
        }
    }

    /// Solve `(L Lᵀ) x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `log det(L Lᵀ)`.
    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.lower[i * self.n + i].ln()).sum::<f64>()
    }
}
