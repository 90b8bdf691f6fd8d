//! Banded solves used by the parabolic solvers.

use crate::error::{Error, Result};

/// `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`; `a[0]` and `c[n-1]` unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = M x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Thomas algorithm without pivoting.
    pub fn solve(&self, d: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        let mut beta = self.diag[0];
        if beta == 0.0 {
            return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
        }
        x[0] = d[0] / beta;
        for i in 1..n {
            c[i - 1] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i] * c[i - 1];
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::Singular("zero pivot in tridiagonal solve".into()));
            }
            x[i] = (d[i] - self.lower[i] * x[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        Ok(x)
    }

    /// Solves `(M + w e_row e_colᵀ) x = d` by Sherman-Morrison.
    pub fn solve_with_corner(&self, row: usize, col: usize, w: f64, d: &[f64]) -> Result<Vec<f64>> {
        let y = self.solve(d)?;
        if w == 0.0 {
            return Ok(y);
        }
        let mut e = vec![0.0; self.len()];
        e[row] = w;
        let z = self.solve(&e)?;
        let denom = 1.0 + z[col];
        if denom.abs() < 1e-300 {
            return Err(Error::Singular("Sherman-Morrison denominator vanished".into()));
        }
        let k = y[col] / denom;
        Ok(y.iter().zip(&z).map(|(a, b)| a - k * b).collect())
    }
}
