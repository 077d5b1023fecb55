//! Tridiagonal systems.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A tridiagonal matrix stored by diagonals; `lower[0]` and
/// `upper[n−1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: alloc::vec![0.0; n],
            diag: alloc::vec![0.0; n],
            upper: alloc::vec![0.0; n],
        }
    }

    /// `−Δ_h` restricted to the unknowns of `grid` (homogeneous Dirichlet
    /// data at the outer boundary).
    pub fn neg_laplacian(grid: &Grid) -> Self {
        let range = grid.interior();
        let n = range.len();
        let mut a = Tridiagonal::zeros(n);
        for (k, i) in range.enumerate() {
            let st = grid.stencil(i);
            a.lower[k] = st.lower;
            a.diag[k] = st.diag;
            a.upper[k] = st.upper;
        }
        a
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|k| {
                let mut y = self.diag[k] * x[k];
                if k > 0 {
                    y += self.lower[k] * x[k - 1];
                }
                if k + 1 < n {
                    y += self.upper[k] * x[k + 1];
                }
                y
            })
            .collect()
    }

    /// Solve `A x = b` by the Thomas algorithm (no pivoting; intended for
    /// the diagonally dominant M-matrices arising here).
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        let mut c = alloc::vec![0.0; n];
        let mut d = alloc::vec![0.0; n];
        let mut denom = self.diag[0];
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::invalid("singular tridiagonal system"));
        }
        c[0] = if n > 1 { self.upper[0] / denom } else { 0.0 };
        d[0] = b[0] / denom;
        for k in 1..n {
            denom = self.diag[k] - self.lower[k] * c[k - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::invalid("singular tridiagonal system"));
            }
            if k + 1 < n {
                c[k] = self.upper[k] / denom;
            }
            d[k] = (b[k] - self.lower[k] * d[k - 1]) / denom;
        }
        for k in (0..n - 1).rev() {
            d[k] -= c[k] * d[k + 1];
        }
        Ok(d)
    }
}
