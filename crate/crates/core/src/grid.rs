//! Uniform grids on an interval `[−R, R]` or on the radius `[0, R]` of a
//! ball in `ℝᴺ`, and the matching second-order discrete Laplacian.
//!
//! For the ball the operator is the conservative form
//! `(r^{N−1} u′)′ / r^{N−1}`: fluxes `r^{N−1} u′` at half nodes, divided by
//! the control volume `∫ r^{N−1} dr` of the node. At the centre this is the
//! symmetry closure `−Δu|₀ ≈ 2N (u₀ − u₁) / h²` (ghost node `u₋₁ = u₁`).
//! Quadratics in `r` are reproduced exactly.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::powf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Interval,
    Ball { dim: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    geometry: Geometry,
    radius: f64,
    nodes: Vec<f64>,
    step: f64,
}

/// Three-point stencil `(−Δ_h u)_i = lower·u_{i−1} + diag·u_i + upper·u_{i+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub lower: f64,
    pub diag: f64,
    pub upper: f64,
}

impl Grid {
    /// `m` uniform nodes on `[−R, R]`.
    pub fn interval(radius: f64, m: usize) -> Result<Self> {
        Self::new(Geometry::Interval, radius, m)
    }

    /// `m` uniform nodes on `[0, R]`, the radius of the ball `B_R ⊂ ℝᴺ`.
    pub fn ball(dim: u32, radius: f64, m: usize) -> Result<Self> {
        Self::new(Geometry::Ball { dim }, radius, m)
    }

    pub fn new(geometry: Geometry, radius: f64, m: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("grid radius R must be positive"));
        }
        if m < 16 {
            return Err(Error::invalid("a grid needs at least 16 nodes"));
        }
        if let Geometry::Ball { dim } = geometry {
            if dim == 0 {
                return Err(Error::invalid("ball dimension N must be at least 1"));
            }
        }
        let (a, b) = match geometry {
            Geometry::Interval => (-radius, radius),
            Geometry::Ball { .. } => (0.0, radius),
        };
        let step = (b - a) / (m - 1) as f64;
        let mut nodes: Vec<f64> = (0..m).map(|i| a + step * i as f64).collect();
        nodes[m - 1] = b;
        if geometry == Geometry::Interval && m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Ok(Grid { geometry, radius, nodes, step })
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Spatial dimension `N` (1 for the interval).
    pub fn dim(&self) -> u32 {
        match self.geometry {
            Geometry::Interval => 1,
            Geometry::Ball { dim } => dim,
        }
    }

    /// Distance of node `i` from the centre.
    pub fn distance(&self, i: usize) -> f64 {
        self.nodes[i].abs()
    }

    /// Index of the node closest to the centre.
    pub fn center(&self) -> usize {
        match self.geometry {
            Geometry::Interval => (self.len() - 1) / 2,
            Geometry::Ball { .. } => 0,
        }
    }

    /// Indices of the unknowns (all nodes but the Dirichlet boundary).
    pub fn interior(&self) -> core::ops::Range<usize> {
        match self.geometry {
            Geometry::Interval => 1..self.len() - 1,
            Geometry::Ball { .. } => 0..self.len() - 1,
        }
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        !self.interior().contains(&i)
    }

    /// Evaluate a function of the coordinate at every node.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    /// Stencil of `−Δ_h` at an interior node.
    pub fn stencil(&self, i: usize) -> Stencil {
        let h2 = self.step * self.step;
        match self.geometry {
            Geometry::Interval => Stencil {
                lower: -1.0 / h2,
                diag: 2.0 / h2,
                upper: -1.0 / h2,
            },
            Geometry::Ball { dim } => {
                if i == 0 {
                    let c = 2.0 * dim as f64 / h2;
                    return Stencil { lower: 0.0, diag: c, upper: -c };
                }
                let h = self.step;
                let p = (dim - 1) as f64;
                let r = self.nodes[i];
                let vol = self.shell_volume(i);
                let lower = -powf(r - 0.5 * h, p) / (h * vol);
                let upper = -powf(r + 0.5 * h, p) / (h * vol);
                Stencil {
                    lower,
                    diag: -(lower + upper),
                    upper,
                }
            }
        }
    }

    /// `∫ r^{N−1} dr` over the control volume of node `i` (ball only).
    fn shell_volume(&self, i: usize) -> f64 {
        let n = self.len();
        let h = self.step;
        let dim = self.dim() as f64;
        let r = self.nodes[i];
        let lo = (r - 0.5 * h).max(0.0);
        let hi = if i == n - 1 { r } else { r + 0.5 * h };
        (powf(hi, dim) - powf(lo, dim)) / dim
    }

    /// `(−Δ_h u)_i` at an interior node.
    pub fn neg_laplacian_at(&self, u: &[f64], i: usize) -> f64 {
        let st = self.stencil(i);
        let lower = if i == 0 { 0.0 } else { st.lower * u[i - 1] };
        lower + st.diag * u[i] + st.upper * u[i + 1]
    }

    /// `−Δ_h u` at every node (zero on the boundary).
    pub fn neg_laplacian(&self, u: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.len()];
        for i in self.interior() {
            out[i] = self.neg_laplacian_at(u, i);
        }
        out
    }

    /// Central difference `D_h u` (zero at the ball centre by symmetry,
    /// one-sided at the boundary).
    pub fn gradient_at(&self, u: &[f64], i: usize) -> f64 {
        let n = self.len();
        let h = self.step;
        if i == 0 {
            match self.geometry {
                Geometry::Ball { .. } => 0.0,
                Geometry::Interval => (u[1] - u[0]) / h,
            }
        } else if i == n - 1 {
            (u[n - 1] - u[n - 2]) / h
        } else {
            (u[i + 1] - u[i - 1]) / (2.0 * h)
        }
    }

    /// Control-volume weights `∫ r^{N−1} dr` (plain `h`, halved at the ends,
    /// on the interval). They make `−Δ_h` symmetric and integrate constants
    /// exactly.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.step;
        let n = self.len();
        match self.geometry {
            Geometry::Interval => {
                let mut w = alloc::vec![h; n];
                w[0] = 0.5 * h;
                w[n - 1] = 0.5 * h;
                w
            }
            Geometry::Ball { .. } => (0..n).map(|i| self.shell_volume(i)).collect(),
        }
    }

    /// Weighted sum `Σ w_i a_i` over all nodes.
    pub fn integrate(&self, a: &[f64]) -> f64 {
        self.weights().iter().zip(a).map(|(w, x)| w * x).sum()
    }
}
