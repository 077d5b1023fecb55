//! Numerics for the singular quasilinear Dirichlet problem
//!
//! ```text
//! −Δu + h(u)|∇u|² = λ f,   0 ≤ u < σ,
//! ```
//!
//! where `h` blows up at the finite level `σ`. The change of variables
//! `v = ψ(u)` turns it into the semilinear problem `−Δv = λ f g(v)` with a
//! bounded, decreasing reaction term `g` that vanishes at the ceiling
//! `L = ψ(σ)`. Everything here works through that transformation: shooting
//! for one-dimensional profiles, finite-difference solves with a truncation
//! schedule, flat-zone detection, threshold estimates and post-hoc checks.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod math;
mod quad;
mod interp;

pub mod error;
pub mod nonlinearity;
pub mod transform;
pub mod truncate;
pub mod grid;
pub mod linalg;
pub mod shooting;
pub mod bvp;
pub mod thresholds;
pub mod diagnostics;

pub use error::{ConvergenceFailure, Error, Result};
pub use transform::{Extended, Level, Transform};
pub use truncate::{truncate, TruncatedNonlinearity};
pub use grid::{Geometry, Grid};
pub use nonlinearity::{IntegrabilityReport, Nonlinearity, NonlinearityKind, Regime};
pub use shooting::{ProfileSample, RadialSubsolution, ShootingSolution};
pub use bvp::{BvpSolution, FlatSet, InitialIterate, SolveOptions};
pub use thresholds::{Eigenpair, LambdaEstimate, ThresholdReport};
pub use diagnostics::{AsymptoticsPrediction, CaseTag, TouchingFit};
