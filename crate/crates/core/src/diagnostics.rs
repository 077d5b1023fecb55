//! Post-hoc analyses of computed solutions: behaviour at the touching
//! point, the defect measure carried by a plateau, the flux through its
//! edge, the energy bound and comparison in `λ`.
//!
//! The touching-point asymptotics are phrased with `k = 1/h` and its root
//! primitive `K(u) = ∫_0^u dt/√k(t) = ∫_0^u √h`. `k` is *not* the reaction
//! term `g` of the transformed problem.

use alloc::vec::Vec;

use crate::bvp::BvpSolution;
use crate::error::{Error, Result};
use crate::math::{ceil, sqrt};
use crate::nonlinearity::{Nonlinearity, NonlinearityKind};
use crate::shooting::ShootingSolution;
use crate::transform::Transform;

/// `k(s) = 1/h(s)`.
pub fn coefficient_reciprocal(nl: &Nonlinearity, s: f64) -> f64 {
    1.0 / nl.h(s)
}

/// `K(σ) − K(σ − y) = ∫_{σ−y}^{σ} √h`, finite iff `√h` is integrable.
pub fn root_primitive_deficit_gap(nl: &Nonlinearity, y: f64) -> f64 {
    nl.root_h_tail_gap(y)
}

/// How `k = 1/h` leaves `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseTag {
    /// `k′(σ⁻) = −∞` (`γ < 1`).
    I,
    /// `k′(σ⁻)` finite and negative (`γ = 1`).
    II,
    /// `k′(σ⁻) = 0` (`1 < γ < 2`).
    III,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticsPrediction {
    pub case_tag: CaseTag,
    /// `u″(0)` for the touching solution (`0` in case III).
    pub predicted_u_second_deriv_at_0: f64,
    /// Slope of `K(u(r))` at the touching point, `−√(Λ f(0))` (case III).
    pub predicted_root_primitive_slope: Option<f64>,
}

/// Predicted behaviour of the touching solution at `r = 0` for `h = A/(σ−s)^γ`.
#[allow(non_snake_case)]
pub fn curvature_asymptotics(nl: &Nonlinearity, Lambda: f64, f0: f64, dim: u32) -> Result<AsymptoticsPrediction> {
    let (a, gamma) = match nl.kind() {
        NonlinearityKind::ModelPower { a, gamma } => (*a, *gamma),
        _ => return Err(Error::inapplicable("the touching-point trichotomy is classified for the power model only")),
    };
    if !(Lambda > 0.0) || !(f0 > 0.0) || dim == 0 {
        return Err(Error::invalid("Lambda and f(0) must be positive and N at least 1"));
    }
    if gamma >= 2.0 {
        return Err(Error::inapplicable("no touching solution: 1/sqrt(k) is not integrable for gamma >= 2"));
    }
    let n = dim as f64;
    let load = Lambda * f0;
    Ok(if gamma < 1.0 {
        AsymptoticsPrediction {
            case_tag: CaseTag::I,
            predicted_u_second_deriv_at_0: -load / n,
            predicted_root_primitive_slope: None,
        }
    } else if gamma == 1.0 {
        // k(s) = (σ − s)/A, so k′(σ) = −1/A.
        let k_prime = -1.0 / a;
        AsymptoticsPrediction {
            case_tag: CaseTag::II,
            predicted_u_second_deriv_at_0: -load / (n - 2.0 / k_prime),
            predicted_root_primitive_slope: None,
        }
    } else {
        AsymptoticsPrediction {
            case_tag: CaseTag::III,
            predicted_u_second_deriv_at_0: 0.0,
            predicted_root_primitive_slope: Some(-sqrt(load)),
        }
    })
}

/// Least-squares fits near the touching point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouchingFit {
    /// `u″(0)` from a quadratic fit of `u`.
    pub u_second_deriv: f64,
    /// Slope in `r` of a linear fit of `K(u(r))`; `None` when `√h` is not
    /// integrable.
    pub root_primitive_slope: Option<f64>,
    pub window_nodes: usize,
}

/// Solve the normal equations of a polynomial least-squares fit of degree
/// `deg ≤ 2`; coefficients from the constant term up.
fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Result<[f64; 3]> {
    let p = deg + 1;
    let mut m = [[0.0_f64; 4]; 3];
    for (&xi, &yi) in x.iter().zip(y) {
        let pw = [1.0, xi, xi * xi];
        for r in 0..p {
            for c in 0..p {
                m[r][c] += pw[r] * pw[c];
            }
            m[r][3] += pw[r] * yi;
        }
    }
    for col in 0..p {
        let piv = (col..p)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        m.swap(col, piv);
        if m[col][col] == 0.0 {
            return Err(Error::invalid("degenerate least-squares window"));
        }
        for r in 0..p {
            if r != col {
                let q = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= q * m[col][c];
                }
            }
        }
    }
    let mut out = [0.0; 3];
    for r in 0..p {
        out[r] = m[r][3] / m[r][r];
    }
    Ok(out)
}

/// Fraction of the profile used for the fits, and their minimum size.
const FIT_FRACTION: f64 = 0.05;
const FIT_MIN_NODES: usize = 8;

/// Fit a radial profile given as distances `r ≥ 0` and gaps `σ − u`.
pub fn fit_touching_profile(t: &Transform, r: &[f64], gap: &[f64]) -> Result<TouchingFit> {
    if r.len() != gap.len() || r.len() < FIT_MIN_NODES {
        return Err(Error::invalid("profile too short for the touching-point fit"));
    }
    let mut idx: Vec<usize> = (0..r.len()).collect();
    idx.sort_by(|&a, &b| r[a].total_cmp(&r[b]));
    let take = (ceil(FIT_FRACTION * r.len() as f64) as usize).max(FIT_MIN_NODES);
    let idx = &idx[..take];
    let x: Vec<f64> = idx.iter().map(|&i| r[i]).collect();
    // u − σ = −gap as a quadratic in the distance r.
    let u_shift: Vec<f64> = idx.iter().map(|&i| -gap[i]).collect();
    let quad = polyfit(&x, &u_shift, 2)?;
    let nl = t.source();
    let root_primitive_slope = if t.integrability().sqrt_h_integrable {
        let k: Vec<f64> = idx.iter().map(|&i| -root_primitive_deficit_gap(nl, gap[i])).collect();
        Some(polyfit(&x, &k, 1)?[1])
    } else {
        None
    };
    Ok(TouchingFit {
        u_second_deriv: 2.0 * quad[2],
        root_primitive_slope,
        window_nodes: take,
    })
}

/// Fit the discrete solution around the grid centre. Requires
/// `v(centre) ≥ (1 − 10⁻³) L`.
pub fn fit_touching_behavior(sol: &BvpSolution, t: &Transform) -> Result<TouchingFit> {
    let l = t.ceiling();
    let c = sol.grid.center();
    if sol.v[c] < l - 1e-3 * l {
        return Err(Error::inapplicable("the solution does not come near the ceiling at the centre"));
    }
    let r: Vec<f64> = (0..sol.grid.len()).map(|i| sol.grid.distance(i)).collect();
    fit_touching_profile(t, &r, &sol.u_gap)
}

/// Fit the shooting profile of the touching solution, sampled uniformly on
/// `[0, R_L]`. In case III `L − v` falls below `f64` resolution long
/// before the fit window ends, so the profile in the exact gap variable is
/// the only usable source for the slope of `K(u(r))`.
pub fn fit_touching_shooting(t: &Transform, profile: &ShootingSolution, samples: usize) -> Result<TouchingFit> {
    if samples < FIT_MIN_NODES * 20 {
        return Err(Error::invalid("too few samples for the touching-point fit"));
    }
    let end = profile.zero_crossing();
    let r: Vec<f64> = (0..samples).map(|i| end * i as f64 / (samples - 1) as f64).collect();
    let gap: Vec<f64> = r.iter().map(|&x| profile.sample_at(t, x).gap).collect();
    fit_touching_profile(t, &r, &gap)
}

/// One-sided derivative of `u` at the plateau edges, from the non-flat
/// side; the larger magnitude of the two edges (one for the ball).
pub fn plateau_flux(sol: &BvpSolution) -> Result<f64> {
    let fs = sol
        .flat_set
        .ok_or_else(|| Error::inapplicable("no flat set"))?;
    if fs.len() < 2 {
        return Err(Error::inapplicable("the flat set has empty interior (single touching node)"));
    }
    let n = sol.grid.len();
    let h = sol.grid.step();
    let mut flux: Option<f64> = None;
    if fs.last + 1 < n {
        flux = Some(((sol.u[fs.last + 1] - sol.u[fs.last]) / h).abs());
    }
    if fs.first > 0 && sol.grid.nodes()[0] < 0.0 {
        let left = ((sol.u[fs.first] - sol.u[fs.first - 1]) / h).abs();
        flux = Some(flux.map_or(left, |x: f64| x.max(left)));
    }
    flux.ok_or_else(|| Error::inapplicable("the flat set has no complement"))
}

/// Nodewise density of the defect measure `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectMeasure {
    /// `λ f` on flat-interior nodes, `h(u)|D_h u|²` off the flat set and
    /// the discrete defect `λ f − (−Δ_h u)` on flat edge nodes; zero on
    /// the boundary.
    pub density: Vec<f64>,
    /// `Σ ν_i w_i` over the unknowns.
    pub total_mass: f64,
}

pub fn defect_measure(t: &Transform, sol: &BvpSolution, lambda: f64, f: &[f64]) -> Result<DefectMeasure> {
    let grid = &sol.grid;
    if f.len() != grid.len() {
        return Err(Error::invalid("f must have one value per grid node"));
    }
    let nl = t.source();
    let mut density = alloc::vec![0.0; grid.len()];
    for i in grid.interior() {
        density[i] = if sol.is_flat_interior(i) {
            lambda * f[i]
        } else if sol.is_flat(i) {
            lambda * f[i] - grid.neg_laplacian_at(&sol.u, i)
        } else {
            let du = grid.gradient_at(&sol.u, i);
            if du == 0.0 {
                0.0
            } else {
                nl.h_gap(sol.u_gap[i]) * du * du
            }
        };
    }
    let w = grid.weights();
    let total_mass = grid.interior().map(|i| w[i] * density[i]).sum();
    Ok(DefectMeasure { density, total_mass })
}

/// `Σ h_n(u)|D_h u|² w` against `Σ λ f w`. Nodes whose stencil touches the
/// saturated set `v ≥ ψ(σ_n)` are left out of the left side: there `u_n`
/// varies on the scale `1/n`, far below the mesh, and the nodal gradient
/// is meaningless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBound {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// `lhs ≤ (1 + 10⁻²) rhs`.
    pub holds: bool,
}

pub fn energy_bound_check(t: &Transform, sol: &BvpSolution, lambda: f64, f: &[f64]) -> Result<EnergyBound> {
    let grid = &sol.grid;
    if f.len() != grid.len() {
        return Err(Error::invalid("f must have one value per grid node"));
    }
    let w = grid.weights();
    let tr = &sol.truncation;
    let top = tr.psi_n();
    let n = grid.len();
    let resolved = |i: usize| sol.v[i.saturating_sub(1)..(i + 2).min(n)].iter().all(|&v| v < top);
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..n {
        let du = grid.gradient_at(&sol.u, i);
        if du != 0.0 && resolved(i) {
            lhs += w[i] * tr.h_n(t, sol.u[i]) * du * du;
        }
        rhs += w[i] * lambda * f[i];
    }
    Ok(EnergyBound {
        lhs,
        rhs,
        margin: rhs - lhs,
        holds: lhs <= 1.01 * rhs,
    })
}

/// `u_a ≤ u_b + 10⁻⁸` nodewise, for `λ_a ≤ λ_b` on the same grid.
pub fn comparison_check(a: &BvpSolution, b: &BvpSolution) -> Result<bool> {
    if a.grid != b.grid {
        return Err(Error::precondition("solutions live on different grids"));
    }
    if a.lambda > b.lambda {
        return Err(Error::precondition("the first solution must have the smaller lambda"));
    }
    Ok(a.u.iter().zip(&b.u).all(|(x, y)| *x <= y + 1e-8))
}
