//! Existence and nonexistence thresholds in `λ`.
//!
//! * `λ₁(f)`, the principal eigenvalue of `−Δ_h φ = λ f φ`;
//! * the nonexistence bound `λ₁(f) e^{H(σ)} ψ(σ)` (needs `h ∈ L¹`);
//! * the linear-comparison lower bound `σ / ‖z‖_∞` with `−Δ_h z = f`;
//! * a bisection estimate of the extremal parameter `Λ_f` on the predicate
//!   "the discrete solution has a flat set".

use alloc::vec::Vec;

use crate::bvp::{linear_solve, solve_semilinear, SolveOptions};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::Tridiagonal;
use crate::nonlinearity::Regime;
use crate::shooting::radial_subsolution;
use crate::transform::{Extended, Transform};

fn check_weight(f: &[f64], grid: &Grid) -> Result<()> {
    if f.len() != grid.len() {
        return Err(Error::invalid("f must have one value per grid node"));
    }
    if f.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::precondition("f must be nonnegative and finite"));
    }
    if grid.interior().all(|i| f[i] == 0.0) {
        return Err(Error::precondition("f vanishes at every unknown"));
    }
    Ok(())
}

/// `(a, b)` in the inner product weighted by the control volumes, over the
/// unknowns.
fn dot(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w.iter().zip(a).zip(b).map(|((w, a), b)| w * a * b).sum()
}

/// Principal eigenpair of `−Δ_h φ = λ f φ` by inverse iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub lambda1: f64,
    /// Eigenfunction at every node, zero on the boundary, maximum 1.
    pub phi: Vec<f64>,
    pub iterations: usize,
}

impl Eigenpair {
    /// Discrete Rayleigh quotient `(−Δ_h u, u)_w / (f u, u)_w`.
    pub fn rayleigh_quotient(grid: &Grid, f: &[f64], u: &[f64]) -> f64 {
        let w = grid.weights();
        let lap = grid.neg_laplacian(u);
        let num: f64 = grid.interior().map(|i| w[i] * lap[i] * u[i]).sum();
        let den: f64 = grid.interior().map(|i| w[i] * f[i] * u[i] * u[i]).sum();
        num / den
    }
}

pub fn principal_eigenvalue(f: &[f64], grid: &Grid) -> Result<Eigenpair> {
    check_weight(f, grid)?;
    let a = Tridiagonal::neg_laplacian(grid);
    let range = grid.interior();
    let w: Vec<f64> = grid.weights()[range.clone()].to_vec();
    let fi: Vec<f64> = f[range.clone()].to_vec();
    // A positive start has a component along the positive eigenvector.
    let rhs: Vec<f64> = fi.clone();
    let mut phi = a.solve(&rhs)?;
    let mut lambda = f64::NAN;
    const MAX_ITER: usize = 10_000;
    for iter in 1..=MAX_ITER {
        let fphi: Vec<f64> = fi.iter().zip(&phi).map(|(f, p)| f * p).collect();
        let next = a.solve(&fphi)?;
        // Rayleigh quotient of the pencil: (A y, y)/(F y, y) with A y = F φ.
        let fnext: Vec<f64> = fi.iter().zip(&next).map(|(f, p)| f * p).collect();
        let quotient = dot(&w, &fphi, &next) / dot(&w, &fnext, &next);
        let norm = next.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        phi = next.iter().map(|x| x / norm).collect();
        let converged = (quotient - lambda).abs() <= 1e-13 * quotient;
        lambda = quotient;
        if converged {
            let mut full = alloc::vec![0.0; grid.len()];
            full[range].copy_from_slice(&phi);
            return Ok(Eigenpair { lambda1: lambda, phi: full, iterations: iter });
        }
    }
    Err(Error::no_convergence("inverse power iteration", MAX_ITER, lambda, phi))
}

/// `λ₁(f) e^{H(σ)} ψ(σ)`: no solution exists for `λ` above it.
pub fn nonexistence_bound(t: &Transform, f: &[f64], grid: &Grid) -> Result<f64> {
    if !t.integrability().h_integrable {
        return Err(Error::inapplicable(
            "the nonexistence bound needs h integrable on (0, sigma)",
        ));
    }
    let eig = principal_eigenvalue(f, grid)?;
    let h_sigma = t.source().big_h_gap(0.0);
    Ok(eig.lambda1 * crate::math::exp(h_sigma) * t.ceiling())
}

/// `σ / ‖z‖_∞` with `−Δ_h z = f`: below it `‖u‖_∞ ≤ λ ‖z‖_∞ < σ` by
/// comparison with the linear problem, so a solution exists.
pub fn existence_lower_bound(f: &[f64], grid: &Grid, sigma: f64) -> Result<f64> {
    check_weight(f, grid)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma must be positive"));
    }
    let z = linear_solve(grid, f)?;
    let top = z.iter().fold(0.0_f64, |m, x| m.max(*x));
    Ok(sigma / top)
}

/// Result of the bisection for `Λ_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    /// Midpoint of the final bracket.
    pub value: f64,
    /// Largest `λ` seen without a flat set.
    pub lower: f64,
    /// Smallest `λ` seen with a flat set (the touching case counts as flat).
    pub upper: f64,
    pub solves: usize,
}

impl LambdaEstimate {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Largest number of doublings (or halvings) of the bracket ends.
const MAX_EXPANSIONS: u32 = 10;

/// Bisection for `Λ_f` on the predicate "the solve has a flat set",
/// starting from `bracket` and expanding it (doubling the top, halving the
/// bottom, at most 2¹⁰ times each) until it brackets the switch. Stops once
/// the bracket is narrower than `tol_lambda` (absolute).
pub fn estimate_lambda(
    t: &Transform,
    f: &[f64],
    grid: &Grid,
    bracket: (f64, f64),
    tol_lambda: f64,
    opts: &SolveOptions,
) -> Result<LambdaEstimate> {
    if t.integrability().regime() == Regime::AlwaysExists {
        return Err(Error::inapplicable(
            "sqrt(h) is not integrable near sigma: solutions exist for every lambda",
        ));
    }
    check_weight(f, grid)?;
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid("lambda bracket must satisfy 0 < lo < hi"));
    }
    if !(tol_lambda > 0.0) {
        return Err(Error::invalid("tol_lambda must be positive"));
    }
    // (λ, flat nodes) for every solve, to guard monotonicity.
    let mut seen: Vec<(f64, usize)> = Vec::new();
    let flat_at = |lambda: f64, seen: &mut Vec<(f64, usize)>| -> Result<bool> {
        let sol = solve_semilinear(t, lambda, f, grid, opts)?;
        let width = sol.flat_set.map_or(0, |fs| fs.len());
        seen.push((lambda, width));
        Ok(width > 0)
    };
    let top = hi;
    let mut k = 0;
    while !flat_at(hi, &mut seen)? {
        k += 1;
        if k > MAX_EXPANSIONS {
            return Err(Error::no_convergence(
                "lambda bracket expansion (no flat set at the top)",
                k as usize,
                hi,
                Vec::new(),
            ));
        }
        lo = lo.max(hi);
        hi = top * (1u64 << k) as f64;
    }
    let bottom = lo;
    let mut k = 0;
    while flat_at(lo, &mut seen)? {
        k += 1;
        if k > MAX_EXPANSIONS {
            return Err(Error::no_convergence(
                "lambda bracket expansion (flat set at the bottom)",
                k as usize,
                lo,
                Vec::new(),
            ));
        }
        hi = hi.min(lo);
        lo = bottom / (1u64 << k) as f64;
    }
    while hi - lo > tol_lambda {
        let mid = 0.5 * (lo + hi);
        if flat_at(mid, &mut seen)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    seen.sort_by(|a, b| a.0.total_cmp(&b.0));
    if seen.windows(2).any(|p| p[1].1 < p[0].1) {
        return Err(Error::no_convergence(
            "lambda bisection (flat set does not grow with lambda)",
            seen.len(),
            hi - lo,
            seen.iter().map(|s| s.0).collect(),
        ));
    }
    Ok(LambdaEstimate {
        value: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        solves: seen.len(),
    })
}

/// Everything known about the thresholds for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    pub lambda1: f64,
    /// `H(σ)`, infinite unless `h` is integrable.
    pub h_sigma: Extended,
    /// `ψ(σ) = L`.
    pub psi_sigma: f64,
    pub lambda_ne_upper: Option<f64>,
    /// From the flat radial subsolution, scaled by `1 / min f`; absent when
    /// `f` vanishes somewhere or the critical radius is infinite.
    pub lambda_sub_certificate: Option<f64>,
    pub lambda_lower_linear: f64,
    pub lambda_hat: Option<LambdaEstimate>,
    pub regime: Regime,
}

/// Assemble a [`ThresholdReport`]; the bisection starts from
/// `[λ_lower, 2 λ_lower]`.
pub fn threshold_report(
    t: &Transform,
    f: &[f64],
    grid: &Grid,
    tol_lambda: f64,
    opts: &SolveOptions,
) -> Result<ThresholdReport> {
    let eig = principal_eigenvalue(f, grid)?;
    let regime = t.integrability().regime();
    let h_sigma = Extended::from_f64(t.source().big_h_gap(0.0));
    let lambda_ne_upper = if t.integrability().h_integrable {
        Some(nonexistence_bound(t, f, grid)?)
    } else {
        None
    };
    let f_min = grid.interior().map(|i| f[i]).fold(f64::INFINITY, f64::min);
    let lambda_sub_certificate = if regime == Regime::FiniteThreshold && f_min > 0.0 {
        match radial_subsolution(t, grid.dim(), grid.radius()) {
            Ok(sub) => Some(sub.lambda_sub / f_min),
            Err(Error::Inapplicable(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let lambda_lower_linear = existence_lower_bound(f, grid, t.sigma())?;
    let lambda_hat = if regime == Regime::FiniteThreshold {
        Some(estimate_lambda(
            t,
            f,
            grid,
            (lambda_lower_linear, 2.0 * lambda_lower_linear),
            tol_lambda,
            opts,
        )?)
    } else {
        None
    };
    Ok(ThresholdReport {
        lambda1: eig.lambda1,
        h_sigma,
        psi_sigma: t.ceiling(),
        lambda_ne_upper,
        lambda_sub_certificate,
        lambda_lower_linear,
        lambda_hat,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;
    use core::f64::consts::PI;

    fn model(gamma: f64) -> Transform {
        Transform::new(Nonlinearity::model_power(1.0, gamma, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn eigenvalue_anchors() {
        let g = Grid::interval(1.0, 2001).unwrap();
        let e = principal_eigenvalue(&alloc::vec![1.0; 2001], &g).unwrap();
        assert!((e.lambda1 / (PI * PI / 4.0) - 1.0).abs() < 1e-6, "{}", e.lambda1);
        assert!(g.interior().all(|i| e.phi[i] > 0.0));
        let b = Grid::ball(3, 1.0, 2001).unwrap();
        let e = principal_eigenvalue(&alloc::vec![1.0; 2001], &b).unwrap();
        assert!((e.lambda1 / (PI * PI) - 1.0).abs() < 1e-6, "{}", e.lambda1);
    }

    #[test]
    fn eigenvalue_scaling_and_rayleigh() {
        let g = Grid::interval(1.0, 201).unwrap();
        let f: Vec<f64> = g.sample(|s| 1.0 + 0.5 * s);
        let e = principal_eigenvalue(&f, &g).unwrap();
        let f3: Vec<f64> = f.iter().map(|x| 3.0 * x).collect();
        let e3 = principal_eigenvalue(&f3, &g).unwrap();
        assert!((e3.lambda1 - e.lambda1 / 3.0).abs() < 1e-10 * e.lambda1);
        let q = Eigenpair::rayleigh_quotient(&g, &f, &e.phi);
        assert!((q - e.lambda1).abs() < 1e-9 * e.lambda1);
        assert!(principal_eigenvalue(&alloc::vec![0.0; 201], &g).is_err());
    }

    #[test]
    fn nonexistence_bound_closed_form() {
        let t = model(0.5);
        let g = Grid::interval(1.0, 2001).unwrap();
        let f = alloc::vec![1.0; 2001];
        let b = nonexistence_bound(&t, &f, &g).unwrap();
        let lambda1 = principal_eigenvalue(&f, &g).unwrap().lambda1;
        let exact = lambda1 / 2.0 * (crate::math::exp(2.0) + 1.0);
        assert!((b - exact).abs() < 1e-12 * exact, "{b} {exact}");
        let expected = PI * PI / 8.0 * (crate::math::exp(2.0) + 1.0);
        assert!((b / expected - 1.0).abs() < 1e-6);
        assert!(matches!(nonexistence_bound(&model(1.0), &f, &g), Err(Error::Inapplicable(_))));
    }

    #[test]
    fn linear_lower_bounds() {
        let g = Grid::interval(1.0, 401).unwrap();
        let f = alloc::vec![1.0; 401];
        assert!((existence_lower_bound(&f, &g, 1.0).unwrap() - 2.0).abs() < 1e-10);
        assert!((existence_lower_bound(&f, &g, 2.0).unwrap() - 4.0).abs() < 1e-10);
        let b = Grid::ball(3, 1.0, 401).unwrap();
        assert!((existence_lower_bound(&f, &b, 1.0).unwrap() - 6.0).abs() < 1e-10);
    }

    #[test]
    fn extremal_parameter() {
        let t = model(1.0);
        let opts = SolveOptions::default();
        for (r, expected) in [(1.0, 6.0), (2.0, 1.5)] {
            let g = Grid::interval(r, 2001).unwrap();
            let f = alloc::vec![1.0; 2001];
            let est = estimate_lambda(&t, &f, &g, (1.0, 2.0), 1e-3, &opts).unwrap();
            assert!((est.value - expected).abs() < 0.01, "R {r}: {est:?}");
            assert!(est.width() <= 1e-3);
        }
        assert!(estimate_lambda(&model(2.0), &alloc::vec![1.0; 101], &Grid::interval(1.0, 101).unwrap(), (1.0, 2.0), 1e-2, &opts).is_err());
    }

    #[test]
    fn ordering_for_integrable_h() {
        let t = model(0.5);
        let g = Grid::interval(1.0, 401).unwrap();
        let f = alloc::vec![1.0; 401];
        let rep = threshold_report(&t, &f, &g, 1e-3, &SolveOptions::default()).unwrap();
        let hat = rep.lambda_hat.unwrap();
        assert!(rep.lambda_lower_linear <= hat.value + 1e-3);
        assert!(hat.value <= rep.lambda_ne_upper.unwrap() + 1e-3);
        assert!(hat.value <= rep.lambda_sub_certificate.unwrap() + 1e-3);
        assert_eq!(rep.h_sigma, Extended::Finite(2.0));
        let none = threshold_report(&model(2.0), &f, &g, 1e-2, &SolveOptions::default()).unwrap();
        assert!(none.lambda_hat.is_none());
        assert_eq!(none.regime, Regime::AlwaysExists);
    }
}
