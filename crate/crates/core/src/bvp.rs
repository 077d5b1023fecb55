//! Finite-difference solves of `−Δv = λ f g(v)` on an interval or a ball.
//!
//! `g` is not Lipschitz at the ceiling, so the problem is solved for a
//! schedule of truncations `g_n` (increasing `n`), each by damped Newton on
//! the tridiagonal system and warm-started from the previous level. The
//! discrete solutions decrease in `n` towards the solution for `g`; the
//! quasilinear solution is recovered as `u = ψ⁻¹(min(v, L))`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};
use crate::linalg::Tridiagonal;
use crate::transform::Transform;
use crate::truncate::{truncate, TruncatedNonlinearity};

/// Where Newton starts on the first truncation level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialIterate {
    /// Solution of `−Δ_h z = λ f`, a discrete supersolution since `g ≤ 1`.
    LinearSupersolution,
    /// `v ≡ 0`, a subsolution.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Increasing truncation levels.
    pub n_schedule: Vec<f64>,
    /// Stop the schedule once successive levels differ by less than this
    /// (sup norm).
    pub tol: f64,
    pub initial: InitialIterate,
    /// Consecutive step rejections tolerated within one Newton step.
    pub max_rejections: usize,
    pub max_newton: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            n_schedule: alloc::vec![1e2, 1e3, 1e4, 1e5, 1e6, 1e7],
            tol: 1e-8,
            initial: InitialIterate::LinearSupersolution,
            max_rejections: 50,
            max_newton: 200,
        }
    }
}

/// Inclusive index range `first..=last` of flat nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatSet {
    pub first: usize,
    pub last: usize,
}

impl FlatSet {
    pub fn contains(&self, i: usize) -> bool {
        self.first <= i && i <= self.last
    }

    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A discrete solution pair `(v, u)` with solver telemetry.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub grid: Grid,
    pub lambda: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// `σ − u`, kept separately for full precision near the blow-up level.
    pub u_gap: Vec<f64>,
    pub flat_set: Option<FlatSet>,
    /// Nodes where the truncation is active (`u ≥ σ_n`), whether or not the
    /// flat set is reported.
    pub saturated_nodes: usize,
    pub n_schedule_used: Vec<f64>,
    pub newton_iterations: Vec<usize>,
    /// `‖−Δ_h v − λ f g_n(v)‖_∞` at the final level.
    pub residual_inf: f64,
    /// `‖v_n − v_{n_prev}‖_∞` between the last two levels (`∞` if only one).
    pub level_change: f64,
    /// The truncation of the final level.
    pub truncation: TruncatedNonlinearity,
}

fn check_inputs(lambda: f64, f: &[f64], grid: &Grid) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("lambda must be positive and finite"));
    }
    if f.len() != grid.len() {
        return Err(Error::invalid("f must have one value per grid node"));
    }
    if let Some(x) = f.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::precondition(alloc::format!("f must be nonnegative and finite (found {x})")));
    }
    Ok(())
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::invalid("the truncation schedule is empty"));
    }
    if schedule.iter().any(|n| !(*n > 0.0) || !n.is_finite()) {
        return Err(Error::invalid("truncation levels must be positive"));
    }
    if schedule.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("the truncation schedule must be increasing"));
    }
    Ok(())
}

fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, y| m.max(y.abs()))
}

/// Solution of `−Δ_h z = rhs` with `z = 0` on the boundary (all nodes).
pub(crate) fn linear_solve(grid: &Grid, rhs: &[f64]) -> Result<Vec<f64>> {
    let a = Tridiagonal::neg_laplacian(grid);
    let range = grid.interior();
    let z = a.solve(&rhs[range.clone()])?;
    let mut out = alloc::vec![0.0; grid.len()];
    out[range].copy_from_slice(&z);
    Ok(out)
}

/// Residual `−Δ_h v − λ f g_n(v)` over the unknowns.
fn semilinear_residual(
    t: &Transform,
    tr: &TruncatedNonlinearity,
    lambda: f64,
    f: &[f64],
    grid: &Grid,
    v: &[f64],
) -> Vec<f64> {
    grid.interior()
        .map(|i| grid.neg_laplacian_at(v, i) - lambda * f[i] * tr.g_n(t, v[i]))
        .collect()
}

/// Typical size of the terms in the residual, for a round-off floor.
fn residual_scale(grid: &Grid, lambda: f64, f: &[f64], v: &[f64]) -> f64 {
    let mut scale = lambda * sup_norm(f);
    for i in grid.interior() {
        let st = grid.stencil(i);
        let lower = if i == 0 { 0.0 } else { st.lower * v[i - 1] };
        scale = scale.max(lower.abs() + (st.diag * v[i]).abs() + (st.upper * v[i + 1]).abs());
    }
    scale
}

/// Damped Newton for one truncation level; `v` holds all nodes and is
/// updated in place. Returns the iteration count and final residual.
#[allow(clippy::too_many_arguments)]
fn newton_level(
    t: &Transform,
    tr: &TruncatedNonlinearity,
    lambda: f64,
    f: &[f64],
    grid: &Grid,
    v: &mut [f64],
    opts: &SolveOptions,
) -> Result<(usize, f64)> {
    let base = Tridiagonal::neg_laplacian(grid);
    let range = grid.interior();
    let top = tr.ceiling_n();
    for x in v.iter_mut() {
        *x = x.clamp(0.0, top);
    }
    let mut res = semilinear_residual(t, tr, lambda, f, grid, v);
    let mut norm = sup_norm(&res);
    for iter in 0..opts.max_newton {
        // Rounding v by one ulp moves λ f g_n(v) by λ f |g_n′| ulp(v), which
        // dominates the Laplacian terms on the steep ramp below L_n.
        let mut jac = base.clone();
        let mut ramp: f64 = 0.0;
        for (k, i) in range.clone().enumerate() {
            // At the clamp L_n itself take the ramp side of the kink;
            // otherwise clamped nodes get no restoring force.
            let d = if v[i] >= top { -tr.n() } else { tr.g_n_prime(t, v[i]) };
            let slope = lambda * f[i] * d;
            jac.diag[k] -= slope;
            ramp = ramp.max((slope * v[i]).abs());
        }
        let floor = 64.0 * f64::EPSILON * residual_scale(grid, lambda, f, v).max(ramp);
        if norm <= floor {
            return Ok((iter, norm));
        }
        let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        let step = jac.solve(&rhs)?;
        if sup_norm(&step) <= 4.0 * f64::EPSILON * sup_norm(v).max(f64::MIN_POSITIVE) {
            return Ok((iter, norm));
        }
        let mut alpha = 1.0;
        let mut rejections = 0;
        loop {
            let mut trial = v.to_vec();
            for (k, i) in range.clone().enumerate() {
                trial[i] = (v[i] + alpha * step[k]).clamp(0.0, top);
            }
            let trial_res = semilinear_residual(t, tr, lambda, f, grid, &trial);
            let trial_norm = sup_norm(&trial_res);
            // Below L_n the residual map is convex, so a full step taken from
            // a supersolution lands on another, smaller supersolution even
            // when the residual grows; those steps are accepted outright.
            let monotone = alpha == 1.0
                && trial_res.iter().all(|r| *r >= -floor)
                && res.iter().all(|r| *r >= -floor)
                && range.clone().all(|i| trial[i] <= v[i])
                && range.clone().any(|i| trial[i] < v[i]);
            if monotone || trial_norm <= (1.0 - 1e-4 * alpha) * norm {
                v.copy_from_slice(&trial);
                res = trial_res;
                norm = trial_norm;
                break;
            }
            rejections += 1;
            if rejections >= opts.max_rejections {
                return Err(Error::no_convergence("semilinear Newton", iter + 1, norm, v.to_vec()));
            }
            alpha *= 0.5;
        }
    }
    Err(Error::no_convergence("semilinear Newton", opts.max_newton, norm, v.to_vec()))
}

/// Solve `−Δ_h v = λ f g_n(v)` along the truncation schedule, then map back
/// and detect the flat set.
pub fn solve_semilinear(
    t: &Transform,
    lambda: f64,
    f: &[f64],
    grid: &Grid,
    opts: &SolveOptions,
) -> Result<BvpSolution> {
    check_inputs(lambda, f, grid)?;
    check_schedule(&opts.n_schedule)?;
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let mut v = match opts.initial {
        InitialIterate::LinearSupersolution => {
            let rhs: Vec<f64> = f.iter().map(|x| lambda * x).collect();
            linear_solve(grid, &rhs)?
        }
        InitialIterate::Zero => alloc::vec![0.0; grid.len()],
    };
    let mut used = Vec::new();
    let mut iterations = Vec::new();
    let mut level_change = f64::INFINITY;
    let mut residual = 0.0;
    let mut last_tr = None;
    let mut prev_mask: Option<Vec<bool>> = None;
    for &n in &opts.n_schedule {
        let tr = truncate(t, n)?;
        let prev = v.clone();
        let (its, r) = newton_level(t, &tr, lambda, f, grid, &mut v, opts)?;
        used.push(n);
        iterations.push(its);
        residual = r;
        let mask = saturation_mask(&tr, grid, &v);
        let first = last_tr.is_none();
        last_tr = Some(tr);
        if !first {
            level_change = v.iter().zip(&prev).fold(0.0, |m, (a, b)| m.max((a - b).abs()));
            // v barely moves between levels near the ceiling, so the set
            // where the truncation is active must have settled as well.
            if level_change < opts.tol && prev_mask.as_ref() == Some(&mask) {
                break;
            }
        }
        prev_mask = Some(mask);
    }
    let mut sol = BvpSolution {
        grid: grid.clone(),
        lambda,
        u: Vec::new(),
        u_gap: Vec::new(),
        v,
        flat_set: None,
        saturated_nodes: 0,
        n_schedule_used: used,
        newton_iterations: iterations,
        residual_inf: residual,
        level_change,
        truncation: last_tr.expect("schedule is nonempty"),
    };
    back_map(t, &mut sol);
    Ok(sol)
}

/// Interior nodes with `v ≥ ψ(σ_n)`.
fn saturation_mask(tr: &TruncatedNonlinearity, grid: &Grid, v: &[f64]) -> Vec<bool> {
    let psi_n = tr.psi_n();
    v.iter()
        .enumerate()
        .map(|(i, &x)| x >= psi_n && !tr.is_degenerate() && !grid.is_boundary(i))
        .collect()
}

/// Recompute `u = ψ⁻¹(min(v, L))` and the flat set from `v`.
///
/// A node is saturated when `v ≥ ψ(σ_n)`, i.e. `u ≥ σ_n`: there the
/// truncation is active and the discrete solution sits in the plateau of
/// `v_n`. The flat set is the maximal run of saturated nodes around the
/// centre; it is reported only when `√h` is integrable, since otherwise no
/// solution of the limit problem has a plateau.
pub fn back_map(t: &Transform, sol: &mut BvpSolution) {
    let l = t.ceiling();
    let sigma = t.sigma();
    sol.u_gap = sol.v.iter().map(|&x| t.level(x.min(l)).gap).collect();
    sol.u = sol.u_gap.iter().map(|&y| sigma - y).collect();
    let saturated = saturation_mask(&sol.truncation, &sol.grid, &sol.v);
    sol.saturated_nodes = saturated.iter().filter(|s| **s).count();
    sol.flat_set = None;
    if !t.integrability().sqrt_h_integrable || sol.truncation.is_degenerate() {
        return;
    }
    let c = sol.grid.center();
    if !saturated[c] {
        return;
    }
    let mut first = c;
    while first > 0 && saturated[first - 1] {
        first -= 1;
    }
    let mut last = c;
    while last + 1 < saturated.len() && saturated[last + 1] {
        last += 1;
    }
    sol.flat_set = Some(FlatSet { first, last });
}

impl BvpSolution {
    pub fn is_flat(&self, i: usize) -> bool {
        self.flat_set.is_some_and(|fs| fs.contains(i))
    }

    /// Largest distance from the centre of a flat node.
    pub fn flat_radius(&self) -> Option<f64> {
        self.flat_set
            .map(|fs| self.grid.distance(fs.first).max(self.grid.distance(fs.last)))
    }

    /// Flat nodes whose stencil lies in the flat set.
    pub fn is_flat_interior(&self, i: usize) -> bool {
        match self.flat_set {
            None => false,
            Some(fs) => {
                let lo = if i == 0 && self.grid.geometry() != Geometry::Interval { 0 } else { i.wrapping_sub(1) };
                fs.contains(i) && fs.contains(lo) && fs.contains(i + 1)
            }
        }
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().fold(0.0, |m: f64, x| m.max(*x))
    }
}

/// Residual of the quasilinear equation for the back-mapped `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasilinearResidual {
    /// `‖−Δ_h u + h(u)|D_h u|² − λ f‖_∞` over non-flat interior nodes farther
    /// than the contact margin from the contact set.
    pub offplateau_residual_inf: f64,
    /// `λ f − (−Δ_h u)` on flat-interior nodes (`None` elsewhere).
    pub plateau_density: Vec<Option<f64>>,
}

/// Evaluate the quasilinear residual. Next to a contact point `h(u)` is
/// huge and `|D_h u|²` tiny (at a touching point the product is `∞·0`), so
/// nodes within `contact_margin` (distance) of the contact set are left out
/// of the off-plateau norm. The contact set is the flat set when there is
/// one and the node where `u` peaks otherwise.
pub fn quasilinear_residual(
    t: &Transform,
    sol: &BvpSolution,
    lambda: f64,
    f: &[f64],
    contact_margin: f64,
) -> Result<QuasilinearResidual> {
    check_inputs(lambda, f, &sol.grid)?;
    let grid = &sol.grid;
    let x = grid.nodes();
    let nl = t.source();
    let mut off: f64 = 0.0;
    let mut density = alloc::vec![None; grid.len()];
    let (lo, hi) = match sol.flat_set {
        Some(fs) => (x[fs.first], x[fs.last]),
        None => {
            let peak = (0..grid.len())
                .min_by(|&a, &b| sol.u_gap[a].total_cmp(&sol.u_gap[b]))
                .unwrap_or(0);
            (x[peak], x[peak])
        }
    };
    for i in grid.interior() {
        let lap = grid.neg_laplacian_at(&sol.u, i);
        if sol.is_flat_interior(i) {
            density[i] = Some(lambda * f[i] - lap);
            continue;
        }
        if sol.is_flat(i) || x[i] >= lo - contact_margin && x[i] <= hi + contact_margin {
            continue;
        }
        let du = grid.gradient_at(&sol.u, i);
        let r = lap + nl.h_gap(sol.u_gap[i]) * du * du - lambda * f[i];
        off = off.max(r.abs());
    }
    Ok(QuasilinearResidual {
        offplateau_residual_inf: off,
        plateau_density: density,
    })
}

/// Residual of `−Δ_h u + h_n(u)|D_h u|² − λ f` over the unknowns.
fn direct_residual(
    t: &Transform,
    tr: &TruncatedNonlinearity,
    lambda: f64,
    f: &[f64],
    grid: &Grid,
    u: &[f64],
) -> Vec<f64> {
    grid.interior()
        .map(|i| {
            let du = grid.gradient_at(u, i);
            grid.neg_laplacian_at(u, i) + tr.h_n(t, u[i]) * du * du - lambda * f[i]
        })
        .collect()
}

/// Newton for the quasilinear problem with the truncated `h_n`, directly in
/// `u` and independent of the transformation; `λ` is reached by
/// continuation from `λ/8`.
pub fn solve_quasilinear_direct(
    t: &Transform,
    lambda: f64,
    f: &[f64],
    grid: &Grid,
    n: f64,
    opts: &SolveOptions,
) -> Result<BvpSolution> {
    check_inputs(lambda, f, grid)?;
    let tr = truncate(t, n)?;
    let base = Tridiagonal::neg_laplacian(grid);
    let range = grid.interior();
    let h = grid.step();
    let mut u = alloc::vec![0.0; grid.len()];
    let mut total_iterations = 0;
    let mut norm = 0.0;
    for stage in [0.125, 0.25, 0.5, 1.0] {
        let lam = stage * lambda;
        let mut res = direct_residual(t, &tr, lam, f, grid, &u);
        norm = sup_norm(&res);
        let mut converged = false;
        for iter in 0..opts.max_newton {
            let floor = 64.0 * f64::EPSILON * residual_scale(grid, lam, f, &u).max(n * sup_norm(&u) / (h * h));
            if norm <= floor {
                converged = true;
                total_iterations += iter;
                break;
            }
            let mut jac = base.clone();
            let len = jac.len();
            for (k, i) in range.clone().enumerate() {
                let du = grid.gradient_at(&u, i);
                let hn = tr.h_n(t, u[i]);
                jac.diag[k] += tr.h_n_prime(t, u[i]) * du * du;
                // d(du)/du_{i±1} = ±1/(2h) for central differences
                let is_centre = i == 0 && grid.geometry() != Geometry::Interval;
                if !is_centre {
                    if k > 0 {
                        jac.lower[k] -= hn * du / h;
                    }
                    if k + 1 < len {
                        jac.upper[k] += hn * du / h;
                    }
                }
            }
            let rhs: Vec<f64> = res.iter().map(|r| -r).collect();
            let step = jac.solve(&rhs)?;
            if sup_norm(&step) <= 4.0 * f64::EPSILON * sup_norm(&u).max(f64::MIN_POSITIVE) {
                converged = true;
                total_iterations += iter;
                break;
            }
            let mut alpha = 1.0;
            let mut rejections = 0;
            loop {
                let mut trial = u.clone();
                for (k, i) in range.clone().enumerate() {
                    trial[i] = (u[i] + alpha * step[k]).max(0.0);
                }
                let trial_res = direct_residual(t, &tr, lam, f, grid, &trial);
                let trial_norm = sup_norm(&trial_res);
                if trial_norm <= (1.0 - 1e-4 * alpha) * norm {
                    u = trial;
                    res = trial_res;
                    norm = trial_norm;
                    break;
                }
                rejections += 1;
                if rejections >= opts.max_rejections {
                    return Err(Error::no_convergence("quasilinear Newton", total_iterations + iter + 1, norm, u));
                }
                alpha *= 0.5;
            }
        }
        if !converged {
            return Err(Error::no_convergence("quasilinear Newton", total_iterations, norm, u));
        }
    }
    let sigma = t.sigma();
    let v: Vec<f64> = u.iter().map(|&x| tr.psi_n_at(t, x)).collect();
    let mut sol = BvpSolution {
        grid: grid.clone(),
        lambda,
        u_gap: u.iter().map(|&x| (sigma - x).max(0.0)).collect(),
        u: u.iter().map(|&x| x.min(sigma)).collect(),
        v,
        flat_set: None,
        saturated_nodes: 0,
        n_schedule_used: alloc::vec![n],
        newton_iterations: alloc::vec![total_iterations],
        residual_inf: norm,
        level_change: f64::INFINITY,
        truncation: tr,
    };
    // Flat set from the same saturation rule, applied to u directly.
    let psi_n = tr.psi_n();
    let saved = core::mem::take(&mut sol.u);
    let saved_gap = core::mem::take(&mut sol.u_gap);
    back_map(t, &mut sol);
    sol.u = saved;
    sol.u_gap = saved_gap;
    debug_assert!(sol.v.iter().all(|x| *x >= 0.0) && psi_n <= tr.ceiling_n());
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;

    fn model(gamma: f64) -> Transform {
        Transform::new(Nonlinearity::model_power(1.0, gamma, 1.0).unwrap()).unwrap()
    }

    fn solve(lambda: f64, m: usize) -> (Transform, BvpSolution) {
        let t = model(1.0);
        let g = Grid::interval(1.0, m).unwrap();
        let f = alloc::vec![1.0; m];
        let sol = solve_semilinear(&t, lambda, &f, &g, &SolveOptions::default()).unwrap();
        (t, sol)
    }

    #[test]
    fn exact_benchmark() {
        let (_, sol) = solve(6.0, 2001);
        let err = sol
            .grid
            .nodes()
            .iter()
            .zip(&sol.u)
            .fold(0.0_f64, |m, (s, u)| m.max((u - (1.0 - s * s)).abs()));
        assert!(err <= 1e-4, "max error {err}");
        let c = sol.grid.center();
        assert!((sol.v[c] - 0.5).abs() < 1e-6);
        if let Some(fs) = sol.flat_set {
            assert_eq!((fs.first, fs.last), (c, c));
        }
        assert_eq!(sol.v[0], 0.0);
        assert_eq!(sol.v[2000], 0.0);
    }

    #[test]
    fn subcritical_has_no_plateau() {
        let (t, sol) = solve(3.0, 401);
        assert!(sol.flat_set.is_none());
        assert!(sol.v.iter().all(|&x| x < t.ceiling()));
        assert!(sol.level_change < 1e-8);
    }

    #[test]
    fn supercritical_plateau_width() {
        let (_, sol) = solve(12.0, 2001);
        let w = sol.flat_radius().expect("plateau");
        let expected = 1.0 - 0.5_f64.sqrt();
        assert!((w - expected).abs() <= 2.0 * sol.grid.step(), "{w} vs {expected}");
    }

    #[test]
    fn rejects_bad_input() {
        let t = model(1.0);
        let g = Grid::interval(1.0, 64).unwrap();
        let mut f = alloc::vec![1.0; 64];
        f[3] = -1.0;
        let err = solve_semilinear(&t, 1.0, &f, &g, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let opts = SolveOptions { n_schedule: Vec::new(), ..SolveOptions::default() };
        assert!(solve_semilinear(&t, 1.0, &alloc::vec![1.0; 64], &g, &opts).is_err());
    }

    #[test]
    fn zero_datum() {
        let t = model(1.0);
        let g = Grid::interval(1.0, 64).unwrap();
        let f = alloc::vec![0.0; 64];
        let sol = solve_semilinear(&t, 5.0, &f, &g, &SolveOptions::default()).unwrap();
        assert!(sol.u.iter().all(|&x| x == 0.0));
        let q = quasilinear_residual(&t, &sol, 5.0, &f, 0.0).unwrap();
        assert_eq!(q.offplateau_residual_inf, 0.0);
    }

    #[test]
    fn residual_and_density() {
        let (t, sol) = solve(6.0, 2001);
        let f = alloc::vec![1.0; 2001];
        let q = quasilinear_residual(&t, &sol, 6.0, &f, 0.05).unwrap();
        assert!(q.offplateau_residual_inf <= 1e-2, "{}", q.offplateau_residual_inf);

        let (t, sol) = solve(12.0, 2001);
        let q = quasilinear_residual(&t, &sol, 12.0, &f, 0.05).unwrap();
        let dens: Vec<f64> = q.plateau_density.iter().flatten().copied().collect();
        assert!(!dens.is_empty());
        assert!(dens.iter().all(|d| (d - 12.0).abs() <= 0.12), "{dens:?}");
    }

    #[test]
    fn direct_route_agrees() {
        let t = model(1.0);
        let g = Grid::interval(1.0, 401).unwrap();
        let f = alloc::vec![1.0; 401];
        let opts = SolveOptions { n_schedule: alloc::vec![1e4], ..SolveOptions::default() };
        let a = solve_semilinear(&t, 6.0, &f, &g, &opts).unwrap();
        let b = solve_quasilinear_direct(&t, 6.0, &f, &g, 1e4, &opts).unwrap();
        let d = a.u.iter().zip(&b.u).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(d <= 1e-3, "{d}");
    }

    #[test]
    fn ball_solve() {
        // N = 3: the radial Laplacian; λ below the linear bound 6 keeps u < σ.
        let t = model(1.0);
        let g = Grid::ball(3, 1.0, 401).unwrap();
        let f = alloc::vec![1.0; 401];
        let sol = solve_semilinear(&t, 3.0, &f, &g, &SolveOptions::default()).unwrap();
        assert!(sol.flat_set.is_none());
        assert!(sol.max_u() < 1.0);
        assert_eq!(sol.v[400], 0.0);
        assert!(sol.v.windows(2).all(|w| w[0] >= w[1]));
    }

    fn benchmark_error(m: usize) -> f64 {
        let (_, sol) = solve(6.0, m);
        sol.grid
            .nodes()
            .iter()
            .zip(&sol.u)
            .fold(0.0_f64, |e, (s, u)| e.max((u - (1.0 - s * s)).abs()))
    }

    #[test]
    fn mesh_convergence_is_second_order() {
        let coarse = benchmark_error(501);
        let fine = benchmark_error(1001);
        let ratio = coarse / fine;
        assert!((3.5..=4.5).contains(&ratio), "{coarse:e} {fine:e} ratio {ratio}");
    }

    #[test]
    fn levels_decrease_and_starts_agree() {
        for gamma in [0.5, 1.0, 1.5, 2.0] {
            let t = model(gamma);
            let g = Grid::interval(1.0, 401).unwrap();
            let f = alloc::vec![1.0; 401];
            let mut prev: Option<Vec<f64>> = None;
            for n in [1e2, 1e3, 1e4, 1e5] {
                let opts = SolveOptions { n_schedule: alloc::vec![n], ..SolveOptions::default() };
                let sol = solve_semilinear(&t, 8.0, &f, &g, &opts).unwrap();
                if let Some(p) = &prev {
                    assert!(p.iter().zip(&sol.v).all(|(a, b)| *a >= b - 1e-9), "gamma {gamma} n {n}");
                }
                prev = Some(sol.v);
            }
            let a = solve_semilinear(&t, 8.0, &f, &g, &SolveOptions::default()).unwrap();
            let zero = SolveOptions { initial: InitialIterate::Zero, ..SolveOptions::default() };
            let b = solve_semilinear(&t, 8.0, &f, &g, &zero).unwrap();
            let d = a.v.iter().zip(&b.v).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d <= 1e-7, "gamma {gamma}: {d:e}");
        }
    }

    #[test]
    fn direct_route_tracks_levels() {
        let t = model(1.0);
        let g = Grid::interval(1.0, 401).unwrap();
        let f = alloc::vec![1.0; 401];
        for n in [1e2, 1e3, 1e4] {
            let opts = SolveOptions { n_schedule: alloc::vec![n], ..SolveOptions::default() };
            let a = solve_semilinear(&t, 3.0, &f, &g, &opts).unwrap();
            let b = solve_quasilinear_direct(&t, 3.0, &f, &g, n, &opts).unwrap();
            let d = a.u.iter().zip(&b.u).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(d <= 1e-3, "n {n}: {d:e}");
        }
        let zero = solve_quasilinear_direct(&t, 3.0, &alloc::vec![0.0; 401], &g, 1e3, &SolveOptions::default()).unwrap();
        assert!(zero.u.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn no_plateau_without_integrable_root() {
        let t = model(2.0);
        let g = Grid::interval(1.0, 401).unwrap();
        let f = alloc::vec![1.0; 401];
        for lambda in [10.0, 100.0, 1000.0] {
            let sol = solve_semilinear(&t, lambda, &f, &g, &SolveOptions::default()).unwrap();
            assert!(sol.flat_set.is_none());
        }
    }
}
