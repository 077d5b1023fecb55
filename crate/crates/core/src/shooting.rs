//! One-dimensional profiles of `−v″ = λ g(v)`, `v(0) = ℓ`, `v′(0) = 0`.
//!
//! Nothing is time-stepped. Multiplying by `v′` gives the first integral
//! `v′² = 2λ (G(ℓ) − G(v))`, so the position where the profile passes the
//! level `v` is
//!
//! ```text
//! s(v) = (2λ)^{−1/2} ∫_v^ℓ dt / √(G(ℓ) − G(t)).
//! ```
//!
//! The integral is evaluated in the gap variable `y = σ − ψ⁻¹(t)`, where it
//! reads `∫ dy / √K(y_ℓ, y)` with the scaled kernel `K` of
//! [`Transform::scaled_kernel`]. The singularities at `y = y_ℓ` (and, for
//! `ℓ = L`, the blow-up of `h` there) are removed by `y = y_ℓ + z^k` with `k`
//! chosen from the growth exponent of `h`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Geometry, Grid};
use crate::interp::Cell;
use crate::math::{ceil, cos, exp, powf, sqrt};
use crate::quad::gauss_kronrod;
use crate::transform::{Extended, Transform};

const OUTER_TOLERANCE: f64 = 1e-12;
const PROFILE_NODES: usize = 513;

/// One point of a profile: position `s`, value `v`, slope `v′`, and the gap
/// `σ − u` of the corresponding quasilinear level `u = ψ⁻¹(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub s: f64,
    pub v: f64,
    pub v_prime: f64,
    pub gap: f64,
}

/// A shooting profile, possibly preceded by a plateau at the ceiling.
#[derive(Debug, Clone)]
pub struct ShootingSolution {
    pub ell: f64,
    pub lambda: f64,
    /// Length of the initial plateau `v ≡ L` (zero for plain traces).
    pub plateau: f64,
    /// Zero crossing of the non-flat part, `R_ℓ`.
    pub r_ell: f64,
    pub samples: Vec<ProfileSample>,
    table: ProfileTable,
}

/// Power of the substitution `y = y_ℓ + z^k`. For `h ~ y^{−γ}` with `γ < 2`
/// the integrand behaves like `y^{−γ/2}` near the ceiling, which `k ≥ 2/(2−γ)`
/// renders bounded.
fn substitution_power(t: &Transform) -> f64 {
    let gamma = t.source().gamma_effective();
    if gamma < 2.0 {
        ceil(2.0 / (2.0 - gamma)).clamp(2.0, 64.0)
    } else {
        2.0
    }
}

/// `d(position)/dz` up to the factor `(2λ)^{−1/2}`, i.e. `k z^{k−1} / √K`.
/// Below `zmin` the kernel would leave the normal floating-point range; the
/// integrand is continued there by its leading power law `z^p`.
#[derive(Clone, Copy)]
struct Integrand<'a> {
    t: &'a Transform,
    y_ell: f64,
    k: f64,
    zmin: f64,
    fmin: f64,
    p: f64,
}

impl<'a> Integrand<'a> {
    fn new(t: &'a Transform, y_ell: f64, k: f64) -> Self {
        let zmax = powf(t.sigma() - y_ell, 1.0 / k);
        let gamma = t.source().gamma_effective();
        // K ≈ span near a regular start, K ≈ y^γ / (2A) near the ceiling.
        let (p, ln_ymin) = if y_ell > 0.0 {
            (0.5 * k - 1.0, -600.0)
        } else {
            (k * (1.0 - 0.5 * gamma) - 1.0, -600.0 / gamma.max(1.0))
        };
        let zmin = (zmax * 1e-12).max(exp(ln_ymin / k));
        let mut f = Integrand { t, y_ell, k, zmin, fmin: 0.0, p };
        f.fmin = f.raw(zmin);
        f
    }

    fn zmax(&self) -> f64 {
        powf(self.t.sigma() - self.y_ell, 1.0 / self.k)
    }

    fn raw(&self, z: f64) -> f64 {
        let kern = self.t.scaled_kernel_span(self.y_ell, powf(z, self.k));
        self.k * powf(z, self.k - 1.0) / sqrt(kern)
    }

    fn eval(&self, z: f64) -> f64 {
        if z < self.zmin {
            self.fmin * powf(z / self.zmin, self.p)
        } else {
            self.raw(z)
        }
    }
}

/// Dense table of the unscaled position `∫_0^z` as a function of `z`,
/// interpolated by monotone cubic Hermite cells with exact slopes.
#[derive(Debug, Clone)]
struct ProfileTable {
    y_ell: f64,
    k: f64,
    scale: f64,
    z: Vec<f64>,
    x: Vec<f64>,
    dx: Vec<f64>,
}

impl ProfileTable {
    fn build(t: &Transform, y_ell: f64, lambda: f64) -> Self {
        let k = substitution_power(t);
        let f = Integrand::new(t, y_ell, k);
        let zmax = f.zmax();
        let n = PROFILE_NODES;
        let z: Vec<f64> = (0..n)
            .map(|j| 0.5 * zmax * (1.0 - cos(PI * j as f64 / (n - 1) as f64)))
            .collect();
        let dx: Vec<f64> = z.iter().map(|&zj| f.eval(zj.max(f.zmin))).collect();
        let mut x = Vec::with_capacity(n);
        x.push(0.0);
        let mut acc = 0.0;
        for j in 0..n - 1 {
            acc += gauss_kronrod(|q| f.eval(q), z[j], z[j + 1], OUTER_TOLERANCE, 0.0);
            x.push(acc);
        }
        ProfileTable {
            y_ell,
            k,
            scale: 1.0 / sqrt(2.0 * lambda),
            z,
            x,
            dx,
        }
    }

    fn length(&self) -> f64 {
        self.scale * self.x[self.x.len() - 1]
    }

    fn cell(&self, j: usize) -> Cell {
        Cell::monotone(self.z[j + 1] - self.z[j], self.x[j], self.x[j + 1], self.dx[j], self.dx[j + 1])
    }

    fn position_of_gap(&self, y: f64) -> f64 {
        let z = powf((y - self.y_ell).max(0.0), 1.0 / self.k);
        let n = self.z.len();
        let j = self.z.partition_point(|&p| p <= z).saturating_sub(1).min(n - 2);
        let c = self.cell(j);
        let u = ((z - self.z[j]) / c.width).clamp(0.0, 1.0);
        self.scale * c.eval(u)
    }

    fn gap_at_position(&self, pos: f64) -> f64 {
        let target = pos / self.scale;
        let n = self.x.len();
        let j = self.x.partition_point(|&p| p <= target).saturating_sub(1).min(n - 2);
        let c = self.cell(j);
        let u = c.invert(target);
        let z = self.z[j] + u * c.width;
        self.y_ell + powf(z, self.k)
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("lambda must be positive and finite"))
    }
}

/// Gap `σ − ψ⁻¹(ℓ)` of the starting level, after validating `ℓ ∈ (0, L]`.
fn start_gap(t: &Transform, ell: f64) -> Result<f64> {
    let l = t.ceiling();
    if !(ell > 0.0) || ell > l * (1.0 + 1e-15) {
        return Err(Error::Domain { what: "shooting level ell (must lie in (0, L])", value: ell });
    }
    Ok(if ell >= l { 0.0 } else { t.level(ell).gap })
}

/// Zero-crossing radius `R_ℓ` of the profile starting at `ℓ`. For `ℓ = L`
/// with `√h` not integrable the radius is infinite.
pub fn radius(t: &Transform, ell: f64, lambda: f64) -> Result<Extended> {
    check_lambda(lambda)?;
    let y_ell = start_gap(t, ell)?;
    if y_ell == 0.0 && !t.integrability().sqrt_h_integrable {
        return Ok(Extended::PosInfinity);
    }
    let f = Integrand::new(t, y_ell, substitution_power(t));
    let zmax = f.zmax();
    let total: f64 = (0..16)
        .map(|j| gauss_kronrod(|z| f.eval(z), zmax * j as f64 / 16.0, zmax * (j + 1) as f64 / 16.0, OUTER_TOLERANCE, 0.0))
        .sum();
    Ok(Extended::Finite(total / sqrt(2.0 * lambda)))
}

/// The critical radius `R_L(λ)` (infinite when `√h` is not integrable).
pub fn critical_radius(t: &Transform, lambda: f64) -> Result<Extended> {
    radius(t, t.ceiling(), lambda)
}

/// Profile through the first integral, sampled on a Chebyshev grid in `v`
/// (`n_samples ≥ 16` points); where `v` cannot resolve the profile (the
/// level sits within rounding of `ℓ`), samples uniform in position are added.
pub fn trace(t: &Transform, ell: f64, lambda: f64, n_samples: usize) -> Result<ShootingSolution> {
    check_lambda(lambda)?;
    if n_samples < 16 {
        return Err(Error::invalid("trace needs at least 16 samples"));
    }
    let y_ell = start_gap(t, ell)?;
    if y_ell == 0.0 && !t.integrability().sqrt_h_integrable {
        return Err(Error::inapplicable(
            "the critical radius is infinite (sqrt h is not integrable): no profile from the ceiling",
        ));
    }
    let ell = if y_ell == 0.0 { t.ceiling() } else { ell };
    let table = ProfileTable::build(t, y_ell, lambda);
    let r_ell = table.length();
    let mut sol = ShootingSolution {
        ell,
        lambda,
        plateau: 0.0,
        r_ell,
        samples: Vec::new(),
        table,
    };

    let n = n_samples;
    let mut raw = Vec::with_capacity(n);
    for i in 0..n {
        let v = 0.5 * ell * (1.0 + cos(PI * i as f64 / (n - 1) as f64));
        let sample = if i == 0 {
            ProfileSample { s: 0.0, v: ell, v_prime: 0.0, gap: y_ell }
        } else if i == n - 1 {
            let mut p = sol.at_gap(t, t.sigma());
            p.s = r_ell;
            p.v = 0.0;
            p
        } else {
            let gap = t.level(v).gap.max(y_ell);
            let mut p = sol.at_gap(t, gap);
            p.v = v;
            p
        };
        raw.push(sample);
    }
    // Fill holes left by levels indistinguishable from ℓ in floating point.
    let spacing = r_ell / (n - 1) as f64;
    let mut samples: Vec<ProfileSample> = Vec::with_capacity(n);
    for p in raw {
        if let Some(prev) = samples.last().copied() {
            let hole = p.s - prev.s;
            if hole > 4.0 * spacing {
                let extra = (hole / spacing) as usize;
                for j in 1..extra {
                    let x = prev.s + hole * j as f64 / extra as f64;
                    samples.push(sol.sample_at(t, x));
                }
            }
            if p.s < prev.s {
                continue;
            }
        }
        samples.push(p);
    }
    sol.samples = samples;
    Ok(sol)
}

/// `w = L` on `[0, plateau]`, then the minimal profile `v_L(s − plateau)`;
/// crosses zero at `plateau + R_L`.
pub fn flat_family(t: &Transform, lambda: f64, plateau: f64) -> Result<ShootingSolution> {
    if !(plateau >= 0.0) || !plateau.is_finite() {
        return Err(Error::invalid("plateau length must be nonnegative and finite"));
    }
    let mut sol = trace(t, t.ceiling(), lambda, 256)?;
    sol.plateau = plateau;
    if plateau > 0.0 {
        for p in sol.samples.iter_mut() {
            p.s += plateau;
        }
        let start = sol.samples[0];
        sol.samples.insert(0, ProfileSample { s: 0.0, ..start });
    }
    Ok(sol)
}

/// `λ_c` with `R_L(λ_c) = R`; flat one-dimensional solutions on `(−R, R)`
/// exist exactly for `λ > λ_c`.
pub fn critical_lambda(t: &Transform, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("R must be positive"));
    }
    match critical_radius(t, 1.0)? {
        Extended::Finite(c) => Ok(c * c / (r * r)),
        _ => Err(Error::inapplicable(
            "no finite critical lambda: sqrt h is not integrable, solutions exist for every lambda",
        )),
    }
}

impl ShootingSolution {
    /// Position where the profile reaches zero: `plateau + R_ℓ`.
    pub fn zero_crossing(&self) -> f64 {
        self.plateau + self.r_ell
    }

    fn at_gap(&self, t: &Transform, gap: f64) -> ProfileSample {
        let y_ell = self.table.y_ell;
        let kern = t.scaled_kernel(y_ell, gap);
        ProfileSample {
            s: self.plateau + self.table.position_of_gap(gap),
            v: t.v_at_gap(gap),
            v_prime: -sqrt(2.0 * self.lambda) * t.g_at_gap(gap) * sqrt(kern),
            gap,
        }
    }

    /// Evaluate the profile at position `x ≥ 0` (zero past the crossing).
    pub fn sample_at(&self, t: &Transform, x: f64) -> ProfileSample {
        let y_ell = self.table.y_ell;
        if x <= self.plateau {
            return ProfileSample { s: x, v: self.ell, v_prime: 0.0, gap: y_ell };
        }
        let xi = x - self.plateau;
        if xi >= self.r_ell {
            let mut p = self.at_gap(t, t.sigma());
            p.s = x;
            p.v = 0.0;
            return p;
        }
        let gap = self.table.gap_at_position(xi).clamp(y_ell, t.sigma());
        let mut p = self.at_gap(t, gap);
        p.s = x;
        if gap == y_ell {
            p.v = self.ell;
        }
        p
    }

    /// Largest violation of the first integral `v′² = 2λ(G(ℓ) − G(v))`
    /// over the samples, measured as `| |v′| − √(2λ(G(ℓ)−G(v))) |` with `G`
    /// taken from the transform tables.
    pub fn first_integral_residual(&self, t: &Transform) -> f64 {
        let y_ell = self.table.y_ell;
        let g_ell = t.big_g_deficit_gap(y_ell);
        self.samples
            .iter()
            .map(|p| {
                let dg = (t.big_g_deficit_gap(p.gap) - g_ell).max(0.0);
                (p.v_prime.abs() - sqrt(2.0 * self.lambda * dg)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A flat radial subsolution `w(|x| R̄ / R)` built from the flat family at
/// `λ = 1` with plateau `R̲ = (N−1)√(2C)`.
#[derive(Debug, Clone)]
pub struct RadialSubsolution {
    pub dim: u32,
    pub radius: f64,
    /// `C = sup K(0, y)`, the worst ratio `∫_v^L g / g(v)²`.
    pub c_constant: f64,
    /// `R̲`.
    pub inner_radius: f64,
    /// `R̄ = R_L(1) + R̲`.
    pub outer_radius: f64,
    /// `λ_sub = 2 R̄² / R²`.
    pub lambda_sub: f64,
    pub profile: ShootingSolution,
}

/// `C = sup_{0 < y ≤ σ} K(0, y)` by a scan over uniform and geometric gaps
/// followed by golden-section refinement around the best point.
fn sup_kernel(t: &Transform) -> f64 {
    let sigma = t.sigma();
    let kern = |y: f64| t.scaled_kernel(0.0, y);
    let mut ys: Vec<f64> = (1..=200).map(|j| sigma * j as f64 / 200.0).collect();
    ys.extend((1..=15).map(|k| sigma * powf(10.0, -(k as f64))));
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, &y) in ys.iter().enumerate() {
        let v = kern(y);
        if v > best_val {
            best_val = v;
            best = i;
        }
    }
    if best + 1 == ys.len() {
        return best_val;
    }
    let (mut a, mut b) = (if best == 0 { 0.0 } else { ys[best - 1] }, ys[best + 1]);
    let ratio = 0.5 * (sqrt(5.0) - 1.0);
    for _ in 0..100 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if kern(c) >= kern(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a < 1e-14 * sigma {
            break;
        }
    }
    best_val.max(kern(0.5 * (a + b)))
}

/// Flat subsolution on the ball `B_R ⊂ ℝᴺ` certifying nonexistence for
/// `λ ≥ λ_sub` (with `f ≥ 1`).
pub fn radial_subsolution(t: &Transform, dim: u32, r: f64) -> Result<RadialSubsolution> {
    if dim == 0 {
        return Err(Error::invalid("dimension N must be at least 1"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid("R must be positive"));
    }
    let r_l = match critical_radius(t, 1.0)? {
        Extended::Finite(x) => x,
        _ => {
            return Err(Error::inapplicable(
                "the critical radius is infinite: no flat subsolution certificate exists",
            ))
        }
    };
    let c_constant = sup_kernel(t);
    let inner = (dim - 1) as f64 * sqrt(2.0 * c_constant);
    let outer = r_l + inner;
    let profile = flat_family(t, 1.0, inner)?;
    Ok(RadialSubsolution {
        dim,
        radius: r,
        c_constant,
        inner_radius: inner,
        outer_radius: outer,
        lambda_sub: 2.0 * outer * outer / (r * r),
        profile,
    })
}

impl RadialSubsolution {
    fn scale(&self) -> f64 {
        self.outer_radius / self.radius
    }

    /// `w(r)`, with `s` set to `r`.
    pub fn value_at(&self, t: &Transform, r: f64) -> ProfileSample {
        let mut p = self.profile.sample_at(t, r.abs() * self.scale());
        p.s = r;
        p
    }

    /// `−Δw(r) − λ_sub g(w(r))` from the exact derivatives of the profile;
    /// nonpositive for a subsolution.
    pub fn pointwise_defect(&self, t: &Transform, r: f64) -> f64 {
        let c = self.scale();
        let rho = r.abs() * c;
        let p = self.profile.sample_at(t, rho);
        let g = t.g_at_gap(p.gap);
        if rho <= self.inner_radius {
            return -self.lambda_sub * g;
        }
        // W″ = −g(W) (profile at λ = 1); −Δw = −c² (W″ + (N−1) W′/ρ)
        let w2 = -g;
        let lap = -c * c * (w2 + (self.dim - 1) as f64 * p.v_prime / rho);
        lap - self.lambda_sub * g
    }

    fn check_grid(&self, grid: &Grid) -> Result<()> {
        let dim_ok = match grid.geometry() {
            Geometry::Interval => self.dim == 1,
            Geometry::Ball { dim } => dim == self.dim,
        };
        if !dim_ok || (grid.radius() - self.radius).abs() > 1e-12 * self.radius {
            return Err(Error::precondition("grid does not match the subsolution's dimension and radius"));
        }
        Ok(())
    }

    /// `(−Δ_h w)_i − λ_sub g(w_i)` at every interior node (zero on the
    /// boundary).
    pub fn discrete_defect(&self, t: &Transform, grid: &Grid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        let samples: Vec<ProfileSample> =
            grid.nodes().iter().map(|&x| self.value_at(t, x)).collect();
        let w: Vec<f64> = samples.iter().map(|p| p.v).collect();
        let mut out = alloc::vec![0.0; grid.len()];
        for i in grid.interior() {
            out[i] = grid.neg_laplacian_at(&w, i) - self.lambda_sub * t.g_at_gap(samples[i].gap);
        }
        Ok(out)
    }

    /// Whether the stencil of node `i` contains points on both sides of the
    /// plateau edge `|x| = R̲ R / R̄`.
    pub fn straddles_plateau_edge(&self, grid: &Grid, i: usize) -> bool {
        let edge = self.inner_radius / self.scale();
        let lo = if i == 0 { 0 } else { i - 1 };
        let hi = (i + 1).min(grid.len() - 1);
        let inside = (lo..=hi).any(|j| grid.distance(j) <= edge);
        let outside = (lo..=hi).any(|j| grid.distance(j) > edge);
        inside && outside
    }
}
