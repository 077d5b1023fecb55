//! The singular coefficient `h` on `[0, σ)`.
//!
//! Everything that happens close to `σ` is evaluated in the gap variable
//! `y = σ − s`, which keeps full relative precision where `h` blows up.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{exp_m1, ln, ln_1p, powf, sqrt};

/// Residual (RMS in `ln h`) above which a tabulated tail fit is flagged.
pub const TAIL_FIT_TOLERANCE: f64 = 1e-2;

/// `h(s) = A (σ − s)^{−γ}` or a strictly increasing table.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    sigma: f64,
    kind: NonlinearityKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NonlinearityKind {
    ModelPower { a: f64, gamma: f64 },
    Tabulated(Tabulated),
}

/// Piecewise-linear `h` through the breakpoints, continued past the last
/// breakpoint by the power law `h_K (y_K / y)^{γ_fit}` fitted on the last
/// decade of gaps.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    s: Vec<f64>,
    h: Vec<f64>,
    /// Cumulative `∫_0^{s_i} h`, exact for the linear pieces.
    cumulative: Vec<f64>,
    tail_gamma: f64,
    fit_residual: f64,
}

impl Tabulated {
    pub fn breakpoints(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s.iter().copied().zip(self.h.iter().copied())
    }

    /// Exponent of the fitted power-law tail.
    pub fn tail_gamma(&self) -> f64 {
        self.tail_gamma
    }

    /// RMS residual of the tail fit in `ln h`.
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    fn linear_h(&self, s: f64) -> f64 {
        let i = segment(&self.s, s);
        let w = ((s - self.s[i]) / (self.s[i + 1] - self.s[i])).clamp(0.0, 1.0);
        self.h[i] + w * (self.h[i + 1] - self.h[i])
    }

    fn last_gap(&self, sigma: f64) -> f64 {
        sigma - self.s[self.s.len() - 1]
    }
}

/// Integrability of `h` and `√h` near `σ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrabilityReport {
    pub sqrt_h_integrable: bool,
    pub h_integrable: bool,
    pub gamma_effective: Option<f64>,
    /// Set for tables whose tail fit is poor; the booleans are then a guess.
    pub inconclusive: bool,
}

/// Which side of the existence dichotomy a nonlinearity falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `√h` is not integrable: a solution exists for every `λ`.
    AlwaysExists,
    /// `√h` is integrable: flat solutions appear above a finite threshold.
    FiniteThreshold,
}

impl IntegrabilityReport {
    pub fn regime(&self) -> Regime {
        if self.sqrt_h_integrable {
            Regime::FiniteThreshold
        } else {
            Regime::AlwaysExists
        }
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

/// `(1 − r^{p}) / p` for `r > 0`, with the `p → 0` limit `−ln r`, computed
/// without cancellation from `ln r`.
fn one_minus_pow_over(ln_r: f64, p: f64) -> f64 {
    if p.abs() < 1e-13 {
        -ln_r
    } else {
        -exp_m1(p * ln_r) / p
    }
}

/// `ln(y / y_ref)` accurate both for `y ≈ y_ref` and for tiny `y`.
fn ln_ratio(y: f64, y_ref: f64) -> f64 {
    let d = y - y_ref;
    if d.abs() < 0.5 * y_ref {
        ln_1p(d / y_ref)
    } else {
        ln(y / y_ref)
    }
}

/// `∫_{y_a}^{y_b} c t^{−γ} dt` for `0 < y_a ≤ y_b`, accurate when the
/// endpoints are close.
fn power_integral(c: f64, gamma: f64, y_a: f64, y_b: f64) -> f64 {
    // = c y_b^{1−γ} (1 − (y_a/y_b)^{1−γ}) / (1−γ)
    if y_a <= 0.0 {
        return if gamma >= 1.0 { f64::INFINITY } else { c * powf(y_b, 1.0 - gamma) / (1.0 - gamma) };
    }
    c * powf(y_b, 1.0 - gamma) * one_minus_pow_over(ln_ratio(y_a, y_b), 1.0 - gamma)
}

/// `∫_{y_b−τ}^{y_b} c t^{−γ} dt` with the offset `τ` given exactly.
fn power_integral_offset(c: f64, gamma: f64, y_b: f64, tau: f64) -> f64 {
    if tau >= y_b {
        return power_integral(c, gamma, 0.0, y_b);
    }
    c * powf(y_b, 1.0 - gamma) * one_minus_pow_over(ln_1p(-tau / y_b), 1.0 - gamma)
}

impl Nonlinearity {
    /// `h(s) = A (σ − s)^{−γ}`.
    pub fn model_power(a: f64, gamma: f64, sigma: f64) -> Result<Self> {
        check_positive("A", a)?;
        check_positive("gamma", gamma)?;
        check_positive("sigma", sigma)?;
        Ok(Nonlinearity {
            sigma,
            kind: NonlinearityKind::ModelPower { a, gamma },
        })
    }

    /// Piecewise-linear `h` through `(s_i, h_i)` with `s_0 = 0`, strictly
    /// increasing in both coordinates, `s_K < σ`; continued to `σ` by a
    /// power law fitted to the last decade of gaps.
    pub fn tabulated(points: &[(f64, f64)], sigma: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        if points.len() < 3 {
            return Err(Error::invalid("a table for h needs at least 3 breakpoints"));
        }
        if points[0].0 != 0.0 {
            return Err(Error::invalid("the first breakpoint of h must be at s = 0"));
        }
        for w in points.windows(2) {
            let ((s0, h0), (s1, h1)) = (w[0], w[1]);
            if !(s1 > s0) || !(h1 > h0) {
                return Err(Error::invalid(format!(
                    "breakpoints must be strictly increasing in s and h (at s = {s1})"
                )));
            }
        }
        for &(s, hv) in points {
            if !s.is_finite() || !hv.is_finite() || hv < 0.0 {
                return Err(Error::invalid(format!("bad breakpoint ({s}, {hv})")));
            }
        }
        let last = points[points.len() - 1].0;
        if last >= sigma {
            return Err(Error::invalid(format!(
                "breakpoints must lie in [0, sigma); last s = {last} but sigma = {sigma}"
            )));
        }
        let s: Vec<f64> = points.iter().map(|p| p.0).collect();
        let h: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut cumulative = Vec::with_capacity(s.len());
        cumulative.push(0.0);
        for i in 1..s.len() {
            let prev = cumulative[i - 1];
            cumulative.push(prev + 0.5 * (s[i] - s[i - 1]) * (h[i] + h[i - 1]));
        }

        // Power-law fit ln h = c − γ ln y over the last decade of gaps.
        let y_last = sigma - last;
        let mut idx: Vec<usize> = (0..s.len()).filter(|&i| sigma - s[i] <= 10.0 * y_last).collect();
        if idx.len() < 3 {
            idx = (s.len() - 3..s.len()).collect();
        }
        let pts: Vec<(f64, f64)> = idx
            .iter()
            .filter(|&&i| h[i] > 0.0)
            .map(|&i| (ln(sigma - s[i]), ln(h[i])))
            .collect();
        if pts.len() < 2 {
            return Err(Error::invalid("cannot fit the tail of h: need positive values near sigma"));
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        let tail_gamma = -slope;
        if !(tail_gamma > 0.0) || !tail_gamma.is_finite() {
            return Err(Error::invalid(
                "the tail of the table does not blow up towards sigma (fitted exponent <= 0)",
            ));
        }
        let intercept = my - slope * mx;
        let ss: f64 = pts
            .iter()
            .map(|p| {
                let r = p.1 - (intercept + slope * p.0);
                r * r
            })
            .sum();
        let fit_residual = sqrt(ss / n);

        Ok(Nonlinearity {
            sigma,
            kind: NonlinearityKind::Tabulated(Tabulated {
                s,
                h,
                cumulative,
                tail_gamma,
                fit_residual,
            }),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    /// `(A, γ)` for the model family.
    pub fn model_parameters(&self) -> Option<(f64, f64)> {
        match self.kind {
            NonlinearityKind::ModelPower { a, gamma } => Some((a, gamma)),
            NonlinearityKind::Tabulated(_) => None,
        }
    }

    /// Exponent governing the blow-up (`γ`, or the fitted tail exponent).
    pub fn gamma_effective(&self) -> f64 {
        match &self.kind {
            NonlinearityKind::ModelPower { gamma, .. } => *gamma,
            NonlinearityKind::Tabulated(t) => t.tail_gamma,
        }
    }

    /// `h(s)`; `+∞` for `s ≥ σ`, `h(0)` for `s < 0`.
    pub fn h(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        if s >= self.sigma {
            return f64::INFINITY;
        }
        match &self.kind {
            NonlinearityKind::ModelPower { .. } => self.h_gap(self.sigma - s),
            NonlinearityKind::Tabulated(t) => {
                if s <= t.s[t.s.len() - 1] {
                    t.linear_h(s)
                } else {
                    self.h_gap(self.sigma - s)
                }
            }
        }
    }

    /// `h(σ − y)` for a gap `y > 0`.
    pub fn h_gap(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return f64::INFINITY;
        }
        let y = y.min(self.sigma);
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } => a * powf(y, -gamma),
            NonlinearityKind::Tabulated(t) => {
                let yk = t.last_gap(self.sigma);
                if y < yk {
                    t.h[t.h.len() - 1] * powf(yk / y, t.tail_gamma)
                } else {
                    t.linear_h(self.sigma - y)
                }
            }
        }
    }

    /// `h′(s)` (one-sided from the right at table breakpoints).
    pub fn h_prime(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        if s >= self.sigma {
            return f64::INFINITY;
        }
        let y = self.sigma - s;
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } => a * gamma * powf(y, -gamma - 1.0),
            NonlinearityKind::Tabulated(t) => {
                let yk = t.last_gap(self.sigma);
                if y < yk {
                    t.tail_gamma * self.h_gap(y) / y
                } else {
                    let i = segment(&t.s, s);
                    (t.h[i + 1] - t.h[i]) / (t.s[i + 1] - t.s[i])
                }
            }
        }
    }

    /// `h′(σ − y)` for a gap `y > 0`, accurate for tiny gaps.
    pub fn h_prime_gap(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return f64::INFINITY;
        }
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } => a * gamma * powf(y, -gamma - 1.0),
            NonlinearityKind::Tabulated(t) => {
                if y < t.last_gap(self.sigma) {
                    t.tail_gamma * self.h_gap(y) / y
                } else {
                    self.h_prime(self.sigma - y)
                }
            }
        }
    }

    /// `h′/h` at the gap `y`, finite even where `h` itself overflows.
    pub fn log_derivative_gap(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return f64::INFINITY;
        }
        match &self.kind {
            NonlinearityKind::ModelPower { gamma, .. } => gamma / y,
            NonlinearityKind::Tabulated(t) => {
                if y < t.last_gap(self.sigma) {
                    t.tail_gamma / y
                } else {
                    self.h_prime(self.sigma - y) / self.h_gap(y)
                }
            }
        }
    }

    /// `H(s) = ∫_0^s h`; `+∞` at `σ` when `h` is not integrable.
    pub fn big_h(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.big_h_gap(self.sigma - s)
    }

    /// `H(σ − y)`.
    pub fn big_h_gap(&self, y: f64) -> f64 {
        let sigma = self.sigma;
        if y >= sigma {
            return 0.0;
        }
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } => {
                if y <= 0.0 {
                    return if *gamma < 1.0 {
                        a * powf(sigma, 1.0 - gamma) / (1.0 - gamma)
                    } else {
                        f64::INFINITY
                    };
                }
                // ∫_y^σ A t^{−γ} dt
                power_integral(*a, *gamma, y, sigma)
            }
            NonlinearityKind::Tabulated(t) => {
                let yk = t.last_gap(sigma);
                if y >= yk {
                    let s = (sigma - y).min(t.s[t.s.len() - 1]);
                    let i = segment(&t.s, s);
                    let hs = t.linear_h(s);
                    t.cumulative[i] + 0.5 * (s - t.s[i]) * (t.h[i] + hs)
                } else {
                    let hk = t.h[t.h.len() - 1];
                    let base = t.cumulative[t.cumulative.len() - 1];
                    base + self.tail_power_integral(hk, yk, t.tail_gamma, y, yk)
                }
            }
        }
    }

    /// `∫_{y_a}^{y_b} h_K (y_K/t)^{γ} dt` on the fitted tail; `+∞` for `y_a = 0`
    /// and `γ ≥ 1`.
    fn tail_power_integral(&self, hk: f64, yk: f64, gamma: f64, y_a: f64, y_b: f64) -> f64 {
        let c = hk * powf(yk, gamma);
        if y_a <= 0.0 {
            return if gamma < 1.0 {
                c * powf(y_b, 1.0 - gamma) / (1.0 - gamma)
            } else {
                f64::INFINITY
            };
        }
        power_integral(c, gamma, y_a, y_b)
    }

    /// `H(σ − y_far + τ) − H(σ − y_far)`, i.e. the integral of `h` over the
    /// gaps `[y_far − τ, y_far]`, accurate for offsets `τ` far below the
    /// resolution of `y_far`.
    pub fn big_h_offset(&self, y_far: f64, tau: f64) -> f64 {
        if !(tau > 0.0) {
            return 0.0;
        }
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } if y_far < self.sigma => {
                power_integral_offset(*a, *gamma, y_far, tau)
            }
            NonlinearityKind::Tabulated(t) if y_far <= t.last_gap(self.sigma) => {
                let yk = t.last_gap(self.sigma);
                let c = t.h[t.h.len() - 1] * powf(yk, t.tail_gamma);
                power_integral_offset(c, t.tail_gamma, y_far, tau)
            }
            _ => self.big_h_between_gaps((y_far - tau).max(0.0), y_far),
        }
    }

    /// `H(σ − y_near) − H(σ − y_far)` for `0 < y_near ≤ y_far`, without
    /// cancellation when both gaps are small.
    pub fn big_h_between_gaps(&self, y_near: f64, y_far: f64) -> f64 {
        if y_near >= y_far {
            return 0.0;
        }
        let sigma = self.sigma;
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } => {
                if y_far >= sigma {
                    return self.big_h_gap(y_near);
                }
                power_integral(*a, *gamma, y_near, y_far)
            }
            NonlinearityKind::Tabulated(t) => {
                let yk = t.last_gap(sigma);
                if y_far <= yk {
                    let hk = t.h[t.h.len() - 1];
                    self.tail_power_integral(hk, yk, t.tail_gamma, y_near, y_far)
                } else {
                    self.big_h_gap(y_near) - self.big_h_gap(y_far)
                }
            }
        }
    }

    /// `∫_{σ−y}^{σ} √h`; `+∞` when `√h` is not integrable.
    pub fn root_h_tail_gap(&self, y: f64) -> f64 {
        let sigma = self.sigma;
        let y = y.min(sigma);
        if y <= 0.0 {
            return 0.0;
        }
        let root_tail = |c: f64, gamma: f64, y: f64| {
            let p = 1.0 - 0.5 * gamma;
            if p <= 0.0 {
                f64::INFINITY
            } else {
                sqrt(c) * powf(y, p) / p
            }
        };
        match &self.kind {
            NonlinearityKind::ModelPower { a, gamma } => root_tail(*a, *gamma, y),
            NonlinearityKind::Tabulated(t) => {
                let yk = t.last_gap(sigma);
                let hk = t.h[t.h.len() - 1];
                let c = hk * powf(yk, t.tail_gamma);
                if y <= yk {
                    return root_tail(c, t.tail_gamma, y);
                }
                let mut total = root_tail(c, t.tail_gamma, yk);
                // Linear pieces from s = σ − y up to s_K.
                let s_lo = sigma - y;
                let n = t.s.len();
                for i in (0..n - 1).rev() {
                    let (a0, a1) = (t.s[i], t.s[i + 1]);
                    if a1 <= s_lo {
                        break;
                    }
                    let lo = a0.max(s_lo);
                    let slope = (t.h[i + 1] - t.h[i]) / (a1 - a0);
                    let h_lo = t.h[i] + slope * (lo - a0);
                    let h_hi = t.h[i + 1];
                    // ∫ √(linear) = 2/(3 slope) (h_hi^{3/2} − h_lo^{3/2})
                    total += 2.0 / (3.0 * slope) * (h_hi * sqrt(h_hi) - h_lo * sqrt(h_lo));
                }
                total
            }
        }
    }

    /// Integrability of `h` and `√h` near `σ`.
    pub fn classify(&self) -> IntegrabilityReport {
        match &self.kind {
            NonlinearityKind::ModelPower { gamma, .. } => IntegrabilityReport {
                sqrt_h_integrable: *gamma < 2.0,
                h_integrable: *gamma < 1.0,
                gamma_effective: Some(*gamma),
                inconclusive: false,
            },
            NonlinearityKind::Tabulated(t) => IntegrabilityReport {
                sqrt_h_integrable: t.tail_gamma < 2.0,
                h_integrable: t.tail_gamma < 1.0,
                gamma_effective: Some(t.tail_gamma),
                inconclusive: t.fit_residual > TAIL_FIT_TOLERANCE,
            },
        }
    }
}

/// Index `i` with `xs[i] ≤ x ≤ xs[i+1]` (clamped to the table).
fn segment(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    match xs.binary_search_by(|p| p.partial_cmp(&x).unwrap_or(core::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(i) => i.saturating_sub(1).min(n - 2),
    }
}
