//! The change of variables `v = ψ(u)`.
//!
//! ```text
//! H(s) = ∫_0^s h,   ψ(s) = ∫_0^s e^{−H},   L = ψ(σ),
//! g(v) = e^{−H(ψ⁻¹(v))},   g′(v) = −h(ψ⁻¹(v)),   G(v) = ∫_0^v g.
//! ```
//!
//! For `h(s) = A/(σ − s)` everything is available in closed form. Otherwise
//! the cumulative integrals of `e^{−H}` and `e^{−2H}` are tabulated on 4096
//! Chebyshev nodes in `s` and interpolated by monotone cubic Hermite pieces
//! with exact node slopes. Both the prefix (`∫_0^s`) and the tail (`∫_s^σ`)
//! are stored, so quantities close to the ceiling keep relative precision.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::interp::Cell;
use crate::math::{acos, asin, exp, exp_m1, ln_1p, powf, sqrt};
use crate::nonlinearity::{IntegrabilityReport, Nonlinearity, NonlinearityKind};
use crate::quad::{gauss_kronrod, simpson};

/// Number of Chebyshev nodes used by the tables.
pub const TABLE_NODES: usize = 4096;

const CELL_TOLERANCE: f64 = 1e-13;

/// A real number that may be infinite, as reported to callers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
    NegInfinity,
}

impl Extended {
    pub fn from_f64(x: f64) -> Self {
        if x == f64::INFINITY {
            Extended::PosInfinity
        } else if x == f64::NEG_INFINITY {
            Extended::NegInfinity
        } else {
            Extended::Finite(x)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Extended::Finite(x) => x,
            Extended::PosInfinity => f64::INFINITY,
            Extended::NegInfinity => f64::NEG_INFINITY,
        }
    }
}

/// A point `s = ψ⁻¹(v)` together with its gap `σ − s`, each accurate in its
/// own right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level {
    pub s: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
enum Repr {
    /// `h = A/(σ−s)`.
    Closed { a: f64 },
    Tables(Tables),
}

#[derive(Debug, Clone)]
struct Tables {
    s: Vec<f64>,
    gap: Vec<f64>,
    /// `e^{−H}` and `e^{−2H}` at the nodes.
    e1: Vec<f64>,
    e2: Vec<f64>,
    /// Prefix and tail integrals of `e^{−H}` and `e^{−2H}`.
    p1: Vec<f64>,
    t1: Vec<f64>,
    p2: Vec<f64>,
    t2: Vec<f64>,
}

/// Cached evaluators for `H`, `ψ`, `ψ⁻¹`, `g`, `g′` and `G`.
#[derive(Debug, Clone)]
pub struct Transform {
    source: Nonlinearity,
    ceiling: f64,
    g_total: f64,
    report: IntegrabilityReport,
    repr: Repr,
}

impl Transform {
    pub fn new(source: Nonlinearity) -> Result<Self> {
        let report = source.classify();
        let sigma = source.sigma();
        if let NonlinearityKind::ModelPower { a, gamma } = *source.kind() {
            if gamma == 1.0 {
                return Ok(Transform {
                    ceiling: sigma / (a + 1.0),
                    g_total: sigma / (2.0 * a + 1.0),
                    report,
                    repr: Repr::Closed { a },
                    source,
                });
            }
        }
        let tables = Tables::build(&source)?;
        let ceiling = tables.p1[TABLE_NODES - 1];
        let g_total = tables.p2[TABLE_NODES - 1];
        if !(ceiling > 0.0) || !ceiling.is_finite() {
            return Err(Error::invalid("psi(sigma) is not a positive finite number"));
        }
        Ok(Transform {
            source,
            ceiling,
            g_total,
            report,
            repr: Repr::Tables(tables),
        })
    }

    pub fn source(&self) -> &Nonlinearity {
        &self.source
    }

    pub fn sigma(&self) -> f64 {
        self.source.sigma()
    }

    /// The ceiling `L = ψ(σ)`.
    pub fn ceiling(&self) -> f64 {
        self.ceiling
    }

    pub fn integrability(&self) -> IntegrabilityReport {
        self.report
    }

    /// True when exact formulas replace the tables.
    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, Repr::Closed { .. })
    }

    /// `H(s)` for `0 ≤ s < σ`.
    #[allow(non_snake_case)]
    pub fn eval_H(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0 && s < self.sigma()) {
            return Err(Error::Domain {
                what: "H (may be infinite at sigma; query h_integrable first)",
                value: s,
            });
        }
        Ok(self.source.big_h(s))
    }

    /// `ψ(s)` for `0 ≤ s ≤ σ`.
    pub fn eval_psi(&self, s: f64) -> Result<f64> {
        let sigma = self.sigma();
        if !(s >= 0.0 && s <= sigma) {
            return Err(Error::Domain { what: "psi", value: s });
        }
        Ok(self.psi_at(s))
    }

    /// `ψ⁻¹(v)` for `0 ≤ v ≤ L`.
    pub fn eval_psi_inv(&self, v: f64) -> Result<f64> {
        self.check_v(v, "psi_inv")?;
        Ok(self.level(v).s)
    }

    /// `g(v)` for `0 ≤ v ≤ L`.
    pub fn eval_g(&self, v: f64) -> Result<f64> {
        self.check_v(v, "g")?;
        Ok(self.g(v))
    }

    /// `g′(v) = −h(ψ⁻¹(v))`; at the ceiling the limit `−∞` is reported.
    pub fn eval_g_prime(&self, v: f64) -> Result<Extended> {
        self.check_v(v, "g_prime")?;
        Ok(Extended::from_f64(self.g_prime(v)))
    }

    /// `G(v) = ∫_0^v g`.
    #[allow(non_snake_case)]
    pub fn eval_G(&self, v: f64) -> Result<f64> {
        self.check_v(v, "G")?;
        Ok(self.g_total - self.big_g_deficit_gap(self.level(v).gap))
    }

    fn check_v(&self, v: f64, what: &'static str) -> Result<()> {
        if v >= 0.0 && v <= self.ceiling {
            Ok(())
        } else {
            Err(Error::Domain { what, value: v })
        }
    }

    /// `G(L) = ∫_0^L g`.
    pub fn g_total(&self) -> f64 {
        self.g_total
    }

    /// `ψ(s)`, clamped to `[0, σ]`.
    pub fn psi_at(&self, s: f64) -> f64 {
        let sigma = self.sigma();
        let s = s.clamp(0.0, sigma);
        if s > 0.5 * sigma {
            return self.ceiling - self.psi_deficit_gap(sigma - s);
        }
        match &self.repr {
            Repr::Closed { a } => {
                // L (1 − (1 − s/σ)^{A+1})
                -self.ceiling * exp_m1((a + 1.0) * ln_1p(-s / sigma))
            }
            Repr::Tables(t) => {
                let (j, u) = t.locate(sigma, s, sigma - s);
                t.prefix1(j).eval(u)
            }
        }
    }

    /// `L − ψ(σ − y)` for a gap `y ≥ 0`.
    pub fn psi_deficit_gap(&self, y: f64) -> f64 {
        let sigma = self.sigma();
        let y = y.clamp(0.0, sigma);
        match &self.repr {
            Repr::Closed { a } => self.ceiling * powf(y / sigma, a + 1.0),
            Repr::Tables(t) => {
                let (j, u) = t.locate(sigma, sigma - y, y);
                t.tail1(j).eval(u).max(0.0)
            }
        }
    }

    /// `ψ(σ − y)`, taking the accurate route on either side.
    pub fn v_at_gap(&self, y: f64) -> f64 {
        let sigma = self.sigma();
        if y < 0.5 * sigma {
            self.ceiling - self.psi_deficit_gap(y)
        } else {
            self.psi_at(sigma - y)
        }
    }

    /// `G(L) − G(ψ(σ − y)) = ∫_{σ−y}^{σ} e^{−2H}`.
    pub fn big_g_deficit_gap(&self, y: f64) -> f64 {
        let sigma = self.sigma();
        let y = y.clamp(0.0, sigma);
        match &self.repr {
            Repr::Closed { a } => self.g_total * powf(y / sigma, 2.0 * a + 1.0),
            Repr::Tables(t) => {
                let (j, u) = t.locate(sigma, sigma - y, y);
                t.tail2(j).eval(u).max(0.0)
            }
        }
    }

    /// `e^{−H(σ−y)}`, i.e. `g` at the level with gap `y`.
    pub fn g_at_gap(&self, y: f64) -> f64 {
        match &self.repr {
            Repr::Closed { a } => powf(y.max(0.0) / self.sigma(), *a),
            Repr::Tables(_) => exp(-self.source.big_h_gap(y.max(0.0))),
        }
    }

    /// The level `ψ⁻¹(v)`; `v` is clamped to `[0, L]`.
    pub fn level(&self, v: f64) -> Level {
        let l = self.ceiling;
        let sigma = self.sigma();
        if !(v > 0.0) {
            return Level { s: 0.0, gap: sigma };
        }
        if v >= l {
            return Level { s: sigma, gap: 0.0 };
        }
        match &self.repr {
            Repr::Closed { a } => {
                // y/σ = (1 − v/L)^{1/(A+1)}
                let q = ln_1p(-v / l) / (a + 1.0);
                let s = -sigma * exp_m1(q);
                let gap = if v > 0.5 * l {
                    sigma * powf((l - v) / l, 1.0 / (a + 1.0))
                } else {
                    sigma - s
                };
                Level { s, gap }
            }
            Repr::Tables(t) => {
                let (j, u) = if v <= 0.5 * l {
                    let j = search_increasing(&t.p1, v);
                    (j, t.prefix1(j).invert(v))
                } else {
                    let target = l - v;
                    let j = search_decreasing(&t.t1, target);
                    (j, t.tail1(j).invert(target))
                };
                let gap = t.gap[j] - u * (t.gap[j] - t.gap[j + 1]);
                let s = t.s[j] + u * (t.s[j + 1] - t.s[j]);
                Level { s, gap }
            }
        }
    }

    /// `g(v)` without range checks (clamped).
    pub fn g(&self, v: f64) -> f64 {
        if v >= self.ceiling {
            return self.g_at_gap(0.0);
        }
        match &self.repr {
            Repr::Closed { a } => {
                let v = v.max(0.0);
                powf((self.ceiling - v) / self.ceiling, a / (a + 1.0))
            }
            Repr::Tables(_) => self.g_at_gap(self.level(v).gap),
        }
    }

    /// `g′(v)` without range checks; `−∞` at and beyond the ceiling.
    pub fn g_prime(&self, v: f64) -> f64 {
        if v >= self.ceiling {
            return f64::NEG_INFINITY;
        }
        -self.source.h_gap(self.level(v).gap)
    }

    /// The scaled tail kernel
    /// `K(y_lo, y_hi) = ∫_{y_lo}^{y_hi} e^{−2(H(σ−t) − H(σ−y_hi))} dt`
    /// for gaps `0 ≤ y_lo ≤ y_hi ≤ σ`. In the original variables this is
    /// `(G(ψ(σ−y_lo)) − G(ψ(σ−y_hi))) / g(ψ(σ−y_hi))²`.
    pub fn scaled_kernel(&self, y_lo: f64, y_hi: f64) -> f64 {
        if y_hi <= y_lo {
            return 0.0;
        }
        self.scaled_kernel_span(y_lo, y_hi - y_lo)
    }

    /// [`scaled_kernel`](Self::scaled_kernel) with the upper gap given as
    /// `y_lo + span`, accurate even when `span` is below the resolution of
    /// `y_lo`.
    pub fn scaled_kernel_span(&self, y_lo: f64, span: f64) -> f64 {
        if !(span > 0.0) {
            return 0.0;
        }
        let y_hi = (y_lo + span).min(self.sigma());
        let span = span.min(y_hi);
        if let Repr::Closed { a } = self.repr {
            let p = 2.0 * a + 1.0;
            // y_hi/p · (1 − (y_lo/y_hi)^p)
            let factor = if y_lo > 0.5 * y_hi {
                -exp_m1(p * ln_1p(-span / y_hi))
            } else {
                1.0 - powf(y_lo / y_hi, p)
            };
            return y_hi / p * factor;
        }
        let nl = &self.source;
        let h = nl.h_gap(y_hi);
        if h * y_hi > 1e6 || (h * span < 1e-6 && span <= 1e-3 * y_hi) {
            // The integrand e^{−2(H(s+t)−H(s))} decays on the scale 1/(2h)
            // (or the span is short on that scale); use the Laplace
            // expansion H(s+t) − H(s) = h t + h′ t²/2 + …
            let x = 2.0 * h * span;
            let head = if h == 0.0 { span } else { -exp_m1(-x) / (2.0 * h) };
            // h′ ∫_0^span t² e^{−2ht} dt, with the integral
            // (1 − e^{−x}(1 + x + x²/2)) / (4h³); written through h′/h so
            // that nothing overflows where h is huge.
            let rel = nl.log_derivative_gap(y_hi);
            let correction = if x < 1e-3 {
                rel * h * span * span * span / 3.0
            } else {
                let cut = if x > 700.0 { 0.0 } else { exp(-x) * (1.0 + x + 0.5 * x * x) };
                rel * (1.0 - cut) / (4.0 * h * h)
            };
            return head - correction;
        }
        // Integrate in the offset τ = y_hi − t ∈ [0, span]. The integrand
        // decreases in τ: doubling pieces resolve the peak at τ = 0 (decay
        // length 1/(2h)), halving pieces the far end t → y_lo, where h may
        // have an integrable singularity.
        let f = |tau: f64| exp(-2.0 * nl.big_h_offset(y_hi, tau));
        let half = 0.5 * span;
        let mut total = 0.0;
        let mut lo = 0.0;
        let mut w = (0.5 / h).min(half);
        while lo < half {
            let hi = (lo + w).min(half);
            total += gauss_kronrod(f, lo, hi, 1e-13, 0.0);
            // Monotone integrand: the rest is at most f(hi)·(span − hi).
            if f(hi) * (span - hi) <= 1e-17 * total {
                return total;
            }
            lo = hi;
            w *= 2.0;
        }
        // Far end in the distance δ = t − y_lo, which stays exact there.
        let fb = |delta: f64| exp(-2.0 * nl.big_h_between_gaps(y_lo + delta, y_hi));
        let mut d = span - half;
        while d > 0.0 {
            if d <= y_lo {
                // The singular point t = 0 is at least d away: one piece.
                total += gauss_kronrod(fb, 0.0, d, 1e-13, 0.0);
                break;
            }
            total += gauss_kronrod(fb, 0.5 * d, d, 1e-13, 0.0);
            if fb(0.5 * d) * 0.5 * d <= 1e-17 * total {
                break;
            }
            d *= 0.5;
        }
        total
    }
}

impl Tables {
    fn build(nl: &Nonlinearity) -> Result<Self> {
        let m = TABLE_NODES;
        let sigma = nl.sigma();
        let mut s = Vec::with_capacity(m);
        let mut gap = Vec::with_capacity(m);
        for j in 0..m {
            let half = 0.5 * PI * j as f64 / (m - 1) as f64;
            let (sh, ch) = (libm::sin(half), libm::cos(half));
            s.push(sigma * sh * sh);
            gap.push(sigma * ch * ch);
        }
        s[0] = 0.0;
        gap[0] = sigma;
        s[m - 1] = sigma;
        gap[m - 1] = 0.0;

        let e1: Vec<f64> = gap.iter().map(|&y| exp(-nl.big_h_gap(y))).collect();
        let e2: Vec<f64> = e1.iter().map(|&e| e * e).collect();
        let mut c1 = Vec::with_capacity(m - 1);
        let mut c2 = Vec::with_capacity(m - 1);
        for j in 0..m - 1 {
            let (hi, lo) = (gap[j], gap[j + 1]);
            c1.push(simpson(|y| exp(-nl.big_h_gap(y)), lo, hi, CELL_TOLERANCE, 0.0));
            c2.push(simpson(|y| exp(-2.0 * nl.big_h_gap(y)), lo, hi, CELL_TOLERANCE, 0.0));
        }
        let cumulate = |c: &[f64]| {
            let mut p = Vec::with_capacity(m);
            let mut acc = 0.0;
            p.push(0.0);
            for &x in c {
                acc += x;
                p.push(acc);
            }
            let mut t = alloc::vec![0.0; m];
            let mut acc = 0.0;
            for j in (0..m - 1).rev() {
                acc += c[j];
                t[j] = acc;
            }
            (p, t)
        };
        let (p1, t1) = cumulate(&c1);
        let (p2, t2) = cumulate(&c2);
        if p1.iter().chain(p2.iter()).any(|x| !x.is_finite()) {
            return Err(Error::invalid("transform tables are not finite"));
        }
        Ok(Tables { s, gap, e1, e2, p1, t1, p2, t2 })
    }

    fn width(&self, j: usize) -> f64 {
        self.gap[j] - self.gap[j + 1]
    }

    fn prefix1(&self, j: usize) -> Cell {
        Cell::monotone(self.width(j), self.p1[j], self.p1[j + 1], self.e1[j], self.e1[j + 1])
    }

    fn tail1(&self, j: usize) -> Cell {
        Cell::monotone(self.width(j), self.t1[j], self.t1[j + 1], -self.e1[j], -self.e1[j + 1])
    }

    fn tail2(&self, j: usize) -> Cell {
        Cell::monotone(self.width(j), self.t2[j], self.t2[j + 1], -self.e2[j], -self.e2[j + 1])
    }

    /// Cell index and local coordinate of the point `s` (with gap `y`).
    fn locate(&self, sigma: f64, s: f64, y: f64) -> (usize, f64) {
        let m = TABLE_NODES;
        // Nodes are s_j = σ sin²(θ_j/2) with θ_j = jπ/(m−1).
        let half = if s <= 0.5 * sigma {
            asin(sqrt(s / sigma).min(1.0))
        } else {
            acos(sqrt(y / sigma).min(1.0))
        };
        let mut j = ((2.0 * half / PI) * (m - 1) as f64) as usize;
        j = j.min(m - 2);
        while j > 0 && self.gap[j] < y {
            j -= 1;
        }
        while j < m - 2 && self.gap[j + 1] > y {
            j += 1;
        }
        let u = ((self.gap[j] - y) / self.width(j)).clamp(0.0, 1.0);
        (j, u)
    }
}

/// Cell `j` with `xs[j] ≤ x ≤ xs[j+1]` for nondecreasing `xs`.
fn search_increasing(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    let i = xs.partition_point(|&p| p <= x);
    i.saturating_sub(1).min(n - 2)
}

/// Cell `j` with `xs[j] ≥ x ≥ xs[j+1]` for nonincreasing `xs`.
fn search_decreasing(xs: &[f64], x: f64) -> usize {
    let n = xs.len();
    let i = xs.partition_point(|&p| p >= x);
    i.saturating_sub(1).min(n - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(a: f64, gamma: f64) -> Transform {
        Transform::new(Nonlinearity::model_power(a, gamma, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn closed_form_anchors() {
        let t = model(1.0, 1.0);
        assert!(t.is_closed_form());
        assert_eq!(t.eval_H(0.0).unwrap(), 0.0);
        assert!((t.eval_H(0.5).unwrap() - core::f64::consts::LN_2).abs() < 1e-15);
        assert!((t.eval_psi(0.8).unwrap() - 0.48).abs() < 1e-15);
        assert_eq!(t.eval_psi(1.0).unwrap(), 0.5);
        assert_eq!(t.ceiling(), 0.5);
        assert!((t.eval_psi_inv(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((t.eval_psi_inv(0.375).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(t.eval_psi_inv(0.0).unwrap(), 0.0);
        assert!((t.eval_g(0.375).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(t.eval_g(0.0).unwrap(), 1.0);
        assert_eq!(t.eval_g(0.5).unwrap(), 0.0);
        assert_eq!(t.eval_g_prime(0.0).unwrap(), Extended::Finite(-1.0));
        let d = t.eval_g_prime(0.375).unwrap().finite().unwrap();
        assert!((d + 2.0).abs() < 1e-14);
        assert_eq!(t.eval_g_prime(0.5).unwrap(), Extended::NegInfinity);
        assert!((t.eval_G(0.5).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.eval_G(0.375).unwrap() - 0.875 / 3.0).abs() < 1e-15);
        assert_eq!(t.eval_G(0.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        let t = model(1.0, 1.0);
        assert!(t.eval_H(1.0).is_err());
        assert!(t.eval_psi(1.1).is_err());
        assert!(t.eval_psi(-0.1).is_err());
        assert!(t.eval_psi_inv(0.6).is_err());
        assert!(t.eval_g(-1e-3).is_err());
    }

    #[test]
    fn tables_match_closed_form_half_power() {
        // γ = 1/2, A = 1: H(σ) = 2, ψ(σ) = (1 + e^{−2})/2.
        let t = model(1.0, 0.5);
        assert!(!t.is_closed_form());
        let e2 = exp(-2.0);
        assert!((t.ceiling() - 0.5 * (1.0 + e2)).abs() < 1e-12);
        assert!((t.source().big_h_gap(0.0) - 2.0).abs() < 1e-15);
        // ψ(s) = e^{−2} [ (√y − 1/2) e^{2√y} ]_{y}^{1} with y = 1 − s
        let psi = |s: f64| {
            let w = sqrt(1.0 - s);
            e2 * (0.5 * exp(2.0) - (w - 0.5) * exp(2.0 * w))
        };
        for &s in &[0.0, 0.1, 0.37, 0.5, 0.9, 0.999, 1.0] {
            assert!((t.psi_at(s) - psi(s)).abs() < 1e-12, "s = {s}");
        }
        // g at the ceiling is e^{−H(σ)} > 0 when h is integrable.
        assert!((t.eval_g(t.ceiling()).unwrap() - e2).abs() < 1e-14);
    }

    #[test]
    fn tables_agree_with_closed_form_when_forced() {
        // γ = 1 through the table machinery (γ = 1 + tiny → tables).
        let t = model(1.0, 1.0 + 1e-14);
        assert!(!t.is_closed_form());
        let c = model(1.0, 1.0);
        assert!((t.ceiling() - 0.5).abs() < 1e-13);
        // At v = L itself g has infinite slope, so the comparison stops short.
        for i in 0..50 {
            let v = 0.5 * i as f64 / 50.0;
            assert!((t.g(v) - c.g(v)).abs() < 1e-9, "v = {v}");
            assert!((t.eval_G(v).unwrap() - c.eval_G(v).unwrap()).abs() < 1e-12);
            assert!((t.level(v).s - c.level(v).s).abs() < 1e-10);
        }
        for &y in &[1e-9, 1e-4, 0.3, 0.9] {
            let k1 = t.scaled_kernel(0.0, y);
            let k2 = c.scaled_kernel(0.0, y);
            assert!((k1 - k2).abs() < 1e-12 * k2 + 1e-22, "y = {y}: {k1} vs {k2}");
            let k1 = t.scaled_kernel(0.3 * y, y);
            let k2 = c.scaled_kernel(0.3 * y, y);
            assert!((k1 - k2).abs() < 1e-12 * k2, "y = {y}");
        }
    }

    #[test]
    fn kernel_peak_limit() {
        // K(0, y) ~ 1/(2 h(σ−y)) as y → 0 for γ > 1.
        let t = model(1.0, 1.5);
        for &y in &[1e-8, 1e-20, 1e-40] {
            let k = t.scaled_kernel(0.0, y);
            let approx = 0.5 * powf(y, 1.5);
            assert!((k / approx - 1.0).abs() < 3.0 * sqrt(y) + 1e-10, "y = {y}: {k} vs {approx}");
        }
    }

    #[test]
    fn g_is_monotone_and_bounded() {
        for gamma in [0.5, 1.0, 1.5, 2.0] {
            let t = model(1.0, gamma);
            let l = t.ceiling();
            let mut prev = 1.0 + 1e-15;
            for i in 0..=400 {
                let v = l * i as f64 / 400.0;
                let g = t.eval_g(v).unwrap();
                assert!(g <= prev && g >= 0.0, "gamma {gamma} v {v}");
                prev = g;
            }
            assert!((t.eval_g(0.0).unwrap() - 1.0).abs() < 1e-15);
            if gamma >= 1.0 {
                assert_eq!(t.eval_g(l).unwrap(), 0.0);
            }
        }
    }
}
