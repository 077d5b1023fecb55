//! Bounded approximations `h_n = min(h, n)` and the induced reaction terms
//!
//! ```text
//! g_n(v) = g(v)                              for v ≤ ψ(σ_n),
//!        = max(g(ψ(σ_n)) − n (v − ψ(σ_n)), 0) beyond,
//! ```
//!
//! where `h(σ_n) = n`. `g_n` is Lipschitz with constant `n`, vanishes from
//! `L_n = ψ(σ_n) + g(ψ(σ_n))/n` on, and decreases to `g` as `n` grows.

use crate::error::{Error, Result};
use crate::math::{exp_m1, ln_1p};
use crate::transform::Transform;

/// `h_n`, `g_n` and the associated levels for one truncation parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNonlinearity {
    n: f64,
    sigma_n: f64,
    gap_n: f64,
    psi_n: f64,
    g_at_psi_n: f64,
    ceiling_n: f64,
    degenerate: bool,
}

/// Truncate at level `n`. When `n ≤ h(0)` the truncation is `h_n ≡ n`
/// with `σ_n = 0` and the `degenerate` flag set.
pub fn truncate(t: &Transform, n: f64) -> Result<TruncatedNonlinearity> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::invalid("truncation level n must be positive and finite"));
    }
    let nl = t.source();
    let sigma = t.sigma();
    if n <= nl.h(0.0) {
        return Ok(TruncatedNonlinearity {
            n,
            sigma_n: 0.0,
            gap_n: sigma,
            psi_n: 0.0,
            g_at_psi_n: 1.0,
            ceiling_n: 1.0 / n,
            degenerate: true,
        });
    }
    // h(σ − y) decreases in the gap y: bisect for h = n.
    let (mut lo, mut hi) = (0.0_f64, sigma);
    for _ in 0..2000 {
        let mid = if lo > 0.0 && hi / lo > 4.0 {
            libm::sqrt(lo * hi)
        } else if lo == 0.0 && hi > 1e-300 {
            hi * 1e-3
        } else {
            0.5 * (lo + hi)
        };
        if nl.h_gap(mid) >= n {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let gap_n = 0.5 * (lo + hi);
    let sigma_n = sigma - gap_n;
    let psi_n = t.ceiling() - t.psi_deficit_gap(gap_n);
    let g_at_psi_n = t.g_at_gap(gap_n);
    Ok(TruncatedNonlinearity {
        n,
        sigma_n,
        gap_n,
        psi_n,
        g_at_psi_n,
        ceiling_n: psi_n + g_at_psi_n / n,
        degenerate: false,
    })
}

impl TruncatedNonlinearity {
    pub fn n(&self) -> f64 {
        self.n
    }

    /// `σ_n` with `h(σ_n) = n`.
    pub fn sigma_n(&self) -> f64 {
        self.sigma_n
    }

    /// `σ − σ_n`.
    pub fn gap_n(&self) -> f64 {
        self.gap_n
    }

    /// `ψ(σ_n)`: above this level `g_n` is a linear ramp.
    pub fn psi_n(&self) -> f64 {
        self.psi_n
    }

    /// `L_n`, where `g_n` reaches zero.
    pub fn ceiling_n(&self) -> f64 {
        self.ceiling_n
    }

    /// Set when `n ≤ h(0)`, so that no `σ_n` exists.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Lipschitz constant of `g_n`.
    pub fn lipschitz(&self) -> f64 {
        self.n
    }

    pub fn h_n(&self, t: &Transform, s: f64) -> f64 {
        if s > self.sigma_n || self.degenerate {
            self.n.min(t.source().h(s))
        } else {
            t.source().h(s)
        }
    }

    /// `h_n′(s)` (zero on the constant branch).
    pub fn h_n_prime(&self, t: &Transform, s: f64) -> f64 {
        if s > self.sigma_n || self.degenerate {
            if t.source().h(s) < self.n {
                t.source().h_prime(s)
            } else {
                0.0
            }
        } else {
            t.source().h_prime(s)
        }
    }

    pub fn g_n(&self, t: &Transform, v: f64) -> f64 {
        if v <= self.psi_n && !self.degenerate {
            t.g(v)
        } else {
            (self.g_at_psi_n - self.n * (v - self.psi_n)).max(0.0)
        }
    }

    /// `g_n′(v)`; on the ramp `−n`, past `L_n` zero.
    pub fn g_n_prime(&self, t: &Transform, v: f64) -> f64 {
        if v <= self.psi_n && !self.degenerate {
            let d = t.g_prime(v);
            d.max(-self.n)
        } else if v < self.ceiling_n {
            -self.n
        } else {
            0.0
        }
    }

    /// True when `v` lies where the truncation is active (`v > ψ(σ_n)`).
    pub fn is_truncated(&self, v: f64) -> bool {
        v > self.psi_n
    }

    /// `ψ_n(u) = ∫_0^u e^{−H_n}`, the transform built from `h_n`.
    pub fn psi_n_at(&self, t: &Transform, u: f64) -> f64 {
        if u <= self.sigma_n && !self.degenerate {
            return t.psi_at(u);
        }
        let excess = u - self.sigma_n;
        self.psi_n - self.g_at_psi_n * exp_m1(-self.n * excess) / self.n
    }

    /// Inverse of [`psi_n_at`](Self::psi_n_at) on `[0, L_n)`.
    pub fn psi_n_inv(&self, t: &Transform, v: f64) -> f64 {
        if v <= self.psi_n && !self.degenerate {
            return t.level(v).s;
        }
        let q = self.n * (v - self.psi_n) / self.g_at_psi_n;
        if q >= 1.0 {
            return f64::INFINITY;
        }
        self.sigma_n - ln_1p(-q) / self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Nonlinearity;

    fn model(gamma: f64) -> Transform {
        Transform::new(Nonlinearity::model_power(1.0, gamma, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn anchors() {
        let t = model(1.0);
        let tr = truncate(&t, 10.0).unwrap();
        assert!((tr.sigma_n() - 0.9).abs() < 1e-12);
        assert_eq!(tr.h_n(&t, 0.95), 10.0);
        assert!((tr.h_n(&t, 0.5) - 2.0).abs() < 1e-15);
        let p = tr.psi_n();
        assert_eq!(tr.g_n(&t, p), t.g(p));
        // ψ(0.9) = 0.9 − 0.405, g = 0.1
        assert!((p - 0.495).abs() < 1e-12);
        assert!((tr.ceiling_n() - 0.505).abs() < 1e-12);
        assert_eq!(tr.g_n(&t, 0.6), 0.0);
        assert!(!tr.is_degenerate());
    }

    #[test]
    fn degenerate_truncation() {
        let t = model(1.0);
        let tr = truncate(&t, 0.5).unwrap();
        assert!(tr.is_degenerate());
        assert_eq!(tr.sigma_n(), 0.0);
        assert_eq!(tr.h_n(&t, 0.3), 0.5);
        assert!(truncate(&t, 0.0).is_err());
    }

    #[test]
    fn sigma_n_increases_to_sigma() {
        for gamma in [0.5, 1.0, 1.5, 2.0] {
            let t = model(gamma);
            let mut prev = 0.0;
            for k in 1..=8 {
                let tr = truncate(&t, libm::pow(10.0, k as f64)).unwrap();
                assert!(tr.sigma_n() > prev);
                // h(σ_n) = n
                let rel = t.source().h_gap(tr.gap_n()) / tr.n() - 1.0;
                assert!(rel.abs() < 1e-12, "gamma {gamma} k {k}: {rel}");
                prev = tr.sigma_n();
            }
            assert!(1.0 - prev < 0.02);
        }
    }

    #[test]
    fn psi_n_round_trip() {
        let t = model(1.0);
        let tr = truncate(&t, 100.0).unwrap();
        for &u in &[0.0, 0.5, 0.99, 0.995, 1.0, 1.02] {
            let v = tr.psi_n_at(&t, u);
            let back = tr.psi_n_inv(&t, v);
            assert!((back - u).abs() < 1e-9, "u = {u}: {back}");
        }
    }
}
