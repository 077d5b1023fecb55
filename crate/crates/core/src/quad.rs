//! Adaptive Simpson and Gauss–Kronrod quadrature.
//!
//! Integrands with integrable endpoint singularities are expected to be
//! desingularised by the caller (power substitutions); the routine itself
//! never evaluates exactly at a point the caller marks as singular, because
//! endpoint values are only requested through `f` and callers nudge inward.


const MAX_DEPTH: u32 = 48;
/// Refinement levels before the noise test in `gk_recurse` applies.
const NOISE_DEPTH: u32 = 8;

/// Integrate `f` over `[a, b]` to relative tolerance `rel` (with a tiny
/// absolute floor `abs`).
pub fn simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // A coarse first pass over a few panels fixes the tolerance scale so
    // that nearly-cancelling pieces do not chase noise.
    let scale = whole.abs().max(abs);
    let tol = (rel * scale).max(abs);
    recurse(&mut f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // A non-finite estimate cannot improve by refinement; stop here.
    if depth == 0 || !(delta.abs() > 15.0 * tol) || m <= a || m >= b {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

// Gauss–Kronrod 7/15 abscissae and weights on [−1, 1] (nonnegative half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod estimate and the difference to the embedded
/// 7-point Gauss rule.
fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * half, (k - g).abs() * half)
}

/// Adaptive Gauss–Kronrod 7/15 with bisection; the estimate must be
/// within `rel` of the first pass (or below `abs`).
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel: f64, abs: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = kronrod(&mut f, a, b);
    let tol = (rel * whole.abs()).max(abs);
    gk_recurse(&mut f, a, b, whole, err, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn gk_recurse<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    err: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    // The Gauss–Kronrod difference overestimates the Kronrod error by far;
    // a non-finite estimate cannot improve by refinement.
    if depth == 0 || !(err > tol) {
        return whole;
    }
    let m = 0.5 * (a + b);
    if m <= a || m >= b {
        return whole;
    }
    let (left, el) = kronrod(f, a, m);
    let (right, er) = kronrod(f, m, b);
    // Once an interval is well refined, halves whose combined estimate does
    // not improve on the parent's are measuring noise in the integrand
    // (e.g. a nested quadrature), not unresolved structure.
    if depth + NOISE_DEPTH <= MAX_DEPTH && el + er >= err {
        return left + right;
    }
    gk_recurse(f, a, m, left, el, 0.5 * tol, depth - 1)
        + gk_recurse(f, m, b, right, er, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;

    #[test]
    fn polynomial_is_exact() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12, 0.0);
        assert!((v - 0.0).abs() < 1e-12);
        let v = simpson(|x| x * x, 0.0, 3.0, 1e-12, 0.0);
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_integrand() {
        let v = simpson(exp, 0.0, 1.0, 1e-12, 0.0);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-11);
    }

    #[test]
    fn kronrod_smooth_and_peaked() {
        let v = gauss_kronrod(exp, 0.0, 1.0, 1e-13, 0.0);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-13);
        // ∫_0^1 e^{−1000x} = (1 − e^{−1000})/1000
        let v = gauss_kronrod(|x| exp(-1000.0 * x), 0.0, 1.0, 1e-13, 0.0);
        assert!((v * 1000.0 - 1.0).abs() < 1e-12, "{v}");
        let mut calls = 0;
        gauss_kronrod(|x| { calls += 1; libm::sin(x) }, 0.0, 1.0, 1e-13, 0.0);
        assert!(calls <= 45, "{calls}");
    }
}
