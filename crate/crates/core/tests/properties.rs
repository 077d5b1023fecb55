//! Structural properties over the model family `γ ∈ {0.5, 1, 1.5, 2}`.

use flatzone_core::{bvp, diagnostics, shooting, truncate, Extended, Grid, Nonlinearity, SolveOptions, Transform};
use proptest::prelude::*;
use std::sync::OnceLock;

const GAMMAS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];

fn model(gamma: f64) -> &'static Transform {
    static CACHE: OnceLock<Vec<Transform>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        GAMMAS
            .iter()
            .map(|&g| Transform::new(Nonlinearity::model_power(1.0, g, 1.0).unwrap()).unwrap())
            .collect()
    });
    &all[GAMMAS.iter().position(|&g| g == gamma).unwrap()]
}

fn gamma() -> impl Strategy<Value = f64> {
    prop::sample::select(GAMMAS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncations_are_ordered(gamma in gamma(), s in 0.0..0.999_f64, e1 in 1.0..5.0_f64, de in 0.1..3.0_f64) {
        let t = model(gamma);
        let (n1, n2) = (10f64.powf(e1), 10f64.powf(e1 + de));
        let a = truncate(t, n1).unwrap();
        let b = truncate(t, n2).unwrap();
        let h = t.source().h(s);
        prop_assert!(a.h_n(t, s) <= b.h_n(t, s) && b.h_n(t, s) <= h);
        let v = s * t.ceiling();
        let g = t.g(v);
        prop_assert!(a.g_n(t, v) >= b.g_n(t, v) - 1e-15);
        prop_assert!(b.g_n(t, v) >= g - 1e-15);
        prop_assert!(a.sigma_n() < b.sigma_n());
    }

    #[test]
    fn psi_is_inverted_in_level_space(gamma in gamma(), x in 0.0..=1.0_f64) {
        let t = model(gamma);
        let v = x * t.ceiling();
        let s = t.eval_psi_inv(v).unwrap();
        prop_assert!((t.eval_psi(s).unwrap() - v).abs() <= 1e-12 * t.ceiling());
    }

    #[test]
    fn g_prime_matches_differences(gamma in gamma(), x in 0.0..0.9_f64) {
        let t = model(gamma);
        let l = t.ceiling();
        let v = (x * l).max(1e-5);
        let step = 1e-5;
        let fd = (t.eval_g(v + step).unwrap() - t.eval_g(v - step).unwrap()) / (2.0 * step);
        let gp = t.eval_g_prime(v).unwrap().to_f64();
        let tol = if gamma == 1.0 { 1e-4 } else { 1e-4 * gp.abs().max(1.0) };
        prop_assert!((gp - fd).abs() <= tol, "v {} g' {} fd {}", v, gp, fd);
    }

    #[test]
    fn g_is_decreasing_and_bounded(gamma in gamma(), a in 0.0..=1.0_f64, b in 0.0..=1.0_f64) {
        let t = model(gamma);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (gl, gh) = (t.g(lo * t.ceiling()), t.g(hi * t.ceiling()));
        prop_assert!((0.0..=1.0).contains(&gl) && (0.0..=1.0).contains(&gh));
        prop_assert!(gh <= gl);
    }

    #[test]
    fn first_integral_holds(gamma in gamma(), x in 0.05..=1.0_f64, lambda in 0.5..50.0_f64) {
        let t = model(gamma);
        let ell = x * t.ceiling();
        if gamma == 2.0 && x == 1.0 {
            return Ok(());
        }
        let p = shooting::trace(t, ell, lambda, 64).unwrap();
        prop_assert!(p.first_integral_residual(t) <= 1e-8);
        prop_assert!(p.samples.windows(2).all(|w| w[1].v < w[0].v && w[1].s > w[0].s));
    }

    #[test]
    fn radius_scales_with_lambda(gamma in gamma(), x in 0.05..0.999_f64, lambda in 0.1..100.0_f64) {
        let t = model(gamma);
        let ell = x * t.ceiling();
        let r1 = shooting::radius(t, ell, 1.0).unwrap().to_f64();
        let r = shooting::radius(t, ell, lambda).unwrap().to_f64();
        prop_assert!((r * lambda.sqrt() - r1).abs() <= 1e-10 * r1);
    }

    #[test]
    fn radius_increases_with_level(gamma in gamma(), a in 0.05..0.999_f64, b in 0.05..0.999_f64) {
        prop_assume!((a - b).abs() > 1e-6);
        let t = model(gamma);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r_lo = shooting::radius(t, lo * t.ceiling(), 1.0).unwrap().to_f64();
        let r_hi = shooting::radius(t, hi * t.ceiling(), 1.0).unwrap().to_f64();
        prop_assert!(r_lo < r_hi);
    }
}

/// The round trip `ψ⁻¹(ψ(s)) = s` on 1000 uniform points of `[0, σ − 10⁻⁶]`
/// holds to `10⁻⁸ σ` when `ψ′ = e^{−H}` stays resolvable near `σ`.
#[test]
fn psi_round_trip_integrable_h() {
    for gamma in [0.5, 1.0] {
        let t = model(gamma);
        let top = t.sigma() - 1e-6;
        let worst = (0..1000)
            .map(|i| top * i as f64 / 999.0)
            .map(|s| (t.eval_psi_inv(t.eval_psi(s).unwrap()).unwrap() - s).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8 * t.sigma(), "gamma {gamma}: {worst:e}");
    }
}

/// For `γ > 1` the same round trip holds wherever `ψ′(s)` exceeds the f64
/// spacing of `L` (gaps above a few percent of `σ`).
#[test]
fn psi_round_trip_away_from_sigma() {
    for gamma in [1.5, 2.0] {
        let t = model(gamma);
        let top = t.sigma() - 0.1;
        let worst = (0..1000)
            .map(|i| top * i as f64 / 999.0)
            .map(|s| (t.eval_psi_inv(t.eval_psi(s).unwrap()).unwrap() - s).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8 * t.sigma(), "gamma {gamma}: {worst:e}");
    }
}

/// `∫₀^{L−ε} dt / √(G(L) − G(t))`, written in the gap variable as
/// `∫_{y_ε}^{σ} dy / √K(0, y)` and integrated by Simpson in `w = √y`.
fn dichotomy_integral(t: &Transform, eps: f64, panels: usize) -> f64 {
    let sigma = t.sigma();
    let (mut lo, mut hi) = (0.0_f64, sigma);
    if eps > 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if t.psi_deficit_gap(mid) < eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else {
        hi = 0.0;
    }
    let (a, b) = (hi.sqrt(), sigma.sqrt());
    let integrand = |w: f64| {
        let w = w.max(1e-150);
        2.0 * w / t.scaled_kernel(0.0, w * w).sqrt()
    };
    let step = (b - a) / panels as f64;
    let mut sum = integrand(a) + integrand(b);
    for i in 1..panels {
        let w = a + step * i as f64;
        sum += integrand(w) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * step / 3.0
}

#[test]
fn dichotomy_integral_finite_for_gamma_one() {
    let t = model(1.0);
    let coarse = dichotomy_integral(t, 0.0, 400);
    let fine = dichotomy_integral(t, 0.0, 1600);
    // The integrand is √3 (1 − 2t)^{−3/4}; the integral equals √12.
    assert!((fine - 12f64.sqrt()).abs() <= 1e-4, "{fine}");
    assert!((coarse - fine).abs() <= 1e-3, "{coarse} {fine}");
}

#[test]
fn dichotomy_integral_diverges_for_gamma_two() {
    let t = model(2.0);
    let values: Vec<f64> = [1e-2, 1e-4, 1e-6].iter().map(|&e| dichotomy_integral(t, e, 4000)).collect();
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{values:?}");
}

/// `R_ℓ` grows without bound as `ℓ → L` for `γ = 2`, but only like the log
/// of the gap `σ − ψ⁻¹(ℓ)`, which itself shrinks like `1/k` along
/// `ℓ = L(1 − 2⁻ᵏ)`; the growth per halving therefore slows down.
#[test]
fn divergent_radius_along_levels() {
    let t = model(2.0);
    let l = t.ceiling();
    let radii: Vec<f64> = (4..=48)
        .map(|k| shooting::radius(t, l * (1.0 - 0.5_f64.powi(k)), 1.0).unwrap().to_f64())
        .collect();
    assert!(radii.windows(2).all(|w| w[1] > w[0]), "{radii:?}");
    assert!(radii[44] > radii[12] + 0.9, "{radii:?}");
    assert_eq!(shooting::radius(t, l, 1.0).unwrap(), Extended::PosInfinity);
}

#[test]
fn solutions_increase_with_lambda_and_obey_energy_bound() {
    let m = 201;
    let grid = Grid::interval(1.0, m).unwrap();
    let f = vec![1.0; m];
    let opts = SolveOptions::default();
    for gamma in GAMMAS {
        let t = model(gamma);
        let sols: Vec<_> = [1.0, 3.0, 6.0, 9.0, 15.0]
            .iter()
            .map(|&lambda| bvp::solve_semilinear(t, lambda, &f, &grid, &opts).unwrap())
            .collect();
        for pair in sols.windows(2) {
            assert!(diagnostics::comparison_check(&pair[0], &pair[1]).unwrap(), "gamma {gamma}");
        }
        for s in &sols {
            let e = diagnostics::energy_bound_check(t, s, s.lambda, &f).unwrap();
            assert!(e.holds, "gamma {gamma} lambda {}: {e:?}", s.lambda);
        }
    }
}
