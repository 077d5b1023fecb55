//! The five subcommands. Each returns its CSV and JSON artifacts; nothing is
//! written until the whole computation has succeeded.

use flatzone_core::{
    bvp, diagnostics, shooting, thresholds, BvpSolution, CaseTag, Extended, Grid, Regime, Transform,
};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::config::{check_lambda, Resolved};
use crate::emit::{jext, jnum, jopt, num, report, Table};
use crate::CliError;

#[derive(Debug, Default)]
pub struct Output {
    pub csv: Option<String>,
    pub json: Option<Value>,
}

/// Rows `s, H, ψ` on `s = σ i / samples`, then `v, g, g′` on
/// `v = L i / samples`, `i = 0..samples`.
pub fn transform(r: &Resolved, samples: usize) -> Result<Output, CliError> {
    if samples == 0 {
        return Err(CliError::config("--samples must be positive"));
    }
    let t = r.transform()?;
    let config = r.echo("transform");
    let sigma = t.sigma();
    let l = t.ceiling();
    let mut first = Table::new(&config, &["s", "H", "psi"]);
    for i in 0..samples {
        let s = sigma * i as f64 / samples as f64;
        let h = t.eval_H(s).map_err(CliError::from_core)?;
        let psi = t.eval_psi(s).map_err(CliError::from_core)?;
        first.row(&[num(s), num(h), num(psi)]);
    }
    let mut second = Table::bare(&["v", "g", "gprime"]);
    for i in 0..samples {
        let v = l * i as f64 / samples as f64;
        let g = t.eval_g(v).map_err(CliError::from_core)?;
        let gp = t.eval_g_prime(v).map_err(CliError::from_core)?;
        second.row(&[num(v), num(g), num(gp.to_f64())]);
    }
    Ok(Output { csv: Some(first.finish() + "\n" + &second.finish()), json: None })
}

pub fn shoot(
    r: &Resolved,
    lambda: f64,
    ell: Option<f64>,
    plateau: f64,
    samples: usize,
) -> Result<Output, CliError> {
    check_lambda(lambda)?;
    let t = r.transform()?;
    let l = t.ceiling();
    let ell = ell.unwrap_or(l);
    if !(ell > 0.0 && ell <= l) {
        return Err(CliError::config(format!("--ell must lie in (0, L] with L = {l}, got {ell}")));
    }
    if !(plateau >= 0.0) || !plateau.is_finite() {
        return Err(CliError::config("--plateau must be nonnegative"));
    }
    if plateau > 0.0 && ell != l {
        return Err(CliError::config("a plateau requires the profile to start at L"));
    }
    if samples < 16 {
        return Err(CliError::config("--samples must be at least 16"));
    }
    let mut config = r.echo("shoot");
    config["ell"] = json!(ell);
    let r_ell = shooting::radius(&t, ell, lambda).map_err(CliError::from_core)?;
    let r_l = shooting::critical_radius(&t, lambda).map_err(CliError::from_core)?;
    let critical = shooting::critical_lambda(&t, r.common.radius).ok();

    let mut table = Table::new(&config, &["s", "v", "vprime"]);
    let mut body = Map::new();
    body.insert("ell".into(), jnum(ell));
    body.insert("lambda".into(), jnum(lambda));
    body.insert("plateau".into(), jnum(plateau));
    body.insert("R_ell".into(), jext(r_ell));
    body.insert("R_L".into(), jext(r_l));
    body.insert("R".into(), jnum(r.common.radius));
    body.insert("critical_lambda_for_R".into(), jopt(critical));
    if r_ell.is_finite() {
        let profile = if plateau > 0.0 {
            shooting::flat_family(&t, lambda, plateau)
        } else {
            shooting::trace(&t, ell, lambda, samples)
        }
        .map_err(CliError::from_core)?;
        for p in &profile.samples {
            table.row(&[num(p.s), num(p.v), num(p.v_prime)]);
        }
        body.insert("zero_crossing".into(), jnum(profile.zero_crossing()));
        body.insert("first_integral_residual".into(), jnum(profile.first_integral_residual(&t)));
    } else {
        body.insert("zero_crossing".into(), jext(Extended::PosInfinity));
        body.insert("first_integral_residual".into(), Value::Null);
    }
    Ok(Output { csv: Some(table.finish()), json: Some(report(&config, body)) })
}

/// Relative distance to the explicit solution `u = σ(1 − x²/R²)`, which
/// solves the interval problem for `γ = 1` when `λ f R² = 2σ(1 + 2A)`.
fn benchmark_error(r: &Resolved, sol: &BvpSolution, lambda: f64) -> Option<f64> {
    let (a, gamma) = r.nonlinearity.model_parameters()?;
    let c = r.constant_weight()?;
    let radius = r.common.radius;
    let sigma = r.nonlinearity.sigma();
    let target = 2.0 * sigma * (1.0 + 2.0 * a);
    if gamma != 1.0 || r.dim() != 1 || ((lambda * c * radius * radius - target) / target).abs() > 1e-12 {
        return None;
    }
    Some(sol.grid.nodes().iter().zip(&sol.u).fold(0.0_f64, |e, (x, u)| {
        e.max((u - sigma * (1.0 - x * x / (radius * radius))).abs())
    }))
}

fn case_tag(tag: CaseTag) -> &'static str {
    match tag {
        CaseTag::I => "I",
        CaseTag::II => "II",
        CaseTag::III => "III",
    }
}

fn regime(reg: Regime) -> &'static str {
    match reg {
        Regime::AlwaysExists => "AlwaysExists",
        Regime::FiniteThreshold => "FiniteThreshold",
    }
}

fn solve_report(r: &Resolved, t: &Transform, sol: &BvpSolution, f: &[f64]) -> Result<Map<String, Value>, CliError> {
    let grid = &sol.grid;
    let lambda = sol.lambda;
    let sigma = t.sigma();
    let mut body = Map::new();
    body.insert("lambda".into(), jnum(lambda));
    body.insert("status".into(), json!("converged"));

    // Thresholds of the run.
    let eig = thresholds::principal_eigenvalue(f, grid).map_err(CliError::from_core)?;
    body.insert("lambda1".into(), jnum(eig.lambda1));
    let lower = thresholds::existence_lower_bound(f, grid, sigma).map_err(CliError::from_core)?;
    body.insert("lambda_lower_linear".into(), jnum(lower));
    body.insert("lambda_ne_upper".into(), jopt(thresholds::nonexistence_bound(t, f, grid).ok()));
    let f_min = grid.interior().map(|i| f[i]).fold(f64::INFINITY, f64::min);
    let certificate = shooting::radial_subsolution(t, grid.dim(), grid.radius())
        .ok()
        .filter(|_| f_min > 0.0)
        .map(|s| s.lambda_sub / f_min);
    body.insert("lambda_sub_certificate".into(), jopt(certificate));
    let critical = match (r.dim(), r.constant_weight()) {
        (1, Some(c)) => shooting::critical_lambda(t, grid.radius()).ok().map(|x| x / c),
        _ => None,
    };
    body.insert("critical_lambda_1d".into(), jopt(critical));
    body.insert("regime".into(), json!(regime(t.integrability().regime())));

    // Residuals.
    body.insert("newton_residual_inf".into(), jnum(sol.residual_inf));
    body.insert("level_change".into(), jnum(sol.level_change));
    body.insert("n_schedule_used".into(), json!(sol.n_schedule_used));
    body.insert("newton_iterations".into(), json!(sol.newton_iterations));
    let q = bvp::quasilinear_residual(t, sol, lambda, f, 0.05 * grid.radius()).map_err(CliError::from_core)?;
    body.insert("quasilinear_residual_offplateau".into(), jnum(q.offplateau_residual_inf));
    body.insert("max_u".into(), jnum(sol.max_u()));
    body.insert("benchmark_max_error".into(), jopt(benchmark_error(r, sol, lambda)));

    // Flat set.
    let x = grid.nodes();
    match sol.flat_set {
        Some(fs) => {
            body.insert("flat_first".into(), jnum(x[fs.first]));
            body.insert("flat_last".into(), jnum(x[fs.last]));
            body.insert("flat_nodes".into(), json!(fs.len()));
            body.insert("flat_radius".into(), jopt(sol.flat_radius()));
        }
        None => {
            for k in ["flat_first", "flat_last", "flat_nodes", "flat_radius"] {
                body.insert(k.into(), Value::Null);
            }
        }
    }
    body.insert("saturated_nodes".into(), json!(sol.saturated_nodes));

    // Diagnostics.
    let dens: Vec<f64> = q.plateau_density.iter().flatten().copied().collect();
    let (dmin, dmax) = dens.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &d| (a.min(d), b.max(d)));
    let mean = (!dens.is_empty()).then(|| dens.iter().sum::<f64>() / dens.len() as f64);
    body.insert("plateau_density_mean".into(), jopt(mean));
    body.insert("plateau_density_min".into(), jopt(mean.map(|_| dmin)));
    body.insert("plateau_density_max".into(), jopt(mean.map(|_| dmax)));
    body.insert("plateau_flux".into(), jopt(diagnostics::plateau_flux(sol).ok()));
    body.insert(
        "defect_mass".into(),
        jopt(diagnostics::defect_measure(t, sol, lambda, f).ok().map(|d| d.total_mass)),
    );
    let energy = diagnostics::energy_bound_check(t, sol, lambda, f).map_err(CliError::from_core)?;
    body.insert("energy_lhs".into(), jnum(energy.lhs));
    body.insert("energy_rhs".into(), jnum(energy.rhs));
    body.insert("energy_margin".into(), jnum(energy.margin));
    body.insert("energy_bound_holds".into(), json!(energy.holds));
    let prediction = diagnostics::curvature_asymptotics(t.source(), lambda, f[grid.center()], r.dim()).ok();
    body.insert("case_tag".into(), json!(prediction.map(|p| case_tag(p.case_tag))));
    body.insert(
        "predicted_u_second_deriv_at_0".into(),
        jopt(prediction.map(|p| p.predicted_u_second_deriv_at_0)),
    );
    body.insert(
        "predicted_root_primitive_slope".into(),
        jopt(prediction.and_then(|p| p.predicted_root_primitive_slope)),
    );
    let fit = diagnostics::fit_touching_behavior(sol, t).ok();
    body.insert("fitted_u_second_deriv_at_0".into(), jopt(fit.map(|f| f.u_second_deriv)));
    body.insert("fitted_root_primitive_slope".into(), jopt(fit.and_then(|f| f.root_primitive_slope)));
    Ok(body)
}

pub fn solve(r: &Resolved, lambda: f64) -> Result<Output, CliError> {
    check_lambda(lambda)?;
    let t = r.transform()?;
    let grid = r.grid()?;
    let f = r.weight(&grid);
    let config = r.echo("solve");
    let mut sol = bvp::solve_semilinear(&t, lambda, &f, &grid, &r.solve_options())
        .map_err(|e| CliError::from_core(e).with_report(&config))?;
    bvp::back_map(&t, &mut sol);
    let body = solve_report(r, &t, &sol, &f).map_err(|e| e.with_report(&config))?;
    let mut table = Table::new(&config, &["coord", "v", "u", "flat"]);
    for (i, &x) in grid.nodes().iter().enumerate() {
        let flat = if sol.is_flat(i) { "1" } else { "0" };
        table.row(&[num(x), num(sol.v[i]), num(sol.u[i]), flat.to_string()]);
    }
    Ok(Output { csv: Some(table.finish()), json: Some(report(&config, body)) })
}

pub fn threshold(r: &Resolved) -> Result<Output, CliError> {
    let t = r.transform()?;
    let grid = r.grid()?;
    let f = r.weight(&grid);
    let config = r.echo("threshold");
    let rep = thresholds::threshold_report(&t, &f, &grid, r.common.tol_lambda, &r.solve_options())
        .map_err(|e| CliError::from_core(e).with_report(&config))?;
    let mut body = Map::new();
    body.insert("lambda1".into(), jnum(rep.lambda1));
    body.insert("h_sigma".into(), jext(rep.h_sigma));
    body.insert("psi_sigma".into(), jnum(rep.psi_sigma));
    body.insert("lambda_ne_upper".into(), jopt(rep.lambda_ne_upper));
    body.insert("lambda_sub_certificate".into(), jopt(rep.lambda_sub_certificate));
    body.insert("lambda_lower_linear".into(), jnum(rep.lambda_lower_linear));
    if let Some(est) = rep.lambda_hat {
        body.insert("Lambda_hat".into(), jnum(est.value));
        body.insert("Lambda_hat_lower".into(), jnum(est.lower));
        body.insert("Lambda_hat_upper".into(), jnum(est.upper));
        body.insert("Lambda_hat_solves".into(), json!(est.solves));
    }
    body.insert("regime".into(), json!(regime(rep.regime)));
    Ok(Output { csv: None, json: Some(report(&config, body)) })
}

struct SweepRow {
    lambda: f64,
    max_u: f64,
    flat_width: f64,
    iterations: usize,
}

fn sweep_point(t: &Transform, grid: &Grid, f: &[f64], r: &Resolved, lambda: f64) -> Result<SweepRow, CliError> {
    let mut sol = bvp::solve_semilinear(t, lambda, f, grid, &r.solve_options()).map_err(CliError::from_core)?;
    bvp::back_map(t, &mut sol);
    let x = grid.nodes();
    let flat_width = sol.flat_set.map_or(0.0, |fs| x[fs.last] - x[fs.first]);
    Ok(SweepRow {
        lambda,
        max_u: sol.max_u(),
        flat_width,
        iterations: sol.newton_iterations.iter().sum(),
    })
}

/// One solve per `λ`, run in parallel and reported in `λ` order. A
/// decrease of `max_u` along the sweep is a numerical failure.
pub fn sweep(r: &Resolved, lambdas: &[f64]) -> Result<Output, CliError> {
    let t = r.transform()?;
    let grid = r.grid()?;
    let f = r.weight(&grid);
    let config = r.echo("sweep");
    let rows: Vec<SweepRow> = lambdas
        .par_iter()
        .map(|&lambda| sweep_point(&t, &grid, &f, r, lambda))
        .collect::<Result<_, _>>()
        .map_err(|e| e.with_report(&config))?;
    let mut table = Table::new(&config, &["lambda", "max_u", "flat_width", "iterations"]);
    for row in &rows {
        table.row(&[num(row.lambda), num(row.max_u), num(row.flat_width), row.iterations.to_string()]);
    }
    let csv = table.finish();
    if let Some(w) = rows.windows(2).find(|w| w[1].max_u < w[0].max_u - 1e-8) {
        let msg = format!("max_u decreases between lambda = {} and {}", w[0].lambda, w[1].lambda);
        return Err(CliError::numerical(msg).with_csv(csv));
    }
    Ok(Output { csv: Some(csv), json: None })
}
