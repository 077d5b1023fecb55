//! Command-line flags, their validation, and the resolved run configuration
//! that is echoed into every output.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use flatzone_core::{Grid, Nonlinearity, SolveOptions, Transform};
use serde_json::{json, Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Interval,
    Ball,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Amplitude A of h(s) = A (sigma - s)^(-gamma).
    #[arg(long = "A", conflicts_with = "h_table")]
    pub a: Option<f64>,
    /// Exponent gamma of the power model.
    #[arg(long, conflicts_with = "h_table")]
    pub gamma: Option<f64>,
    /// Blow-up level sigma.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Tabulated h as a two-column CSV `s,value` starting at s = 0.
    #[arg(long = "h-table")]
    pub h_table: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GeometryArg::Interval)]
    pub geometry: GeometryArg,
    /// Space dimension of the ball.
    #[arg(long = "N", default_value_t = 1)]
    pub dim: u32,
    /// Half-width of the interval or radius of the ball.
    #[arg(long = "R", default_value_t = 1.0)]
    pub radius: f64,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 2001)]
    pub m: usize,
    /// Constant datum f.
    #[arg(long = "f-const", conflicts_with = "f_table")]
    pub f_const: Option<f64>,
    /// Tabulated datum as a two-column CSV `s,value` in the grid coordinate.
    #[arg(long = "f-table")]
    pub f_table: Option<PathBuf>,
    /// Stop the truncation schedule once successive levels differ by less than this.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Absolute width at which the threshold bisection stops.
    #[arg(long = "tol-lambda", default_value_t = 1e-3)]
    pub tol_lambda: f64,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON destination (stdout when absent).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("--{name} must be positive and finite, got {x}")))
    }
}

/// A two-column CSV with header, strictly increasing first column.
pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(CliError::config(format!("{}: row {} must have two columns", path.display(), k + 1)));
        }
        let parse = |j: usize| {
            record[j]
                .parse::<f64>()
                .map_err(|e| CliError::config(format!("{}: row {}: {e}", path.display(), k + 1)))
        };
        rows.push((parse(0)?, parse(1)?));
    }
    if rows.len() < 2 {
        return Err(CliError::config(format!("{}: need at least two rows", path.display())));
    }
    if rows.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(CliError::config(format!("{}: first column must be strictly increasing", path.display())));
    }
    Ok(rows)
}

/// Piecewise-linear interpolation, constant beyond the ends.
fn interpolate(table: &[(f64, f64)], x: f64) -> f64 {
    let k = table.partition_point(|p| p.0 <= x);
    if k == 0 {
        return table[0].1;
    }
    if k == table.len() {
        return table[k - 1].1;
    }
    let (x0, y0) = table[k - 1];
    let (x1, y1) = table[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Validated inputs shared by the subcommands.
pub struct Resolved {
    pub common: Common,
    pub nonlinearity: Nonlinearity,
    h_points: Option<Vec<(f64, f64)>>,
    f_points: Option<Vec<(f64, f64)>>,
    /// Extra, subcommand-specific entries of the config echo.
    pub extra: Map<String, Value>,
}

impl Resolved {
    pub fn new(common: Common) -> Result<Self, CliError> {
        positive("sigma", common.sigma)?;
        positive("R", common.radius)?;
        positive("tol", common.tol)?;
        positive("tol-lambda", common.tol_lambda)?;
        if common.m < 16 {
            return Err(CliError::config(format!("--m must be at least 16, got {}", common.m)));
        }
        if common.dim == 0 {
            return Err(CliError::config("--N must be at least 1"));
        }
        let (nonlinearity, h_points) = match &common.h_table {
            Some(path) => {
                let points = read_table(path)?;
                let nl = Nonlinearity::tabulated(&points, common.sigma).map_err(CliError::from_core)?;
                (nl, Some(points))
            }
            None => {
                let a = common.a.unwrap_or(1.0);
                let gamma = common.gamma.unwrap_or(1.0);
                positive("A", a)?;
                positive("gamma", gamma)?;
                (Nonlinearity::model_power(a, gamma, common.sigma).map_err(CliError::from_core)?, None)
            }
        };
        let f_points = match &common.f_table {
            Some(path) => {
                let points = read_table(path)?;
                if points.iter().any(|p| !(p.1 >= 0.0) || !p.1.is_finite()) {
                    return Err(CliError::config("--f-table values must be nonnegative and finite"));
                }
                Some(points)
            }
            None => {
                if let Some(c) = common.f_const {
                    positive("f-const", c)?;
                }
                None
            }
        };
        Ok(Resolved { common, nonlinearity, h_points, f_points, extra: Map::new() })
    }

    pub fn transform(&self) -> Result<Transform, CliError> {
        Transform::new(self.nonlinearity.clone()).map_err(CliError::from_core)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let c = &self.common;
        match c.geometry {
            GeometryArg::Interval => Grid::interval(c.radius, c.m),
            GeometryArg::Ball => Grid::ball(c.dim, c.radius, c.m),
        }
        .map_err(CliError::from_core)
    }

    /// Nodal values of `f`.
    pub fn weight(&self, grid: &Grid) -> Vec<f64> {
        match &self.f_points {
            Some(table) => grid.nodes().iter().map(|&x| interpolate(table, x)).collect(),
            None => vec![self.common.f_const.unwrap_or(1.0); grid.len()],
        }
    }

    /// `Some(c)` when the datum is the constant `c`.
    pub fn constant_weight(&self) -> Option<f64> {
        match self.f_points {
            Some(_) => None,
            None => Some(self.common.f_const.unwrap_or(1.0)),
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.common.tol, ..SolveOptions::default() }
    }

    pub fn dim(&self) -> u32 {
        match self.common.geometry {
            GeometryArg::Interval => 1,
            GeometryArg::Ball => self.common.dim,
        }
    }

    /// The full resolved configuration, in a fixed key order.
    pub fn echo(&self, command: &str) -> Value {
        let c = &self.common;
        let mut m = Map::new();
        m.insert("command".into(), json!(command));
        match &self.h_points {
            Some(points) => {
                m.insert("h".into(), json!("table"));
                m.insert("h_table".into(), json!(c.h_table.as_ref().map(|p| p.display().to_string())));
                m.insert("h_points".into(), json!(points.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>()));
            }
            None => {
                m.insert("h".into(), json!("power"));
                m.insert("A".into(), json!(c.a.unwrap_or(1.0)));
                m.insert("gamma".into(), json!(c.gamma.unwrap_or(1.0)));
            }
        }
        m.insert("sigma".into(), json!(c.sigma));
        let geometry = match c.geometry {
            GeometryArg::Interval => "interval",
            GeometryArg::Ball => "ball",
        };
        m.insert("geometry".into(), json!(geometry));
        m.insert("N".into(), json!(self.dim()));
        m.insert("R".into(), json!(c.radius));
        m.insert("m".into(), json!(c.m));
        match &self.f_points {
            Some(points) => {
                m.insert("f".into(), json!("table"));
                m.insert("f_table".into(), json!(c.f_table.as_ref().map(|p| p.display().to_string())));
                m.insert("f_points".into(), json!(points.iter().map(|p| [p.0, p.1]).collect::<Vec<_>>()));
            }
            None => {
                m.insert("f".into(), json!("const"));
                m.insert("f_const".into(), json!(c.f_const.unwrap_or(1.0)));
            }
        }
        m.insert("tol".into(), json!(c.tol));
        m.insert("tol_lambda".into(), json!(c.tol_lambda));
        m.insert("n_schedule".into(), json!(SolveOptions::default().n_schedule));
        for (k, v) in &self.extra {
            m.insert(k.clone(), v.clone());
        }
        Value::Object(m)
    }
}

/// `A:B:STEP`, inclusive of `B` up to rounding.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::config(format!("--lambda-range expects A:B:STEP, got {spec:?}")));
    }
    let mut v = [0.0_f64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse()
            .map_err(|e| CliError::config(format!("--lambda-range: {p:?}: {e}")))?;
    }
    let [a, b, step] = v;
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || !(step > 0.0) || b < a {
        return Err(CliError::config(format!("--lambda-range {spec:?} is empty")));
    }
    positive("lambda-range start", a)?;
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| a + step * k as f64).collect())
}

pub fn check_lambda(lambda: f64) -> Result<(), CliError> {
    positive("lambda", lambda)
}
