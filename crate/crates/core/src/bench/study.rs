//! Convergence studies over a sequence of meshes, emitted as CSV or Markdown.

use std::fmt::Write as _;

use crate::assembly::{DiscreteFunction, ElementKind};
use crate::bench::norms::{error_norms_against, ERROR_QUAD_POINTS};
use crate::bench::problems::{ProblemKind, ProblemSpec};
use crate::bench::solve::{self, SolveOptions, Solution};
use crate::error::Result;
use crate::geometry::Point2;
use crate::mesh::{random_mesh, theta_mesh, Mesh};

pub const DEFAULT_LEVELS: [usize; 6] = [4, 8, 16, 32, 64, 128];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeshFamily {
    Theta { theta: f64 },
    Random { alpha: f64, seed: u64 },
}

impl MeshFamily {
    pub fn build(&self, n: usize) -> Result<Mesh> {
        match *self {
            MeshFamily::Theta { theta } => theta_mesh(n, theta),
            MeshFamily::Random { alpha, seed } => random_mesh(n, alpha, seed),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            MeshFamily::Theta { theta } => format!("theta={theta}"),
            MeshFamily::Random { alpha, seed } => format!("random(alpha={alpha},seed={seed})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub problem: ProblemSpec,
    pub family: MeshFamily,
    pub element: ElementKind,
    /// Cells per direction at each level (`h = 1/n`).
    pub levels: Vec<usize>,
    pub solve: SolveOptions,
}

impl StudyConfig {
    pub fn new(problem: ProblemSpec, family: MeshFamily, element: ElementKind) -> Self {
        StudyConfig {
            problem,
            family,
            element,
            levels: DEFAULT_LEVELS.to_vec(),
            solve: SolveOptions::default(),
        }
    }

    pub fn with_levels(mut self, levels: &[usize]) -> Self {
        self.levels = levels.to_vec();
        self
    }
}

/// One row of a convergence table.
///
/// For Stokes, `err_l2` is the first velocity component's `L²` error and
/// `err_h1` holds the pressure `L²` error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub dof: usize,
    pub err_l2: f64,
    pub ratio_l2: Option<f64>,
    pub err_h1: f64,
    pub ratio_h1: Option<f64>,
}

/// The two error measures tabulated for a solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measured {
    pub dof: usize,
    pub primary: f64,
    pub secondary: f64,
    /// `L²` error of the full vector field (equal to `primary` for scalar
    /// problems and elasticity).
    pub l2_full: f64,
}

fn component(u: &DiscreteFunction, mesh: &Mesh, c: usize) -> DiscreteFunction {
    let (ne, nk) = (mesh.edges.len(), mesh.n_cells());
    DiscreteFunction {
        components: 1,
        edge_values: u.edge_values[c * ne..(c + 1) * ne].to_vec(),
        cell_values: u.cell_values[c * nk..(c + 1) * nk].to_vec(),
    }
}

/// Table quantities for a solved problem.
pub fn measure(mesh: &Mesh, sol: &Solution, problem: &ProblemSpec) -> Result<Measured> {
    let (e, p) = solve::errors(mesh, sol, problem)?;
    let kind = sol.assembled.kind;
    Ok(match problem.kind {
        ProblemKind::Stokes => {
            let u1 = component(&sol.u_h, mesh, 0);
            let e1 = error_norms_against(
                mesh,
                kind,
                &u1,
                &|x| [problem.u(x)[0], 0.0],
                &|x| [problem.grad_u(x)[0], Point2::ZERO],
                ERROR_QUAD_POINTS,
            )?;
            Measured {
                dof: sol.dofs(),
                primary: e1.l2,
                secondary: p.unwrap_or(f64::NAN),
                l2_full: e.l2,
            }
        }
        _ => Measured {
            dof: sol.dofs(),
            primary: e.l2,
            secondary: e.h1_broken,
            l2_full: e.l2,
        },
    })
}

/// `log₂(e_coarse / e_fine)` scaled for non-halving refinements.
pub fn rate(e_coarse: f64, e_fine: f64, h_coarse: f64, h_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (h_coarse / h_fine).ln()
}

/// Least-squares slope of `log e` against `log h`.
pub fn fitted_slope(h: &[f64], e: &[f64]) -> f64 {
    let n = h.len() as f64;
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Builds rows from per-level measurements, filling in the ratios.
pub fn rows_from(levels: &[usize], measured: &[Measured]) -> Vec<ConvergenceRow> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (&n, m) in levels.iter().zip(measured) {
        let h = 1.0 / n as f64;
        let (ratio_l2, ratio_h1) = match rows.last() {
            Some(prev) => (
                Some(rate(prev.err_l2, m.primary, prev.h, h)),
                Some(rate(prev.err_h1, m.secondary, prev.h, h)),
            ),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            n,
            h,
            dof: m.dof,
            err_l2: m.primary,
            ratio_l2,
            err_h1: m.secondary,
            ratio_h1,
        });
    }
    rows
}

/// Runs the levels of `config` in order; `on_row` sees each row as it is produced.
pub fn convergence_study_with(config: &StudyConfig, mut on_row: impl FnMut(&ConvergenceRow)) -> Result<Vec<ConvergenceRow>> {
    let mut measured = Vec::with_capacity(config.levels.len());
    for (i, &n) in config.levels.iter().enumerate() {
        let mesh = config.family.build(n)?;
        let sol = solve::solve(&mesh, config.element, &config.problem, config.solve)?;
        measured.push(measure(&mesh, &sol, &config.problem)?);
        let rows = rows_from(&config.levels[..=i], &measured);
        on_row(rows.last().expect("one row per level"));
    }
    Ok(rows_from(&config.levels, &measured))
}

pub fn convergence_study(config: &StudyConfig) -> Result<Vec<ConvergenceRow>> {
    convergence_study_with(config, |_| {})
}

/// C-style `%.{prec}e`: `4.1452e-03`.
pub fn format_exp(x: f64, prec: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.prec$e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

/// Number style of the published tables: four significant digits, with
/// values below `0.1` written as `0.dddd E-xx`.
pub fn format_paper(x: f64) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    if x.abs() >= 0.1 {
        let digits = x.abs().log10().floor() as i32 + 1;
        let decimals = (4 - digits).max(0) as usize;
        return format!("{x:.decimals$}");
    }
    let mut e = x.abs().log10().floor() as i32 + 1;
    let mut mant = x / 10f64.powi(e);
    if (mant.abs() * 1e4).round() >= 1e4 {
        mant /= 10.0;
        e += 1;
    }
    format!("{mant:.4}E-{:02}", -e)
}

pub const CSV_HEADER: &str = "h,dof,err_l2,ratio_l2,err_h1,ratio_h1";

pub fn csv_row(r: &ConvergenceRow) -> String {
    let ratio = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_default();
    format!(
        "{},{},{},{},{},{}",
        r.h,
        r.dof,
        format_exp(r.err_l2, 4),
        ratio(r.ratio_l2),
        format_exp(r.err_h1, 4),
        ratio(r.ratio_h1)
    )
}

pub fn to_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

/// Column headings of the two error measures for `problem`.
pub fn column_labels(problem: &ProblemSpec) -> (&'static str, &'static str) {
    match problem.kind {
        ProblemKind::Stokes => ("‖u₁-u₁ₕ‖₀", "‖p-pₕ‖₀"),
        _ => ("‖u-uₕ‖₀", "‖u-uₕ‖₁,ₕ"),
    }
}

pub fn to_markdown(rows: &[ConvergenceRow], problem: &ProblemSpec) -> String {
    let (c1, c2) = column_labels(problem);
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            let ratio = |v: Option<f64>| v.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into());
            [
                format!("1/{}", r.n),
                r.dof.to_string(),
                format_paper(r.err_l2),
                ratio(r.ratio_l2),
                format_paper(r.err_h1),
                ratio(r.ratio_h1),
            ]
        })
        .collect();
    let header = ["h", "DOF", c1, "ratio", c2, "ratio"];
    let mut width = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: &[&str]| {
        let mut s = String::from("|");
        for (item, w) in items.iter().zip(width) {
            let pad = w - item.chars().count();
            let _ = write!(s, " {item}{} |", " ".repeat(pad));
        }
        s.push('\n');
        s
    };
    let mut out = line(&header);
    out.push('|');
    for w in width {
        out.push_str(&format!("{}|", "-".repeat(w + 2)));
    }
    out.push('\n');
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        out.push_str(&line(&refs));
    }
    out
}
