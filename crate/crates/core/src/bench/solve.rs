//! One discretize-solve-measure pass for a model problem on a given mesh.

use crate::assembly::{self, Assembled, AssemblyOptions, DiscreteFunction, ElementKind, Operator};
use crate::bench::norms::{self, ErrorNorms, ERROR_QUAD_POINTS};
use crate::bench::problems::{ProblemKind, ProblemSpec};
use crate::error::Result;
use crate::linsolve::{self, DEFAULT_SADDLE_TOL, DEFAULT_SPD_TOL};
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub quad_npts: usize,
    /// Relative residual tolerance; `None` picks the SPD or saddle default.
    pub tol: Option<f64>,
    pub max_iterations: usize,
    pub condense: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            quad_npts: assembly::DEFAULT_QUAD_POINTS,
            tol: None,
            max_iterations: 200_000,
            condense: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub assembled: Assembled,
    pub u_h: DiscreteFunction,
    /// Cellwise pressure (Stokes only).
    pub pressure: Option<Vec<f64>>,
    pub iterations: usize,
    pub residual: f64,
}

impl Solution {
    pub fn dofs(&self) -> usize {
        self.assembled.reported_dofs()
    }
}

/// Assembles and solves `problem` on `mesh`.
pub fn solve(mesh: &Mesh, kind: ElementKind, problem: &ProblemSpec, opts: SolveOptions) -> Result<Solution> {
    let forcing = |x| problem.forcing(x);
    let assembled = assembly::assemble(
        mesh,
        kind,
        problem.operator(),
        Some(&forcing),
        None,
        AssemblyOptions {
            quad_npts: opts.quad_npts,
            condense: opts.condense,
        },
    )?;
    finish(mesh, assembled, opts)
}

/// Elasticity systems with `λ/μ` at least this large are solved in mixed form.
pub const MIXED_ELASTICITY_RATIO: f64 = 100.0;

/// Solves an already assembled system.
///
/// Stokes uses the saddle-point solver. Nearly incompressible elasticity
/// (`λ/μ ≥ MIXED_ELASTICITY_RATIO`, no condensed unknowns) is rewritten as
/// `[A_μ Bᵀ; B -|K|/(λ+μ)]` and solved the same way; everything else goes
/// through preconditioned conjugate gradients.
pub fn finish(mesh: &Mesh, assembled: Assembled, opts: SolveOptions) -> Result<Solution> {
    let sys = &assembled.system;
    let nearly_incompressible = match assembled.operator {
        Operator::Elasticity { mu, lambda } => lambda >= MIXED_ELASTICITY_RATIO * mu,
        _ => false,
    };
    let mixed = match (&sys.divergence, &sys.viscous, sys.penalty) {
        (Some(b), None, None) => Some((&sys.matrix, b, 0.0)),
        (Some(b), Some(visc), Some(pen)) if nearly_incompressible => Some((visc, b, 1.0 / pen)),
        _ => None,
    };
    match mixed {
        Some((a, b, eps)) => {
            let tol = opts.tol.unwrap_or(DEFAULT_SADDLE_TOL);
            let sol = linsolve::solve_penalized_saddle(a, b, &sys.rhs, &sys.divergence_rhs, &sys.pressure_weights, eps, tol)?;
            let u_h = assembled.discrete_function(mesh, &sol.velocity);
            Ok(Solution {
                u_h,
                pressure: (eps == 0.0).then_some(sol.pressure),
                iterations: sol.outer_iterations,
                residual: sol.residual,
                assembled,
            })
        }
        None => {
            let tol = opts.tol.unwrap_or(DEFAULT_SPD_TOL);
            let sol = linsolve::solve_spd(&sys.matrix, &sys.rhs, tol, opts.max_iterations)?;
            let u_h = assembled.discrete_function(mesh, &sol.x);
            Ok(Solution {
                u_h,
                pressure: None,
                iterations: sol.iterations,
                residual: sol.residual,
                assembled,
            })
        }
    }
}

/// Errors of a solution: `(velocity/displacement norms, pressure L² error)`.
pub fn errors(mesh: &Mesh, sol: &Solution, problem: &ProblemSpec) -> Result<(ErrorNorms, Option<f64>)> {
    let e = norms::error_norms(mesh, sol.assembled.kind, &sol.u_h, problem, ERROR_QUAD_POINTS)?;
    let p = match (&problem.kind, &sol.pressure) {
        (ProblemKind::Stokes, Some(p)) => Some(norms::pressure_error(mesh, p, problem, ERROR_QUAD_POINTS)?),
        _ => None,
    };
    Ok((e, p))
}
