//! Discretization errors in `L²` and the broken `H¹` seminorm.

use crate::assembly::{cell_basis, eval_at, CellBasis, DiscreteFunction, ElementContext, ElementKind};
use crate::bench::problems::ProblemSpec;
use crate::error::Result;
use crate::geometry::Point2;
use crate::mesh::Mesh;
use crate::quadrature;

/// Quadrature points per direction for error integrals.
pub const ERROR_QUAD_POINTS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `(Σ_K ∫_K |∇u - ∇u_h|²)^{1/2}`
    pub h1_broken: f64,
}

/// Errors of `u_h` against an arbitrary exact field given by value and gradient.
pub fn error_norms_against(
    mesh: &Mesh,
    kind: ElementKind,
    u_h: &DiscreteFunction,
    u: &dyn Fn(Point2) -> [f64; 2],
    grad_u: &dyn Fn(Point2) -> [Point2; 2],
    quad_npts: usize,
) -> Result<ErrorNorms> {
    let ctx = ElementContext::new(kind)?;
    let rule = quadrature::tensor_rule(quad_npts)?;
    let mut cb = CellBasis::default();
    let (mut l2, mut h1) = (0.0, 0.0);
    for cell in 0..mesh.n_cells() {
        cell_basis(&ctx, &mesh.quad(cell), &rule, &mut cb)?;
        let coeffs = u_h.local_coefficients(mesh, cell, cb.dim);
        for q in 0..cb.weights.len() {
            let x = cb.points[q];
            let (ue, ge) = (u(x), grad_u(x));
            for c in 0..u_h.components {
                let (v, g) = eval_at(&cb, &coeffs, c, q);
                let dv = ue[c] - v;
                let dg = ge[c] - g;
                l2 += cb.weights[q] * dv * dv;
                h1 += cb.weights[q] * dg.dot(dg);
            }
        }
    }
    Ok(ErrorNorms {
        l2: l2.sqrt(),
        h1_broken: h1.sqrt(),
    })
}

/// Errors of `u_h` against the exact solution of `problem`.
pub fn error_norms(
    mesh: &Mesh,
    kind: ElementKind,
    u_h: &DiscreteFunction,
    problem: &ProblemSpec,
    quad_npts: usize,
) -> Result<ErrorNorms> {
    error_norms_against(mesh, kind, u_h, &|x| problem.u(x), &|x| problem.grad_u(x), quad_npts)
}

/// `‖p - p_h‖₀` for a cellwise constant pressure.
pub fn pressure_error(mesh: &Mesh, pressure: &[f64], problem: &ProblemSpec, quad_npts: usize) -> Result<f64> {
    let rule = quadrature::tensor_rule(quad_npts)?;
    let mut acc = 0.0;
    for (cell, &ph) in pressure.iter().enumerate() {
        let dec = crate::geometry::decompose(&mesh.quad(cell))?;
        for (&xh, &w) in rule.points.iter().zip(&rule.weights) {
            let det = dec.jacobian(xh).det().abs();
            let d = problem.p(dec.forward(xh)) - ph;
            acc += w * det * d * d;
        }
    }
    Ok(acc.sqrt())
}
