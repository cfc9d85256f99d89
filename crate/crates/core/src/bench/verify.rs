//! Property checks shared by the test-suite and the `verify` subcommand.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assembly::{self, AssemblyOptions, DiscreteFunction, ElementContext, ElementKind, Operator};
use crate::bench::norms;
use crate::bench::problems::ProblemSpec;
use crate::bench::solve::{self, SolveOptions};
use crate::error::Result;
use crate::geometry::{convexity_margin, Point2, REF_MIDPOINTS};
use crate::linsolve::dense;
use crate::mesh::{random_mesh, theta_mesh, Mesh};
use crate::refelem;

/// Largest relative deviation between the stored forcing and the operator
/// applied to the stored solution by second-order central differences
/// (step `1e-5`) of the stored gradient, over `npts` random interior points.
///
/// The relative error is measured against the largest `|f|` seen.
pub fn fd_forcing_max_error(problem: &ProblemSpec, npts: usize, seed: u64) -> f64 {
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut err, mut scale) = (0.0_f64, 0.0_f64);
    for _ in 0..npts {
        let x = Point2::new(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95));
        let ex = Point2::new(h, 0.0);
        let ey = Point2::new(0.0, h);
        let gxp = problem.grad_u(x + ex);
        let gxm = problem.grad_u(x - ex);
        let gyp = problem.grad_u(x + ey);
        let gym = problem.grad_u(x - ey);
        // ∂ₓ∂ₓu_c, ∂ᵧ∂ᵧu_c, ∂ₓ∂ᵧu_c per component
        let mut hess = [[0.0; 3]; 2];
        for c in 0..2 {
            hess[c][0] = (gxp[c].x1 - gxm[c].x1) / (2.0 * h);
            hess[c][1] = (gyp[c].x2 - gym[c].x2) / (2.0 * h);
            hess[c][2] = 0.5 * ((gxp[c].x2 - gxm[c].x2) + (gyp[c].x1 - gym[c].x1)) / (2.0 * h);
        }
        let lap = [hess[0][0] + hess[0][1], hess[1][0] + hess[1][1]];
        let grad_p = {
            let px = (problem.p(x + ex) - problem.p(x - ex)) / (2.0 * h);
            let py = (problem.p(x + ey) - problem.p(x - ey)) / (2.0 * h);
            Point2::new(px, py)
        };
        let fd = match problem.kind {
            crate::bench::problems::ProblemKind::Poisson => [-lap[0], 0.0],
            crate::bench::problems::ProblemKind::Stokes => [-lap[0] + grad_p.x1, -lap[1] + grad_p.x2],
            crate::bench::problems::ProblemKind::Elasticity { mu, lambda } => {
                let gd = [hess[0][0] + hess[1][2], hess[0][2] + hess[1][1]];
                [
                    -(lambda + mu) * gd[0] - mu * lap[0],
                    -(lambda + mu) * gd[1] - mu * lap[1],
                ]
            }
        };
        let f = problem.forcing(x);
        for c in 0..2 {
            err = err.max((fd[c] - f[c]).abs());
            scale = scale.max(f[c].abs());
        }
    }
    err / scale.max(f64::MIN_POSITIVE)
}

/// Outcome of one named property check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: &'static str,
    /// Worst observed deviation.
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
    pub elapsed: Duration,
    pub error: Option<String>,
}

impl std::fmt::Display for CheckReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {:<28} worst={:.3e} tol={:.0e} ({:.2}s)",
            self.name,
            self.worst,
            self.tol,
            self.elapsed.as_secs_f64()
        )?;
        if let Some(e) = &self.error {
            write!(f, " error: {e}")?;
        }
        Ok(())
    }
}

pub type Check = fn() -> Result<f64>;

/// Every property check with its tolerance.
pub const CHECKS: [(&str, Check, f64); 11] = [
    ("mean_value_residual", mean_value_residuals, 1e-12),
    ("determinant_identity", determinant_identity, 1e-12),
    ("mu_reduces_to_psi_hat", mu_reduction, 1e-14),
    ("circle_center", circle_center, 1e-12),
    ("nodal_basis", nodal_basis_delta, 1e-12),
    ("patch_test", patch_test, 1e-10),
    ("elasticity_patch_test", elasticity_patch_test, 1e-10),
    ("stiffness_symmetry", stiffness_symmetry, 1e-13),
    ("edge_mean_continuity", edge_mean_continuity, 1e-10),
    ("stokes_divergence", stokes_divergence, 1e-12),
    ("forcing_consistency", forcing_consistency, 1e-5),
];

pub fn run_check(name: &'static str, check: Check, tol: f64) -> CheckReport {
    let start = Instant::now();
    let (worst, error) = match check() {
        Ok(w) => (w, None),
        Err(e) => (f64::INFINITY, Some(e.to_string())),
    };
    CheckReport {
        name,
        worst,
        tol,
        passed: error.is_none() && worst <= tol,
        elapsed: start.elapsed(),
        error,
    }
}

/// Runs all checks, one thread per check.
pub fn run_all() -> Vec<CheckReport> {
    std::thread::scope(|s| {
        let handles: Vec<_> = CHECKS
            .iter()
            .map(|&(name, check, tol)| s.spawn(move || run_check(name, check, tol)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("check panicked")).collect()
    })
}

const SAMPLES: usize = 1000;

fn random_shape(rng: &mut ChaCha8Rng) -> Point2 {
    loop {
        let s = Point2::new(rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95));
        if convexity_margin(s) > 0.02 {
            return s;
        }
    }
}

/// Largest mean-value residual of `μ̃` over random `(s̃, c̃)`.
pub fn mean_value_residuals() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let s = random_shape(&mut rng);
        let c = rng.gen_range(-2.0..2.0);
        for r in refelem::mean_value_residual(s, c) {
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Relative gap between the numeric and the closed-form unisolvency determinant.
pub fn determinant_identity() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let s = random_shape(&mut rng);
        let c = rng.gen_range(-2.0..2.0);
        let closed = refelem::unisolvency_det(s, c);
        let numeric = dense::det(&refelem::evaluation_matrix(s, c));
        worst = worst.max((numeric - closed).abs() / closed.abs().max(16.0 / 3.0));
    }
    Ok(worst)
}

/// `max |μ̃ - ψ̂₁|` on a 5×5 grid for `s̃ = 0`, `c̃ = 0`.
pub fn mu_reduction() -> Result<f64> {
    let mut worst = 0.0_f64;
    for i in 0..5 {
        for j in 0..5 {
            let x = Point2::new(-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
            worst = worst.max((refelem::mu_tilde(x, Point2::ZERO, 0.0) - refelem::psi_hat(x, 1)?).abs());
        }
    }
    Ok(worst)
}

/// Fitted circle against center `-0.4 (s̃₂, s̃₁)` and `r² = (6/25)(5/2 - |s̃|²)`.
pub fn circle_center() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let s = random_shape(&mut rng);
        let (center, r2) = refelem::circle_center_check(s)?;
        let expect = Point2::new(-0.4 * s.x2, -0.4 * s.x1);
        let r2_expect = 6.0 / 25.0 * (2.5 - s.dot(s));
        worst = worst.max(center.dist(expect)).max((r2 - r2_expect).abs());
    }
    Ok(worst)
}

/// `max |bᵢ(m̂ⱼ) - δᵢⱼ|` over random nonparametric elements.
pub fn nodal_basis_delta() -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst = 0.0_f64;
    for _ in 0..200 {
        let s = random_shape(&mut rng);
        let c = if rng.gen_bool(0.5) { 0.0 } else { 1.0 };
        let el = refelem::nodal_basis(s, c)?;
        for (k, &m) in REF_MIDPOINTS.iter().enumerate() {
            for (i, v) in el.values(m).into_iter().enumerate() {
                worst = worst.max((v - if i == k { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    Ok(worst)
}

fn element_configs() -> [ElementKind; 3] {
    [ElementKind::nonparametric(0.0), ElementKind::nonparametric(1.0), ElementKind::parametric()]
}

fn patch_meshes() -> Result<Vec<Mesh>> {
    Ok(vec![
        theta_mesh(8, 0.0)?,
        theta_mesh(8, 0.7)?,
        random_mesh(8, 0.25, 1)?,
        random_mesh(7, 0.4, 2)?,
    ])
}

fn linear(x: Point2) -> [f64; 2] {
    [3.0 * x.x1 - 2.0 * x.x2 + 1.0, -x.x1 + 0.5 * x.x2 + 2.0]
}

fn linear_grad(_: Point2) -> [Point2; 2] {
    [Point2::new(3.0, -2.0), Point2::new(-1.0, 0.5)]
}

fn patch_error(mesh: &Mesh, kind: ElementKind, op: Operator) -> Result<f64> {
    let assembled = assembly::assemble(mesh, kind, op, None, Some(&linear), AssemblyOptions::default())?;
    let opts = SolveOptions {
        tol: Some(1e-14),
        ..SolveOptions::default()
    };
    let sol = solve::finish(mesh, assembled, opts)?;
    let e = norms::error_norms_against(mesh, kind, &sol.u_h, &linear, &linear_grad, norms::ERROR_QUAD_POINTS)?;
    Ok(e.l2.max(e.h1_broken))
}

/// Discrete solution of `-Δu = 0` with linear boundary data, against the linear field.
pub fn patch_test() -> Result<f64> {
    let mut worst = 0.0_f64;
    for mesh in patch_meshes()? {
        for kind in element_configs() {
            worst = worst.max(patch_error(&mesh, kind, Operator::Laplace)?);
        }
    }
    Ok(worst)
}

/// Linear displacements solve the homogeneous elasticity system exactly.
pub fn elasticity_patch_test() -> Result<f64> {
    let mut worst = 0.0_f64;
    for mesh in patch_meshes()? {
        for kind in element_configs() {
            let op = Operator::Elasticity { mu: 1.0, lambda: 1.0 };
            worst = worst.max(patch_error(&mesh, kind, op)?);
        }
    }
    Ok(worst)
}

/// `max |aᵢⱼ - aⱼᵢ| / max |aᵢⱼ|` of assembled matrices.
pub fn stiffness_symmetry() -> Result<f64> {
    let mesh = random_mesh(8, 0.3, 5)?;
    let ops = [Operator::Laplace, Operator::Elasticity { mu: 1.0, lambda: 10.0 }, Operator::Stokes];
    let mut worst = 0.0_f64;
    for kind in element_configs() {
        for op in ops {
            let a = assembly::assemble(&mesh, kind, op, None, None, AssemblyOptions::default())?;
            let m = &a.system.matrix;
            worst = worst.max(m.asymmetry() / m.max_abs());
        }
    }
    Ok(worst)
}

/// Edge means of random discrete functions seen from both neighbours of every interior edge.
pub fn edge_mean_continuity() -> Result<f64> {
    let mesh = random_mesh(6, 0.3, 7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst = 0.0_f64;
    for kind in element_configs() {
        let ctx = ElementContext::new(kind)?;
        let u = DiscreteFunction {
            components: 1,
            edge_values: (0..mesh.edges.len()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            cell_values: (0..mesh.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        let mut seen: Vec<Option<f64>> = vec![None; mesh.edges.len()];
        for cell in 0..mesh.n_cells() {
            let means = assembly::cell_edge_means(&mesh, &ctx, &u, cell, 0)?;
            for (j, &e) in mesh.cell_edges[cell].iter().enumerate() {
                // the mean equals the midpoint value, hence also the neighbour's mean
                worst = worst.max((means[j] - u.edge_values[e]).abs());
                if let Some(other) = seen[e] {
                    worst = worst.max((means[j] - other).abs());
                }
                seen[e] = Some(means[j]);
            }
        }
    }
    Ok(worst)
}

/// Cellwise `∫_K ∇·u_h` for the interpolant of a divergence-free linear field.
pub fn stokes_divergence() -> Result<f64> {
    let mesh = random_mesh(6, 0.3, 8)?;
    let field = |x: Point2| [2.0 * x.x1 + x.x2 - 1.0, 3.0 * x.x1 - 2.0 * x.x2];
    let mut worst = 0.0_f64;
    for kind in element_configs() {
        let dm = assembly::build_dofmap(&mesh, kind)?;
        let u = assembly::interpolate(&mesh, &dm, 2, &field)?;
        for cell in 0..mesh.n_cells() {
            let loc = assembly::local_matrices(&mesh.quad(cell), kind, Operator::Stokes, None, 5)?;
            let coeffs = u.local_coefficients(&mesh, cell, loc.dim);
            let div: f64 = loc.divergence.iter().zip(&coeffs).map(|(b, c)| b * c).sum();
            worst = worst.max(div.abs());
        }
    }
    Ok(worst)
}

/// Forcing consistency of all model problems at 100 random points.
pub fn forcing_consistency() -> Result<f64> {
    let problems = [
        ProblemSpec::poisson(),
        ProblemSpec::stokes(),
        ProblemSpec::elasticity(1.0, 1.0)?,
        ProblemSpec::elasticity(1.0, 1e5)?,
    ];
    Ok(problems
        .iter()
        .enumerate()
        .map(|(i, p)| fd_forcing_max_error(p, 100, 20 + i as u64))
        .fold(0.0, f64::max))
}
