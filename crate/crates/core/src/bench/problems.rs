//! Manufactured solutions on the unit square with homogeneous Dirichlet data.

use std::f64::consts::PI;

use crate::assembly::Operator;
use crate::error::{Error, Result};
use crate::geometry::Point2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProblemKind {
    /// `u = sin πx₁ sin πx₂`.
    Poisson,
    /// Divergence-free velocity from the stream function
    /// `e^{x₁+2x₂}(x₁⁴-2x₁³+x₁²)(x₂⁴-2x₂³+x₂²)`, `p = -sin 2πx₁ sin 2πx₂`.
    Stokes,
    /// Clamped displacement with a `1/(1+λ)` divergence part.
    Elasticity { mu: f64, lambda: f64 },
}

/// Closed-form exact solution, gradient and forcing of a model problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
}

pub fn exact_problem(kind: ProblemKind) -> Result<ProblemSpec> {
    if let ProblemKind::Elasticity { mu, lambda } = kind {
        if !(mu > 0.0 && mu.is_finite()) || !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::BadParam(format!(
                "Lamé parameters need mu > 0 and lambda >= 0, got mu={mu}, lambda={lambda}"
            )));
        }
    }
    Ok(ProblemSpec { kind })
}

impl ProblemSpec {
    pub fn poisson() -> Self {
        ProblemSpec { kind: ProblemKind::Poisson }
    }

    pub fn stokes() -> Self {
        ProblemSpec { kind: ProblemKind::Stokes }
    }

    pub fn elasticity(mu: f64, lambda: f64) -> Result<Self> {
        exact_problem(ProblemKind::Elasticity { mu, lambda })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ProblemKind::Poisson => "poisson",
            ProblemKind::Stokes => "stokes",
            ProblemKind::Elasticity { .. } => "elasticity",
        }
    }

    pub fn operator(&self) -> Operator {
        match self.kind {
            ProblemKind::Poisson => Operator::Laplace,
            ProblemKind::Stokes => Operator::Stokes,
            ProblemKind::Elasticity { mu, lambda } => Operator::Elasticity { mu, lambda },
        }
    }

    pub fn components(&self) -> usize {
        self.operator().components()
    }

    /// Exact solution; scalar problems use component 0.
    pub fn u(&self, x: Point2) -> [f64; 2] {
        match self.kind {
            ProblemKind::Poisson => [(PI * x.x1).sin() * (PI * x.x2).sin(), 0.0],
            ProblemKind::Stokes => stokes::velocity(x),
            ProblemKind::Elasticity { lambda, .. } => elasticity::displacement(x, lambda),
        }
    }

    /// `∇u_c` for each component.
    pub fn grad_u(&self, x: Point2) -> [Point2; 2] {
        match self.kind {
            ProblemKind::Poisson => {
                let (sx, cx) = (PI * x.x1).sin_cos();
                let (sy, cy) = (PI * x.x2).sin_cos();
                [Point2::new(PI * cx * sy, PI * sx * cy), Point2::ZERO]
            }
            ProblemKind::Stokes => stokes::velocity_grad(x),
            ProblemKind::Elasticity { lambda, .. } => elasticity::displacement_grad(x, lambda),
        }
    }

    /// `Δu_c` for each component.
    pub fn laplacian_u(&self, x: Point2) -> [f64; 2] {
        match self.kind {
            ProblemKind::Poisson => [-2.0 * PI * PI * self.u(x)[0], 0.0],
            ProblemKind::Stokes => stokes::velocity_laplacian(x),
            ProblemKind::Elasticity { lambda, .. } => elasticity::displacement_laplacian(x, lambda),
        }
    }

    /// Exact pressure (Stokes only, zero otherwise).
    pub fn p(&self, x: Point2) -> f64 {
        match self.kind {
            ProblemKind::Stokes => -(2.0 * PI * x.x1).sin() * (2.0 * PI * x.x2).sin(),
            _ => 0.0,
        }
    }

    pub fn grad_p(&self, x: Point2) -> Point2 {
        match self.kind {
            ProblemKind::Stokes => {
                let (sx, cx) = (2.0 * PI * x.x1).sin_cos();
                let (sy, cy) = (2.0 * PI * x.x2).sin_cos();
                Point2::new(-2.0 * PI * cx * sy, -2.0 * PI * sx * cy)
            }
            _ => Point2::ZERO,
        }
    }

    /// Right-hand side consistent with [`u`](Self::u).
    pub fn forcing(&self, x: Point2) -> [f64; 2] {
        match self.kind {
            ProblemKind::Poisson => [2.0 * PI * PI * self.u(x)[0], 0.0],
            ProblemKind::Stokes => {
                let lap = self.laplacian_u(x);
                let gp = self.grad_p(x);
                [-lap[0] + gp.x1, -lap[1] + gp.x2]
            }
            ProblemKind::Elasticity { mu, lambda } => {
                let lap = self.laplacian_u(x);
                let gd = elasticity::grad_div(x, lambda);
                [
                    -(lambda + mu) * gd.x1 - mu * lap[0],
                    -(lambda + mu) * gd.x2 - mu * lap[1],
                ]
            }
        }
    }

    pub fn divergence(&self, x: Point2) -> f64 {
        let g = self.grad_u(x);
        match self.kind {
            ProblemKind::Poisson => 0.0,
            _ => g[0].x1 + g[1].x2,
        }
    }
}

mod stokes {
    use crate::geometry::Point2;

    /// `t⁴ - 2t³ + t²` and its first three derivatives.
    fn bump(t: f64) -> [f64; 4] {
        let t2 = t * t;
        [
            t2 * t2 - 2.0 * t2 * t + t2,
            4.0 * t2 * t - 6.0 * t2 + 2.0 * t,
            12.0 * t2 - 12.0 * t + 2.0,
            24.0 * t - 12.0,
        ]
    }

    /// `e^{x+2y} F(x) G(y)`: value, gradient and Laplacian.
    fn product(e: f64, f: [f64; 3], g: [f64; 3]) -> (f64, Point2, f64) {
        let v = e * f[0] * g[0];
        let grad = Point2::new(e * (f[1] + f[0]) * g[0], e * f[0] * (g[1] + 2.0 * g[0]));
        let lap = e * ((f[2] + 2.0 * f[1] + f[0]) * g[0] + f[0] * (g[2] + 4.0 * g[1] + 4.0 * g[0]));
        (v, grad, lap)
    }

    /// Factors of `u₁ = e P R` and `u₂ = -e S Q`, with `R = 2Q + Q'` and `S = P + P'`.
    fn factors(x: Point2) -> (f64, [f64; 3], [f64; 3], [f64; 3], [f64; 3]) {
        let e = (x.x1 + 2.0 * x.x2).exp();
        let p = bump(x.x1);
        let q = bump(x.x2);
        let r = [2.0 * q[0] + q[1], 2.0 * q[1] + q[2], 2.0 * q[2] + q[3]];
        let s = [p[0] + p[1], p[1] + p[2], p[2] + p[3]];
        (e, [p[0], p[1], p[2]], r, s, [q[0], q[1], q[2]])
    }

    pub fn velocity(x: Point2) -> [f64; 2] {
        let (e, p, r, s, q) = factors(x);
        [e * p[0] * r[0], -e * s[0] * q[0]]
    }

    pub fn velocity_grad(x: Point2) -> [Point2; 2] {
        let (e, p, r, s, q) = factors(x);
        let g1 = product(e, p, r).1;
        let g2 = product(e, s, q).1;
        [g1, -g2]
    }

    pub fn velocity_laplacian(x: Point2) -> [f64; 2] {
        let (e, p, r, s, q) = factors(x);
        [product(e, p, r).2, -product(e, s, q).2]
    }
}

mod elasticity {
    use std::f64::consts::PI;

    use crate::geometry::Point2;

    pub fn displacement(x: Point2, lambda: f64) -> [f64; 2] {
        let s = 1.0 / (1.0 + lambda);
        let b = s * (PI * x.x1).sin() * (PI * x.x2).sin();
        let (s2x, c2x) = (2.0 * PI * x.x1).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x.x2).sin_cos();
        [s2y * (c2x - 1.0) + b, -s2x * (c2y - 1.0) + b]
    }

    pub fn displacement_grad(x: Point2, lambda: f64) -> [Point2; 2] {
        let s = 1.0 / (1.0 + lambda);
        let (sx, cx) = (PI * x.x1).sin_cos();
        let (sy, cy) = (PI * x.x2).sin_cos();
        let (s2x, c2x) = (2.0 * PI * x.x1).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x.x2).sin_cos();
        let gb = Point2::new(s * PI * cx * sy, s * PI * sx * cy);
        let tp = 2.0 * PI;
        [
            Point2::new(-tp * s2y * s2x, tp * c2y * (c2x - 1.0)) + gb,
            Point2::new(-tp * c2x * (c2y - 1.0), tp * s2x * s2y) + gb,
        ]
    }

    pub fn displacement_laplacian(x: Point2, lambda: f64) -> [f64; 2] {
        let s = 1.0 / (1.0 + lambda);
        let lb = -2.0 * PI * PI * s * (PI * x.x1).sin() * (PI * x.x2).sin();
        let c = 4.0 * PI * PI;
        let (s2x, c2x) = (2.0 * PI * x.x1).sin_cos();
        let (s2y, c2y) = (2.0 * PI * x.x2).sin_cos();
        [-c * s2y * (2.0 * c2x - 1.0) + lb, c * s2x * (2.0 * c2y - 1.0) + lb]
    }

    pub fn grad_div(x: Point2, lambda: f64) -> Point2 {
        let s = 1.0 / (1.0 + lambda);
        let v = s * PI * PI * (PI * (x.x1 + x.x2)).cos();
        Point2::new(v, v)
    }
}
