//! Reference shape functions.
//!
//! Two element families live here:
//!
//! * the parametric DSSY element on the reference square, spanned by
//!   `{1, x̂₁, x̂₂, φ_l(x̂₁) - φ_l(x̂₂)}` and optionally augmented with `x̂₁x̂₂`
//!   (five functions, the extra degree of freedom being the moment
//!   `∫ v̂ x̂₁x̂₂`);
//! * the nonparametric element on the intermediate quadrilateral
//!   `K̃ = S([-1,1]^2)`, spanned by `{1, x̃₁, x̃₂, μ̃}` where
//!   `μ̃ = -(5/3) ℓ̃₁ ℓ̃₂ Q̃` is a quartic vanishing on both diagonals of `K̃`
//!   and `Q̃` is the quadratic that makes every edge mean equal the value
//!   at the edge midpoint.
//!
//! Both families use the four edge midpoints as degrees of freedom. The
//! midpoints of `K̃` coincide with those of the square, so the nodal basis
//! of the nonparametric element is defined against `m̂₁..m̂₄` directly.

use crate::error::{Error, Result};
use crate::geometry::{Point2, REF_MIDPOINTS};
use crate::linsolve::dense;
use crate::quadrature;

/// Gauss abscissa of the 3-point rule, `√(3/5)`.
pub fn xi() -> f64 {
    (3.0_f64 / 5.0).sqrt()
}

/// `√(2/5)`, the abscissa of the auxiliary points used by the circle construction.
pub fn eta() -> f64 {
    (2.0_f64 / 5.0).sqrt()
}

/// The one-dimensional profile `φ_l`.
pub fn phi(t: f64, l: i32) -> Result<f64> {
    let t2 = t * t;
    match l {
        1 => Ok(t2 - 5.0 / 3.0 * t2 * t2),
        2 => Ok(t2 - 25.0 / 6.0 * t2 * t2 + 3.5 * t2 * t2 * t2),
        _ => Err(Error::BadVariant(l)),
    }
}

/// `φ_l'(t)`.
pub fn phi_deriv(t: f64, l: i32) -> Result<f64> {
    let t2 = t * t;
    match l {
        1 => Ok(2.0 * t - 20.0 / 3.0 * t2 * t),
        2 => Ok(2.0 * t - 50.0 / 3.0 * t2 * t + 21.0 * t2 * t2 * t),
        _ => Err(Error::BadVariant(l)),
    }
}

/// `ψ̂_l(x̂) = φ_l(x̂₁) - φ_l(x̂₂)`.
pub fn psi_hat(xhat: Point2, l: i32) -> Result<f64> {
    Ok(phi(xhat.x1, l)? - phi(xhat.x2, l)?)
}

pub fn psi_hat_grad(xhat: Point2, l: i32) -> Result<Point2> {
    Ok(Point2::new(phi_deriv(xhat.x1, l)?, -phi_deriv(xhat.x2, l)?))
}

/// Lines through the diagonals of `K̃`: `ℓ̃₁` vanishes at `ṽ₁, ṽ₃`, `ℓ̃₂` at `ṽ₂, ṽ₄`.
pub fn ell(xt: Point2, s: Point2) -> (f64, f64) {
    (
        xt.x1 - xt.x2 + s.x2 - s.x1,
        xt.x1 + xt.x2 + s.x1 + s.x2,
    )
}

/// `r̃² = (6/25)(5/2 - s̃₁² - s̃₂²)`.
pub fn radius_squared(s: Point2) -> f64 {
    6.0 / 25.0 * (2.5 - s.x1 * s.x1 - s.x2 * s.x2)
}

/// The quadratic factor `Q̃(x̃; s̃, c̃)`.
pub fn q_tilde(xt: Point2, s: Point2, c: f64) -> f64 {
    let x = xt.x1 + 0.4 * s.x2;
    let y = xt.x2 + 0.4 * s.x1;
    x * x + y * y - radius_squared(s) + c * (x * y + 6.0 / 25.0 * s.x1 * s.x2)
}

pub fn q_tilde_grad(xt: Point2, s: Point2, c: f64) -> Point2 {
    let x = xt.x1 + 0.4 * s.x2;
    let y = xt.x2 + 0.4 * s.x1;
    Point2::new(2.0 * x + c * y, 2.0 * y + c * x)
}

/// `μ̃ = -(5/3) ℓ̃₁ ℓ̃₂ Q̃`, evaluated in factored form.
pub fn mu_tilde(xt: Point2, s: Point2, c: f64) -> f64 {
    let (l1, l2) = ell(xt, s);
    -5.0 / 3.0 * l1 * l2 * q_tilde(xt, s, c)
}

/// Exact gradient of [`mu_tilde`] by the product rule.
pub fn mu_tilde_grad(xt: Point2, s: Point2, c: f64) -> Point2 {
    let (l1, l2) = ell(xt, s);
    let q = q_tilde(xt, s, c);
    let gq = q_tilde_grad(xt, s, c);
    // ∇ℓ̃₁ = (1, -1), ∇ℓ̃₂ = (1, 1)
    let g = Point2::new(l2 * q, -l2 * q) + Point2::new(l1 * q, l1 * q) + gq * (l1 * l2);
    g * (-5.0 / 3.0)
}

/// Gauss points on the edges of `K̃` together with the edge midpoints and
/// the auxiliary `η̃` points (same edges, abscissa `√(2/5)`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeGaussSet {
    pub g: [Point2; 8],
    pub m: [Point2; 4],
    pub eta: [Point2; 8],
}

/// Direction vector of edge `j` (0-based) of `K̃`: `ẽⱼ(t) = m̂ⱼ + t·dirⱼ`.
pub fn edge_direction(j: usize, s: Point2) -> Point2 {
    let u1 = Point2::new(1.0, 0.0);
    let u2 = Point2::new(0.0, 1.0);
    match j {
        0 => u2 + s,
        1 => u1 + s,
        2 => u2 - s,
        3 => u1 - s,
        _ => panic!("edge index {j} out of range"),
    }
}

fn edge_pairs(s: Point2, t: f64) -> [Point2; 8] {
    let m = REF_MIDPOINTS;
    let e = |j: usize| edge_direction(j, s) * t;
    [
        m[0] - e(0),
        m[0] + e(0),
        m[1] + e(1),
        m[1] - e(1),
        m[2] + e(2),
        m[2] - e(2),
        m[3] - e(3),
        m[3] + e(3),
    ]
}

pub fn edge_gauss_set(s: Point2) -> EdgeGaussSet {
    EdgeGaussSet {
        g: edge_pairs(s, xi()),
        m: REF_MIDPOINTS,
        eta: edge_pairs(s, eta()),
    }
}

/// `f(g̃₂ⱼ₋₁) + f(g̃₂ⱼ) - 2 f(m̂ⱼ)` for each edge of `K̃`.
///
/// These vanish exactly when the 3-point Gauss edge mean of `f` equals its
/// midpoint value, which for quartics is the mean value property itself.
pub fn mean_value_residual_of(f: impl Fn(Point2) -> f64, s: Point2) -> [f64; 4] {
    let set = edge_gauss_set(s);
    std::array::from_fn(|j| f(set.g[2 * j]) + f(set.g[2 * j + 1]) - 2.0 * f(set.m[j]))
}

pub fn mean_value_residual(s: Point2, c: f64) -> [f64; 4] {
    mean_value_residual_of(|x| mu_tilde(x, s, c), s)
}

/// Closed-form determinant of the midpoint evaluation matrix of `{1, x̃₁, x̃₂, μ̃}`.
pub fn unisolvency_det(s: Point2, c: f64) -> f64 {
    16.0 * (s.x1 * s.x1 + s.x2 * s.x2 + 1.0 / 3.0 + c * s.x1 * s.x2)
}

/// The monomial-like span `(1, x̃₁, x̃₂, μ̃)` evaluated at `xt`.
pub fn span_values(xt: Point2, s: Point2, c: f64) -> [f64; 4] {
    [1.0, xt.x1, xt.x2, mu_tilde(xt, s, c)]
}

pub fn span_grads(xt: Point2, s: Point2, c: f64) -> [Point2; 4] {
    [
        Point2::ZERO,
        Point2::new(1.0, 0.0),
        Point2::new(0.0, 1.0),
        mu_tilde_grad(xt, s, c),
    ]
}

/// `E[k][j] = φ̃ⱼ(m̂ₖ)`, rows indexed by midpoint.
pub fn evaluation_matrix(s: Point2, c: f64) -> [[f64; 4]; 4] {
    std::array::from_fn(|k| span_values(REF_MIDPOINTS[k], s, c))
}

/// Nodal basis of the nonparametric element on `K̃`.
///
/// `nodal[i]` holds the coefficients of `bᵢ` against `(1, x̃₁, x̃₂, μ̃)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NonparametricElement {
    pub s_tilde: Point2,
    pub c_tilde: f64,
    pub r2: f64,
    pub nodal: [[f64; 4]; 4],
}

pub fn nodal_basis(s: Point2, c: f64) -> Result<NonparametricElement> {
    let det = unisolvency_det(s, c);
    if det.abs() < 1e-10 * 16.0 / 3.0 {
        return Err(Error::NotUnisolvent { det });
    }
    // bᵢ(m̂ₖ) = Σⱼ C[i][j] E[k][j] = δᵢₖ, i.e. C = E⁻ᵀ.
    let e = evaluation_matrix(s, c);
    let inv = dense::invert4(&e).ok_or(Error::NotUnisolvent { det })?;
    let nodal = std::array::from_fn(|i| std::array::from_fn(|j| inv[j][i]));
    Ok(NonparametricElement {
        s_tilde: s,
        c_tilde: c,
        r2: radius_squared(s),
        nodal,
    })
}

impl NonparametricElement {
    /// Values of the four nodal functions at a point of `K̃`.
    pub fn values(&self, xt: Point2) -> [f64; 4] {
        let v = span_values(xt, self.s_tilde, self.c_tilde);
        std::array::from_fn(|i| (0..4).map(|j| self.nodal[i][j] * v[j]).sum())
    }

    /// Gradients (with respect to `x̃`) of the four nodal functions.
    pub fn grads(&self, xt: Point2) -> [Point2; 4] {
        // only μ̃ has a non-constant gradient
        let gm = mu_tilde_grad(xt, self.s_tilde, self.c_tilde);
        std::array::from_fn(|i| {
            let c = self.nodal[i];
            Point2::new(c[1] + c[3] * gm.x1, c[2] + c[3] * gm.x2)
        })
    }

    /// Both values and gradients, sharing the factored evaluation of `μ̃`.
    pub fn eval(&self, xt: Point2) -> ([f64; 4], [Point2; 4]) {
        let (s, c) = (self.s_tilde, self.c_tilde);
        let (l1, l2) = ell(xt, s);
        let q = q_tilde(xt, s, c);
        let gq = q_tilde_grad(xt, s, c);
        let k = -5.0 / 3.0;
        let mu = k * l1 * l2 * q;
        let gm = (Point2::new(l2 * q + l1 * q, l1 * q - l2 * q) + gq * (l1 * l2)) * k;
        let mut vals = [0.0; 4];
        let mut grads = [Point2::ZERO; 4];
        for i in 0..4 {
            let n = self.nodal[i];
            vals[i] = n[0] + n[1] * xt.x1 + n[2] * xt.x2 + n[3] * mu;
            grads[i] = Point2::new(n[1] + n[3] * gm.x1, n[2] + n[3] * gm.x2);
        }
        (vals, grads)
    }
}

/// Recovers the circle `Q̃ = 0` (for `c̃ = 0`) from the four conditions
/// `(c - η̃₂ⱼ₋₁)·(c - η̃₂ⱼ) = r²` by linear least squares.
///
/// Writing `ρ = r² - |c|²` turns each condition into the linear equation
/// `c·(η̃₂ⱼ₋₁ + η̃₂ⱼ) + ρ = η̃₂ⱼ₋₁·η̃₂ⱼ`. Returns the center and `r²`.
pub fn circle_center_check(s: Point2) -> Result<(Point2, f64)> {
    let set = edge_gauss_set(s);
    let mut rows = [[0.0; 3]; 4];
    let mut rhs = [0.0; 4];
    for j in 0..4 {
        let (a, b) = (set.eta[2 * j], set.eta[2 * j + 1]);
        let sum = a + b;
        rows[j] = [sum.x1, sum.x2, 1.0];
        rhs[j] = a.dot(b);
    }
    let mut normal = [[0.0; 3]; 3];
    let mut nrhs = [0.0; 3];
    for j in 0..4 {
        for p in 0..3 {
            nrhs[p] += rows[j][p] * rhs[j];
            for q in 0..3 {
                normal[p][q] += rows[j][p] * rows[j][q];
            }
        }
    }
    let scale = normal.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let det = dense::det(&normal.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
    if det.abs() <= 1e-12 * scale.powi(3) {
        return Err(Error::Degenerate);
    }
    let sol = dense::solve(
        normal.iter().map(|r| r.to_vec()).collect(),
        nrhs.to_vec(),
    )
    .ok_or(Error::Degenerate)?;
    let center = Point2::new(sol[0], sol[1]);
    Ok((center, sol[2] + center.dot(center)))
}

/// The parametric DSSY reference element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParametricElement {
    pub variant_l: i32,
    pub augmented: bool,
}

impl Default for ParametricElement {
    fn default() -> Self {
        ParametricElement {
            variant_l: 1,
            augmented: true,
        }
    }
}

impl ParametricElement {
    pub fn new(variant_l: i32, augmented: bool) -> Result<Self> {
        if variant_l != 1 && variant_l != 2 {
            return Err(Error::BadVariant(variant_l));
        }
        Ok(ParametricElement {
            variant_l,
            augmented,
        })
    }

    pub fn dim(&self) -> usize {
        if self.augmented {
            5
        } else {
            4
        }
    }
}

/// Values and reference gradients of `{1, x̂₁, x̂₂, [x̂₁x̂₂,] ψ̂_l}`.
pub fn parametric_basis_eval(el: ParametricElement, xhat: Point2) -> Result<(Vec<f64>, Vec<Point2>)> {
    if el.variant_l != 1 && el.variant_l != 2 {
        return Err(Error::BadVariant(el.variant_l));
    }
    let (v, g) = raw_parametric(el, xhat);
    let k = el.dim();
    Ok((v[..k].to_vec(), g[..k].to_vec()))
}

fn raw_parametric(el: ParametricElement, xhat: Point2) -> ([f64; 5], [Point2; 5]) {
    let (a, b) = (xhat.x1, xhat.x2);
    let (psi, gpsi) = if el.variant_l == 2 {
        let (a2, b2) = (a * a, b * b);
        (
            a2 - 25.0 / 6.0 * a2 * a2 + 3.5 * a2 * a2 * a2 - (b2 - 25.0 / 6.0 * b2 * b2 + 3.5 * b2 * b2 * b2),
            Point2::new(
                2.0 * a - 50.0 / 3.0 * a2 * a + 21.0 * a2 * a2 * a,
                -(2.0 * b - 50.0 / 3.0 * b2 * b + 21.0 * b2 * b2 * b),
            ),
        )
    } else {
        let (a2, b2) = (a * a, b * b);
        (
            a2 - 5.0 / 3.0 * a2 * a2 - (b2 - 5.0 / 3.0 * b2 * b2),
            Point2::new(2.0 * a - 20.0 / 3.0 * a2 * a, -(2.0 * b - 20.0 / 3.0 * b2 * b)),
        )
    };
    let mut v = [1.0, a, b, 0.0, 0.0];
    let mut g = [Point2::ZERO, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0), Point2::ZERO, Point2::ZERO];
    if el.augmented {
        v[3] = a * b;
        g[3] = Point2::new(b, a);
        v[4] = psi;
        g[4] = gpsi;
    } else {
        v[3] = psi;
        g[3] = gpsi;
    }
    (v, g)
}

/// Nodal basis of a parametric element on the reference square.
///
/// Degrees of freedom are the four midpoint values, followed (when
/// augmented) by the cell moment `∫ v̂ x̂₁x̂₂`. `coeffs[i]` expresses the
/// i-th nodal function against [`parametric_basis_eval`]'s ordering.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricBasis {
    pub element: ParametricElement,
    pub coeffs: Vec<Vec<f64>>,
}

impl ParametricBasis {
    pub fn new(element: ParametricElement) -> Result<Self> {
        let k = element.dim();
        let mut e = vec![vec![0.0; k]; k];
        for (row, &m) in REF_MIDPOINTS.iter().enumerate() {
            e[row] = parametric_basis_eval(element, m)?.0;
        }
        if element.augmented {
            let rule = quadrature::tensor_rule(5)?;
            for (p, &w) in rule.points.iter().zip(&rule.weights) {
                let vals = parametric_basis_eval(element, *p)?.0;
                for j in 0..k {
                    e[4][j] += w * vals[j] * p.x1 * p.x2;
                }
            }
        }
        let inv = dense::invert(&e).ok_or(Error::NotUnisolvent { det: dense::det(&e) })?;
        let coeffs = (0..k).map(|i| (0..k).map(|j| inv[j][i]).collect()).collect();
        Ok(ParametricBasis { element, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.element.dim()
    }

    /// Nodal values and reference gradients at `xhat`, written into the given buffers.
    pub fn eval_into(&self, xhat: Point2, vals: &mut [f64], grads: &mut [Point2]) -> Result<()> {
        let (v, g) = raw_parametric(self.element, xhat);
        let k = self.dim();
        for i in 0..k {
            let c = &self.coeffs[i];
            let mut val = 0.0;
            let mut grad = Point2::ZERO;
            for j in 0..k {
                val += c[j] * v[j];
                grad += g[j] * c[j];
            }
            vals[i] = val;
            grads[i] = grad;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::IntermediateQuad;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0, 1).unwrap(), 0.0);
        assert!(close(phi(1.0, 1).unwrap(), -2.0 / 3.0, 1e-15));
        assert!(close(phi(1.0, 2).unwrap(), 1.0 / 3.0, 1e-15));
        assert!(matches!(phi(0.5, 3), Err(Error::BadVariant(3))));
        assert!(matches!(psi_hat(Point2::ZERO, 0), Err(Error::BadVariant(0))));
    }

    #[test]
    fn psi_hat_factorization() {
        assert!(close(psi_hat(Point2::new(1.0, 0.0), 1).unwrap(), -2.0 / 3.0, 1e-15));
        for &t in &[-0.9, 0.0, 0.37, 1.0] {
            for l in 1..=2 {
                assert_eq!(psi_hat(Point2::new(t, t), l).unwrap(), 0.0);
            }
        }
        let (a, b) = (0.4, -0.3);
        let factored = -5.0 / 3.0 * (a - b) * (a + b) * (a * a + b * b - 0.6);
        assert!(close(psi_hat(Point2::new(a, b), 1).unwrap(), factored, 1e-15));
    }

    #[test]
    fn ell_values() {
        let s = Point2::new(0.2, 0.1);
        let iq = IntermediateQuad::new(s);
        assert!(close(ell(iq.vt[0], s).0, 0.0, 1e-15));
        assert!(close(ell(iq.vt[2], s).0, 0.0, 1e-15));
        assert!(close(ell(iq.vt[1], s).1, 0.0, 1e-15));
        assert!(close(ell(iq.vt[3], s).1, 0.0, 1e-15));
        let (l1, l2) = ell(Point2::ZERO, s);
        assert!(close(l1, -0.1, 1e-15) && close(l2, 0.3, 1e-15));
    }

    #[test]
    fn q_tilde_special_cases() {
        let x = Point2::new(0.3, -0.8);
        assert!(close(q_tilde(x, Point2::ZERO, 0.0), 0.09 + 0.64 - 0.6, 1e-15));
        let s = Point2::new(0.3, -0.1);
        let center = Point2::new(-0.4 * s.x2, -0.4 * s.x1);
        assert!(close(q_tilde(center, s, 0.0), -radius_squared(s), 1e-15));
    }

    #[test]
    fn q_tilde_expanded_oracle() {
        // Independent monomial expansion of Q̃ at x = (0.1, 0.2), s = (0.3, -0.1), c = 1:
        // X = x1 + 0.4 s2 = 0.06, Y = x2 + 0.4 s1 = 0.32,
        // r² = 0.24 (2.5 - 0.09 - 0.01) = 0.576,
        // Q = 0.0036 + 0.1024 - 0.576 + (0.0192 + 0.24·(-0.03)) = -0.4580
        let q = q_tilde(Point2::new(0.1, 0.2), Point2::new(0.3, -0.1), 1.0);
        assert!(close(q, -0.458, 1e-14), "{q}");
    }

    #[test]
    fn mu_reduces_to_psi_hat() {
        assert!(close(mu_tilde(Point2::new(0.0, 1.0), Point2::ZERO, 0.0), 2.0 / 3.0, 1e-15));
        for i in 0..5 {
            for j in 0..5 {
                let x = Point2::new(-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64);
                let d = mu_tilde(x, Point2::ZERO, 0.0) - psi_hat(x, 1).unwrap();
                assert!(d.abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn mu_vanishes_at_vertices() {
        let s = Point2::new(0.31, -0.22);
        for v in IntermediateQuad::new(s).vt {
            assert!(mu_tilde(v, s, 0.7).abs() < 1e-15);
        }
    }

    #[test]
    fn mu_gradient_matches_finite_differences() {
        let (x, s, c) = (Point2::new(0.2, -0.4), Point2::new(0.25, 0.1), 1.0);
        let h = 1e-6;
        let fd = Point2::new(
            (mu_tilde(x + Point2::new(h, 0.0), s, c) - mu_tilde(x - Point2::new(h, 0.0), s, c)) / (2.0 * h),
            (mu_tilde(x + Point2::new(0.0, h), s, c) - mu_tilde(x - Point2::new(0.0, h), s, c)) / (2.0 * h),
        );
        assert!(mu_tilde_grad(x, s, c).dist(fd) < 1e-8);
    }

    #[test]
    fn gauss_set_points() {
        let set = edge_gauss_set(Point2::ZERO);
        assert!(set.g[0].dist(Point2::new(1.0, -xi())) < 1e-15);
        assert!(set.g[1].dist(Point2::new(1.0, xi())) < 1e-15);
        let s = Point2::new(0.2, 0.1);
        let set = edge_gauss_set(s);
        assert!(set.g[0].dist(REF_MIDPOINTS[0] + edge_direction(0, s) * (-xi())) < 1e-15);
        // m̂₁ - √(2/5)(0.2, 1.1)
        let e = eta();
        assert!(set.eta[0].dist(Point2::new(1.0 - 0.2 * e, -1.1 * e)) < 1e-15);
        assert!(close(set.eta[0].x1, 0.8735, 1e-4) && close(set.eta[0].x2, -0.6957, 1e-4));
        // g points lie on the edges of K̃
        let iq = IntermediateQuad::new(s);
        for j in 0..4 {
            let (a, b) = (iq.vt[(j + 3) % 4], iq.vt[j]);
            for p in [set.g[2 * j], set.g[2 * j + 1], set.eta[2 * j], set.eta[2 * j + 1]] {
                let cross = (b - a).x1 * (p - a).x2 - (b - a).x2 * (p - a).x1;
                assert!(cross.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn residuals_vanish_and_have_power() {
        for r in mean_value_residual(Point2::ZERO, 0.0) {
            assert!(r.abs() <= 1e-15);
        }
        let (s, c) = (Point2::new(0.3, -0.2), 1.0);
        for r in mean_value_residual(s, c) {
            assert!(r.abs() <= 1e-12);
        }
        // Shifting r̃² by δ changes μ̃ by (5/3)δ ℓ̃₁ℓ̃₂; on each edge ℓ̃₁ℓ̃₂ at the
        // Gauss points is (1-ξ²) times its midpoint value, so the residual
        // becomes (5/3)δ(-2ξ²) ℓ̃₁ℓ̃₂(m̂ⱼ) = -2δ ℓ̃₁ℓ̃₂(m̂ⱼ).
        let delta = 0.1;
        let perturbed = |x: Point2| {
            let (l1, l2) = ell(x, s);
            -5.0 / 3.0 * l1 * l2 * (q_tilde(x, s, c) - delta)
        };
        let res = mean_value_residual_of(perturbed, s);
        for j in 0..4 {
            let (l1, l2) = ell(REF_MIDPOINTS[j], s);
            let expected = -2.0 * delta * l1 * l2;
            assert!(close(res[j], expected, 1e-13), "{j}: {} vs {expected}", res[j]);
            assert!(res[j].abs() > 1e-3);
        }
    }

    #[test]
    fn determinant_identity() {
        assert!(close(unisolvency_det(Point2::ZERO, 5.0), 16.0 / 3.0, 1e-15));
        let s = Point2::new(0.3, 0.2);
        let closed = unisolvency_det(s, 1.0);
        assert!(close(closed, 16.0 * (0.09 + 0.04 + 1.0 / 3.0 + 0.06), 1e-13));
        let e = evaluation_matrix(s, 1.0);
        let numeric = dense::det(&e.iter().map(|r| r.to_vec()).collect::<Vec<_>>());
        assert!(close(numeric, closed, 1e-12 * closed));
    }

    #[test]
    fn nodal_basis_rejects_singular_choice() {
        let s = Point2::new(0.5, -0.5);
        assert!(unisolvency_det(s, 10.0 / 3.0).abs() < 1e-13);
        assert!(matches!(nodal_basis(s, 10.0 / 3.0), Err(Error::NotUnisolvent { .. })));
    }

    #[test]
    fn nodal_basis_is_nodal() {
        for (s, c) in [(Point2::ZERO, 0.0), (Point2::new(0.25, 0.1), 0.0), (Point2::new(-0.3, 0.4), 1.0)] {
            let el = nodal_basis(s, c).unwrap();
            for (k, &m) in REF_MIDPOINTS.iter().enumerate() {
                let v = el.values(m);
                for i in 0..4 {
                    let expect = if i == k { 1.0 } else { 0.0 };
                    assert!(close(v[i], expect, 1e-12));
                }
            }
            // partition of unity at the coefficient level
            for j in 0..4 {
                let sum: f64 = (0..4).map(|i| el.nodal[i][j]).sum();
                assert!(close(sum, if j == 0 { 1.0 } else { 0.0 }, 1e-14));
            }
            let x = Point2::new(0.13, -0.52);
            let (vals, grads) = el.eval(x);
            let g2 = el.grads(x);
            let v2 = el.values(x);
            for i in 0..4 {
                assert!(close(vals[i], v2[i], 1e-14));
                assert!(grads[i].dist(g2[i]) < 1e-13);
            }
        }
    }

    #[test]
    fn circle_center() {
        let (c, r2) = circle_center_check(Point2::ZERO).unwrap();
        assert!(c.norm() < 1e-14);
        assert!(close(r2, 0.6, 1e-14));
        let (c, r2) = circle_center_check(Point2::new(0.2, -0.3)).unwrap();
        assert!(c.dist(Point2::new(0.12, -0.08)) < 1e-12);
        assert!(close(r2, 0.5688, 1e-12));
    }

    #[test]
    fn parametric_basis() {
        let el = ParametricElement::new(1, true).unwrap();
        let (v, _) = parametric_basis_eval(el, Point2::ZERO).unwrap();
        assert_eq!(v, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        let psi: Vec<f64> = REF_MIDPOINTS.iter().map(|&m| psi_hat(m, 1).unwrap()).collect();
        for (p, e) in psi.iter().zip([-2.0 / 3.0, 2.0 / 3.0, -2.0 / 3.0, 2.0 / 3.0]) {
            assert!(close(*p, e, 1e-15));
        }
        for l in 1..=2 {
            let m = quadrature::edge_mean(
                |x| psi_hat(x, l).unwrap(),
                Point2::new(1.0, -1.0),
                Point2::new(1.0, 1.0),
                4,
            )
            .unwrap();
            assert!(close(m, psi_hat(REF_MIDPOINTS[0], l).unwrap(), 1e-14));
        }
        assert!(ParametricElement::new(3, false).is_err());
    }

    #[test]
    fn parametric_nodal_basis() {
        let rule = quadrature::tensor_rule(5).unwrap();
        for l in 1..=2 {
            for aug in [false, true] {
                let basis = ParametricBasis::new(ParametricElement::new(l, aug).unwrap()).unwrap();
                let k = basis.dim();
                let mut vals = vec![0.0; k];
                let mut grads = vec![Point2::ZERO; k];
                for (row, &m) in REF_MIDPOINTS.iter().enumerate() {
                    basis.eval_into(m, &mut vals, &mut grads).unwrap();
                    for i in 0..k {
                        assert!(close(vals[i], if i == row { 1.0 } else { 0.0 }, 1e-13));
                    }
                }
                if aug {
                    for i in 0..k {
                        let moment = rule.integrate(|p| {
                            let mut v = vec![0.0; k];
                            let mut g = vec![Point2::ZERO; k];
                            basis.eval_into(p, &mut v, &mut g).unwrap();
                            v[i] * p.x1 * p.x2
                        });
                        assert!(close(moment, if i == 4 { 1.0 } else { 0.0 }, 1e-13));
                    }
                }
            }
        }
    }
}
