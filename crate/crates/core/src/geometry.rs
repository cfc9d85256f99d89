//! Quadrilateral geometry and the bilinear reference map.
//!
//! Every convex quadrilateral `K` is the image of the reference square
//! `[-1,1]^2` under a bilinear map `F(x̂) = A x̂ + x̂₁x̂₂ d + b`. Factoring
//! `d = A s̃` splits `F` into a *simple* bilinear map `S(x̂) = x̂ + x̂₁x̂₂ s̃`
//! followed by the affine map `x̃ ↦ A x̃ + b`. The intermediate cell
//! `S([-1,1]^2)` is a perturbation of the square by the single vector `s̃`
//! and keeps the edge midpoints of the square fixed.
//!
//! Vertex ordering: `v̂₁=(1,1)`, `v̂₂=(-1,1)`, `v̂₃=(-1,-1)`, `v̂₄=(1,-1)`;
//! edge `eⱼ` joins `vⱼ₋₁` and `vⱼ` (with `v₀ = v₄`), so the reference
//! midpoints are `m̂₁=(1,0)`, `m̂₂=(0,1)`, `m̂₃=(-1,0)`, `m̂₄=(0,-1)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A point (or vector) in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const ZERO: Point2 = Point2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        (self + other) * 0.5
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x1, self.x2)
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 + rhs.x1, self.x2 + rhs.x2)
    }
}

impl AddAssign for Point2 {
    fn add_assign(&mut self, rhs: Point2) {
        self.x1 += rhs.x1;
        self.x2 += rhs.x2;
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x1 - rhs.x1, self.x2 - rhs.x2)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x1, -self.x2)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x1 * s, self.x2 * s)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        p * self
    }
}

/// Row-major 2×2 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    /// Matrix with the given columns.
    pub fn from_cols(c1: Point2, c2: Point2) -> Mat2 {
        Mat2([[c1.x1, c2.x1], [c1.x2, c2.x2]])
    }

    pub fn col(&self, j: usize) -> Point2 {
        Point2::new(self.0[0][j], self.0[1][j])
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    /// Inverse, or `None` when the determinant is exactly zero.
    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 {
            return None;
        }
        let m = self.0;
        Some(Mat2([
            [m[1][1] / det, -m[0][1] / det],
            [-m[1][0] / det, m[0][0] / det],
        ]))
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let m = self.0;
        Point2::new(
            m[0][0] * p.x1 + m[0][1] * p.x2,
            m[1][0] * p.x1 + m[1][1] * p.x2,
        )
    }

    /// Solve `self · x = rhs` by Cramer's rule.
    pub fn solve(&self, rhs: Point2) -> Option<Point2> {
        self.inverse().map(|inv| inv.apply(rhs))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Reference-square vertices `v̂₁..v̂₄`.
pub const REF_VERTICES: [Point2; 4] = [
    Point2::new(1.0, 1.0),
    Point2::new(-1.0, 1.0),
    Point2::new(-1.0, -1.0),
    Point2::new(1.0, -1.0),
];

/// Reference-square edge midpoints `m̂₁..m̂₄`.
pub const REF_MIDPOINTS: [Point2; 4] = [
    Point2::new(1.0, 0.0),
    Point2::new(0.0, 1.0),
    Point2::new(-1.0, 0.0),
    Point2::new(0.0, -1.0),
];

/// A physical quadrilateral with vertices ordered like [`REF_VERTICES`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrilateral {
    pub v: [Point2; 4],
}

impl Quadrilateral {
    pub fn new(v: [Point2; 4]) -> Self {
        Quadrilateral { v }
    }

    pub fn reference() -> Self {
        Quadrilateral { v: REF_VERTICES }
    }

    /// Largest vertex-to-vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..4 {
            for j in i + 1..4 {
                d = d.max(self.v[i].dist(self.v[j]));
            }
        }
        d
    }

    /// Midpoint of edge `j` (0-based), joining `v[j-1]` and `v[j]`.
    pub fn edge_midpoint(&self, j: usize) -> Point2 {
        self.v[(j + 3) % 4].midpoint(self.v[j])
    }

    /// Endpoints of edge `j` (0-based) as `(v[j-1], v[j])`.
    pub fn edge(&self, j: usize) -> (Point2, Point2) {
        (self.v[(j + 3) % 4], self.v[j])
    }

    /// Signed area by the shoelace formula (positive for counter-clockwise).
    pub fn area(&self) -> f64 {
        let mut a = 0.0;
        for i in 0..4 {
            let p = self.v[i];
            let q = self.v[(i + 1) % 4];
            a += p.x1 * q.x2 - q.x1 * p.x2;
        }
        0.5 * a
    }
}

/// Coefficients of `F(x̂) = A x̂ + x̂₁x̂₂ d + b` and `s̃ = A⁻¹ d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BilinearDecomposition {
    pub a: Mat2,
    pub b: Point2,
    pub d: Point2,
    pub s_tilde: Point2,
}

/// Decompose the bilinear map of `q` into its affine and simple-bilinear factors.
pub fn decompose(q: &Quadrilateral) -> Result<BilinearDecomposition> {
    let [v1, v2, v3, v4] = q.v;
    let a = Mat2::from_cols((v1 - v2 - v3 + v4) * 0.25, (v1 + v2 - v3 - v4) * 0.25);
    let d = (v1 - v2 + v3 - v4) * 0.25;
    let b = (v1 + v2 + v3 + v4) * 0.25;
    let det = a.det();
    let diam = q.diameter();
    if !(det.abs() > 1e-14 * diam * diam) {
        return Err(Error::SingularMap { det });
    }
    let s_tilde = a.solve(d).ok_or(Error::SingularMap { det })?;
    Ok(BilinearDecomposition { a, b, d, s_tilde })
}

impl BilinearDecomposition {
    /// `A x̂ + x̂₁x̂₂ d + b`.
    pub fn forward(&self, xhat: Point2) -> Point2 {
        forward_map(self, xhat)
    }

    /// The simple bilinear factor `S(x̂) = x̂ + x̂₁x̂₂ s̃`.
    pub fn simple(&self, xhat: Point2) -> Point2 {
        simple_map(self.s_tilde, xhat)
    }

    /// The affine factor `x̃ ↦ A x̃ + b`.
    pub fn affine(&self, xt: Point2) -> Point2 {
        self.a.apply(xt) + self.b
    }

    pub fn jacobian(&self, xhat: Point2) -> Mat2 {
        jacobian(self, xhat)
    }

    pub fn intermediate(&self) -> IntermediateQuad {
        IntermediateQuad::new(self.s_tilde)
    }
}

pub fn forward_map(dec: &BilinearDecomposition, xhat: Point2) -> Point2 {
    dec.a.apply(xhat) + dec.d * (xhat.x1 * xhat.x2) + dec.b
}

pub fn simple_map(s_tilde: Point2, xhat: Point2) -> Point2 {
    xhat + s_tilde * (xhat.x1 * xhat.x2)
}

/// Jacobian of the forward map: columns `A û₁ + x̂₂ d` and `A û₂ + x̂₁ d`.
pub fn jacobian(dec: &BilinearDecomposition, xhat: Point2) -> Mat2 {
    Mat2::from_cols(
        dec.a.col(0) + dec.d * xhat.x2,
        dec.a.col(1) + dec.d * xhat.x1,
    )
}

/// `1 - |s̃₁| - |s̃₂|`: positive iff the intermediate cell is strictly convex,
/// zero when it degenerates to a triangle.
pub fn convexity_margin(s_tilde: Point2) -> f64 {
    1.0 - s_tilde.x1.abs() - s_tilde.x2.abs()
}

/// The intermediate quadrilateral `S([-1,1]^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntermediateQuad {
    pub vt: [Point2; 4],
}

impl IntermediateQuad {
    pub fn new(s: Point2) -> Self {
        let [v1, v2, v3, v4] = REF_VERTICES;
        IntermediateQuad {
            vt: [v1 + s, v2 - s, v3 + s, v4 - s],
        }
    }

    pub fn edge_midpoint(&self, j: usize) -> Point2 {
        self.vt[(j + 3) % 4].midpoint(self.vt[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_quad() -> Quadrilateral {
        Quadrilateral::new([
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(-1.0, -1.0),
            Point2::new(1.0, -0.5),
        ])
    }

    #[test]
    fn reference_square_is_identity() {
        let dec = decompose(&Quadrilateral::reference()).unwrap();
        assert_eq!(dec.a, Mat2::IDENTITY);
        assert_eq!(dec.b, Point2::ZERO);
        assert_eq!(dec.d, Point2::ZERO);
        assert_eq!(dec.s_tilde, Point2::ZERO);
        assert_eq!(forward_map(&dec, Point2::new(0.3, -0.7)), Point2::new(0.3, -0.7));
        assert_eq!(jacobian(&dec, Point2::new(0.4, 0.9)), Mat2::IDENTITY);
    }

    #[test]
    fn decompose_example_quad() {
        // A, b, d are the closed-form vertex sums; s̃ = A⁻¹d is a 2×2 solve:
        // [[1,0],[1/8,7/8]] s = (0,-1/8) gives s = (0,-1/7).
        let dec = decompose(&example_quad()).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(dec.a.0[0][0], 1.0) && close(dec.a.0[0][1], 0.0));
        assert!(close(dec.a.0[1][0], 0.125) && close(dec.a.0[1][1], 0.875));
        assert!(close(dec.b.x1, 0.0) && close(dec.b.x2, 0.125));
        assert!(close(dec.d.x1, 0.0) && close(dec.d.x2, -0.125));
        assert!(close(dec.s_tilde.x1, 0.0) && close(dec.s_tilde.x2, -1.0 / 7.0));

        let v4 = forward_map(&dec, Point2::new(1.0, -1.0));
        assert!(v4.dist(Point2::new(1.0, -0.5)) < 1e-15);
        assert_eq!(forward_map(&dec, Point2::ZERO), dec.b);
        assert_eq!(jacobian(&dec, Point2::ZERO), dec.a);
    }

    #[test]
    fn parallelogram_has_no_bilinear_part() {
        let q = Quadrilateral::new([
            Point2::new(3.0, 2.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
        ]);
        let dec = decompose(&q).unwrap();
        assert_eq!(dec.d, Point2::ZERO);
        assert_eq!(dec.s_tilde, Point2::ZERO);
        let j1 = jacobian(&dec, Point2::new(0.9, -0.3));
        assert_eq!(j1, dec.a);
    }

    #[test]
    fn degenerate_quads_are_rejected() {
        let collapsed = Quadrilateral::new([Point2::ZERO; 4]);
        assert!(matches!(decompose(&collapsed), Err(Error::SingularMap { .. })));
        // Bow-tie: vertices 1 and 2 swapped so A has zero determinant.
        let bowtie = Quadrilateral::new([
            Point2::new(1.0, 1.0),
            Point2::new(-1.0, -1.0),
            Point2::new(-1.0, 1.0),
            Point2::new(1.0, -1.0),
        ]);
        assert!(matches!(decompose(&bowtie), Err(Error::SingularMap { .. })));
    }

    #[test]
    fn convexity_margin_values() {
        assert_eq!(convexity_margin(Point2::ZERO), 1.0);
        assert_eq!(convexity_margin(Point2::new(0.5, 0.5)), 0.0);
        assert!((convexity_margin(Point2::new(0.3, -0.2)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn intermediate_midpoints_are_fixed() {
        let iq = IntermediateQuad::new(Point2::new(0.37, -0.21));
        for j in 0..4 {
            assert_eq!(iq.edge_midpoint(j), REF_MIDPOINTS[j]);
            assert_eq!(simple_map(Point2::new(0.37, -0.21), REF_MIDPOINTS[j]), REF_MIDPOINTS[j]);
        }
    }
}
