//! Gauss–Legendre rules on `[-1,1]`, their tensor products on the
//! reference square, and edge means along segments.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const MAX_POINTS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule2D {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
}

impl Rule1D {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }
}

impl Rule2D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point2) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Legendre polynomial `P_n(t)` and its derivative by the three-term recurrence.
fn legendre(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `npts` nodes, sorted ascending.
pub fn gauss1d(npts: usize) -> Result<Rule1D> {
    if npts == 0 || npts > MAX_POINTS {
        return Err(Error::BadParam(format!(
            "quadrature points must be in 1..={MAX_POINTS}, got {npts}"
        )));
    }
    if npts == 3 {
        let xi = (3.0_f64 / 5.0).sqrt();
        return Ok(Rule1D {
            nodes: vec![-xi, 0.0, xi],
            weights: vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0],
        });
    }
    let n = npts;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, then Newton.
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[n - 1 - i] = t;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(Rule1D { nodes, weights })
}

/// Tensor-product rule on `[-1,1]^2`.
pub fn tensor_rule(npts: usize) -> Result<Rule2D> {
    let r = gauss1d(npts)?;
    let mut points = Vec::with_capacity(npts * npts);
    let mut weights = Vec::with_capacity(npts * npts);
    for (i, &t1) in r.nodes.iter().enumerate() {
        for (j, &t2) in r.nodes.iter().enumerate() {
            points.push(Point2::new(t1, t2));
            weights.push(r.weights[i] * r.weights[j]);
        }
    }
    Ok(Rule2D { points, weights })
}

/// Arc-length mean of `f` over the segment `[a, b]`.
pub fn edge_mean(f: impl Fn(Point2) -> f64, a: Point2, b: Point2, npts: usize) -> Result<f64> {
    let r = gauss1d(npts)?;
    let mid = a.midpoint(b);
    let half = (b - a) * 0.5;
    Ok(0.5 * r.integrate(|t| f(mid + half * t)))
}
