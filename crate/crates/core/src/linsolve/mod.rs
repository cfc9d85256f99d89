//! Sparse linear algebra: CSR storage, Jacobi-preconditioned conjugate
//! gradients, and a Schur-complement (Uzawa-type) saddle-point solver.

pub mod dense;

use crate::error::{Error, Result};

/// Compressed-sparse-row matrix with sorted, duplicate-free columns per row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of bounds");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.as_ref().iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows.len(), ncols, t)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entries of row `i` as `(col, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        for (w, yi) in self.row_ptr.windows(2).zip(y.iter_mut()) {
            let (cols, vals) = (&self.col_idx[w[0]..w[1]], &self.values[w[0]..w[1]]);
            *yi = cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum();
        }
    }

    /// `y = self x`, returning `x·y`.
    pub fn matvec_dot(&self, x: &[f64], y: &mut [f64]) -> f64 {
        debug_assert_eq!(x.len(), self.ncols);
        let mut acc = 0.0;
        for (i, (w, yi)) in self.row_ptr.windows(2).zip(y.iter_mut()).enumerate() {
            let (cols, vals) = (&self.col_idx[w[0]..w[1]], &self.values[w[0]..w[1]]);
            let s: f64 = cols.iter().zip(vals).map(|(&j, v)| v * x[j]).sum();
            *yi = s;
            acc += x[i] * s;
        }
        acc
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.matvec(x, &mut y);
        y
    }

    /// `y = selfᵀ x`.
    pub fn matvec_transpose(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.nrows {
            let xi = x[i];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                t.push((j, i, v));
            }
        }
        CsrMatrix::from_triplets(self.ncols, self.nrows, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max |a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Clone, Debug)]
pub struct SpdSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖f - Ax‖ / ‖f‖`.
    pub residual: f64,
}

pub const DEFAULT_SPD_TOL: f64 = 1e-12;
pub const DEFAULT_SADDLE_TOL: f64 = 1e-10;

/// Restarts without halving the best true residual before giving up.
const MAX_STALLED_RESTARTS: usize = 8;

/// Relative size of the rounding error in a computed residual `f - Ax`:
/// `k ε ‖ |A| |x| ‖ / ‖f‖` with `k` the largest row length.
pub fn residual_floor(a: &CsrMatrix, x: &[f64], fnorm: f64) -> f64 {
    let mut acc = 0.0;
    let mut row_len = 0;
    for i in 0..a.nrows() {
        let mut s = 0.0;
        let mut len = 0;
        for (j, v) in a.row(i) {
            s += (v * x[j]).abs();
            len += 1;
        }
        acc += s * s;
        row_len = row_len.max(len);
    }
    f64::EPSILON * row_len as f64 * acc.sqrt() / fnorm
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`.
///
/// Convergence is declared on the true residual, recomputed whenever the
/// recursively updated one drops below `tol`. When `tol` lies below the
/// rounding error of evaluating `f - Ax` itself (see [`residual_floor`]),
/// the iteration stops once restarts no longer reduce the true residual
/// and it has reached that floor.
pub fn solve_spd(a: &CsrMatrix, f: &[f64], tol: f64, maxit: usize) -> Result<SpdSolution> {
    solve_spd_from(a, f, None, tol, maxit)
}

/// [`solve_spd`] with an optional starting guess.
pub fn solve_spd_from(
    a: &CsrMatrix,
    f: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    maxit: usize,
) -> Result<SpdSolution> {
    let n = f.len();
    assert_eq!(a.nrows(), n);
    if !(tol > 0.0) {
        return Err(Error::BadParam(format!("tolerance must be positive, got {tol}")));
    }
    let fnorm = norm(f);
    if fnorm == 0.0 {
        return Ok(SpdSolution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = x0.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    let mut r = vec![0.0; n];
    let mut q = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut [f64], q: &mut [f64]| {
        a.matvec(x, q);
        for i in 0..n {
            r[i] = f[i] - q[i];
        }
        norm(r) / fnorm
    };
    let mut rel = true_residual(&x, &mut r, &mut q);
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut best = (rel, x.clone());
    let mut stalled = 0;
    let mut it = 0;
    while it < maxit {
        if rel <= tol {
            return Ok(SpdSolution {
                x,
                iterations: it,
                residual: rel,
            });
        }
        let pq = a.matvec_dot(&p, &mut q);
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        let (mut rr, mut rz_new) = (0.0, 0.0);
        for i in 0..n {
            x[i] += alpha * p[i];
            let ri = r[i] - alpha * q[i];
            let zi = ri * inv_diag[i];
            r[i] = ri;
            z[i] = zi;
            rr += ri * ri;
            rz_new += ri * zi;
        }
        it += 1;
        rel = rr.sqrt() / fnorm;
        if rel <= tol {
            rel = true_residual(&x, &mut r, &mut q);
            if rel < 0.5 * best.0 {
                stalled = 0;
            } else {
                stalled += 1;
            }
            let at_floor = stalled >= 2 && rel <= residual_floor(a, &x, fnorm);
            if rel <= tol || at_floor {
                return Ok(SpdSolution {
                    x,
                    iterations: it,
                    residual: rel,
                });
            }
            if stalled >= MAX_STALLED_RESTARTS {
                break;
            }
            if rel < best.0 {
                best = (rel, x.clone());
            }
            // restart from the true residual
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let final_rel = true_residual(&x, &mut r, &mut q);
    if final_rel <= tol {
        return Ok(SpdSolution {
            x,
            iterations: it,
            residual: final_rel,
        });
    }
    if final_rel < best.0 {
        best = (final_rel, x);
    }
    Err(Error::NoConvergence {
        iterations: it,
        residual: best.0,
        best: best.1,
    })
}

#[derive(Clone, Debug)]
pub struct SaddleSolution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Final outer residual `‖B u - g‖` relative to its initial value.
    pub residual: f64,
}

/// Solves `[A Bᵀ; B 0] (u, p) = (f, g)` with the pressure fixed by
/// `Σ_q w_q p_q = 0` (`w` are the pressure cell areas).
///
/// Preconditioned conjugate gradients run on the pressure Schur complement
/// `B A⁻¹ Bᵀ`, with `diag(w)` as preconditioner and an inner
/// [`solve_spd`] for every application of `A⁻¹`. `Bᵀ` must annihilate
/// constants and `g` must have zero sum.
pub fn solve_saddle(
    a: &CsrMatrix,
    b: &CsrMatrix,
    f: &[f64],
    g: &[f64],
    weights: &[f64],
    tol: f64,
) -> Result<SaddleSolution> {
    solve_penalized_saddle(a, b, f, g, weights, 0.0, tol)
}

/// Solves `[A Bᵀ; B -ε diag(w)] (u, p) = (f, g)`.
///
/// For `ε > 0` this is the mixed form of `(A + ε⁻¹ Bᵀ diag(w)⁻¹ B) u = f + …`
/// and the Schur complement `B A⁻¹ Bᵀ + ε diag(w)` is nonsingular, so no
/// mean-value constraint is imposed. `ε = 0` is [`solve_saddle`].
pub fn solve_penalized_saddle(
    a: &CsrMatrix,
    b: &CsrMatrix,
    f: &[f64],
    g: &[f64],
    weights: &[f64],
    epsilon: f64,
    tol: f64,
) -> Result<SaddleSolution> {
    if !(epsilon >= 0.0) {
        return Err(Error::BadParam(format!("penalty must be non-negative, got {epsilon}")));
    }
    let nu = a.nrows();
    let np = b.nrows();
    assert_eq!(b.ncols(), nu);
    assert_eq!(g.len(), np);
    assert_eq!(weights.len(), np);
    let inner_tol = (tol * 1e-2).min(DEFAULT_SPD_TOL);
    let inner_maxit = 20 * nu + 1000;
    let outer_maxit = 10 * np + 100;
    let wsum: f64 = weights.iter().sum();
    let project = |v: &mut [f64]| {
        if epsilon == 0.0 {
            let mean = dot(v, weights) / wsum;
            v.iter_mut().for_each(|x| *x -= mean);
        }
    };

    let mut inner_its = 0;
    let mut inner = |rhs: &[f64]| -> Result<Vec<f64>> {
        let sol = solve_spd(a, rhs, inner_tol, inner_maxit)?;
        inner_its += sol.iterations;
        Ok(sol.x)
    };

    let mut p = vec![0.0; np];
    let mut u = inner(f)?;
    // r = B u - g is the negative Schur residual
    let mut r = b.mul(&u);
    for (ri, gi) in r.iter_mut().zip(g) {
        *ri -= gi;
    }
    let r0 = norm(&r);
    let scale = if r0 > 0.0 { r0 } else { 1.0 };
    let precond = |r: &[f64]| {
        let mut z: Vec<f64> = r.iter().zip(weights).map(|(r, w)| r / w).collect();
        project(&mut z);
        z
    };
    let mut z = precond(&r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    let mut bt_d = vec![0.0; nu];
    let mut rel = norm(&r) / scale;
    let mut outer = 0;
    while rel > tol && r0 > 0.0 {
        if outer >= outer_maxit {
            return Err(Error::NoConvergence {
                iterations: outer,
                residual: rel,
                best: p,
            });
        }
        b.matvec_transpose(&d, &mut bt_d);
        let w = inner(&bt_d)?;
        let mut sd = b.mul(&w);
        if epsilon > 0.0 {
            for i in 0..np {
                sd[i] += epsilon * weights[i] * d[i];
            }
        }
        let dsd = dot(&d, &sd);
        if !(dsd > 0.0) {
            break;
        }
        let alpha = rz / dsd;
        for i in 0..np {
            p[i] += alpha * d[i];
            r[i] -= alpha * sd[i];
        }
        for i in 0..nu {
            u[i] -= alpha * w[i];
        }
        outer += 1;
        rel = norm(&r) / scale;
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..np {
            d[i] = z[i] + beta * d[i];
        }
    }
    project(&mut p);
    Ok(SaddleSolution {
        velocity: u,
        pressure: p,
        outer_iterations: outer,
        inner_iterations: inner_its,
        residual: rel,
    })
}
