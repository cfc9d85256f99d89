//! Small dense kernels: Gaussian elimination with partial pivoting.

/// Solve `a x = b`. Returns `None` for an exactly singular pivot.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 {
            return None;
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn det<R: AsRef<[f64]>>(a: &[R]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.iter().map(|r| r.as_ref().to_vec()).collect();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))
            .unwrap();
        if m[p][k] == 0.0 {
            return 0.0;
        }
        if p != k {
            m.swap(k, p);
            det = -det;
        }
        det *= m[k][k];
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    det
}

pub fn invert<R: AsRef<[f64]>>(a: &[R]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = vec![vec![0.0; n]; n];
    let rows: Vec<Vec<f64>> = a.iter().map(|r| r.as_ref().to_vec()).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let x = solve(rows.clone(), e)?;
        for i in 0..n {
            cols[i][j] = x[i];
        }
    }
    Some(cols)
}

/// Gauss–Jordan inverse of a 4×4 matrix without heap allocation.
pub fn invert4(a: &[[f64; 4]; 4]) -> Option<[[f64; 4]; 4]> {
    let mut m = *a;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for k in 0..4 {
        let mut p = k;
        for i in k + 1..4 {
            if m[i][k].abs() > m[p][k].abs() {
                p = i;
            }
        }
        if m[p][k] == 0.0 {
            return None;
        }
        m.swap(k, p);
        inv.swap(k, p);
        let piv = 1.0 / m[k][k];
        for j in 0..4 {
            m[k][j] *= piv;
            inv[k][j] *= piv;
        }
        for i in 0..4 {
            if i != k {
                let f = m[i][k];
                if f != 0.0 {
                    for j in 0..4 {
                        m[i][j] -= f * m[k][j];
                        inv[i][j] -= f * inv[k][j];
                    }
                }
            }
        }
    }
    Some(inv)
}
