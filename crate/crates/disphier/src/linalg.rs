//! Dense exact linear algebra over the rationals: just enough for metric
//! inversion, antiderivative searches, and contraction data built from a
//! splitting of a differential.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<BigRational>>;

pub fn zeros(rows: usize, cols: usize) -> Matrix {
    vec![vec![BigRational::zero(); cols]; rows]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    m
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.len();
    let inner = if rows > 0 { a[0].len() } else { 0 };
    let cols = if b.is_empty() { 0 } else { b[0].len() };
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                let p = &a[i][k] * &b[k][j];
                out[i][j] += p;
            }
        }
    }
    out
}

pub fn mat_add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_neg(a: &Matrix) -> Matrix {
    a.iter().map(|r| r.iter().map(|x| -x.clone()).collect()).collect()
}

pub fn transpose(a: &Matrix) -> Matrix {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut out = zeros(cols, rows);
    for (i, row) in a.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            out[j][i] = v.clone();
        }
    }
    out
}

pub fn is_zero_matrix(a: &Matrix) -> bool {
    a.iter().all(|r| r.iter().all(|x| x.is_zero()))
}

/// Row-reduce `m` in place; returns pivot column indices.
fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows > 0 { m[0].len() } else { 0 };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r >= rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let s = &f * &m[r][j];
                    m[i][j] -= s;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Exact inverse; `None` when singular.
pub fn invert(a: &Matrix) -> Option<Matrix> {
    let n = a.len();
    let mut aug = zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[i][j] = a[i][j].clone();
        }
        aug[i][n + i] = BigRational::one();
    }
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &c)| c != i) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Solve `A x = b` for one solution; `None` when inconsistent.
pub fn solve(a: &Matrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut aug = zeros(rows, cols + 1);
    for i in 0..rows {
        for j in 0..cols {
            aug[i][j] = a[i][j].clone();
        }
        aug[i][cols] = b[i].clone();
    }
    let pivots = rref(&mut aug);
    // Inconsistent iff a pivot lands in the constant column.
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); cols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

/// Basis of the kernel of `a` as column vectors.
pub fn kernel_basis(a: &Matrix) -> Vec<Vec<BigRational>> {
    let rows = a.len();
    let cols = if rows > 0 { a[0].len() } else { 0 };
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (r, &c) in pivots.iter().enumerate() {
            v[c] = -m[r][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Column indices of `a` forming a basis of the column space.
pub fn pivot_columns(a: &Matrix) -> Vec<usize> {
    let mut m = a.clone();
    rref(&mut m)
}
