//! Small dense linear algebra helpers over row-major `Vec<Vec<f64>>` data.

use nalgebra::{DMatrix, DVector};

pub fn matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let r = rows.len();
    let c = rows.first().map_or(0, |v| v.len());
    DMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn det(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    matrix(rows).determinant()
}

/// Numerical rank from singular values relative to the largest one.
pub fn rank(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let sv = matrix(rows).singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax.max(1.0)).count()
}

/// Solves `A x = b`; `None` when `A` is singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = matrix(a);
    let rhs = DVector::from_column_slice(b);
    m.lu().solve(&rhs).map(|v| v.iter().cloned().collect())
}

/// Solves `A^T x = b`.
pub fn solve_transposed(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let m = matrix(a).transpose();
    let rhs = DVector::from_column_slice(b);
    m.lu().solve(&rhs).map(|v| v.iter().cloned().collect())
}

pub fn inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let m = matrix(a).try_inverse()?;
    Some(
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
            .collect(),
    )
}

/// Smallest eigenvalue of the Gram matrix `R R^T` of the given rows.
pub fn gram_min_eigenvalue(rows: &[Vec<f64>]) -> f64 {
    let m = matrix(rows);
    let g = &m * m.transpose();
    g.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
