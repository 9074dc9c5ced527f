//! Subspace comparison and numerical rank.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::products::ComplexVector;

fn column_matrix(vectors: &[ComplexVector]) -> DMatrix<Complex64> {
    let rows = vectors.first().map_or(0, ComplexVector::dim);
    DMatrix::from_fn(rows, vectors.len(), |r, c| vectors[c][r])
}

/// Orthonormal basis (as columns) of the span, dropping directions whose singular
/// value falls below `rel_tol` times the largest.
fn orthonormal_basis(vectors: &[ComplexVector], rel_tol: f64) -> DMatrix<Complex64> {
    let m = column_matrix(vectors);
    let svd = SVD::new(m, true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > rel_tol * smax)
        .map(|(k, _)| k)
        .collect();
    DMatrix::from_fn(u.nrows(), keep.len(), |r, c| u[(r, keep[c])])
}

/// Principal angles (radians, ascending) between the complex spans of `a` and `b`.
///
/// Each span is first reduced to an orthonormal basis with relative rank cut
/// `rank_tol`. The number of angles is the smaller of the two dimensions.
pub fn principal_angles(a: &[ComplexVector], b: &[ComplexVector], rank_tol: f64) -> Vec<f64> {
    let qa = orthonormal_basis(a, rank_tol);
    let qb = orthonormal_basis(b, rank_tol);
    if qa.ncols() == 0 || qb.ncols() == 0 {
        return Vec::new();
    }
    let cross = qa.adjoint() * qb;
    let sv = SVD::new(cross, false, false).singular_values;
    let mut angles: Vec<f64> = sv.iter().map(|s| s.clamp(0.0, 1.0).acos()).collect();
    angles.sort_by(f64::total_cmp);
    angles
}

/// Largest principal angle, or `PI/2` when the dimensions differ.
pub fn subspace_distance(a: &[ComplexVector], b: &[ComplexVector], rank_tol: f64) -> f64 {
    let da = orthonormal_basis(a, rank_tol).ncols();
    let db = orthonormal_basis(b, rank_tol).ncols();
    if da != db {
        return std::f64::consts::FRAC_PI_2;
    }
    principal_angles(a, b, rank_tol)
        .last()
        .copied()
        .unwrap_or(0.0)
}

/// Singular values of a real matrix given as columns.
pub fn singular_values(columns: &[Vec<f64>]) -> Vec<f64> {
    let rows = columns.first().map_or(0, Vec::len);
    let m = DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]);
    let mut sv: Vec<f64> = SVD::new(m, false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank with threshold `rel_tol` times the largest singular value.
pub fn numerical_rank(columns: &[Vec<f64>], rel_tol: f64) -> usize {
    let sv = singular_values(columns);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * smax).count()
}

/// Orthogonal projection of `v` onto the complement of the real span of `basis`.
pub fn project_out_real(v: &ComplexVector, basis: &[Vec<f64>]) -> ComplexVector {
    let q = {
        let cols: Vec<ComplexVector> = basis.iter().map(|b| ComplexVector::from_real(b)).collect();
        orthonormal_basis(&cols, 1e-12)
    };
    let mut out = v.clone();
    for c in 0..q.ncols() {
        let col = ComplexVector::new(q.column(c).iter().copied().collect());
        let coef = crate::products::herm(v, &col);
        out.axpy(-coef, &col);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_spans_have_zero_angles() {
        let a = vec![
            ComplexVector::new(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)]),
            ComplexVector::new(vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, -1.0)]),
        ];
        let b = vec![
            &a[0].scale(c(0.0, 3.0)) + &a[1],
            a[1].scale(c(-1.0, 0.5)),
        ];
        let angles = principal_angles(&a, &b, 1e-12);
        assert_eq!(angles.len(), 2);
        assert!(angles.iter().all(|t| *t < 1e-7));
    }

    #[test]
    fn orthogonal_lines_are_perpendicular() {
        let a = vec![ComplexVector::basis(3, 0)];
        let b = vec![ComplexVector::basis(3, 2)];
        let d = subspace_distance(&a, &b, 1e-12);
        assert!((d - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn rank_of_dependent_columns() {
        let cols = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0], vec![0.0, 1.0, 0.0]];
        assert_eq!(numerical_rank(&cols, 1e-8), 2);
        assert_eq!(numerical_rank(&[vec![0.0, 0.0]], 1e-8), 0);
    }

    #[test]
    fn projection_removes_span() {
        let v = ComplexVector::new(vec![c(1.0, 2.0), c(3.0, 0.0), c(0.5, -0.5)]);
        let basis = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
        let p = project_out_real(&v, &basis);
        assert!(p[0].norm() < 1e-14);
        assert!((p[1] + p[2]).norm() < 1e-14);
    }
}
