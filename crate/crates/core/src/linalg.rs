//! Three-dimensional vectors and linear maps.
//!
//! Everything in the force law lives in R³, so the crate works with
//! `nalgebra` fixed-size types and a hand-written cofactor solve for the
//! 3×3 systems that determine the current accelerations.

use nalgebra::{Matrix3, Vector3};

pub type Vec3 = Vector3<f64>;
pub type LinMap3 = Matrix3<f64>;

/// `x yᵀ`, the rank-one map `h ↦ x (y, h)`.
#[inline]
pub fn outer(x: &Vec3, y: &Vec3) -> LinMap3 {
    x * y.transpose()
}

/// Cofactor expansion along the first row.
#[inline]
pub fn det3(m: &LinMap3) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Adjugate (transposed cofactor matrix), so that `m * adj(m) = det(m) I`.
pub fn adjugate3(m: &LinMap3) -> LinMap3 {
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)];
    LinMap3::new(
        c(1, 2, 1, 2),
        -c(0, 2, 1, 2),
        c(0, 1, 1, 2),
        -c(1, 2, 0, 2),
        c(0, 2, 0, 2),
        -c(0, 1, 0, 2),
        c(1, 2, 0, 1),
        -c(0, 2, 0, 1),
        c(0, 1, 0, 1),
    )
}

/// Largest absolute entry; used to scale determinant thresholds.
#[inline]
pub fn max_abs_entry(m: &LinMap3) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Solves `m x = b` by the adjugate formula followed by one step of
/// iterative refinement. Returns `None` when the determinant is exactly zero
/// or the result is not finite.
pub fn solve3(m: &LinMap3, b: &Vec3) -> Option<Vec3> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let adj = adjugate3(m);
    let mut x = adj * b / det;
    let r = b - m * x;
    x += adj * r / det;
    x.iter().all(|v| v.is_finite()).then_some(x)
}
