//! Quintic Hermite dense output.
//!
//! Each interval is interpolated from the value, first and second
//! derivative at both ends. Position, velocity and acceleration of the
//! returned curve are the interpolant and its first two derivatives, so the
//! three are mutually consistent and reproduce the stored samples exactly at
//! the nodes.

use crate::linalg::Vec3;

/// One end of an interpolation interval.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub t: f64,
    pub x: Vec3,
    pub dx: Vec3,
    pub ddx: Vec3,
}

/// Value, first and second derivative of the interpolant at `t`.
pub fn quintic(a: &Node, b: &Node, t: f64) -> (Vec3, Vec3, Vec3) {
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;

    // value at the right node, written as a blend weight on (x1 - x0)
    let w = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    let dw = 30.0 * s2 - 60.0 * s3 + 30.0 * s4;
    let ddw = 60.0 * s - 180.0 * s2 + 120.0 * s3;

    let d0 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let dd0 = 1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4;
    let ddd0 = -36.0 * s + 96.0 * s2 - 60.0 * s3;

    let d1 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let dd1 = -12.0 * s2 + 28.0 * s3 - 15.0 * s4;
    let ddd1 = -24.0 * s + 84.0 * s2 - 60.0 * s3;

    let c0 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
    let dc0 = 0.5 * (2.0 * s - 9.0 * s2 + 12.0 * s3 - 5.0 * s4);
    let ddc0 = 0.5 * (2.0 - 18.0 * s + 36.0 * s2 - 20.0 * s3);

    let c1 = 0.5 * (s3 - 2.0 * s4 + s5);
    let dc1 = 0.5 * (3.0 * s2 - 8.0 * s3 + 5.0 * s4);
    let ddc1 = 0.5 * (6.0 * s - 24.0 * s2 + 20.0 * s3);

    let dx = b.x - a.x;
    let value = a.x + dx * w + (a.dx * d0 + b.dx * d1) * h + (a.ddx * c0 + b.ddx * c1) * (h * h);
    let first = dx * (dw / h) + a.dx * dd0 + b.dx * dd1 + (a.ddx * dc0 + b.ddx * dc1) * h;
    let second = dx * (ddw / (h * h)) + (a.dx * ddd0 + b.dx * ddd1) / h + a.ddx * ddc0 + b.ddx * ddc1;
    (value, first, second)
}
