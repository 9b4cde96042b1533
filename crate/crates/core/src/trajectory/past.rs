//! Prescribed motion of each charge for `t ≤ 0`.

use super::hermite::{self, Node};
use super::{State, TrajectoryError};
use crate::linalg::Vec3;

/// Motion of one charge on the past half-line.
///
/// The analytic forms are defined for every real `t`; a table only up to
/// `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum PastSpec {
    Rest {
        r0: Vec3,
    },
    /// `r(t) = r0 + v t`
    Uniform {
        r0: Vec3,
        v: Vec3,
    },
    /// Circle in the plane `z = center.z` with angle `omega t + phase`.
    Circular {
        center: Vec3,
        radius: f64,
        omega: f64,
        phase: f64,
    },
    Table(PastTable),
}

impl PastSpec {
    /// Position, velocity and acceleration at `t`.
    pub fn eval(&self, t: f64) -> (State, Vec3) {
        match self {
            PastSpec::Rest { r0 } => (State::new(*r0, Vec3::zeros()), Vec3::zeros()),
            PastSpec::Uniform { r0, v } => (State::new(r0 + v * t, *v), Vec3::zeros()),
            PastSpec::Circular {
                center,
                radius,
                omega,
                phase,
            } => {
                let (sin, cos) = (omega * t + phase).sin_cos();
                let r = center + Vec3::new(cos, sin, 0.0) * *radius;
                let v = Vec3::new(-sin, cos, 0.0) * (radius * omega);
                let a = Vec3::new(-cos, -sin, 0.0) * (radius * omega * omega);
                (State::new(r, v), a)
            }
            PastSpec::Table(table) => table.eval(t),
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, PastSpec::Table(_))
    }

    /// Supremum of the speed over `t ≤ 0` (exact for analytic forms, over
    /// samples and interval midpoints for tables).
    pub fn max_speed(&self) -> f64 {
        match self {
            PastSpec::Rest { .. } => 0.0,
            PastSpec::Uniform { v, .. } => v.norm(),
            PastSpec::Circular { radius, omega, .. } => (radius * omega).abs(),
            PastSpec::Table(table) => table.max_probe_speed(),
        }
    }
}

/// Sampled past motion, strictly increasing in time and ending at `t = 0`.
///
/// Nodal accelerations are estimated from the velocities by the
/// three-point finite difference for non-uniform grids at interior nodes and
/// the two-point one-sided difference at the ends. Between nodes the table is
/// interpolated by the quintic Hermite scheme used for committed samples.
/// Before the first sample the motion continues with the first velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct PastTable {
    times: Vec<f64>,
    r: Vec<Vec3>,
    v: Vec<Vec3>,
    a: Vec<Vec3>,
}

impl PastTable {
    pub fn new(rows: Vec<(f64, Vec3, Vec3)>) -> Result<Self, TrajectoryError> {
        if rows.is_empty() {
            return Err(TrajectoryError::InvalidTable("table has no samples".into()));
        }
        for w in rows.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(TrajectoryError::InvalidTable(format!(
                    "sample times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        let last = rows[rows.len() - 1].0;
        if last != 0.0 {
            return Err(TrajectoryError::InvalidTable(format!(
                "table must end at t = 0, last sample is at {last}"
            )));
        }
        let times: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let r: Vec<Vec3> = rows.iter().map(|r| r.1).collect();
        let v: Vec<Vec3> = rows.iter().map(|r| r.2).collect();
        let a = nodal_accelerations(&times, &v);
        Ok(Self { times, r, v, a })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest velocity change between consecutive samples.
    pub fn max_velocity_jump(&self) -> f64 {
        self.v.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max)
    }

    fn max_probe_speed(&self) -> f64 {
        let mut sup = self.v.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 0..self.times.len().saturating_sub(1) {
            let mid = 0.5 * (self.times[i] + self.times[i + 1]);
            sup = sup.max(self.eval(mid).0.v.norm());
        }
        sup
    }

    fn node(&self, i: usize) -> Node {
        Node {
            t: self.times[i],
            x: self.r[i],
            dx: self.v[i],
            ddx: self.a[i],
        }
    }

    fn eval(&self, t: f64) -> (State, Vec3) {
        let first = self.times[0];
        if t <= first {
            let r = self.r[0] + self.v[0] * (t - first);
            let a = if t == first { self.a[0] } else { Vec3::zeros() };
            return (State::new(r, self.v[0]), a);
        }
        let idx = self.times.partition_point(|&s| s <= t);
        let i = idx - 1;
        if i + 1 >= self.times.len() || self.times[i] == t {
            let i = i.min(self.times.len() - 1);
            return (State::new(self.r[i], self.v[i]), self.a[i]);
        }
        let (r, v, a) = hermite::quintic(&self.node(i), &self.node(i + 1), t);
        (State::new(r, v), a)
    }
}

fn nodal_accelerations(times: &[f64], v: &[Vec3]) -> Vec<Vec3> {
    let n = times.len();
    if n < 2 {
        return vec![Vec3::zeros(); n];
    }
    (0..n)
        .map(|i| {
            if i == 0 {
                (v[1] - v[0]) / (times[1] - times[0])
            } else if i == n - 1 {
                (v[n - 1] - v[n - 2]) / (times[n - 1] - times[n - 2])
            } else {
                let hm = times[i] - times[i - 1];
                let hp = times[i + 1] - times[i];
                ((v[i + 1] - v[i]) * (hm / hp) + (v[i] - v[i - 1]) * (hp / hm)) / (hm + hp)
            }
        })
        .collect()
}
