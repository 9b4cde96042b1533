//! Charges, their states, and the trajectory history `y(t)`.
//!
//! A [`TrajectoryHistory`] couples a prescribed past (`t ≤ 0`) with the
//! committed solution on `[0, T_front]`. Any time up to the frontier can be
//! evaluated, which is what the retarded-time solver needs.

mod hermite;
mod history;
mod past;

pub use hermite::{quintic, Node};
pub use history::{AnalyticSystem, HistoryOptions, Overlay, TrajectoryHistory};
pub use past::{PastSpec, PastTable};

use crate::linalg::Vec3;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrajectoryError {
    #[error("system has no charges")]
    EmptySystem,
    #[error("charge {label:?}: {reason}")]
    InvalidCharge { label: String, reason: String },
    #[error("duplicate charge label {0:?}")]
    DuplicateLabel(String),
    #[error("expected {expected} past specifications, got {got}")]
    PastCountMismatch { expected: usize, got: usize },
    #[error("charge {charge}: speed {speed} reaches the cap {cap} at t = {t}")]
    SpeedViolation {
        charge: usize,
        t: f64,
        speed: f64,
        cap: f64,
    },
    #[error("charge {charge}: velocity jump {jump} between table samples exceeds {tol}")]
    DiscontinuousPast { charge: usize, jump: f64, tol: f64 },
    #[error("invalid past table: {0}")]
    InvalidTable(String),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error("t = {t} lies beyond the frontier {front}")]
    OutOfRange { t: f64, front: f64 },
    #[error("charge index {0} out of range")]
    NoSuchCharge(usize),
    #[error("window does not continue the frontier: {0}")]
    JunctionMismatch(String),
    #[error("windows are not defined on the same grid")]
    GridMismatch,
}

/// Physical constants of one particle.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSpec {
    pub label: String,
    pub q: f64,
    /// Rest mass.
    pub m0: f64,
}

impl ChargeSpec {
    pub fn new(label: impl Into<String>, q: f64, m0: f64) -> Self {
        Self {
            label: label.into(),
            q,
            m0,
        }
    }
}

/// Position and velocity of one charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub r: Vec3,
    pub v: Vec3,
}

impl State {
    pub fn new(r: Vec3, v: Vec3) -> Self {
        Self { r, v }
    }
}

/// All charges at one grid time, with the accelerations the dynamics
/// assigned to them.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub states: Vec<State>,
    pub acc: Vec<Vec3>,
}

/// Anything that can report the motion of every charge at a given time.
///
/// Implementations are read-only and shared between worker threads.
pub trait TrajectorySource: Sync {
    fn charge_count(&self) -> usize;

    /// State and acceleration of charge `j` at `t`.
    fn eval(&self, j: usize, t: f64) -> Result<(State, Vec3), TrajectoryError>;

    fn state(&self, j: usize, t: f64) -> Result<State, TrajectoryError> {
        self.eval(j, t).map(|(s, _)| s)
    }
}

/// Convergence metric between two window iterates:
/// `max_{grid, charge} |Δr| / l_ref + |Δv| / c`.
pub fn sup_distance(a: &[Sample], b: &[Sample], l_ref: f64, c: f64) -> Result<f64, TrajectoryError> {
    if a.len() != b.len() {
        return Err(TrajectoryError::GridMismatch);
    }
    let mut sup = 0.0_f64;
    for (sa, sb) in a.iter().zip(b) {
        if sa.t != sb.t || sa.states.len() != sb.states.len() {
            return Err(TrajectoryError::GridMismatch);
        }
        for (x, y) in sa.states.iter().zip(&sb.states) {
            sup = sup.max((x.r - y.r).norm() / l_ref + (x.v - y.v).norm() / c);
        }
    }
    Ok(sup)
}

/// Interpolates charge `j` inside a run of samples. `t` must lie in
/// `[samples[0].t, samples.last().t]`.
pub(crate) fn interpolate(samples: &[Sample], j: usize, t: f64) -> (State, Vec3) {
    let idx = samples.partition_point(|s| s.t <= t);
    let i = idx.saturating_sub(1);
    let s0 = &samples[i];
    if s0.t == t || i + 1 >= samples.len() {
        return (s0.states[j], s0.acc[j]);
    }
    let s1 = &samples[i + 1];
    let node = |s: &Sample| Node {
        t: s.t,
        x: s.states[j].r,
        dx: s.states[j].v,
        ddx: s.acc[j],
    };
    let (r, v, a) = quintic(&node(s0), &node(s1), t);
    (State::new(r, v), a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn window(values: &[(f64, f64)]) -> Vec<Sample> {
        values
            .iter()
            .enumerate()
            .map(|(i, &(x, v))| Sample {
                t: i as f64 * 0.1,
                states: vec![State::new(Vec3::new(x, 0.0, 0.0), Vec3::new(v, 0.0, 0.0))],
                acc: vec![Vec3::zeros()],
            })
            .collect()
    }

    #[test]
    fn distance_to_self_is_zero() {
        let a = window(&[(0.0, 0.1), (0.01, 0.1), (0.02, 0.1)]);
        assert_eq!(sup_distance(&a, &a, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn velocity_perturbation() {
        let a = window(&[(0.0, 0.1), (0.01, 0.1)]);
        let mut b = a.clone();
        b[1].states[0].v.x += 0.01;
        let d = sup_distance(&a, &b, 1.0, 1.0).unwrap();
        assert!((d - 0.01).abs() < 1e-15);
    }

    #[test]
    fn grid_mismatch() {
        let a = window(&[(0.0, 0.1), (0.01, 0.1)]);
        let b = window(&[(0.0, 0.1)]);
        assert_eq!(sup_distance(&a, &b, 1.0, 1.0), Err(TrajectoryError::GridMismatch));
        let mut c = a.clone();
        c[1].t = 0.2;
        assert_eq!(sup_distance(&a, &c, 1.0, 1.0), Err(TrajectoryError::GridMismatch));
    }

    proptest! {
        #[test]
        fn triangle_inequality_and_symmetry(
            xs in proptest::collection::vec((-1.0..1.0f64, -0.9..0.9f64), 12),
        ) {
            let a = window(&xs[0..4]);
            let b = window(&xs[4..8]);
            let c = window(&xs[8..12]);
            let ab = sup_distance(&a, &b, 0.5, 1.0).unwrap();
            let ba = sup_distance(&b, &a, 0.5, 1.0).unwrap();
            let bc = sup_distance(&b, &c, 0.5, 1.0).unwrap();
            let ac = sup_distance(&a, &c, 0.5, 1.0).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc + 1e-15);
        }
    }
}
