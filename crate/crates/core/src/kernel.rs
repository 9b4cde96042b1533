//! The O(n²) pair kernel: accelerations of all charges at one time level.
//!
//! Each charge is independent given the states at `t` and a read-only
//! trajectory source, so the loop over charges runs on rayon when the
//! `parallel` feature is enabled. Sums over partners always run in ascending
//! `k`, and errors are reported for the lowest failing charge, so results do
//! not depend on the number of workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, KinematicState, Partner};
use crate::fields::{field_split, CouplingForm, FieldSplit};
use crate::linalg::Vec3;
use crate::retardation::{geometry, RetardationError, RetardationParams, RetardedGeometry};
use crate::trajectory::{ChargeSpec, State, TrajectoryError, TrajectorySource};
use crate::units::Constants;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exec {
    Sequential,
    /// Rayon over charges; identical to `Sequential` without the `parallel`
    /// feature.
    #[default]
    Parallel,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("charges {j} and {k} collide at t = {t} (distance {distance:e})")]
    Collision { j: usize, k: usize, t: f64, distance: f64 },
    #[error("det Φ_{j} = {det:e} is singular at t = {t}")]
    SingularPhi { j: usize, t: f64, det: f64 },
    #[error("charge {j} reaches speed {speed} at t = {t}")]
    SpeedCap { j: usize, t: f64, speed: f64 },
    #[error("retarded time for pair ({j}, {k}) at t = {t} did not converge")]
    NoConvergence { j: usize, k: usize, t: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

impl KernelError {
    pub fn time(&self) -> Option<f64> {
        match *self {
            KernelError::Collision { t, .. }
            | KernelError::SingularPhi { t, .. }
            | KernelError::SpeedCap { t, .. }
            | KernelError::NoConvergence { t, .. } => Some(t),
            KernelError::Trajectory(_) => None,
        }
    }
}

/// Everything needed to turn states into accelerations.
#[derive(Debug, Clone)]
pub struct Physics {
    pub charges: Vec<ChargeSpec>,
    pub consts: Constants,
    pub form: CouplingForm,
    pub retard: RetardationParams,
    pub det_floor: f64,
    pub exec: Exec,
}

/// Result for one charge at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeEval {
    pub a: Vec3,
    pub det: f64,
    /// Smallest present distance to another charge (infinite for `n = 1`).
    pub min_dist: f64,
    /// Largest `|ρ − c (t − s)| / max(1, c |t|)` over partners.
    pub lc_residual: f64,
    /// Partners whose retarded velocity was clamped to the speed cap.
    pub clamped: Vec<usize>,
}

struct PairTerms {
    geoms: Vec<RetardedGeometry>,
    splits: Vec<FieldSplit>,
}

impl PairTerms {
    fn partners(&self) -> Vec<Partner<'_>> {
        self.geoms
            .iter()
            .zip(&self.splits)
            .map(|(geom, split)| Partner { geom, split })
            .collect()
    }
}

impl Physics {
    pub fn n(&self) -> usize {
        self.charges.len()
    }

    fn pair_terms<S: TrajectorySource + ?Sized>(
        &self,
        j: usize,
        t: f64,
        states: &[State],
        source: &S,
    ) -> Result<PairTerms, KernelError> {
        let n = self.n();
        let mut geoms = Vec::with_capacity(n.saturating_sub(1));
        let mut splits = Vec::with_capacity(n.saturating_sub(1));
        let obs = &states[j];
        for k in (0..n).filter(|&k| k != j) {
            let g = geometry(source, obs, &states[k].r, (j, k), t, &self.retard).map_err(|e| match e {
                RetardationError::Collision { j, k, t, distance } => KernelError::Collision { j, k, t, distance },
                RetardationError::NoConvergence { j, k, t } => KernelError::NoConvergence { j, k, t },
                RetardationError::Superluminal { j, t, speed } => KernelError::SpeedCap { j, t, speed },
                RetardationError::Trajectory(e) => KernelError::Trajectory(e),
            })?;
            splits.push(field_split(&g, &obs.v, self.charges[k].q, &self.consts, self.form));
            geoms.push(g);
        }
        Ok(PairTerms { geoms, splits })
    }

    fn kinematics(&self, j: usize, t: f64, v: Vec3) -> Result<KinematicState, KernelError> {
        KinematicState::new(v, self.charges[j].m0, self.consts.c).map_err(|_| KernelError::SpeedCap {
            j,
            t,
            speed: v.norm(),
        })
    }

    /// Acceleration of charge `j` given the present states of all charges.
    pub fn charge_eval<S: TrajectorySource + ?Sized>(
        &self,
        j: usize,
        t: f64,
        states: &[State],
        source: &S,
    ) -> Result<ChargeEval, KernelError> {
        let kin = self.kinematics(j, t, states[j].v)?;
        let terms = self.pair_terms(j, t, states, source)?;
        let partners = terms.partners();
        let asm = dynamics::assemble(self.charges[j].q, &kin, &partners, self.consts.c);
        let a = dynamics::solve_accel(&asm, self.det_floor).map_err(|e| match e {
            DynamicsError::SingularPhi { det, .. } => KernelError::SingularPhi { j, t, det },
            DynamicsError::Superluminal { speed } => KernelError::SpeedCap { j, t, speed },
        })?;
        let min_dist = (0..self.n())
            .filter(|&k| k != j)
            .map(|k| (states[j].r - states[k].r).norm())
            .fold(f64::INFINITY, f64::min);
        let norm = (self.consts.c * t.abs()).max(1.0);
        let lc_residual = terms.geoms.iter().map(|g| g.lc_residual / norm).fold(0.0, f64::max);
        let clamped = terms.geoms.iter().filter(|g| g.clamped).map(|g| g.k).collect();
        Ok(ChargeEval {
            a,
            det: asm.det,
            min_dist,
            lc_residual,
            clamped,
        })
    }

    /// Accelerations of all charges at `t`.
    pub fn accelerations<S: TrajectorySource + ?Sized>(
        &self,
        t: f64,
        states: &[State],
        source: &S,
    ) -> Result<Vec<ChargeEval>, KernelError> {
        let results: Vec<Result<ChargeEval, KernelError>> =
            self.map_charges(|j| self.charge_eval(j, t, states, source));
        results.into_iter().collect()
    }

    /// Momentum-equation residual of each charge for the given accelerations.
    pub fn momentum_residuals<S: TrajectorySource + ?Sized>(
        &self,
        t: f64,
        states: &[State],
        acc: &[Vec3],
        source: &S,
    ) -> Result<Vec<f64>, KernelError> {
        let results = self.map_charges(|j| {
            let kin = self.kinematics(j, t, states[j].v)?;
            let terms = self.pair_terms(j, t, states, source)?;
            let ch = &self.charges[j];
            Ok(dynamics::momentum_residual(
                ch.q,
                ch.m0,
                &kin,
                &terms.partners(),
                &acc[j],
                self.consts.c,
            ))
        });
        results.into_iter().collect()
    }

    fn map_charges<T, F>(&self, f: F) -> Vec<Result<T, KernelError>>
    where
        T: Send,
        F: Fn(usize) -> Result<T, KernelError> + Sync + Send,
    {
        match self.exec {
            #[cfg(feature = "parallel")]
            Exec::Parallel if self.n() > 1 => (0..self.n()).into_par_iter().map(f).collect(),
            _ => (0..self.n()).map(f).collect(),
        }
    }
}
