//! Simulation of point charges interacting through their retarded fields.
//!
//! Each charge obeys the relativistic momentum equation with the Lorentz
//! force of every other charge's retarded field. The radiative part of that
//! field depends on the observer's own acceleration, so the acceleration of
//! each charge is found by solving a 3×3 linear system `Φ a = rhs` per time
//! level. The past of every charge must be prescribed; the future is built
//! window by window with a Picard iteration over the trajectory (the method
//! of steps). Collisions, singular `Φ` and the speed cap end a run.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod fields;
pub mod integrator;
pub mod kernel;
pub mod linalg;
pub mod retardation;
pub mod trajectory;
pub mod units;
pub mod validation;

pub use fields::CouplingForm;
pub use integrator::{inspect, run, Event, EventKind, FrontReport, RunConfig, RunError, RunResult, Terminator};
pub use kernel::{Exec, Physics};
pub use linalg::{LinMap3, Vec3};
pub use trajectory::{
    AnalyticSystem, ChargeSpec, HistoryOptions, PastSpec, PastTable, Sample, State, TrajectoryError, TrajectoryHistory,
    TrajectorySource,
};
pub use units::{Constants, UnitSystem};
