//! Method of steps with Picard iteration on each window.
//!
//! A window `[T, T + Δt]` is solved by fixed-point iteration on the whole
//! window trajectory. Each iterate is produced by classical RK4 on
//! `ṙ = v, v̇ = a`, with every retarded lookup that lands inside the window
//! served by the previous iterate. Iteration stops when successive iterates
//! are within `picard_tol` in the [`sup_distance`] metric; the converged
//! window is committed and the next one starts from its end.
//!
//! Guards (collision, singular `Φ_j`, speed cap) end the run. The last
//! committed grid time is the end of the maximal interval that was reached.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fields::CouplingForm;
use crate::kernel::{ChargeEval, Exec, KernelError, Physics};
use crate::linalg::Vec3;
use crate::retardation::RetardationParams;
use crate::trajectory::{sup_distance, Overlay, Sample, State, TrajectoryError, TrajectoryHistory};
use crate::units::{Constants, UnitSystem};

/// Smallest window, in inner steps, that halving may reach.
pub const MIN_WINDOW_STEPS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Window length Δt.
    pub window: f64,
    /// Inner RK4 step h.
    pub inner_step: f64,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub t_end: f64,
    pub det_floor: f64,
    /// Collision radius; defaults to `1e-9 · l_ref`.
    pub r_min: Option<f64>,
    pub v_cap: f64,
    /// Relative light-cone tolerance; the absolute one is
    /// `tol_lc · max(c |t|, l_ref)`.
    pub tol_lc: f64,
    /// Bound on the momentum-equation residual of committed samples.
    pub tol_res: f64,
    pub coupling_form: CouplingForm,
    pub units: UnitSystem,
    /// Reference length; defaults to the smallest initial pairwise distance.
    pub l_ref: Option<f64>,
    pub exec: Exec,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            window: 0.5,
            inner_step: 0.01,
            picard_tol: 1e-12,
            picard_max_iter: 50,
            t_end: 1.0,
            det_floor: 1e-8,
            r_min: None,
            v_cap: 0.999,
            tol_lc: 1e-12,
            tol_res: 1e-8,
            coupling_form: CouplingForm::Derived,
            units: UnitSystem::Dimensionless,
            l_ref: None,
            exec: Exec::Parallel,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("t = 0 is singular: {0}")]
    InvalidInitial(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Why the run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Terminator {
    Completed,
    Collision { j: usize, k: usize, t: f64 },
    SingularPhi { j: usize, t: f64, det: f64 },
    SpeedCap { j: usize, t: f64 },
    NoConvergence { t: f64 },
}

impl Terminator {
    pub fn is_completed(&self) -> bool {
        matches!(self, Terminator::Completed)
    }

    fn from_kernel(e: &KernelError, t_fallback: f64) -> Self {
        match *e {
            KernelError::Collision { j, k, t, .. } => Terminator::Collision { j, k, t },
            KernelError::SingularPhi { j, t, det } => Terminator::SingularPhi { j, t, det },
            KernelError::SpeedCap { j, t, .. } => Terminator::SpeedCap { j, t },
            KernelError::NoConvergence { t, .. } => Terminator::NoConvergence { t },
            KernelError::Trajectory(_) => Terminator::NoConvergence { t: t_fallback },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Collision,
    SingularPhi,
    SpeedCap,
    WindowHalved,
    NoConvergence,
    WarningClamp,
    /// `|Δ det Φ_j| > 0.5 |det Φ_j|` between consecutive committed samples.
    DetJump,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charge: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl Event {
    fn new(t: f64, kind: EventKind) -> Self {
        Self {
            t,
            kind,
            charge: None,
            pair: None,
            value: None,
        }
    }

    fn from_terminator(term: &Terminator) -> Option<Self> {
        Some(match *term {
            Terminator::Completed => return None,
            Terminator::Collision { j, k, t } => Event {
                pair: Some((j, k)),
                ..Event::new(t, EventKind::Collision)
            },
            Terminator::SingularPhi { j, t, det } => Event {
                charge: Some(j),
                value: Some(det),
                ..Event::new(t, EventKind::SingularPhi)
            },
            Terminator::SpeedCap { j, t } => Event {
                charge: Some(j),
                ..Event::new(t, EventKind::SpeedCap)
            },
            Terminator::NoConvergence { t } => Event::new(t, EventKind::NoConvergence),
        })
    }
}

/// Per-charge diagnostics at one committed grid time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiag {
    pub t: f64,
    pub charge: usize,
    pub det_phi: f64,
    pub min_rho: f64,
    pub speed: f64,
    pub picard_iters: usize,
    pub contraction_ratio: f64,
}

/// Picard history of one accepted window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowDiag {
    pub t_start: f64,
    pub steps: usize,
    pub iterations: usize,
    /// `d_m = sup_distance(iterate m, iterate m − 1)`, `m = 1, 2, …`
    pub distances: Vec<f64>,
}

impl WindowDiag {
    pub fn ratios(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub history: TrajectoryHistory,
    pub t_max: f64,
    pub terminator: Terminator,
    pub events: Vec<Event>,
    pub steps: Vec<StepDiag>,
    pub windows: Vec<WindowDiag>,
    /// Largest `|ρ − c (t − s)| / max(1, c |t|)` over all retarded-time
    /// solves of the converged windows, every iterate and RK stage included.
    pub max_lc_residual: f64,
    /// Largest momentum-equation residual over committed samples.
    pub max_momentum_residual: f64,
    pub coupling_form: CouplingForm,
}

/// Guard values for one charge at one grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardProbe {
    pub charge: usize,
    pub det: f64,
    pub min_dist: f64,
    pub nearest: Option<usize>,
    pub speed: f64,
}

/// Guard thresholds in absolute units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Guards {
    pub r_min: f64,
    pub det_floor: f64,
    pub speed_limit: f64,
}

/// Maps guard violations at one time level to a terminator, checking
/// collision, then singular `Φ`, then the speed cap, in charge order.
pub fn detect_events(t: f64, probes: &[GuardProbe], guards: &Guards) -> Option<Terminator> {
    for p in probes {
        if p.min_dist < guards.r_min {
            let k = p.nearest.unwrap_or(p.charge);
            let (j, k) = (p.charge.min(k), p.charge.max(k));
            return Some(Terminator::Collision { j, k, t });
        }
    }
    for p in probes {
        if !(p.det.abs() >= guards.det_floor) {
            return Some(Terminator::SingularPhi {
                j: p.charge,
                t,
                det: p.det,
            });
        }
    }
    for p in probes {
        if !(p.speed < guards.speed_limit) {
            return Some(Terminator::SpeedCap { j: p.charge, t });
        }
    }
    None
}

/// A converged window.
#[derive(Debug, Clone)]
pub struct WindowOutcome {
    pub samples: Vec<Sample>,
    /// Kernel output at each sample of the final iterate.
    pub evals: Vec<Vec<ChargeEval>>,
    pub distances: Vec<f64>,
    /// Largest normalized light-cone residual over every solve of every
    /// iterate, RK stages included.
    pub max_lc_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindowError {
    #[error("Picard iteration did not converge after {iterations} iterates (last distance {last:e})")]
    NoConvergence { iterations: usize, last: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// Resolved numerical settings of a run.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub physics: Physics,
    pub h: f64,
    pub window_steps: usize,
    pub total_steps: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub l_ref: f64,
    pub guards: Guards,
    pub tol_res: f64,
}

fn steps_of(span: f64, h: f64, what: &str) -> Result<usize, RunError> {
    let n = (span / h).round();
    if !(n >= 1.0) || ((n * h - span).abs() > 1e-9 * span) {
        return Err(RunError::InvalidConfig(format!(
            "{what} = {span} is not a positive multiple of inner_step = {h}"
        )));
    }
    Ok(n as usize)
}

impl Integrator {
    pub fn new(history: &TrajectoryHistory, cfg: &RunConfig) -> Result<Self, RunError> {
        let bad = |m: String| Err(RunError::InvalidConfig(m));
        let h = cfg.inner_step;
        if !(h > 0.0 && h.is_finite()) {
            return bad(format!("inner_step must be positive, got {h}"));
        }
        if !(cfg.window >= h) {
            return bad(format!("window {} is shorter than inner_step {h}", cfg.window));
        }
        if !(cfg.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", cfg.t_end));
        }
        if !(cfg.picard_tol > 0.0) || cfg.picard_max_iter == 0 {
            return bad("picard_tol must be positive and picard_max_iter at least 1".into());
        }
        if !(cfg.v_cap > 0.0 && cfg.v_cap < 1.0) {
            return bad(format!("v_cap must lie in (0, 1), got {}", cfg.v_cap));
        }
        if !(cfg.det_floor >= 0.0) || !(cfg.tol_lc > 0.0) || !(cfg.tol_res > 0.0) {
            return bad("det_floor, tol_lc and tol_res must be non-negative / positive".into());
        }
        let consts = Constants::from(cfg.units);
        if consts.c != history.options().c {
            return bad(format!(
                "history was built with c = {} but the run uses {:?} units",
                history.options().c,
                cfg.units
            ));
        }
        let window_steps = steps_of(cfg.window, h, "window")?;
        let total_steps = steps_of(cfg.t_end, h, "t_end")?;
        let states = history.front_states();
        let l_ref = match cfg.l_ref {
            Some(l) if l > 0.0 => l,
            Some(l) => return bad(format!("l_ref must be positive, got {l}")),
            None => min_pairwise(&states)
                .filter(|d| *d > 0.0 && d.is_finite())
                .unwrap_or(1.0),
        };
        let r_min = cfg.r_min.unwrap_or(1e-9 * l_ref);
        let mut retard = RetardationParams::new(consts.c, l_ref);
        retard.tol_rel = cfg.tol_lc;
        retard.r_min = r_min;
        retard.v_cap = cfg.v_cap;
        Ok(Self {
            physics: Physics {
                charges: history.charges().to_vec(),
                consts,
                form: cfg.coupling_form,
                retard,
                det_floor: cfg.det_floor,
                exec: cfg.exec,
            },
            h,
            window_steps,
            total_steps,
            picard_tol: cfg.picard_tol,
            picard_max_iter: cfg.picard_max_iter,
            l_ref,
            guards: Guards {
                r_min,
                det_floor: cfg.det_floor,
                speed_limit: cfg.v_cap * consts.c,
            },
            tol_res: cfg.tol_res,
        })
    }

    fn time(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    fn probes(&self, states: &[State], evals: &[ChargeEval]) -> Vec<GuardProbe> {
        evals
            .iter()
            .enumerate()
            .map(|(j, ev)| {
                let nearest = (0..states.len()).filter(|&k| k != j).min_by(|&a, &b| {
                    let da = (states[j].r - states[a].r).norm();
                    let db = (states[j].r - states[b].r).norm();
                    da.total_cmp(&db)
                });
                GuardProbe {
                    charge: j,
                    det: ev.det,
                    min_dist: ev.min_dist,
                    nearest,
                    speed: states[j].v.norm(),
                }
            })
            .collect()
    }

    /// Runs Picard iteration on the window of `steps` inner steps starting at
    /// grid index `start` (the history frontier).
    pub fn picard_window(
        &self,
        history: &TrajectoryHistory,
        start: usize,
        steps: usize,
    ) -> Result<WindowOutcome, WindowError> {
        let t0 = self.time(start);
        let front = history.front_states();
        let times: Vec<f64> = (0..=steps).map(|i| self.time(start + i)).collect();
        let n = front.len();
        let mut prev: Vec<Sample> = times
            .iter()
            .map(|&t| Sample {
                t,
                states: front.iter().map(|s| State::new(s.r + s.v * (t - t0), s.v)).collect(),
                acc: vec![Vec3::zeros(); n],
            })
            .collect();
        let mut distances = Vec::new();
        let mut max_lc: f64 = 0.0;
        for _ in 0..self.picard_max_iter {
            let overlay = Overlay::new(history, &prev);
            let (next, evals, lc) = self.propagate(&overlay, &front, &times)?;
            max_lc = max_lc.max(lc);
            let d = sup_distance(&next, &prev, self.l_ref, self.physics.consts.c).map_err(KernelError::from)?;
            distances.push(d);
            prev = next;
            if d <= self.picard_tol {
                return Ok(WindowOutcome {
                    samples: prev,
                    evals,
                    distances,
                    max_lc_residual: max_lc,
                });
            }
        }
        Err(WindowError::NoConvergence {
            iterations: distances.len(),
            last: distances.last().copied().unwrap_or(f64::NAN),
        })
    }

    /// One Picard map: RK4 across the window with retarded lookups served by
    /// `source`.
    fn propagate(&self, source: &Overlay<'_>, front: &[State], times: &[f64]) -> Result<Propagated, KernelError> {
        let phys = &self.physics;
        let max_lc = std::cell::Cell::new(0.0_f64);
        let accel = |t: f64, states: &[State]| -> Result<Vec<ChargeEval>, KernelError> {
            let ev = phys.accelerations(t, states, source)?;
            max_lc.set(ev.iter().map(|e| e.lc_residual).fold(max_lc.get(), f64::max));
            Ok(ev)
        };
        let acc_of = |ev: &[ChargeEval]| ev.iter().map(|e| e.a).collect::<Vec<_>>();
        let stage = |y: &[State], slope_r: &[Vec3], slope_v: &[Vec3], dt: f64| -> Vec<State> {
            y.iter()
                .zip(slope_r.iter().zip(slope_v))
                .map(|(s, (dr, dv))| State::new(s.r + dr * dt, s.v + dv * dt))
                .collect()
        };

        let mut y = front.to_vec();
        let mut ev = accel(times[0], &y)?;
        let mut samples = Vec::with_capacity(times.len());
        let mut evals = Vec::with_capacity(times.len());
        samples.push(Sample {
            t: times[0],
            states: y.clone(),
            acc: acc_of(&ev),
        });
        evals.push(ev.clone());
        for w in times.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            let h = tb - ta;
            let tm = 0.5 * (ta + tb);
            let v1: Vec<Vec3> = y.iter().map(|s| s.v).collect();
            let a1 = acc_of(&ev);
            let y2 = stage(&y, &v1, &a1, 0.5 * h);
            let v2: Vec<Vec3> = y2.iter().map(|s| s.v).collect();
            let a2 = acc_of(&accel(tm, &y2)?);
            let y3 = stage(&y, &v2, &a2, 0.5 * h);
            let v3: Vec<Vec3> = y3.iter().map(|s| s.v).collect();
            let a3 = acc_of(&accel(tm, &y3)?);
            let y4 = stage(&y, &v3, &a3, h);
            let v4: Vec<Vec3> = y4.iter().map(|s| s.v).collect();
            let a4 = acc_of(&accel(tb, &y4)?);
            y = (0..y.len())
                .map(|j| {
                    let dr = (v1[j] + (v2[j] + v3[j]) * 2.0 + v4[j]) * (h / 6.0);
                    let dv = (a1[j] + (a2[j] + a3[j]) * 2.0 + a4[j]) * (h / 6.0);
                    State::new(y[j].r + dr, y[j].v + dv)
                })
                .collect();
            ev = accel(tb, &y)?;
            samples.push(Sample {
                t: tb,
                states: y.clone(),
                acc: acc_of(&ev),
            });
            evals.push(ev.clone());
        }
        Ok((samples, evals, max_lc.get()))
    }

    /// Evaluates the frontier and reports whether it is a singular point.
    pub fn check_front(&self, history: &TrajectoryHistory) -> Result<Vec<ChargeEval>, RunError> {
        let t = history.front();
        let states = history.front_states();
        let evals = self.physics.accelerations(t, &states, history).map_err(|e| match e {
            KernelError::Trajectory(e) => RunError::Trajectory(e),
            other => RunError::InvalidInitial(other.to_string()),
        })?;
        let probes = self.probes(&states, &evals);
        if let Some(term) = detect_events(t, &probes, &self.guards) {
            return Err(RunError::InvalidInitial(format!("{term:?}")));
        }
        Ok(evals)
    }

    /// Extends `history` until `t_end` or a singular point.
    pub fn run(&self, mut history: TrajectoryHistory, form: CouplingForm) -> Result<RunResult, RunError> {
        self.check_front(&history)?;
        let start_index = (history.front() / self.h).round() as usize;
        let mut i = start_index;
        let mut events = Vec::new();
        let mut steps_log = Vec::new();
        let mut windows = Vec::new();
        let mut max_lc: f64 = 0.0;
        let mut max_res: f64 = 0.0;
        let mut last_det: Option<Vec<f64>> = None;
        let mut steps = self.window_steps;
        let mut terminator = Terminator::Completed;

        while i < self.total_steps {
            let try_steps = steps.min(self.total_steps - i);
            let t0 = self.time(i);
            let outcome = match self.picard_window(&history, i, try_steps) {
                Ok(o) => o,
                Err(WindowError::NoConvergence { .. })
                | Err(WindowError::Kernel(KernelError::NoConvergence { .. })) => {
                    if try_steps / 2 >= MIN_WINDOW_STEPS {
                        steps = try_steps / 2;
                        events.push(Event {
                            value: Some(self.time(steps)),
                            ..Event::new(t0, EventKind::WindowHalved)
                        });
                        continue;
                    }
                    terminator = Terminator::NoConvergence { t: t0 };
                    break;
                }
                Err(WindowError::Kernel(KernelError::Trajectory(e))) => return Err(RunError::Trajectory(e)),
                Err(WindowError::Kernel(e)) => {
                    // keep the steps that end before the failing evaluation
                    let t_err = e.time().unwrap_or(t0);
                    let allowed = (((t_err - t0) / self.h).ceil() as usize).saturating_sub(1);
                    if allowed >= 1 && allowed < try_steps {
                        steps = allowed;
                        continue;
                    }
                    terminator = Terminator::from_kernel(&e, t0);
                    break;
                }
            };
            steps = self.window_steps;

            // guards on the converged samples
            let mut keep = outcome.samples.len();
            for (idx, (s, ev)) in outcome.samples.iter().zip(&outcome.evals).enumerate().skip(1) {
                let probes = self.probes(&s.states, ev);
                if let Some(term) = detect_events(s.t, &probes, &self.guards) {
                    terminator = term;
                    keep = idx;
                    break;
                }
            }

            max_lc = max_lc.max(outcome.max_lc_residual);
            let first_new = usize::from(!history.committed().is_empty());
            let iterations = outcome.distances.len();
            let ratio = match outcome.distances.as_slice() {
                [.., a, b] if *a > 0.0 => b / a,
                _ => f64::NAN,
            };
            let overlay = Overlay::new(&history, &outcome.samples);
            for idx in first_new..keep {
                let s = &outcome.samples[idx];
                let ev = &outcome.evals[idx];
                let res = self
                    .physics
                    .momentum_residuals(s.t, &s.states, &s.acc, &overlay)
                    .map_err(|e| match e {
                        KernelError::Trajectory(e) => RunError::Trajectory(e),
                        other => RunError::InvalidConfig(format!("residual check failed: {other}")),
                    })?;
                max_res = res.iter().copied().fold(max_res, f64::max);
                let dets: Vec<f64> = ev.iter().map(|e| e.det).collect();
                for (j, e) in ev.iter().enumerate() {
                    max_lc = max_lc.max(e.lc_residual);
                    for &k in &e.clamped {
                        events.push(Event {
                            charge: Some(j),
                            pair: Some((j, k)),
                            ..Event::new(s.t, EventKind::WarningClamp)
                        });
                    }
                    if let Some(prev) = &last_det {
                        if (e.det - prev[j]).abs() > 0.5 * prev[j].abs() {
                            events.push(Event {
                                charge: Some(j),
                                value: Some(e.det),
                                ..Event::new(s.t, EventKind::DetJump)
                            });
                        }
                    }
                    steps_log.push(StepDiag {
                        t: s.t,
                        charge: j,
                        det_phi: e.det,
                        min_rho: e.min_dist,
                        speed: s.states[j].v.norm(),
                        picard_iters: iterations,
                        contraction_ratio: ratio,
                    });
                }
                last_det = Some(dets);
            }

            if keep > 1 {
                let mut samples = outcome.samples;
                samples.truncate(keep);
                let committed = keep - 1;
                history.append_window(samples)?;
                windows.push(WindowDiag {
                    t_start: t0,
                    steps: committed,
                    iterations,
                    distances: outcome.distances,
                });
                i += committed;
            } else if history.committed().is_empty() {
                // only the t = 0 sample survived; commit it so the history
                // carries the acceleration at the start
                let mut samples = outcome.samples;
                samples.truncate(1);
                history.append_window(samples)?;
            }
            if !terminator.is_completed() {
                break;
            }
        }

        if let Some(ev) = Event::from_terminator(&terminator) {
            events.push(ev);
        }
        Ok(RunResult {
            t_max: history.front(),
            history,
            terminator,
            events,
            steps: steps_log,
            windows,
            max_lc_residual: max_lc,
            max_momentum_residual: max_res,
            coupling_form: form,
        })
    }
}

/// Samples, kernel output per sample, and the largest light-cone residual.
type Propagated = (Vec<Sample>, Vec<Vec<ChargeEval>>, f64);

fn min_pairwise(states: &[State]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for (a, sa) in states.iter().enumerate() {
        for sb in &states[a + 1..] {
            let d = (sa.r - sb.r).norm();
            best = Some(best.map_or(d, |b: f64| b.min(d)));
        }
    }
    best
}

/// Extends an initial trajectory as far as the guards allow.
pub fn run(initial: TrajectoryHistory, cfg: &RunConfig) -> Result<RunResult, RunError> {
    let integrator = Integrator::new(&initial, cfg)?;
    integrator.run(initial, cfg.coupling_form)
}

/// Frontier report used to decide whether `t = 0` is a regular point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontReport {
    pub t: f64,
    pub l_ref: f64,
    pub pair_distances: Vec<(usize, usize, f64)>,
    pub det_phi: Vec<f64>,
    pub speeds: Vec<f64>,
    pub verdict: String,
    pub nonsingular: bool,
}

/// Inspects the frontier of `history` without stepping.
pub fn inspect(history: &TrajectoryHistory, cfg: &RunConfig) -> Result<FrontReport, RunError> {
    let integ = Integrator::new(history, cfg)?;
    let t = history.front();
    let states = history.front_states();
    let mut pair_distances = Vec::new();
    for a in 0..states.len() {
        for b in a + 1..states.len() {
            pair_distances.push((a, b, (states[a].r - states[b].r).norm()));
        }
    }
    let speeds: Vec<f64> = states.iter().map(|s| s.v.norm()).collect();
    let (det_phi, verdict, nonsingular) = match integ.physics.accelerations(t, &states, history) {
        Ok(evals) => {
            let dets: Vec<f64> = evals.iter().map(|e| e.det).collect();
            let probes = integ.probes(&states, &evals);
            match detect_events(t, &probes, &integ.guards) {
                None => (dets, "nonsingular".to_string(), true),
                Some(term) => (dets, describe_singular(&term), false),
            }
        }
        Err(KernelError::Trajectory(e)) => return Err(RunError::Trajectory(e)),
        Err(e) => {
            let term = Terminator::from_kernel(&e, t);
            (Vec::new(), describe_singular(&term), false)
        }
    };
    Ok(FrontReport {
        t,
        l_ref: integ.l_ref,
        pair_distances,
        det_phi,
        speeds,
        verdict,
        nonsingular,
    })
}

fn describe_singular(term: &Terminator) -> String {
    match *term {
        Terminator::Collision { j, k, t } => format!("singular: collision at t={t} (charges {j}, {k})"),
        Terminator::SingularPhi { j, t, det } => format!("singular: det Φ_{j} = {det:e} at t={t}"),
        Terminator::SpeedCap { j, t } => format!("singular: charge {j} at the speed cap at t={t}"),
        Terminator::NoConvergence { t } => format!("singular: retarded-time solve failed at t={t}"),
        Terminator::Completed => "nonsingular".into(),
    }
}
