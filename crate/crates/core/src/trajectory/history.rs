use std::collections::HashSet;

use super::{interpolate, ChargeSpec, PastSpec, Sample, State, TrajectoryError, TrajectorySource};
use crate::linalg::Vec3;

/// Admissibility guards applied when a history is built and extended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryOptions {
    pub c: f64,
    /// Speed cap as a fraction of `c`.
    pub v_cap: f64,
    /// Largest velocity change between consecutive table samples, as a
    /// fraction of `c`.
    pub max_velocity_jump: f64,
}

impl HistoryOptions {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            v_cap: 0.999,
            max_velocity_jump: 0.05,
        }
    }

    pub fn speed_limit(&self) -> f64 {
        self.v_cap * self.c
    }
}

/// The trajectory `y(t)`: a prescribed past for `t ≤ 0` followed by
/// committed samples on `[0, T_front]`.
///
/// Committed data is append-only. Interpolation on an interval only uses its
/// two bracketing samples, so appending never changes earlier evaluations.
#[derive(Debug, Clone)]
pub struct TrajectoryHistory {
    charges: Vec<ChargeSpec>,
    pasts: Vec<PastSpec>,
    committed: Vec<Sample>,
    options: HistoryOptions,
}

impl TrajectoryHistory {
    /// Validates the charges and their pasts and returns a history with
    /// frontier `t = 0`.
    pub fn make_initial(
        charges: Vec<ChargeSpec>,
        pasts: Vec<PastSpec>,
        options: HistoryOptions,
    ) -> Result<Self, TrajectoryError> {
        if charges.is_empty() {
            return Err(TrajectoryError::EmptySystem);
        }
        if pasts.len() != charges.len() {
            return Err(TrajectoryError::PastCountMismatch {
                expected: charges.len(),
                got: pasts.len(),
            });
        }
        if !(options.c > 0.0 && options.c.is_finite()) {
            return Err(TrajectoryError::InvalidOption(format!("c = {}", options.c)));
        }
        if !(options.v_cap > 0.0 && options.v_cap < 1.0) {
            return Err(TrajectoryError::InvalidOption(format!(
                "v_cap = {} must lie in (0, 1)",
                options.v_cap
            )));
        }
        let mut seen = HashSet::new();
        for ch in &charges {
            if !seen.insert(ch.label.as_str()) {
                return Err(TrajectoryError::DuplicateLabel(ch.label.clone()));
            }
            if !(ch.m0 > 0.0 && ch.m0.is_finite()) {
                return Err(TrajectoryError::InvalidCharge {
                    label: ch.label.clone(),
                    reason: format!("rest mass must be positive and finite, got {}", ch.m0),
                });
            }
            if !ch.q.is_finite() {
                return Err(TrajectoryError::InvalidCharge {
                    label: ch.label.clone(),
                    reason: "charge must be finite".into(),
                });
            }
        }
        let cap = options.speed_limit();
        for (j, past) in pasts.iter().enumerate() {
            let speed = past.max_speed();
            if !(speed < cap) {
                return Err(TrajectoryError::SpeedViolation {
                    charge: j,
                    t: 0.0,
                    speed,
                    cap,
                });
            }
            if let PastSpec::Table(table) = past {
                let jump = table.max_velocity_jump();
                let tol = options.max_velocity_jump * options.c;
                if jump > tol {
                    return Err(TrajectoryError::DiscontinuousPast { charge: j, jump, tol });
                }
            }
        }
        Ok(Self {
            charges,
            pasts,
            committed: Vec::new(),
            options,
        })
    }

    pub fn charges(&self) -> &[ChargeSpec] {
        &self.charges
    }

    pub fn pasts(&self) -> &[PastSpec] {
        &self.pasts
    }

    pub fn options(&self) -> &HistoryOptions {
        &self.options
    }

    pub fn committed(&self) -> &[Sample] {
        &self.committed
    }

    pub fn front(&self) -> f64 {
        self.committed.last().map_or(0.0, |s| s.t)
    }

    /// States of all charges at the frontier.
    pub fn front_states(&self) -> Vec<State> {
        match self.committed.last() {
            Some(s) => s.states.clone(),
            None => self.pasts.iter().map(|p| p.eval(0.0).0).collect(),
        }
    }

    pub fn eval_state(&self, j: usize, t: f64) -> Result<State, TrajectoryError> {
        self.eval(j, t).map(|(s, _)| s)
    }

    pub fn eval_acc(&self, j: usize, t: f64) -> Result<Vec3, TrajectoryError> {
        self.eval(j, t).map(|(_, a)| a)
    }

    /// Commits a window. Its first sample must sit on the frontier with the
    /// frontier's states; on an empty history that sample is kept (it carries
    /// the acceleration at `t = 0`), otherwise it is dropped.
    pub fn append_window(&mut self, window: Vec<Sample>) -> Result<(), TrajectoryError> {
        let Some(first) = window.first() else {
            return Err(TrajectoryError::JunctionMismatch("empty window".into()));
        };
        let front = self.front();
        if first.t != front {
            return Err(TrajectoryError::JunctionMismatch(format!(
                "window starts at {} but the frontier is {front}",
                first.t
            )));
        }
        let n = self.charges.len();
        let junction = self.front_states();
        for (j, (a, b)) in first.states.iter().zip(&junction).enumerate() {
            let dr = (a.r - b.r).norm();
            let dv = (a.v - b.v).norm();
            if dr > 1e-12 * b.r.norm().max(1.0) || dv > 1e-12 * self.options.c {
                return Err(TrajectoryError::JunctionMismatch(format!(
                    "charge {j}: |Δr| = {dr:e}, |Δv| = {dv:e}"
                )));
            }
        }
        let mut prev = front;
        for (i, s) in window.iter().enumerate() {
            if s.states.len() != n || s.acc.len() != n {
                return Err(TrajectoryError::GridMismatch);
            }
            if i > 0 && !(s.t > prev) {
                return Err(TrajectoryError::JunctionMismatch(format!(
                    "sample times not increasing at {}",
                    s.t
                )));
            }
            prev = s.t;
            let cap = self.options.speed_limit();
            for (j, st) in s.states.iter().enumerate() {
                let speed = st.v.norm();
                if !(speed < cap) {
                    return Err(TrajectoryError::SpeedViolation {
                        charge: j,
                        t: s.t,
                        speed,
                        cap,
                    });
                }
            }
        }
        let skip = usize::from(!self.committed.is_empty());
        self.committed.extend(window.into_iter().skip(skip));
        Ok(())
    }
}

impl TrajectorySource for TrajectoryHistory {
    fn charge_count(&self) -> usize {
        self.charges.len()
    }

    fn eval(&self, j: usize, t: f64) -> Result<(State, Vec3), TrajectoryError> {
        if j >= self.charges.len() {
            return Err(TrajectoryError::NoSuchCharge(j));
        }
        let front = self.front();
        if t > front || t.is_nan() {
            return Err(TrajectoryError::OutOfRange { t, front });
        }
        if t < 0.0 || self.committed.is_empty() {
            return Ok(self.pasts[j].eval(t));
        }
        Ok(interpolate(&self.committed, j, t))
    }
}

/// A committed history extended by a provisional window iterate. Times up to
/// the history frontier come from the history, later ones from the window.
#[derive(Debug, Clone, Copy)]
pub struct Overlay<'a> {
    history: &'a TrajectoryHistory,
    window: &'a [Sample],
}

impl<'a> Overlay<'a> {
    pub fn new(history: &'a TrajectoryHistory, window: &'a [Sample]) -> Self {
        Self { history, window }
    }
}

impl TrajectorySource for Overlay<'_> {
    fn charge_count(&self) -> usize {
        self.history.charge_count()
    }

    fn eval(&self, j: usize, t: f64) -> Result<(State, Vec3), TrajectoryError> {
        if t <= self.history.front() || self.window.is_empty() {
            return self.history.eval(j, t);
        }
        let end = self.window[self.window.len() - 1].t;
        if t > end || t.is_nan() {
            return Err(TrajectoryError::OutOfRange { t, front: end });
        }
        if j >= self.history.charge_count() {
            return Err(TrajectoryError::NoSuchCharge(j));
        }
        Ok(interpolate(self.window, j, t))
    }
}

/// Charges following analytic motions for all times, with no frontier.
/// Used by the oracles and by tests of the pair kernel.
#[derive(Debug, Clone)]
pub struct AnalyticSystem {
    motions: Vec<PastSpec>,
}

impl AnalyticSystem {
    /// Tables are rejected: they only cover `t ≤ 0`.
    pub fn new(motions: Vec<PastSpec>) -> Option<Self> {
        motions.iter().all(PastSpec::is_analytic).then_some(Self { motions })
    }

    pub fn motions(&self) -> &[PastSpec] {
        &self.motions
    }
}

impl TrajectorySource for AnalyticSystem {
    fn charge_count(&self) -> usize {
        self.motions.len()
    }

    fn eval(&self, j: usize, t: f64) -> Result<(State, Vec3), TrajectoryError> {
        self.motions
            .get(j)
            .map(|m| m.eval(t))
            .ok_or(TrajectoryError::NoSuchCharge(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> HistoryOptions {
        HistoryOptions::new(1.0)
    }

    fn one_rest() -> TrajectoryHistory {
        TrajectoryHistory::make_initial(
            vec![ChargeSpec::new("a", 1.0, 1.0)],
            vec![PastSpec::Rest { r0: Vec3::zeros() }],
            opts(),
        )
        .unwrap()
    }

    fn uniform_window(t0: f64, h: f64, steps: usize, r0: Vec3, v: Vec3) -> Vec<Sample> {
        (0..=steps)
            .map(|i| {
                let t = t0 + i as f64 * h;
                Sample {
                    t,
                    states: vec![State::new(r0 + v * t, v)],
                    acc: vec![Vec3::zeros()],
                }
            })
            .collect()
    }

    #[test]
    fn rest_past_eval() {
        let h = one_rest();
        let s = h.eval_state(0, -5.0).unwrap();
        assert_eq!(s, State::new(Vec3::zeros(), Vec3::zeros()));
        assert_eq!(h.eval_acc(0, -5.0).unwrap(), Vec3::zeros());
    }

    #[test]
    fn uniform_past_eval() {
        let h = TrajectoryHistory::make_initial(
            vec![ChargeSpec::new("a", 1.0, 1.0)],
            vec![PastSpec::Uniform {
                r0: Vec3::new(1.0, 0.0, 0.0),
                v: Vec3::new(0.5, 0.0, 0.0),
            }],
            opts(),
        )
        .unwrap();
        let s = h.eval_state(0, -2.0).unwrap();
        assert_eq!(s.r, Vec3::new(0.0, 0.0, 0.0));
        assert_eq!(h.eval_acc(0, -2.0).unwrap(), Vec3::zeros());
    }

    #[test]
    fn table_speed_violation() {
        let table = PastSpec::Table(
            super::super::PastTable::new(vec![
                (-1.0, Vec3::new(-0.999, 0.0, 0.0), Vec3::new(0.999, 0.0, 0.0)),
                (0.0, Vec3::zeros(), Vec3::new(0.999, 0.0, 0.0)),
            ])
            .unwrap(),
        );
        let mut o = opts();
        o.v_cap = 0.99;
        let err = TrajectoryHistory::make_initial(vec![ChargeSpec::new("a", 1.0, 1.0)], vec![table], o).unwrap_err();
        assert!(matches!(err, TrajectoryError::SpeedViolation { .. }));
    }

    #[test]
    fn table_velocity_jump_rejected() {
        let table = PastSpec::Table(
            super::super::PastTable::new(vec![
                (-1.0, Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.0)),
                (0.0, Vec3::zeros(), Vec3::new(0.5, 0.0, 0.0)),
            ])
            .unwrap(),
        );
        let err =
            TrajectoryHistory::make_initial(vec![ChargeSpec::new("a", 1.0, 1.0)], vec![table], opts()).unwrap_err();
        assert!(matches!(err, TrajectoryError::DiscontinuousPast { .. }));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            TrajectoryHistory::make_initial(vec![], vec![], opts()).unwrap_err(),
            TrajectoryError::EmptySystem
        );
        let rest = PastSpec::Rest { r0: Vec3::zeros() };
        let err = TrajectoryHistory::make_initial(
            vec![ChargeSpec::new("a", 1.0, 1.0), ChargeSpec::new("a", 1.0, 1.0)],
            vec![rest.clone(), rest.clone()],
            opts(),
        )
        .unwrap_err();
        assert!(matches!(err, TrajectoryError::DuplicateLabel(_)));
        let err = TrajectoryHistory::make_initial(vec![ChargeSpec::new("a", 1.0, 0.0)], vec![rest.clone()], opts())
            .unwrap_err();
        assert!(matches!(err, TrajectoryError::InvalidCharge { .. }));
        let err = TrajectoryHistory::make_initial(
            vec![ChargeSpec::new("a", 1.0, 1.0)],
            vec![PastSpec::Circular {
                center: Vec3::zeros(),
                radius: 2.0,
                omega: 0.5,
                phase: 0.0,
            }],
            opts(),
        )
        .unwrap_err();
        assert!(matches!(err, TrajectoryError::SpeedViolation { .. }));
    }

    #[test]
    fn append_advances_front_and_keeps_line() {
        let mut h = TrajectoryHistory::make_initial(
            vec![ChargeSpec::new("a", 1.0, 1.0)],
            vec![PastSpec::Uniform {
                r0: Vec3::new(1.0, 2.0, 0.0),
                v: Vec3::new(0.3, -0.2, 0.1),
            }],
            opts(),
        )
        .unwrap();
        let v = Vec3::new(0.3, -0.2, 0.1);
        let r0 = Vec3::new(1.0, 2.0, 0.0);
        h.append_window(uniform_window(0.0, 0.25, 4, r0, v)).unwrap();
        assert_eq!(h.front(), 1.0);
        for i in 0..=100 {
            let t = -0.5 + 1.5 * f64::from(i) / 100.0;
            let s = h.eval_state(0, t).unwrap();
            assert!((s.r - (r0 + v * t)).norm() < 1e-14);
            assert!((s.v - v).norm() < 1e-14);
        }
        assert!(matches!(
            h.eval_state(0, 1.0 + 1e-9),
            Err(TrajectoryError::OutOfRange { .. })
        ));
    }

    #[test]
    fn append_is_bit_stable() {
        let r0 = Vec3::zeros();
        let v = Vec3::new(0.1, 0.0, 0.0);
        let mut h = one_rest();
        // rest past then a kick: first window starts at the rest state
        let mut w = uniform_window(0.0, 0.1, 5, r0, Vec3::zeros());
        for (i, s) in w.iter_mut().enumerate() {
            let t = s.t;
            s.states[0] = State::new(Vec3::new(0.05 * t * t, 0.0, 0.0), Vec3::new(0.1 * t, 0.0, 0.0));
            s.acc[0] = Vec3::new(0.1, 0.0, 0.0);
            let _ = i;
        }
        h.append_window(w).unwrap();
        let probes: Vec<f64> = (0..50).map(|i| -0.2 + 0.7 * f64::from(i) / 50.0).collect();
        let before: Vec<_> = probes.iter().map(|&t| h.eval(0, t).unwrap()).collect();
        let front = h.front_states()[0];
        let next: Vec<Sample> = (0..=3)
            .map(|i| {
                let t = 0.5 + f64::from(i) * 0.1;
                Sample {
                    t,
                    states: vec![State::new(front.r + v * (t - 0.5), front.v)],
                    acc: vec![Vec3::zeros()],
                }
            })
            .collect();
        h.append_window(next).unwrap();
        assert!((h.front() - 0.8).abs() < 1e-15);
        let after: Vec<_> = probes.iter().map(|&t| h.eval(0, t).unwrap()).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn junction_mismatch() {
        let mut h = one_rest();
        let mut w = uniform_window(0.0, 0.1, 2, Vec3::zeros(), Vec3::zeros());
        w[0].states[0].r.x = 1e-9;
        assert!(matches!(h.append_window(w), Err(TrajectoryError::JunctionMismatch(_))));
        let w = uniform_window(0.1, 0.1, 2, Vec3::zeros(), Vec3::zeros());
        assert!(matches!(h.append_window(w), Err(TrajectoryError::JunctionMismatch(_))));
    }

    #[test]
    fn append_rejects_speed_cap() {
        let mut h = one_rest();
        let mut w = uniform_window(0.0, 0.1, 2, Vec3::zeros(), Vec3::zeros());
        w[2].states[0].v = Vec3::new(0.9995, 0.0, 0.0);
        assert!(matches!(
            h.append_window(w),
            Err(TrajectoryError::SpeedViolation { .. })
        ));
    }

    #[test]
    fn hermite_order_on_sine() {
        // r(t) = sin t along x, committed on grids h and h/2
        let build = |h: f64| {
            let mut hist = TrajectoryHistory::make_initial(
                vec![ChargeSpec::new("a", 1.0, 1.0)],
                vec![PastSpec::Uniform {
                    r0: Vec3::zeros(),
                    v: Vec3::new(0.5, 0.0, 0.0),
                }],
                opts(),
            )
            .unwrap();
            let n = (2.0 / h).round() as usize;
            let w = (0..=n)
                .map(|i| {
                    let t = i as f64 * h;
                    Sample {
                        t,
                        states: vec![State::new(
                            Vec3::new((0.5 * t).sin(), 0.0, 0.0),
                            Vec3::new(0.5 * (0.5 * t).cos(), 0.0, 0.0),
                        )],
                        acc: vec![Vec3::new(-0.25 * (0.5 * t).sin(), 0.0, 0.0)],
                    }
                })
                .collect();
            hist.append_window(w).unwrap();
            hist
        };
        let err = |h: f64| {
            let hist = build(h);
            (0..400)
                .map(|i| {
                    let t = 2.0 * (f64::from(i) + 0.37) / 400.0;
                    let (s, a) = hist.eval(0, t).unwrap();
                    ((s.r.x - (0.5 * t).sin()).abs(), (a.x + 0.25 * (0.5 * t).sin()).abs())
                })
                .fold((0.0_f64, 0.0_f64), |acc, e| (acc.0.max(e.0), acc.1.max(e.1)))
        };
        let (pos_coarse, acc_coarse) = err(0.4);
        let (pos_fine, acc_fine) = err(0.2);
        let pos_order = (pos_coarse / pos_fine).log2();
        let acc_order = (acc_coarse / acc_fine).log2();
        assert!(pos_order >= 3.5, "position order {pos_order}");
        assert!(acc_order >= 3.5, "acceleration order {acc_order}");
    }
}
