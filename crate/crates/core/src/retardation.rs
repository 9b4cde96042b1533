//! Retarded times and the per-pair geometry at one observation time.
//!
//! For an observer `j` at `(t, r_j(t))` and a source `k`, the retarded time
//! `s` is the root of
//!
//! ```text
//! f(s) = c (t - s) - |r_j(t) - r_k(s)|
//! ```
//!
//! `f` is strictly decreasing with slope `-(c - (e, v_k(s)))`, negative at
//! `s = t` and positive far enough in the past, so the root is unique. It is
//! bracketed by exponential back-off and refined with Newton steps that fall
//! back to bisection whenever they leave the bracket.

use crate::linalg::Vec3;
use crate::trajectory::{State, TrajectoryError, TrajectorySource};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RetardationError {
    #[error("charges {j} and {k} collide at t = {t} (distance {distance:e})")]
    Collision { j: usize, k: usize, t: f64, distance: f64 },
    #[error("retarded time for pair ({j}, {k}) at t = {t} did not converge")]
    NoConvergence { j: usize, k: usize, t: f64 },
    #[error("observer {j} moves at speed {speed} ≥ c at t = {t}")]
    Superluminal { j: usize, t: f64, speed: f64 },
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}

/// Tolerances for the light-cone solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardationParams {
    pub c: f64,
    /// Reference length; the stopping tolerance is
    /// `tol_rel · max(c |t|, l_ref)`.
    pub l_ref: f64,
    pub tol_rel: f64,
    /// Collision radius.
    pub r_min: f64,
    /// Source speeds at or above `v_cap · c` are clamped to that value.
    pub v_cap: f64,
    pub max_iter: usize,
}

impl RetardationParams {
    pub fn new(c: f64, l_ref: f64) -> Self {
        Self {
            c,
            l_ref,
            tol_rel: 1e-12,
            r_min: 1e-9 * l_ref,
            v_cap: 0.999,
            max_iter: 200,
        }
    }

    pub fn tolerance(&self, t: f64) -> f64 {
        self.tol_rel * (self.c * t.abs()).max(self.l_ref)
    }
}

/// Everything about pair `(j, k)` at observation time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedGeometry {
    pub j: usize,
    pub k: usize,
    pub t: f64,
    /// Retarded time `t_jk`.
    pub s: f64,
    /// `r_j(t) - r_k(s)`.
    pub r_vec: Vec3,
    pub rho: f64,
    pub e: Vec3,
    /// Source velocity at `s`.
    pub w: Vec3,
    /// Source acceleration at `s`.
    pub b: Vec3,
    /// `c - (e, w)`.
    pub kappa: f64,
    /// `d t_jk / d t`.
    pub tprime: f64,
    /// `d r_jk / d t`.
    pub rdot: Vec3,
    pub rhodot: f64,
    pub edot: Vec3,
    /// `|rho - c (t - s)|`.
    pub lc_residual: f64,
    /// The source velocity had to be clamped to the speed cap.
    pub clamped: bool,
}

struct Probe {
    f: f64,
    slope: f64,
}

fn clamp_speed(v: Vec3, cap: f64) -> (Vec3, bool) {
    let speed = v.norm();
    if speed >= cap {
        (v * (cap / speed), true)
    } else {
        (v, false)
    }
}

/// Solves the light-cone equation for pair `(j, k)`.
///
/// `observer` is the state of `j` at `t` and `source_now` the position of
/// `k` at `t`; both are supplied by the caller because during a window
/// iteration they come from the in-progress stage, not from `source`.
pub fn solve_retarded_time<S: TrajectorySource + ?Sized>(
    source: &S,
    observer: &State,
    source_now: &Vec3,
    (j, k): (usize, usize),
    t: f64,
    params: &RetardationParams,
) -> Result<f64, RetardationError> {
    let c = params.c;
    let cap = params.v_cap * c;
    let d0 = (observer.r - source_now).norm();
    if !(d0 >= params.r_min) {
        return Err(RetardationError::Collision { j, k, t, distance: d0 });
    }
    let probe = |s: f64| -> Result<Probe, RetardationError> {
        let st = source.state(k, s)?;
        let r = observer.r - st.r;
        let rho = r.norm();
        let (w, _) = clamp_speed(st.v, cap);
        let slope = -c + r.dot(&w) / rho;
        Ok(Probe {
            f: c * (t - s) - rho,
            slope,
        })
    };
    let tol = params.tolerance(t);

    // bracket: f(lo) > 0 > f(hi)
    let mut hi = t;
    let mut s = t - d0 / c;
    let mut p = probe(s)?;
    let mut budget = params.max_iter;
    let mut lo;
    if p.f > 0.0 {
        lo = s;
    } else if p.f < 0.0 {
        hi = s;
        let mut step = d0 / c;
        loop {
            if budget == 0 {
                return Err(RetardationError::NoConvergence { j, k, t });
            }
            budget -= 1;
            step *= 2.0;
            let cand = s - step;
            let pc = probe(cand)?;
            if pc.f > 0.0 {
                lo = cand;
                break;
            }
            hi = cand;
            if pc.f == 0.0 {
                return Ok(cand);
            }
        }
        // restart Newton from the end of the bracket nearer the root
        s = hi;
        p = probe(s)?;
    } else {
        return Ok(s);
    }

    while budget > 0 {
        budget -= 1;
        let newton = s - p.f / p.slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let pn = probe(next)?;
        if pn.f > 0.0 {
            lo = next;
        } else if pn.f < 0.0 {
            hi = next;
        } else {
            return Ok(next);
        }
        s = next;
        p = pn;
        if p.f.abs() <= tol {
            // one polishing step; quadratic convergence takes |f| to roundoff
            let polished = s - p.f / p.slope;
            if polished >= lo && polished <= hi {
                let pp = probe(polished)?;
                if pp.f.abs() < p.f.abs() {
                    return Ok(polished);
                }
            }
            return Ok(s);
        }
        if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(hi.abs()).max(1.0) {
            return Ok(s);
        }
    }
    Err(RetardationError::NoConvergence { j, k, t })
}

/// Retarded geometry of pair `(j, k)` for an observer state supplied by the
/// caller.
pub fn geometry<S: TrajectorySource + ?Sized>(
    source: &S,
    observer: &State,
    source_now: &Vec3,
    (j, k): (usize, usize),
    t: f64,
    params: &RetardationParams,
) -> Result<RetardedGeometry, RetardationError> {
    let c = params.c;
    let v_j = observer.v;
    let speed = v_j.norm();
    if !(speed < c) {
        return Err(RetardationError::Superluminal { j, t, speed });
    }
    let s = solve_retarded_time(source, observer, source_now, (j, k), t, params)?;
    let (src, b) = source.eval(k, s)?;
    let (w, clamped) = clamp_speed(src.v, params.v_cap * c);
    let r_vec = observer.r - src.r;
    let rho = r_vec.norm();
    let e = r_vec / rho;
    let kappa = c - e.dot(&w);
    let tprime = (c - e.dot(&v_j)) / kappa;
    let rdot = v_j - w * tprime;
    let rhodot = e.dot(&rdot);
    let edot = (rdot - e * rhodot) / rho;
    Ok(RetardedGeometry {
        j,
        k,
        t,
        s,
        r_vec,
        rho,
        e,
        w,
        b,
        kappa,
        tprime,
        rdot,
        rhodot,
        edot,
        lc_residual: (rho - c * (t - s)).abs(),
        clamped,
    })
}

/// Geometry with both observer and present source position read from
/// `source`.
pub fn geometry_at<S: TrajectorySource + ?Sized>(
    source: &S,
    (j, k): (usize, usize),
    t: f64,
    params: &RetardationParams,
) -> Result<RetardedGeometry, RetardationError> {
    let observer = source.state(j, t)?;
    let now = source.state(k, t)?.r;
    geometry(source, &observer, &now, (j, k), t, params)
}
