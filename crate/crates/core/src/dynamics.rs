//! Equation of motion for one charge as a 3×3 linear system in its current
//! acceleration.
//!
//! With `D p_j = m0 γ Γ(v_j) a_j` and `E_jk = E_hist + C_jk a_j`, the
//! momentum equation becomes
//!
//! ```text
//! Φ_j a_j = (q_j / m_j) Σ_k H_jk E_hist,
//! Φ_j     = Γ(v_j) − Σ_k (q_j / m_j) H_jk C_jk
//! ```
//!
//! where `m_j = γ m0` is the relativistic mass. A vanishing `det Φ_j` marks
//! a singular point of the trajectory.

use thiserror::Error;

use crate::fields::{lorentz_map, FieldSplit};
use crate::linalg::{det3, max_abs_entry, outer, solve3, LinMap3, Vec3};
use crate::retardation::RetardedGeometry;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("det Φ = {det:e} is below the singularity threshold {threshold:e}")]
    SingularPhi { det: f64, threshold: f64 },
    #[error("speed {speed} is not below c")]
    Superluminal { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub v: Vec3,
    /// `v / c`
    pub u: Vec3,
    pub gamma: f64,
    pub m_rel: f64,
    /// Relativistic momentum `m0 γ v`.
    pub p: Vec3,
}

impl KinematicState {
    pub fn new(v: Vec3, m0: f64, c: f64) -> Result<Self, DynamicsError> {
        let u = v / c;
        let u2 = u.norm_squared();
        if !(u2 < 1.0) {
            return Err(DynamicsError::Superluminal { speed: v.norm() });
        }
        let gamma = 1.0 / (1.0 - u2).sqrt();
        Ok(Self {
            v,
            u,
            gamma,
            m_rel: gamma * m0,
            p: v * (gamma * m0),
        })
    }
}

/// `Γ(v): h ↦ h + γ² (u, h) u`.
pub fn gamma_map(kin: &KinematicState) -> LinMap3 {
    LinMap3::identity() + outer(&kin.u, &kin.u) * (kin.gamma * kin.gamma)
}

/// `Γ(v)⁻¹: h ↦ h − (u, h) u`.
pub fn gamma_map_inverse(kin: &KinematicState) -> LinMap3 {
    LinMap3::identity() - outer(&kin.u, &kin.u)
}

/// One interacting partner `k` of charge `j`.
#[derive(Debug, Clone, Copy)]
pub struct Partner<'a> {
    pub geom: &'a RetardedGeometry,
    pub split: &'a FieldSplit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiAssembly {
    pub phi: LinMap3,
    pub det: f64,
    pub rhs: Vec3,
}

/// Builds `Φ_j` and the right-hand side. Partners are summed in the order
/// given, which callers keep ascending in `k`.
pub fn assemble(q_j: f64, kin: &KinematicState, partners: &[Partner<'_>], c: f64) -> PhiAssembly {
    let scale = q_j / kin.m_rel;
    let mut phi = gamma_map(kin);
    let mut force = Vec3::zeros();
    for p in partners {
        let h = lorentz_map(&kin.v, &p.geom.e, c);
        phi -= h * p.split.couple * scale;
        force += h * p.split.e_hist;
    }
    PhiAssembly {
        phi,
        det: det3(&phi),
        rhs: force * scale,
    }
}

pub fn det_phi(asm: &PhiAssembly) -> f64 {
    asm.det
}

/// Threshold below which `|det Φ|` counts as singular.
pub fn singular_threshold(asm: &PhiAssembly, det_floor: f64) -> f64 {
    det_floor * max_abs_entry(&asm.phi).max(1.0)
}

pub fn is_singular(asm: &PhiAssembly, det_floor: f64) -> bool {
    !(asm.det.abs() >= singular_threshold(asm, det_floor))
}

pub fn solve_accel(asm: &PhiAssembly, det_floor: f64) -> Result<Vec3, DynamicsError> {
    let threshold = singular_threshold(asm, det_floor);
    if !(asm.det.abs() >= threshold) {
        return Err(DynamicsError::SingularPhi {
            det: asm.det,
            threshold,
        });
    }
    solve3(&asm.phi, &asm.rhs).ok_or(DynamicsError::SingularPhi {
        det: asm.det,
        threshold,
    })
}

/// `|D p_j − q_j Σ_k H_jk E_jk(a)|` with `D p_j = m0 γ Γ(v) a`, evaluated
/// literally rather than through `Φ`.
pub fn momentum_residual(q_j: f64, m0: f64, kin: &KinematicState, partners: &[Partner<'_>], a: &Vec3, c: f64) -> f64 {
    let dp = gamma_map(kin) * a * (m0 * kin.gamma);
    let mut force = Vec3::zeros();
    for p in partners {
        let field = p.split.field(a);
        force += field + kin.v.cross(&p.geom.e.cross(&field)) / c;
    }
    (dp - force * q_j).norm()
}
