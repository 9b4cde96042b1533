//! The three-term retarded field of a moving point charge, split into the
//! part fixed by history and the part linear in the observer's current
//! acceleration.
//!
//! Time derivatives are total derivatives along both trajectories: the
//! observer position `r_j(t)` moves, and `e_jk` depends on `t` through
//! `r_j(t)` and through the retarded time. The second derivative of `e_jk`
//! therefore contains `a_j(t)`, which is what makes the equation of motion
//! implicit in the acceleration.

use serde::{Deserialize, Serialize};

use crate::linalg::{outer, LinMap3, Vec3};
use crate::retardation::RetardedGeometry;
use crate::units::Constants;

/// Which coefficient of `a_j(t)` in `D² e_jk` the dynamics use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CouplingForm {
    /// `h ↦ (h + κ⁻¹ (e, h) (w − c e)) / ρ`, obtained by differentiating
    /// `e_jk` twice.
    #[default]
    Derived,
    /// `h ↦ (h + κ⁻¹ (e, h) (c e + w)) / ρ`, the bracket as printed with the
    /// operator definitions.
    PaperLiteral,
}

impl CouplingForm {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingForm::Derived => "derived",
            CouplingForm::PaperLiteral => "paper_literal",
        }
    }
}

/// `E_jk = e_hist + couple · a_j(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSplit {
    pub e_hist: Vec3,
    pub couple: LinMap3,
}

impl FieldSplit {
    pub fn field(&self, a_j: &Vec3) -> Vec3 {
        self.e_hist + self.couple * a_j
    }
}

/// Second total derivative of `e_jk` with the `a_j(t)` contribution removed.
pub fn edd_hist(g: &RetardedGeometry, v_j: &Vec3, c: f64) -> Vec3 {
    let RetardedGeometry {
        e,
        edot,
        w,
        b,
        kappa,
        tprime,
        rdot,
        rho,
        rhodot,
        ..
    } = *g;
    let kappa_dot = -edot.dot(&w) - e.dot(&b) * tprime;
    let tpp = -edot.dot(v_j) / kappa - (c - e.dot(v_j)) * kappa_dot / (kappa * kappa);
    let rdd = -b * (tprime * tprime) - w * tpp;
    let rhodd = edot.dot(&rdot) + e.dot(&rdd);
    (rdd - e * rhodd) / rho - edot * (2.0 * rhodot / rho)
}

/// All terms of `E_jk` that do not depend on `a_j(t)`.
pub fn field_history_part(g: &RetardedGeometry, v_j: &Vec3, q_k: f64, k: &Constants) -> Vec3 {
    let c = k.c;
    let rho2 = g.rho * g.rho;
    let coulomb = g.e / rho2;
    let extrapolation = (g.edot / g.rho - g.e * (2.0 * g.rhodot / rho2)) / c;
    let wave = edd_hist(g, v_j, c) / (c * c);
    (coulomb + extrapolation + wave) * (k.coulomb_k * q_k)
}

/// The map `G` giving the `a_j(t)` part of `D² e_jk`.
pub fn accel_coupling(g: &RetardedGeometry, form: CouplingForm, c: f64) -> LinMap3 {
    let dir = match form {
        CouplingForm::Derived => g.w - g.e * c,
        CouplingForm::PaperLiteral => g.e * c + g.w,
    };
    (LinMap3::identity() + outer(&dir, &g.e) / g.kappa) / g.rho
}

/// `h ↦ h + (1/c) v_j × (e × h)`, i.e. `I + (e v_jᵀ − (v_j, e) I) / c`.
pub fn lorentz_map(v_j: &Vec3, e: &Vec3, c: f64) -> LinMap3 {
    LinMap3::identity() + (outer(e, v_j) - LinMap3::identity() * v_j.dot(e)) / c
}

pub fn field_split(g: &RetardedGeometry, v_j: &Vec3, q_k: f64, k: &Constants, form: CouplingForm) -> FieldSplit {
    FieldSplit {
        e_hist: field_history_part(g, v_j, q_k, k),
        couple: accel_coupling(g, form, k.c) * (k.coulomb_k * q_k / (k.c * k.c)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retardation::{geometry, geometry_at, RetardationParams};
    use crate::trajectory::{AnalyticSystem, PastSpec, State, TrajectorySource};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rest(x: f64, y: f64, z: f64) -> PastSpec {
        PastSpec::Rest { r0: Vec3::new(x, y, z) }
    }

    fn geom_with(w: Vec3, e: Vec3, rho: f64) -> RetardedGeometry {
        let c = 1.0;
        RetardedGeometry {
            j: 0,
            k: 1,
            t: 0.0,
            s: -rho,
            r_vec: e * rho,
            rho,
            e,
            w,
            b: Vec3::zeros(),
            kappa: c - e.dot(&w),
            tprime: 1.0,
            rdot: Vec3::zeros(),
            rhodot: 0.0,
            edot: Vec3::zeros(),
            lc_residual: 0.0,
            clamped: false,
        }
    }

    #[test]
    fn coupling_forms_agree_off_axis_at_rest() {
        let g = geom_with(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 2.0);
        let h = Vec3::new(0.0, 3.0, -1.0);
        for form in [CouplingForm::Derived, CouplingForm::PaperLiteral] {
            assert_eq!(accel_coupling(&g, form, 1.0) * h, h / 2.0);
        }
    }

    #[test]
    fn coupling_forms_differ_on_axis() {
        let e = Vec3::new(1.0, 0.0, 0.0);
        let g = geom_with(Vec3::zeros(), e, 2.0);
        assert_eq!(accel_coupling(&g, CouplingForm::Derived, 1.0) * e, Vec3::zeros());
        assert_eq!(accel_coupling(&g, CouplingForm::PaperLiteral, 1.0) * e, e);
    }

    #[test]
    fn coupling_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let e = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.3).normalize();
            let w = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 0.1);
            let g = geom_with(w, e, rng.random_range(0.5..3.0));
            let m = accel_coupling(&g, CouplingForm::Derived, 1.0);
            let h1 = Vec3::new(rng.random_range(-1.0..1.0), 0.2, -0.7);
            let h2 = Vec3::new(0.4, rng.random_range(-1.0..1.0), 0.9);
            let (al, be) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let lhs = m * (h1 * al + h2 * be);
            let rhs = m * h1 * al + m * h2 * be;
            assert!((lhs - rhs).norm() <= 1e-13 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn lorentz_map_cases() {
        let e = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(lorentz_map(&Vec3::zeros(), &e, 1.0), LinMap3::identity());
        let v = Vec3::new(0.3, -0.2, 0.5);
        assert!((lorentz_map(&v, &e, 1.0) * (e * 2.0) - e * 2.0).norm() < 1e-15);
        let h = lorentz_map(&Vec3::new(0.0, 0.5, 0.0), &e, 1.0) * Vec3::new(0.0, 1.0, 0.0);
        assert!((h - Vec3::new(0.5, 1.0, 0.0)).norm() < 1e-15);
        // against the literal cross products
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let v = Vec3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), 0.1);
            let e = Vec3::new(rng.random_range(-1.0..1.0), 0.4, rng.random_range(-1.0..1.0)).normalize();
            let h = Vec3::new(rng.random_range(-1.0..1.0), 1.0, -0.3);
            let direct = h + v.cross(&e.cross(&h));
            assert!((lorentz_map(&v, &e, 1.0) * h - direct).norm() < 1e-14);
        }
    }

    #[test]
    fn static_pair_is_pure_coulomb() {
        let k = Constants::dimensionless();
        let p = RetardationParams::new(1.0, 1.0);
        for d in [1.0, 2.0, 4.0, 8.0] {
            let sys = AnalyticSystem::new(vec![rest(d, 0.0, 0.0), rest(0.0, 0.0, 0.0)]).unwrap();
            let g = geometry_at(&sys, (0, 1), 0.0, &p).unwrap();
            let e = field_history_part(&g, &Vec3::zeros(), 1.5, &k);
            assert_eq!(e, Vec3::new(1.5 / (d * d), 0.0, 0.0));
        }
    }

    #[test]
    fn affine_in_acceleration() {
        let k = Constants::dimensionless();
        let p = RetardationParams::new(1.0, 1.0);
        let sys = AnalyticSystem::new(vec![
            PastSpec::Circular {
                center: Vec3::zeros(),
                radius: 0.5,
                omega: 1.0,
                phase: 0.0,
            },
            PastSpec::Uniform {
                r0: Vec3::new(2.0, 1.0, 0.0),
                v: Vec3::new(-0.3, 0.2, 0.1),
            },
        ])
        .unwrap();
        let g = geometry_at(&sys, (0, 1), 0.7, &p).unwrap();
        let v_j = sys.state(0, 0.7).unwrap().v;
        let split = field_split(&g, &v_j, -0.8, &k, CouplingForm::Derived);
        let a1 = Vec3::new(0.3, -1.0, 2.0);
        let a2 = Vec3::new(-0.4, 0.5, 0.1);
        let lhs = split.field(&a1) - split.field(&a2);
        let rhs = split.couple * (a1 - a2);
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }

    /// Field of a uniformly moving charge expressed at its present position.
    fn uniform_closed_form(q: f64, beta: Vec3, present: Vec3, observer: Vec3) -> Vec3 {
        let rp = observer - present;
        let b2 = beta.norm_squared();
        let sin2 = if b2 == 0.0 {
            0.0
        } else {
            1.0 - (rp.dot(&beta) / (rp.norm() * beta.norm())).powi(2)
        };
        rp.normalize() * (q * (1.0 - b2) / (rp.norm_squared() * (1.0 - b2 * sin2).powf(1.5)))
    }

    #[test]
    fn uniform_source_matches_closed_form() {
        let k = Constants::dimensionless();
        let p = RetardationParams::new(1.0, 1.0);
        let observer = Vec3::new(0.3, 1.7, -0.4);
        for beta in [0.1, 0.5, 0.9] {
            let u = Vec3::new(beta, 0.0, 0.0);
            let sys = AnalyticSystem::new(vec![
                rest(observer.x, observer.y, observer.z),
                PastSpec::Uniform {
                    r0: Vec3::new(-2.0, 0.5, 0.1),
                    v: u,
                },
            ])
            .unwrap();
            let t = 1.9;
            let g = geometry_at(&sys, (0, 1), t, &p).unwrap();
            let got = field_history_part(&g, &Vec3::zeros(), 1.0, &k);
            let present = Vec3::new(-2.0, 0.5, 0.1) + u * t;
            let want = uniform_closed_form(1.0, u, present, observer);
            assert!(
                (got - want).norm() <= 1e-10 * want.norm(),
                "beta {beta}: {got:?} vs {want:?}"
            );
        }
    }

    #[test]
    fn wave_term_matches_finite_difference_when_observer_unaccelerated() {
        // observer uniform (a_j = 0), source circular
        let p = RetardationParams::new(1.0, 1.0);
        let sys = AnalyticSystem::new(vec![
            PastSpec::Uniform {
                r0: Vec3::new(1.5, 0.2, 0.0),
                v: Vec3::new(0.1, 0.3, 0.0),
            },
            PastSpec::Circular {
                center: Vec3::new(-0.5, 0.0, 0.0),
                radius: 0.4,
                omega: 1.5,
                phase: 0.2,
            },
        ])
        .unwrap();
        let t = 0.9;
        let g = geometry_at(&sys, (0, 1), t, &p).unwrap();
        let v_j = sys.state(0, t).unwrap().v;
        let exact = edd_hist(&g, &v_j, 1.0);
        let e_at = |tt: f64| {
            let obs: State = sys.state(0, tt).unwrap();
            let now = sys.state(1, tt).unwrap().r;
            geometry(&sys, &obs, &now, (0, 1), tt, &p).unwrap().e
        };
        let err = |h: f64| ((e_at(t + h) - e_at(t) * 2.0 + e_at(t - h)) / (h * h) - exact).norm();
        let order = (err(1e-2) / err(5e-3)).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order}");
    }
}
