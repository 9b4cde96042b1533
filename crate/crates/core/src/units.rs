use serde::{Deserialize, Serialize};

/// Vacuum permittivity in F/m (CODATA 2018).
pub const EPSILON_0_SI: f64 = 8.854_187_812_8e-12;
/// Speed of light in m/s.
pub const C_SI: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UnitSystem {
    /// `c = 1`, `4πε₀ = 1`.
    #[default]
    Dimensionless,
    Si,
}

/// The two constants that enter the force law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Speed of light.
    pub c: f64,
    /// Coulomb constant `1 / (4πε₀)`.
    pub coulomb_k: f64,
}

impl Constants {
    pub fn dimensionless() -> Self {
        Self { c: 1.0, coulomb_k: 1.0 }
    }

    pub fn si() -> Self {
        Self {
            c: C_SI,
            coulomb_k: 1.0 / (4.0 * std::f64::consts::PI * EPSILON_0_SI),
        }
    }
}

impl From<UnitSystem> for Constants {
    fn from(u: UnitSystem) -> Self {
        match u {
            UnitSystem::Dimensionless => Self::dimensionless(),
            UnitSystem::Si => Self::si(),
        }
    }
}
