//! Velocity-dependent product charges for two electrons escaping from an ion.

use crate::Vec3;

use super::ThreeBodyError;

/// Wannier threshold exponent for a residual ion of unit charge.
pub const WANNIER_INDEX: f64 = 1.127;

/// Intermediate quantities of the charge construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeAuxiliaries {
    /// Hyperangle with tan(alpha) = v_a / v_b, in [0, pi/2].
    pub alpha: f64,
    pub f: f64,
    pub g: f64,
    pub b1: f64,
    pub b2: f64,
    /// E / (E + 1/2)
    pub a: f64,
    pub theta_ab: f64,
    pub mu_bar: f64,
}

/// Effective electron-ion (a, b) and electron-electron (ab) product charges
/// with their Sommerfeld parameters beta_j = z_j / v_j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveCharges {
    pub z_a: f64,
    pub z_b: f64,
    pub z_ab: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    pub beta_ab: f64,
    pub z_ion: f64,
    pub aux: Option<ChargeAuxiliaries>,
}

impl EffectiveCharges {
    /// Constant charges with Sommerfeld parameters for momenta k_a, k_b
    /// (electron velocities equal momenta in atomic units).
    pub fn constant(z_a: f64, z_b: f64, z_ab: f64, z_ion: f64, k_a: &Vec3, k_b: &Vec3) -> Self {
        let v_ab = (k_a - k_b).norm();
        Self {
            z_a,
            z_b,
            z_ab,
            beta_a: ratio(z_a, k_a.norm()),
            beta_b: ratio(z_b, k_b.norm()),
            beta_ab: ratio(z_ab, v_ab),
            z_ion,
            aux: None,
        }
    }

    /// The 3C choice: bare product charges -z, -z, +1.
    pub fn three_c(z_ion: f64, k_a: &Vec3, k_b: &Vec3) -> Self {
        Self::constant(-z_ion, -z_ion, 1.0, z_ion, k_a, k_b)
    }

    /// Electrons that do not see each other.
    pub fn independent(z_ion: f64, k_a: &Vec3, k_b: &Vec3) -> Self {
        Self::constant(-z_ion, -z_ion, 0.0, z_ion, k_a, k_b)
    }

    pub fn all_zero() -> Self {
        Self {
            z_a: 0.0,
            z_b: 0.0,
            z_ab: 0.0,
            beta_a: 0.0,
            beta_b: 0.0,
            beta_ab: 0.0,
            z_ion: 0.0,
            aux: None,
        }
    }
}

/// Which product charges a final state uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChargeModel {
    Ds3c,
    ThreeC,
    /// Electron-electron interaction switched off.
    Independent,
}

impl ChargeModel {
    /// Charges for electron momenta (= velocities) k_a, k_b at excess
    /// energy `energy` around an ion of charge `z_ion`.
    pub fn charges(
        self,
        k_a: &Vec3,
        k_b: &Vec3,
        energy: f64,
        z_ion: f64,
    ) -> Result<EffectiveCharges, ThreeBodyError> {
        match self {
            ChargeModel::Ds3c => ds3c_charges(k_a, k_b, energy, z_ion),
            ChargeModel::ThreeC => Ok(EffectiveCharges::three_c(z_ion, k_a, k_b)),
            ChargeModel::Independent => Ok(EffectiveCharges::independent(z_ion, k_a, k_b)),
        }
    }
}

impl std::str::FromStr for ChargeModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ds3c" => Ok(ChargeModel::Ds3c),
            "3c" | "c3" => Ok(ChargeModel::ThreeC),
            "independent" => Ok(ChargeModel::Independent),
            other => Err(format!("unknown model '{other}' (expected ds3c, 3c or independent)")),
        }
    }
}

impl std::fmt::Display for ChargeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChargeModel::Ds3c => "ds3c",
            ChargeModel::ThreeC => "3c",
            ChargeModel::Independent => "independent",
        })
    }
}

fn ratio(z: f64, v: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z / v
    }
}

/// Dynamically screened charges for electron velocities v_a, v_b at excess
/// energy `energy` (hartree) and ion charge `z_ion`:
///
/// z_ab = [1 - (f g)^2 a^b1] a^b2,
/// z_a  = -z + (1 - z_ab) v_a^(1+a) / ((v_a^a + v_b^a) v_ab), z_b likewise,
///
/// with f = (3 + cos^2 4alpha)/4, g = v_ab/(v_a + v_b),
/// b1 = 2 v_a v_b cos(theta_ab/2)/(v_a^2 + v_b^2), b2 = g^2 (mu_bar - 1/2)
/// and a = E/(E + 1/2).
pub fn ds3c_charges(
    v_a: &Vec3,
    v_b: &Vec3,
    energy: f64,
    z_ion: f64,
) -> Result<EffectiveCharges, ThreeBodyError> {
    let (va, vb) = (v_a.norm(), v_b.norm());
    if va == 0.0 && vb == 0.0 {
        return Err(ThreeBodyError::Domain("both velocities vanish"));
    }
    if !(energy >= 0.0) || !energy.is_finite() {
        return Err(ThreeBodyError::Domain("excess energy must be finite and non-negative"));
    }
    let v_ab_vec = v_a - v_b;
    let vab = v_ab_vec.norm();
    if vab == 0.0 {
        let limit = EffectiveCharges {
            z_a: -z_ion,
            z_b: -z_ion,
            z_ab: 1.0,
            beta_a: ratio(-z_ion, va),
            beta_b: ratio(-z_ion, vb),
            beta_ab: f64::INFINITY,
            z_ion,
            aux: None,
        };
        return Err(ThreeBodyError::CoalescentVelocity { limit });
    }
    let mu_bar = WANNIER_INDEX;
    let alpha = va.atan2(vb);
    let f = (3.0 + (4.0 * alpha).cos().powi(2)) / 4.0;
    let g = vab / (va + vb);
    let cos_ab = if va > 0.0 && vb > 0.0 {
        (v_a.dot(v_b) / (va * vb)).clamp(-1.0, 1.0)
    } else {
        1.0
    };
    let theta_ab = cos_ab.acos();
    let b1 = 2.0 * va * vb * (theta_ab / 2.0).cos() / (va * va + vb * vb);
    let b2 = g * g * (-0.5 + mu_bar);
    let a = energy / (energy + 0.5);
    let z_ab = (1.0 - (f * g).powi(2) * a.powf(b1)) * a.powf(b2);
    let denom = (va.powf(a) + vb.powf(a)) * vab;
    let z_a = -z_ion + (1.0 - z_ab) * va.powf(1.0 + a) / denom;
    let z_b = -z_ion + (1.0 - z_ab) * vb.powf(1.0 + a) / denom;
    Ok(EffectiveCharges {
        z_a,
        z_b,
        z_ab,
        beta_a: ratio(z_a, va),
        beta_b: ratio(z_b, vb),
        beta_ab: ratio(z_ab, vab),
        z_ion,
        aux: Some(ChargeAuxiliaries {
            alpha,
            f,
            g,
            b1,
            b2,
            a,
            theta_ab,
            mu_bar,
        }),
    })
}

/// |z_a/v_a + z_b/v_b + z_ab/v_ab - (-z/v_a - z/v_b + 1/v_ab)|: the total
/// potential identity evaluated where the distances are proportional to the
/// velocities.
pub fn potential_sum_check(charges: &EffectiveCharges, v_a: &Vec3, v_b: &Vec3) -> f64 {
    let (va, vb, vab) = (v_a.norm(), v_b.norm(), (v_a - v_b).norm());
    let z = charges.z_ion;
    let effective = charges.z_a / va + charges.z_b / vb + charges.z_ab / vab;
    let bare = -z / va - z / vb + 1.0 / vab;
    (effective - bare).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn energy_parameter() {
        let va = Vec3::new(1.0, 0.0, 0.0);
        let vb = Vec3::new(0.0, 1.0, 0.0);
        let c = ds3c_charges(&va, &vb, 0.5, 1.0).unwrap();
        assert_eq!(c.aux.unwrap().a, 0.5);
        let c = ds3c_charges(&va, &vb, 1e6, 1.0).unwrap();
        assert!(c.aux.unwrap().a > 1.0 - 1e-6);
        assert_eq!(c.aux.unwrap().mu_bar, 1.127);
    }

    #[test]
    fn equal_velocities_give_full_pair_charges() {
        let v = Vec3::new(0.3, 0.4, 0.0);
        match ds3c_charges(&v, &v, 0.2, 1.0) {
            Err(ThreeBodyError::CoalescentVelocity { limit }) => {
                assert_eq!((limit.z_ab, limit.z_a, limit.z_b), (1.0, -1.0, -1.0));
            }
            other => panic!("{other:?}"),
        }
        // approaching the limit continuously
        let w = v + Vec3::new(1e-9, 0.0, 0.0);
        let c = ds3c_charges(&v, &w, 0.2, 1.0).unwrap();
        assert_relative_eq!(c.z_ab, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn three_c_charges_satisfy_identity_exactly() {
        let va = Vec3::new(0.7, 0.1, 0.0);
        let vb = Vec3::new(-0.2, 0.5, 0.3);
        let c = EffectiveCharges::three_c(1.0, &va, &vb);
        assert_eq!(potential_sum_check(&c, &va, &vb), 0.0);
    }

    #[test]
    fn near_coalescent_velocities() {
        let va = Vec3::new(0.5, 0.2, 0.0);
        let vb = va + Vec3::new(0.0, 1e-8, 0.0);
        let c = ds3c_charges(&va, &vb, 0.3, 1.0).unwrap();
        assert!(potential_sum_check(&c, &va, &vb) <= 1e-8);
    }
}
