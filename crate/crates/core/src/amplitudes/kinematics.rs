use crate::Vec3;

use super::AmplitudeError;

/// Atomic unit of energy in electronvolts.
pub const HARTREE_EV: f64 = 27.2114;
/// Binding energy of hydrogen 1s in hartree.
pub const BINDING: f64 = 0.5;

/// Unit vector at polar angle `theta` from the z axis and azimuth `phi`
/// from the x axis.
pub fn direction(theta: f64, phi: f64) -> Vec3 {
    Vec3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Electron-impact ionization of hydrogen 1s: the projectile comes in along
/// x with energy E_i, electrons leave with E_a + E_b = E_i - 1/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IonizationKinematics {
    pub e_i: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub k_i: Vec3,
    pub k_a: Vec3,
    pub k_b: Vec3,
}

impl IonizationKinematics {
    /// Ejected directions are unit vectors.
    pub fn new(e_i: f64, e_a: f64, dir_a: Vec3, dir_b: Vec3) -> Result<Self, AmplitudeError> {
        let e_b = e_i - BINDING - e_a;
        if !(e_i > BINDING) {
            return Err(AmplitudeError::Kinematics(format!(
                "incident energy {e_i} hartree is below the ionization threshold"
            )));
        }
        if !(e_a >= 0.0 && e_b >= 0.0) {
            return Err(AmplitudeError::Kinematics(format!(
                "ejected energy {e_a} outside [0, {}]",
                e_i - BINDING
            )));
        }
        Ok(Self {
            e_i,
            e_a,
            e_b,
            k_i: Vec3::new((2.0 * e_i).sqrt(), 0.0, 0.0),
            k_a: dir_a.normalize() * (2.0 * e_a).sqrt(),
            k_b: dir_b.normalize() * (2.0 * e_b).sqrt(),
        })
    }

    /// Both electrons in the xy plane (theta = pi/2) at azimuths phi_a, phi_b
    /// measured from the incident direction.
    pub fn coplanar(e_i: f64, e_a: f64, phi_a: f64, phi_b: f64) -> Result<Self, AmplitudeError> {
        let half = std::f64::consts::FRAC_PI_2;
        Self::new(e_i, e_a, direction(half, phi_a), direction(half, phi_b))
    }

    /// Electron labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            e_a: self.e_b,
            e_b: self.e_a,
            k_a: self.k_b,
            k_b: self.k_a,
            ..*self
        }
    }

    /// Excess energy E = E_a + E_b.
    pub fn excess(&self) -> f64 {
        self.e_a + self.e_b
    }

    /// |k_i . (k_a x k_b)|, zero in coplanar geometry.
    pub fn coplanarity(&self) -> f64 {
        self.k_i.dot(&self.k_a.cross(&self.k_b)).abs()
    }
}
