//! Three-body Coulomb systems: Jacobi and curvilinear coordinates, the split
//! Hamiltonian H_par + H_int + H_mix, velocity-dependent effective charges
//! and the product (3C / DS3C) continuum states.

mod charges;
mod dilation;
mod jacobi;
mod operators;
mod wave;

use num_complex::Complex64;
use thiserror::Error;

use crate::specfun::SpecialFunctionError;
use crate::twobody::{CoulombTerm, Hamiltonian};
use crate::Vec3;

pub use charges::{
    ds3c_charges, potential_sum_check, ChargeAuxiliaries, ChargeModel, EffectiveCharges, WANNIER_INDEX,
};
pub use dilation::{electron_pair_rays, is_generic_ray};
pub use jacobi::{d1, d2, from_particles, jacobi_transform, pair_of, to_particles, JacobiSet};
pub use operators::{
    apply_h_int, apply_h_mix, apply_h_par, cartesian_operator, metric_tensor, XiField,
};
pub use wave::{electron_pair_distortion, three_body_wave};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThreeBodyError {
    #[error("finite-difference stencil reaches a singular coordinate ({coordinate} = {value})")]
    SingularStencil { coordinate: usize, value: f64 },
    #[error("curvilinear coordinates degenerate here (metric condition number {condition:.3e})")]
    DegenerateJacobian { condition: f64 },
    #[error("electron velocities coincide; limit charges {limit:?}")]
    CoalescentVelocity { limit: EffectiveCharges },
    #[error("invalid input: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleTriple {
    pub m: [f64; 3],
    pub z: [f64; 3],
}

impl ParticleTriple {
    pub fn new(m: [f64; 3], z: [f64; 3]) -> Self {
        assert!(m.iter().all(|&x| x > 0.0), "masses must be positive");
        Self { m, z }
    }

    /// Reduced mass of the pair of Jacobi set `index`.
    pub fn mu_pair(&self, index: usize) -> f64 {
        let (i, j) = pair_of(index);
        self.m[i] * self.m[j] / (self.m[i] + self.m[j])
    }

    /// Reduced mass of the spectator of Jacobi set `index`.
    pub fn mu_spectator(&self, index: usize) -> f64 {
        let (i, j) = pair_of(index);
        let s = index - 1;
        self.m[s] * (self.m[i] + self.m[j]) / self.m.iter().sum::<f64>()
    }

    /// Product charge z_i z_j of the pair of set `index`.
    pub fn z_pair(&self, index: usize) -> f64 {
        let (i, j) = pair_of(index);
        self.z[i] * self.z[j]
    }
}

/// The two-body data entering H_xi_j for pair j (j = 1, 2, 3 for pairs
/// 23, 13, 12): reduced mass, momentum magnitude and the product charge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairChannel {
    pub mu: f64,
    pub k: f64,
    pub z: f64,
}

impl PairChannel {
    pub fn sommerfeld(&self) -> f64 {
        if self.z == 0.0 {
            0.0
        } else {
            self.z * self.mu / self.k
        }
    }
}

/// xi_1..3 = r_ij + k^_ij.r_ij for pairs 23, 13, 12; xi_4..6 = r_ij.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvilinearCoords {
    pub xi: [f64; 6],
}

/// A three-particle configuration: masses, charges, positions and momenta,
/// stored as Jacobi set 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBodyConfig {
    pub triple: ParticleTriple,
    pub set1: JacobiSet,
}

impl ThreeBodyConfig {
    pub fn new(triple: ParticleTriple, set: JacobiSet) -> Self {
        Self {
            triple,
            set1: jacobi_transform(&triple, &set, 1),
        }
    }

    pub fn set(&self, index: usize) -> JacobiSet {
        jacobi_transform(&self.triple, &self.set1, index)
    }

    /// Pair vectors r_ij and momenta k_ij for pairs 23, 13, 12.
    pub fn pairs(&self) -> [(Vec3, Vec3); 3] {
        [1, 2, 3].map(|i| {
            let s = self.set(i);
            (s.r, s.k)
        })
    }

    pub fn pair_channels(&self) -> [PairChannel; 3] {
        [1, 2, 3].map(|i| PairChannel {
            mu: self.triple.mu_pair(i),
            k: self.set(i).k.norm(),
            z: self.triple.z_pair(i),
        })
    }

    pub fn curvilinear(&self) -> CurvilinearCoords {
        curvilinear_from_jacobi(&self.triple, &self.set1)
    }

    pub fn energy(&self) -> f64 {
        self.set1.energy(&self.triple)
    }

    /// Hamiltonian over the particle coordinates x_1..x_3 (9 coordinates).
    /// The centre-of-mass kinetic term it contains vanishes on states with
    /// zero total momentum.
    pub fn particle_hamiltonian(&self) -> Hamiltonian {
        Hamiltonian {
            masses: self.triple.m.to_vec(),
            terms: [(0, 1), (0, 2), (1, 2)]
                .iter()
                .map(|&(a, b)| CoulombTerm {
                    strength: self.triple.z[a] * self.triple.z[b],
                    a,
                    b: Some(b),
                })
                .collect(),
        }
    }
}

pub fn curvilinear_from_jacobi(triple: &ParticleTriple, set: &JacobiSet) -> CurvilinearCoords {
    let mut xi = [0.0; 6];
    for idx in 1..=3 {
        let s = jacobi_transform(triple, set, idx);
        let r = s.r.norm();
        let k_hat = s.k / s.k.norm();
        xi[idx - 1] = r + k_hat.dot(&s.r);
        xi[idx + 2] = r;
    }
    CurvilinearCoords { xi }
}

/// Two electrons (unit mass, charge -1) around an infinitely heavy ion of
/// charge `z_ion` at the origin; coordinates (r_a, r_b).
pub fn electron_pair_hamiltonian(z_ion: f64) -> Hamiltonian {
    Hamiltonian {
        masses: vec![1.0, 1.0],
        terms: vec![
            CoulombTerm {
                strength: -z_ion,
                a: 0,
                b: None,
            },
            CoulombTerm {
                strength: -z_ion,
                a: 1,
                b: None,
            },
            CoulombTerm {
                strength: 1.0,
                a: 0,
                b: Some(1),
            },
        ],
    }
}

pub(crate) fn finite(v: Complex64) -> bool {
    v.re.is_finite() && v.im.is_finite()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn triple() -> ParticleTriple {
        ParticleTriple::new([1.0, 1.7, 0.4], [1.0, -1.0, 2.0])
    }

    fn set1() -> JacobiSet {
        JacobiSet {
            index: 1,
            r: Vec3::new(0.3, -1.1, 0.8),
            big_r: Vec3::new(-0.6, 0.2, 1.5),
            k: Vec3::new(0.9, 0.1, -0.4),
            big_k: Vec3::new(-0.2, 0.7, 0.3),
        }
    }

    #[test]
    fn equal_mass_example() {
        let t = ParticleTriple::new([1.0; 3], [0.0; 3]);
        let s = JacobiSet {
            index: 1,
            r: Vec3::new(1.0, 0.0, 0.0),
            big_r: Vec3::new(0.0, 1.0, 0.0),
            k: Vec3::zeros(),
            big_k: Vec3::zeros(),
        };
        let s2 = jacobi_transform(&t, &s, 2);
        assert_relative_eq!(s2.r, Vec3::new(0.5, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn identity_and_round_trip() {
        let t = triple();
        let s = set1();
        assert_eq!(jacobi_transform(&t, &s, 1), s);
        for target in [2, 3] {
            let back = jacobi_transform(&t, &jacobi_transform(&t, &s, target), 1);
            assert_relative_eq!(back.r, s.r, epsilon = 1e-14);
            assert_relative_eq!(back.big_r, s.big_r, epsilon = 1e-14);
            assert_relative_eq!(back.k, s.k, epsilon = 1e-14);
            assert_relative_eq!(back.big_k, s.big_k, epsilon = 1e-14);
        }
    }

    #[test]
    fn mass_matrices_agree_with_particle_route() {
        let t = triple();
        let s = set1();
        let (x, p) = to_particles(&t, &s);
        let total_p: Vec3 = p.iter().sum();
        assert!(total_p.norm() < 1e-14);
        for target in 1..=3 {
            let via_matrix = jacobi_transform(&t, &s, target);
            let via_particles = from_particles(&t, target, &x, &p);
            assert_relative_eq!(via_matrix.r, via_particles.r, epsilon = 1e-14);
            assert_relative_eq!(via_matrix.big_r, via_particles.big_r, epsilon = 1e-14);
            assert_relative_eq!(via_matrix.k, via_particles.k, epsilon = 1e-14);
            assert_relative_eq!(via_matrix.big_k, via_particles.big_k, epsilon = 1e-14);
        }
    }

    #[test]
    fn curvilinear_examples() {
        let t = ParticleTriple::new([1.0; 3], [0.0; 3]);
        for (dir, expect) in [
            (Vec3::new(0.0, 2.0, 0.0), 2.0),
            (Vec3::new(2.0, 0.0, 0.0), 4.0),
            (Vec3::new(-2.0, 0.0, 0.0), 0.0),
        ] {
            let s = JacobiSet {
                index: 1,
                r: dir,
                big_r: Vec3::new(0.0, 0.0, 3.0),
                k: Vec3::new(1.5, 0.0, 0.0),
                big_k: Vec3::new(0.0, 0.3, 0.1),
            };
            let c = curvilinear_from_jacobi(&t, &s);
            assert_relative_eq!(c.xi[0], expect, epsilon = 1e-15);
            assert_relative_eq!(c.xi[3], 2.0, epsilon = 1e-15);
        }
    }
}
