//! Two-body Coulomb continuum states in the relative coordinate, their
//! parabolic coordinates and asymptotic phases, plus a finite-difference
//! Schrödinger residual that works for any number of particles.

use num_complex::Complex64;
use thiserror::Error;

use crate::specfun::{coulomb_norm_factor, kummer_1f1, SpecialFunctionError};
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoBodyError {
    #[error("momentum must be nonzero")]
    ZeroMomentum,
    #[error("logarithm argument vanishes: r lies on the singular ray of the phase")]
    Domain,
    #[error("stencil point within {h} of a Coulomb singularity (distance {distance})")]
    SingularStencil { h: f64, distance: f64 },
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

/// Boundary condition label. `Outgoing` states carry the distortion
/// 1F1(i alpha, 1, -i(kr + k.r)) and the phase -alpha ln k(r + k^.r);
/// `Incoming` states are the time-reversed partner with phase
/// +alpha ln k(r - k^.r).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveSign {
    Incoming,
    Outgoing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoBodyChannel {
    pub z1: f64,
    pub z2: f64,
    /// Reduced mass.
    pub mu: f64,
    pub k: Vec3,
}

impl TwoBodyChannel {
    pub fn new(z1: f64, z2: f64, mu: f64, k: Vec3) -> Self {
        Self { z1, z2, mu, k }
    }

    pub fn energy(&self) -> f64 {
        self.k.norm_squared() / (2.0 * self.mu)
    }

    fn coupling(&self) -> f64 {
        self.z1 * self.z2
    }
}

/// Parabolic coordinates of r with respect to the direction k^.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicPair {
    /// r - k^.r
    pub xi_plus: f64,
    /// r + k^.r
    pub xi_minus: f64,
}

impl ParabolicPair {
    pub fn new(r: &Vec3, k_hat: &Vec3) -> Self {
        let rn = r.norm();
        let p = k_hat.dot(r);
        Self {
            xi_plus: (rn - p).max(0.0),
            xi_minus: (rn + p).max(0.0),
        }
    }
}

pub fn sommerfeld(channel: &TwoBodyChannel) -> Result<f64, TwoBodyError> {
    let k = channel.k.norm();
    if k == 0.0 {
        return Err(TwoBodyError::ZeroMomentum);
    }
    Ok(channel.coupling() * channel.mu / k)
}

pub fn asymptotic_phase(
    channel: &TwoBodyChannel,
    r: &Vec3,
    sign: WaveSign,
) -> Result<f64, TwoBodyError> {
    let alpha = sommerfeld(channel)?;
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let k = channel.k.norm();
    let xi = ParabolicPair::new(r, &(channel.k / k));
    match sign {
        WaveSign::Outgoing => {
            if xi.xi_minus <= 0.0 {
                return Err(TwoBodyError::Domain);
            }
            Ok(-alpha * (k * xi.xi_minus).ln())
        }
        WaveSign::Incoming => {
            if xi.xi_plus <= 0.0 {
                return Err(TwoBodyError::Domain);
            }
            Ok(alpha * (k * xi.xi_plus).ln())
        }
    }
}

/// The Coulomb distortion factor N 1F1(i alpha, 1, -i(kr + k.r)) without the
/// plane wave; shared with the three- and N-body product states.
pub fn coulomb_distortion(alpha: f64, k: &Vec3, r: &Vec3) -> Result<Complex64, SpecialFunctionError> {
    if alpha == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let arg = Complex64::new(0.0, -(k.norm() * r.norm() + k.dot(r)));
    let f = kummer_1f1(Complex64::new(0.0, alpha), 1, arg)?;
    Ok(coulomb_norm_factor(alpha)? * f)
}

pub fn coulomb_wave(
    channel: &TwoBodyChannel,
    r: &Vec3,
    sign: WaveSign,
) -> Result<Complex64, TwoBodyError> {
    let alpha = sommerfeld(channel)?;
    let plane = Complex64::new(0.0, channel.k.dot(r)).exp();
    let distortion = match sign {
        WaveSign::Outgoing => coulomb_distortion(alpha, &channel.k, r)?,
        // time reversal of the outgoing state at -k
        WaveSign::Incoming => coulomb_distortion(alpha, &(-channel.k), r)?.conj(),
    };
    Ok(plane * distortion)
}

/// One Coulomb term strength/|x_a - x_b| of a many-particle potential, or
/// strength/|x_a| when `b` is `None` (interaction with a fixed centre).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoulombTerm {
    pub strength: f64,
    pub a: usize,
    pub b: Option<usize>,
}

/// Kinetic masses per particle (each particle owns three consecutive
/// coordinates) and the Coulomb terms of the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub masses: Vec<f64>,
    pub terms: Vec<CoulombTerm>,
}

impl Hamiltonian {
    pub fn two_body(channel: &TwoBodyChannel) -> Self {
        Self {
            masses: vec![channel.mu],
            terms: vec![CoulombTerm {
                strength: channel.coupling(),
                a: 0,
                b: None,
            }],
        }
    }

    pub fn dimension(&self) -> usize {
        3 * self.masses.len()
    }

    fn distance(term: &CoulombTerm, x: &[f64]) -> f64 {
        let pa = &x[3 * term.a..3 * term.a + 3];
        let d: f64 = match term.b {
            Some(b) => {
                let pb = &x[3 * b..3 * b + 3];
                (0..3).map(|i| (pa[i] - pb[i]).powi(2)).sum()
            }
            None => pa.iter().map(|v| v * v).sum(),
        };
        d.sqrt()
    }

    pub fn potential(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.strength != 0.0)
            .map(|t| t.strength / Self::distance(t, x))
            .sum()
    }

    /// Smallest distance to any active Coulomb singularity.
    pub fn closest_singularity(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.strength != 0.0)
            .map(|t| Self::distance(t, x))
            .fold(f64::INFINITY, f64::min)
    }
}

/// |[-sum_p (1/2 m_p) Lap_p + V - E] Psi| / (|E| |Psi|) at x, with the
/// Laplacian replaced by central second differences of step h
/// (6N + 1 field evaluations for N particles).
pub fn schrodinger_residual<F>(
    field: F,
    hamiltonian: &Hamiltonian,
    energy: f64,
    x: &[f64],
    h: f64,
) -> Result<f64, TwoBodyError>
where
    F: Fn(&[f64]) -> Result<Complex64, SpecialFunctionError>,
{
    let (r, psi) = schrodinger_defect(field, hamiltonian, energy, x, h)?;
    Ok(r.norm() / (energy.abs() * psi.norm()))
}

/// The unnormalized defect [H - E] Psi at x and Psi(x) itself.
pub fn schrodinger_defect<F>(
    field: F,
    hamiltonian: &Hamiltonian,
    energy: f64,
    x: &[f64],
    h: f64,
) -> Result<(Complex64, Complex64), TwoBodyError>
where
    F: Fn(&[f64]) -> Result<Complex64, SpecialFunctionError>,
{
    assert_eq!(x.len(), hamiltonian.dimension(), "coordinate count");
    let distance = hamiltonian.closest_singularity(x);
    if distance <= 2.0 * h {
        return Err(TwoBodyError::SingularStencil { h, distance });
    }
    let psi = field(x)?;
    let mut kinetic = Complex64::new(0.0, 0.0);
    let mut p = x.to_vec();
    for (i, &xi) in x.iter().enumerate() {
        let m = hamiltonian.masses[i / 3];
        p[i] = xi + h;
        let up = field(&p)?;
        p[i] = xi - h;
        let down = field(&p)?;
        p[i] = xi;
        kinetic += (up - 2.0 * psi + down) / (h * h) * (-0.5 / m);
    }
    let defect = kinetic + (hamiltonian.potential(x) - energy) * psi;
    Ok((defect, psi))
}

/// Residual with the O(h^2) stencil error removed by Richardson
/// extrapolation between steps h and 2h. Useful far out, where the true
/// residual is small and the plain stencil error at small h is dominated by
/// roundoff in Psi.
pub fn schrodinger_residual_extrapolated<F>(
    field: F,
    hamiltonian: &Hamiltonian,
    energy: f64,
    x: &[f64],
    h: f64,
) -> Result<f64, TwoBodyError>
where
    F: Fn(&[f64]) -> Result<Complex64, SpecialFunctionError>,
{
    let (fine, psi) = schrodinger_defect(&field, hamiltonian, energy, x, h)?;
    let (coarse, _) = schrodinger_defect(&field, hamiltonian, energy, x, 2.0 * h)?;
    let defect = (4.0 * fine - coarse) / 3.0;
    Ok(defect.norm() / (energy.abs() * psi.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn channel(z1z2: f64, mu: f64, k: Vec3) -> TwoBodyChannel {
        TwoBodyChannel::new(z1z2, 1.0, mu, k)
    }

    #[test]
    fn sommerfeld_examples() {
        assert_eq!(sommerfeld(&channel(-1.0, 1.0, Vec3::new(1.0, 0.0, 0.0))).unwrap(), -1.0);
        assert_eq!(sommerfeld(&channel(0.0, 3.0, Vec3::new(0.0, 2.0, 0.0))).unwrap(), 0.0);
        assert_eq!(sommerfeld(&channel(1.0, 0.5, Vec3::new(0.0, 0.0, 2.0))).unwrap(), 0.25);
        assert_eq!(
            sommerfeld(&channel(1.0, 1.0, Vec3::zeros())),
            Err(TwoBodyError::ZeroMomentum)
        );
    }

    #[test]
    fn phase_examples() {
        let free = channel(0.0, 1.0, Vec3::new(1.0, 0.0, 0.0));
        let r = Vec3::new(-3.0, 0.0, 0.0);
        assert_eq!(asymptotic_phase(&free, &r, WaveSign::Outgoing).unwrap(), 0.0);

        let ch = channel(1.0, 1.0, Vec3::new(1.0, 0.0, 0.0));
        let perp = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(asymptotic_phase(&ch, &perp, WaveSign::Outgoing).unwrap(), 0.0);

        // alpha = -1, k = 2, r antiparallel to k with |r| = 3
        let ch = channel(-2.0, 1.0, Vec3::new(2.0, 0.0, 0.0));
        let r = Vec3::new(-3.0, 0.0, 0.0);
        assert_relative_eq!(
            asymptotic_phase(&ch, &r, WaveSign::Incoming).unwrap(),
            -(12f64).ln(),
            max_relative = 1e-15
        );
        assert_eq!(
            asymptotic_phase(&ch, &r, WaveSign::Outgoing),
            Err(TwoBodyError::Domain)
        );
    }

    #[test]
    fn free_wave_is_plane_wave() {
        let ch = channel(0.0, 1.0, Vec3::new(0.3, -1.2, 0.4));
        let r = Vec3::new(2.0, 1.0, -0.5);
        for sign in [WaveSign::Incoming, WaveSign::Outgoing] {
            let psi = coulomb_wave(&ch, &r, sign).unwrap();
            assert_eq!(psi, Complex64::new(0.0, ch.k.dot(&r)).exp());
        }
    }

    #[test]
    fn density_at_origin_is_gamow_factor() {
        let ch = channel(-1.0, 1.0, Vec3::new(0.0, 0.0, 1.0));
        let psi = coulomb_wave(&ch, &Vec3::zeros(), WaveSign::Outgoing).unwrap();
        let ap = 1.0;
        let gamow = 2.0 * PI * ap / (1.0 - (-2.0 * PI * ap).exp());
        assert_relative_eq!(psi.norm_sqr(), gamow, max_relative = 1e-12);
    }

    #[test]
    fn parabolic_sum_is_twice_radius() {
        let r = Vec3::new(0.3, -2.0, 1.1);
        let k_hat = Vec3::new(1.0, 2.0, -0.5).normalize();
        let p = ParabolicPair::new(&r, &k_hat);
        assert_relative_eq!(p.xi_plus + p.xi_minus, 2.0 * r.norm(), max_relative = 1e-15);
    }

    #[test]
    fn plane_wave_residuals() {
        let ch = channel(0.0, 1.0, Vec3::new(1.0, 0.0, 0.0));
        let ham = Hamiltonian::two_body(&ch);
        let x = [1.0, 0.3, -0.2];
        let wave = |p: &[f64]| Ok(Complex64::new(0.0, p[0]).exp());
        let r = schrodinger_residual(wave, &ham, 0.5, &x, 1e-3).unwrap();
        assert!(r < 1e-6, "{r}");

        // the same plane wave against a Coulomb potential misses by |V/E|
        let coulomb = Hamiltonian::two_body(&channel(-1.0, 1.0, ch.k));
        let x = [1.0, 0.0, 0.0];
        let r = schrodinger_residual(wave, &coulomb, 0.5, &x, 1e-3).unwrap();
        assert_relative_eq!(r, 2.0, max_relative = 1e-5);
    }

    #[test]
    fn stencil_refuses_singularity() {
        let ch = channel(-1.0, 1.0, Vec3::new(1.0, 0.0, 0.0));
        let ham = Hamiltonian::two_body(&ch);
        let wave = |_: &[f64]| Ok(Complex64::new(1.0, 0.0));
        assert!(matches!(
            schrodinger_residual(wave, &ham, 0.5, &[1e-3, 0.0, 0.0], 1e-3),
            Err(TwoBodyError::SingularStencil { .. })
        ));
    }
}
