//! N light particles of common mass escaping from a heavy residual charge:
//! the product continuum state, the F-functions that control its remainder
//! term, flux normalization and the Kato cusp conditions.
//!
//! Positions r_j are measured from the heavy charge, r_ij = r_i - r_j and
//! k_ij = (k_i - k_j)/2. With outgoing boundary conditions
//!
//! Psi = Nrm prod_j e^{i k_j.r_j} phi_j(r_j) prod_{l<m} phi_lm(r_lm),
//! phi = 1F1(i alpha, 1, -i(k r + k.r)),
//!
//! and (H - E) Psi = -(R/m) Psi exactly, R being the remainder below.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::scan::{loglog_slope, DilationWindow};
use crate::specfun::{coulomb_norm_factor, kummer_1f1, SpecialFunctionError};
use crate::twobody::{CoulombTerm, Hamiltonian};
use crate::Vec3;

/// Distances below this count as a coalescence.
pub const COALESCENCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NBodyError {
    #[error("1F1 denominator of the {channel} F-function nearly vanishes ({magnitude:.3e})")]
    NearZeroDenominator { channel: Channel, magnitude: f64 },
    #[error("wave function too small at the coalescence point ({magnitude:.3e})")]
    DegenerateWave { magnitude: f64 },
    #[error("invalid input: {0}")]
    Domain(&'static str),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

/// A two-body subsystem: light particle j with the heavy charge, or the
/// light pair (i, j) with i < j. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Ion(usize),
    Pair(usize, usize),
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Channel::Ion(j) => write!(f, "ion-{}", j + 1),
            Channel::Pair(i, j) => write!(f, "pair-{}{}", i + 1, j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NBodySystem {
    /// Residual heavy charge.
    pub z: f64,
    pub charges: Vec<f64>,
    /// Common mass of the light particles.
    pub mass: f64,
    pub momenta: Vec<Vec3>,
}

impl NBodySystem {
    pub fn new(z: f64, charges: Vec<f64>, mass: f64, momenta: Vec<Vec3>) -> Result<Self, NBodyError> {
        if charges.len() != momenta.len() || charges.len() < 2 {
            return Err(NBodyError::Domain("need N >= 2 particles with one momentum each"));
        }
        if !(mass > 0.0) {
            return Err(NBodyError::Domain("mass must be positive"));
        }
        Ok(Self {
            z,
            charges,
            mass,
            momenta,
        })
    }

    pub fn n(&self) -> usize {
        self.charges.len()
    }

    pub fn energy(&self) -> f64 {
        self.momenta.iter().map(|k| k.norm_squared()).sum::<f64>() / (2.0 * self.mass)
    }

    pub fn channels(&self) -> Vec<Channel> {
        let n = self.n();
        let mut out: Vec<Channel> = (0..n).map(Channel::Ion).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(Channel::Pair(i, j));
            }
        }
        out
    }

    /// Conjugate momentum of the channel coordinate.
    pub fn channel_momentum(&self, c: Channel) -> Vec3 {
        match c {
            Channel::Ion(j) => self.momenta[j],
            Channel::Pair(i, j) => (self.momenta[i] - self.momenta[j]) / 2.0,
        }
    }

    pub fn channel_coordinate(&self, c: Channel, positions: &[Vec3]) -> Vec3 {
        match c {
            Channel::Ion(j) => positions[j],
            Channel::Pair(i, j) => positions[i] - positions[j],
        }
    }

    fn channel_charge(&self, c: Channel) -> f64 {
        match c {
            Channel::Ion(j) => self.z * self.charges[j],
            Channel::Pair(i, j) => self.charges[i] * self.charges[j],
        }
    }

    /// alpha_j = z z_j / v_j and alpha_ij = z_i z_j / v_ij, v = k/m.
    pub fn sommerfeld(&self, c: Channel) -> Result<f64, NBodyError> {
        let q = self.channel_charge(c);
        if q == 0.0 {
            return Ok(0.0);
        }
        let v = match c {
            Channel::Ion(j) => self.momenta[j].norm() / self.mass,
            Channel::Pair(i, j) => (self.momenta[i] - self.momenta[j]).norm() / self.mass,
        };
        if v == 0.0 {
            return Err(NBodyError::Domain("zero relative velocity in a charged channel"));
        }
        Ok(q / v)
    }

    /// H = -sum Lap_l / 2m + sum z z_j / r_j + sum z_i z_j / r_ij over the
    /// 3N coordinates (r_1, ..., r_N).
    pub fn hamiltonian(&self) -> Hamiltonian {
        let terms = self
            .channels()
            .into_iter()
            .map(|c| match c {
                Channel::Ion(j) => CoulombTerm {
                    strength: self.channel_charge(c),
                    a: j,
                    b: None,
                },
                Channel::Pair(i, j) => CoulombTerm {
                    strength: self.channel_charge(c),
                    a: i,
                    b: Some(j),
                },
            })
            .collect();
        Hamiltonian {
            masses: vec![self.mass; self.n()],
            terms,
        }
    }
}

fn check_positions(sys: &NBodySystem, positions: &[Vec3]) -> Result<(), NBodyError> {
    if positions.len() != sys.n() {
        return Err(NBodyError::Domain("one position per particle required"));
    }
    Ok(())
}

fn distortion_argument(k: &Vec3, r: &Vec3) -> Complex64 {
    Complex64::new(0.0, -(k.norm() * r.norm() + k.dot(r)))
}

/// Nrm = (2 pi)^{-3N/2} prod over all channels of e^{-pi alpha/2} Gamma(1 - i alpha).
pub fn nbody_normalization(sys: &NBodySystem) -> Result<Complex64, NBodyError> {
    let mut n = Complex64::new((2.0 * PI).powf(-1.5 * sys.n() as f64), 0.0);
    for c in sys.channels() {
        n *= coulomb_norm_factor(sys.sommerfeld(c)?)?;
    }
    Ok(n)
}

/// The unnormalized distortion prod_channels 1F1(i alpha, 1, -i(kr + k.r)).
pub fn nbody_distortion(sys: &NBodySystem, positions: &[Vec3]) -> Result<Complex64, NBodyError> {
    check_positions(sys, positions)?;
    let mut prod = Complex64::new(1.0, 0.0);
    for c in sys.channels() {
        let alpha = sys.sommerfeld(c)?;
        if alpha == 0.0 {
            continue;
        }
        let k = sys.channel_momentum(c);
        let r = sys.channel_coordinate(c, positions);
        prod *= kummer_1f1(Complex64::new(0.0, alpha), 1, distortion_argument(&k, &r))?;
    }
    Ok(prod)
}

/// The normalized product state at the given particle positions.
pub fn nbody_wave(sys: &NBodySystem, positions: &[Vec3]) -> Result<Complex64, NBodyError> {
    let phase: f64 = sys.momenta.iter().zip(positions).map(|(k, r)| k.dot(r)).sum();
    let plane = Complex64::new(0.0, phase).exp();
    Ok(nbody_normalization(sys)? * plane * nbody_distortion(sys, positions)?)
}

/// A complex 3-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FFunctionValue {
    pub vector: [Complex64; 3],
}

impl FFunctionValue {
    pub fn zero() -> Self {
        Self {
            vector: [Complex64::new(0.0, 0.0); 3],
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            vector: self.vector.map(|v| v * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            vector: [0, 1, 2].map(|i| self.vector[i] + other.vector[i]),
        }
    }

    /// Bilinear (unconjugated) dot product.
    pub fn dot(&self, other: &Self) -> Complex64 {
        (0..3).map(|i| self.vector[i] * other.vector[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.vector.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// F = [1F1(1 + i alpha, 2, w) / 1F1(i alpha, 1, w)] (k^ + r^),
/// w = -i(kr + k.r), for the channel's own alpha, k and coordinate. Then
/// grad ln phi = alpha k F with respect to the channel coordinate.
pub fn f_function(sys: &NBodySystem, c: Channel, positions: &[Vec3]) -> Result<FFunctionValue, NBodyError> {
    check_positions(sys, positions)?;
    let alpha = sys.sommerfeld(c)?;
    let k = sys.channel_momentum(c);
    let r = sys.channel_coordinate(c, positions);
    if r.norm() < COALESCENCE {
        return Err(NBodyError::Domain("F-function direction undefined at coalescence"));
    }
    if k.norm() == 0.0 {
        return Err(NBodyError::Domain("F-function direction undefined for zero momentum"));
    }
    let geometry = k.normalize() + r.normalize();
    let w = distortion_argument(&k, &r);
    let a = Complex64::new(0.0, alpha);
    let den = kummer_1f1(a, 1, w)?;
    if den.norm() < 1e-12 {
        return Err(NBodyError::NearZeroDenominator {
            channel: c,
            magnitude: den.norm(),
        });
    }
    let ratio = kummer_1f1(a + 1.0, 2, w)? / den;
    Ok(FFunctionValue {
        vector: [0, 1, 2].map(|i| ratio * geometry[i]),
    })
}

/// grad ln phi for the channel as alpha k F; exactly zero for an uncharged
/// channel.
fn log_gradient(sys: &NBodySystem, c: Channel, positions: &[Vec3]) -> Result<FFunctionValue, NBodyError> {
    let alpha = sys.sommerfeld(c)?;
    if alpha == 0.0 {
        return Ok(FFunctionValue::zero());
    }
    let k = sys.channel_momentum(c).norm();
    Ok(f_function(sys, c, positions)?.scale(Complex64::new(alpha * k, 0.0)))
}

/// The remainder term
///
/// R = sum_m { g_m . [sum_{n>m} g_mn - sum_{s<m} g_sm]
///     - sum_{l<m<p} g_lm . g_mp
///     + 1/2 sum_{l,s<m; s!=l} g_lm . g_sm + 1/2 sum_{n,q>m; q!=n} g_mn . g_mq },
///
/// g = alpha k F. The half-weighted sums run over ordered index pairs, which
/// makes them the unordered sums of the cross terms of Lap_m.
pub fn remainder_r(sys: &NBodySystem, positions: &[Vec3]) -> Result<Complex64, NBodyError> {
    check_positions(sys, positions)?;
    let n = sys.n();
    let ion: Vec<FFunctionValue> = (0..n)
        .map(|j| log_gradient(sys, Channel::Ion(j), positions))
        .collect::<Result<_, _>>()?;
    let mut pair = vec![vec![FFunctionValue::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            pair[i][j] = log_gradient(sys, Channel::Pair(i, j), positions)?;
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for m in 0..n {
        let mut grad_ii = FFunctionValue::zero();
        for p in (m + 1)..n {
            grad_ii = grad_ii.add(&pair[m][p]);
        }
        for l in 0..m {
            grad_ii = grad_ii.add(&pair[l][m].scale(Complex64::new(-1.0, 0.0)));
        }
        total += ion[m].dot(&grad_ii);
        for l in 0..m {
            for p in (m + 1)..n {
                total -= pair[l][m].dot(&pair[m][p]);
            }
        }
        for l in 0..m {
            for s in (0..m).filter(|&s| s != l) {
                total += 0.5 * pair[l][m].dot(&pair[s][m]);
            }
        }
        for p in (m + 1)..n {
            for q in ((m + 1)..n).filter(|&q| q != p) {
                total += 0.5 * pair[m][p].dot(&pair[m][q]);
            }
        }
    }
    Ok(total)
}

/// Lebedev's 26-point rule on the unit sphere: exact for spherical
/// polynomials through degree 7. Returns (direction, weight), weights sum
/// to one.
pub fn sphere_rule_26() -> Vec<(Vec3, f64)> {
    let mut out = Vec::with_capacity(26);
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = Vec3::zeros();
            v[axis] = sign;
            out.push((v, 1.0 / 21.0));
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        for sa in [1.0, -1.0] {
            for sb in [1.0, -1.0] {
                let mut v = Vec3::zeros();
                v[a] = sa * h;
                v[b] = sb * h;
                out.push((v, 4.0 / 105.0));
            }
        }
    }
    let c = 1.0 / 3f64.sqrt();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                out.push((Vec3::new(sx * c, sy * c, sz * c), 27.0 / 840.0));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CuspReport {
    /// Radial derivative of the sphere-averaged wave at the coalescence.
    pub lhs: Complex64,
    /// alpha k Psi(coalescence).
    pub rhs: Complex64,
    pub deviation: f64,
}

/// Particle positions with the channel coordinate replaced by `rel`: for an
/// ion channel r_j = rel; for a pair the pair's centre stays put and
/// r_i - r_j = rel.
fn with_channel_coordinate(c: Channel, positions: &[Vec3], rel: Vec3) -> Vec<Vec3> {
    let mut p = positions.to_vec();
    match c {
        Channel::Ion(j) => p[j] = rel,
        Channel::Pair(i, j) => {
            let centre = (positions[i] + positions[j]) / 2.0;
            p[i] = centre + rel / 2.0;
            p[j] = centre - rel / 2.0;
        }
    }
    p
}

/// Kato cusp test for one channel. The channel coordinate is set to zero
/// (the other coordinates, or the pair centre, taken from `positions`), the
/// wave is averaged over a sphere of radius r_delta with the 26-point rule,
/// and the one-sided radial derivative (avg - Psi0)/r_delta is compared
/// with alpha k Psi0. Exact cusp behaviour gives the derivative
/// mu z_1 z_2 Psi0 with alpha k = mu z_1 z_2 for both channel kinds.
pub fn cusp_check(
    sys: &NBodySystem,
    c: Channel,
    positions: &[Vec3],
    r_delta: f64,
) -> Result<CuspReport, NBodyError> {
    check_positions(sys, positions)?;
    if !(r_delta > 0.0) {
        return Err(NBodyError::Domain("sphere radius must be positive"));
    }
    let origin = with_channel_coordinate(c, positions, Vec3::zeros());
    let psi0 = nbody_wave(sys, &origin)?;
    if psi0.norm() < 1e-300 || psi0.norm() < 1e-12 * nbody_normalization(sys)?.norm() {
        return Err(NBodyError::DegenerateWave {
            magnitude: psi0.norm(),
        });
    }
    let mut avg = Complex64::new(0.0, 0.0);
    for (dir, w) in sphere_rule_26() {
        avg += w * nbody_wave(sys, &with_channel_coordinate(c, positions, dir * r_delta))?;
    }
    let lhs = (avg - psi0) / r_delta;
    let rhs = sys.sommerfeld(c)? * sys.channel_momentum(c).norm() * psi0;
    let deviation = if rhs.norm() == 0.0 {
        lhs.norm() / psi0.norm()
    } else {
        (lhs - rhs).norm() / rhs.norm()
    };
    Ok(CuspReport { lhs, rhs, deviation })
}

/// The sphere-averaged linearized factor D of a single ion channel: the
/// 26-point average of phi_j(r) e^{i k.r} over |r| = radius, to be compared
/// with 1 + alpha k radius.
pub fn sphere_average_factor(sys: &NBodySystem, j: usize, radius: f64) -> Result<Complex64, NBodyError> {
    let alpha = sys.sommerfeld(Channel::Ion(j))?;
    let k = sys.momenta[j];
    let mut avg = Complex64::new(0.0, 0.0);
    for (dir, w) in sphere_rule_26() {
        let r = dir * radius;
        let phi = kummer_1f1(Complex64::new(0.0, alpha), 1, distortion_argument(&k, &r))?;
        avg += w * phi * Complex64::new(0.0, k.dot(&r)).exp();
    }
    Ok(avg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxReport {
    /// Im(Psi* grad Psi) with grad the total gradient sum_l grad_l.
    pub j_psi: Vec3,
    /// (2 pi)^{-3N} sum_l k_l.
    pub j_plane: Vec3,
    pub deviation: f64,
}

/// Probability flux of the product state along the total gradient (all
/// particles translated together), by central differences of step h,
/// compared with the normalized plane-wave flux.
pub fn flux_check(sys: &NBodySystem, positions: &[Vec3], h: f64) -> Result<FluxReport, NBodyError> {
    check_positions(sys, positions)?;
    let psi = nbody_wave(sys, positions)?;
    let mut j_psi = Vec3::zeros();
    for axis in 0..3 {
        let mut e = Vec3::zeros();
        e[axis] = h;
        let up: Vec<Vec3> = positions.iter().map(|r| r + e).collect();
        let down: Vec<Vec3> = positions.iter().map(|r| r - e).collect();
        let grad = (nbody_wave(sys, &up)? - nbody_wave(sys, &down)?) / (2.0 * h);
        j_psi[axis] = (psi.conj() * grad).im;
    }
    let total_k: Vec3 = sys.momenta.iter().sum();
    let j_plane = total_k * (2.0 * PI).powf(-3.0 * sys.n() as f64);
    let deviation = (j_psi - j_plane).norm() / j_plane.norm();
    Ok(FluxReport {
        j_psi,
        j_plane,
        deviation,
    })
}

/// How a configuration is stretched in a falloff scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dilation {
    /// Every position scaled by s: all separations grow.
    All,
    /// The centre of the pair scales with s but its separation stays fixed.
    PinnedPair(usize, usize),
}

pub fn dilate(positions: &[Vec3], s: f64, mode: Dilation) -> Vec<Vec3> {
    match mode {
        Dilation::All => positions.iter().map(|r| r * s).collect(),
        Dilation::PinnedPair(i, j) => {
            let mut p: Vec<Vec3> = positions.iter().map(|r| r * s).collect();
            let rel = positions[i] - positions[j];
            let centre = (p[i] + p[j]) / 2.0;
            p[i] = centre + rel / 2.0;
            p[j] = centre - rel / 2.0;
            p
        }
    }
}

/// A system and a unit-scale configuration that a falloff scan dilates.
pub type FalloffRay = (NBodySystem, Vec<Vec3>);

/// RMS over rays and over dilations t in [s, s + width] of
/// |R(t)| (t/s)^p, p = window.weight_power.
pub fn remainder_ensemble(
    rays: &[FalloffRay],
    s: f64,
    mode: Dilation,
    window: &DilationWindow,
) -> Result<f64, NBodyError> {
    let per_ray: Vec<Result<f64, NBodyError>> = rays
        .par_iter()
        .map(|(sys, pos)| {
            let mut sum = 0.0;
            for i in 0..window.samples {
                let t = s + window.width * i as f64 / window.samples as f64;
                let r = remainder_r(sys, &dilate(pos, t, mode))?.norm();
                sum += (r * (t / s).powi(window.weight_power)).powi(2);
            }
            Ok(sum)
        })
        .collect();
    let mut total = 0.0;
    for r in per_ray {
        total += r?;
    }
    Ok((total / (rays.len() * window.samples) as f64).sqrt())
}

/// Remainder at each scale and the fitted log-log slope.
pub fn remainder_scan(
    rays: &[FalloffRay],
    scales: &[f64],
    mode: Dilation,
    window: &DilationWindow,
) -> Result<(Vec<f64>, f64), NBodyError> {
    let r = scales
        .iter()
        .map(|&s| remainder_ensemble(rays, s, mode, window))
        .collect::<Result<Vec<_>, _>>()?;
    let slope = loglog_slope(scales, &r);
    Ok((r, slope))
}

/// `count` random systems of n electrons (unit mass, charge -1) around a
/// charge z, each with a unit-scale configuration on which every channel
/// has r >= 0.5 and r + k^.r >= 0.5 (away from coalescences and from the
/// backward rays where a parabolic coordinate vanishes). With
/// `pinned = Some((i, j))` the pair (i, j) instead sits at separation 0.5
/// to 1 and only the other channels are screened.
pub fn electron_ensemble(
    seed: u64,
    n: usize,
    z: f64,
    count: usize,
    pinned: Option<(usize, usize)>,
) -> Vec<FalloffRay> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |rng: &mut ChaCha8Rng| {
        Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let momenta: Vec<Vec3> = (0..n).map(|_| unit(&mut rng)).collect();
        let mut positions: Vec<Vec3> = (0..n).map(|_| unit(&mut rng) * 1.5).collect();
        if let Some((i, j)) = pinned {
            let d = unit(&mut rng);
            if d.norm() < 0.5 {
                continue;
            }
            positions[j] = positions[i] - d;
        }
        let sys = match NBodySystem::new(z, vec![-1.0; n], 1.0, momenta) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let ok = sys.channels().into_iter().all(|c| {
            let k = sys.channel_momentum(c);
            if k.norm() < 0.2 {
                return false;
            }
            if matches!((c, pinned), (Channel::Pair(a, b), Some((i, j))) if (a, b) == (i.min(j), i.max(j)))
            {
                return true;
            }
            let r = sys.channel_coordinate(c, &positions);
            r.norm() >= 0.5 && r.norm() + k.normalize().dot(&r) >= 0.5
        });
        if ok {
            out.push((sys, positions));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn system(z: f64, charges: Vec<f64>) -> NBodySystem {
        let momenta = vec![
            Vec3::new(0.8, 0.2, -0.1),
            Vec3::new(-0.3, 0.7, 0.4),
            Vec3::new(0.1, -0.5, 0.9),
        ];
        let n = charges.len();
        NBodySystem::new(z, charges, 1.0, momenta[..n].to_vec()).unwrap()
    }

    #[test]
    fn neutral_system_is_normalized_plane_wave() {
        let sys = system(0.0, vec![0.0, 0.0, 0.0]);
        let n = nbody_normalization(&sys).unwrap();
        assert_relative_eq!(n.re, (2.0 * PI).powf(-4.5), max_relative = 1e-15);
        let pos = [Vec3::new(1.0, 2.0, 3.0), Vec3::new(-1.0, 0.5, 0.0), Vec3::new(0.3, 0.3, 0.3)];
        let psi = nbody_wave(&sys, &pos).unwrap();
        let phase: f64 = sys.momenta.iter().zip(&pos).map(|(k, r)| k.dot(r)).sum();
        assert_relative_eq!((psi - n * Complex64::new(0.0, phase).exp()).norm(), 0.0, epsilon = 1e-18);
        assert_eq!(remainder_r(&sys, &pos).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn f_function_closed_form_for_zero_alpha() {
        let sys = system(0.0, vec![-1.0, -1.0]);
        let pos = [Vec3::new(0.4, -1.2, 0.7), Vec3::new(1.0, 0.0, 0.0)];
        let f = f_function(&sys, Channel::Ion(0), &pos).unwrap();
        let k = sys.momenta[0];
        let r = pos[0];
        let w = distortion_argument(&k, &r);
        let ratio = (w.exp() - 1.0) / w;
        let g = k.normalize() + r.normalize();
        for i in 0..3 {
            assert_relative_eq!((f.vector[i] - ratio * g[i]).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn f_function_vanishes_on_the_backward_ray() {
        let sys = system(1.0, vec![-1.0, -1.0]);
        let pos = [-sys.momenta[0].normalize() * 2.5, Vec3::new(1.0, 0.0, 0.0)];
        let f = f_function(&sys, Channel::Ion(0), &pos).unwrap();
        assert!(f.norm() < 1e-15);
    }

    #[test]
    fn three_body_remainder_matches_hand_expansion() {
        let sys = system(1.0, vec![-1.0, -1.0]);
        let pos = [Vec3::new(1.5, -0.4, 0.8), Vec3::new(-0.9, 1.1, 0.3)];
        let g = |c| {
            let a = sys.sommerfeld(c).unwrap() * sys.channel_momentum(c).norm();
            f_function(&sys, c, &pos).unwrap().scale(Complex64::new(a, 0.0))
        };
        let g12 = g(Channel::Pair(0, 1));
        let expect = g(Channel::Ion(0)).dot(&g12) - g(Channel::Ion(1)).dot(&g12);
        let got = remainder_r(&sys, &pos).unwrap();
        assert_relative_eq!((got - expect).norm(), 0.0, epsilon = 1e-15 * expect.norm());
    }

    #[test]
    fn sphere_rule_integrates_low_degree_polynomials() {
        let rule = sphere_rule_26();
        let total: f64 = rule.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 1.0, epsilon = 1e-15);
        // <x^2> = 1/3, <x^4> = 1/5, <x^2 y^2> = 1/15, <x^6> = 1/7
        let avg = |f: &dyn Fn(&Vec3) -> f64| rule.iter().map(|(v, w)| w * f(v)).sum::<f64>();
        assert_relative_eq!(avg(&|v| v.x * v.x), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(avg(&|v| v.x.powi(4)), 1.0 / 5.0, epsilon = 1e-15);
        assert_relative_eq!(avg(&|v| v.x * v.x * v.y * v.y), 1.0 / 15.0, epsilon = 1e-15);
        assert_relative_eq!(avg(&|v| v.z.powi(6)), 1.0 / 7.0, epsilon = 1e-15);
        assert_relative_eq!(avg(&|v| v.x * v.y.powi(3) * v.z), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_charge_channel_has_no_cusp() {
        let sys = system(0.0, vec![1.0, 0.0]);
        let pos = [Vec3::new(0.6, 0.1, 0.2), Vec3::new(-0.4, 0.9, 1.0)];
        let report = cusp_check(&sys, Channel::Ion(0), &pos, 1e-4).unwrap();
        assert_eq!(report.rhs, Complex64::new(0.0, 0.0));
        assert!(report.deviation < 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NBodySystem::new(1.0, vec![-1.0], 1.0, vec![Vec3::zeros()]).is_err());
        let same = NBodySystem::new(1.0, vec![-1.0, -1.0], 1.0, vec![Vec3::x(), Vec3::x()]).unwrap();
        assert!(same.sommerfeld(Channel::Pair(0, 1)).is_err());
    }
}
