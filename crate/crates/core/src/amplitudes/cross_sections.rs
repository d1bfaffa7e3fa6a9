use std::f64::consts::PI;

use num_complex::Complex64;

use crate::threebody::ChargeModel;
use crate::Vec3;

use super::{t_matrix, AmplitudeError, AmplitudePair, IonizationKinematics, QuadratureSpec, BINDING};

/// (T_s, T_t) = (T_direct + T_exchange, T_direct - T_exchange).
pub fn singlet_triplet(amps: &AmplitudePair) -> (Complex64, Complex64) {
    (amps.direct + amps.exchange, amps.direct - amps.exchange)
}

fn kinematic_factor(kin: &IonizationKinematics) -> f64 {
    (2.0 * PI).powi(4) * kin.k_a.norm() * kin.k_b.norm() / kin.k_i.norm()
}

/// c (|T_s|^2/4 + 3|T_t|^2/4) with c = (2 pi)^4 k_a k_b / k_i.
pub fn tdcs(kin: &IonizationKinematics, t_s: Complex64, t_t: Complex64) -> f64 {
    kinematic_factor(kin) * (0.25 * t_s.norm_sqr() + 0.75 * t_t.norm_sqr())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdcsEstimate {
    pub value: f64,
    pub error: f64,
}

/// Value and standard error of F = |d|^2 + |e|^2 + g Re(d conj e), the
/// error linearized about the batch means.
fn quadratic(amps: &AmplitudePair, g: f64) -> (f64, f64) {
    let (d, e) = (amps.direct, amps.exchange);
    let value = d.norm_sqr() + e.norm_sqr() + g * (d * e.conj()).re;
    let n = amps.batches.len();
    if n < 2 {
        return (value, 0.0);
    }
    let gd = 2.0 * d.conj() + g * e.conj();
    let ge = 2.0 * e.conj() + g * d.conj();
    let var: f64 = amps
        .batches
        .iter()
        .map(|b| (gd * (b[0] - d) + ge * (b[1] - e)).re.powi(2))
        .sum::<f64>()
        / (n * (n - 1)) as f64;
    (value, var.sqrt())
}

/// TDCS with its statistical error propagated from the batch means.
pub fn tdcs_estimate(kin: &IonizationKinematics, amps: &AmplitudePair) -> TdcsEstimate {
    let c = kinematic_factor(kin);
    // |T_s|^2/4 + 3|T_t|^2/4 = |d|^2 + |e|^2 - Re(d conj e)
    let (v, e) = quadratic(amps, -1.0);
    TdcsEstimate {
        value: c * v,
        error: c * e,
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(z), p0 = P_{n-1}(z)
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Product grid over both emission directions: Gauss-Legendre in the polar
/// cosines about the beam axis, equally spaced azimuths for electron b.
/// Electron a's azimuth is fixed by the symmetry about the beam and b's is
/// folded onto [0, pi] by the reflection through the (k_i, k_a) plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngularGrid {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for AngularGrid {
    fn default() -> Self {
        Self {
            polar: 6,
            azimuthal: 6,
        }
    }
}

impl AngularGrid {
    pub fn nodes(&self) -> usize {
        self.polar * self.polar * self.azimuthal
    }

    pub fn refined(&self) -> Self {
        Self {
            polar: 2 * self.polar,
            azimuthal: 2 * self.azimuthal,
        }
    }
}

/// A cross section with its singlet and triplet parts, which combine as
/// value = singlet/4 + 3 triplet/4.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CrossSection {
    pub value: f64,
    pub error: f64,
    pub singlet: f64,
    pub singlet_error: f64,
    pub triplet: f64,
    pub triplet_error: f64,
    /// Amplitude evaluations and how many of them ran out of budget and
    /// contributed their partial estimate.
    pub evaluations: usize,
    pub budget_exceeded: usize,
}

impl CrossSection {
    fn accumulate(&mut self, weight: f64, other: &CrossSection) {
        self.value += weight * other.value;
        self.singlet += weight * other.singlet;
        self.triplet += weight * other.triplet;
        self.error = self.error.hypot(weight * other.error);
        self.singlet_error = self.singlet_error.hypot(weight * other.singlet_error);
        self.triplet_error = self.triplet_error.hypot(weight * other.triplet_error);
        self.evaluations += other.evaluations;
        self.budget_exceeded += other.budget_exceeded;
    }

    fn from_amplitudes(kin: &IonizationKinematics, amps: &AmplitudePair, partial: bool) -> Self {
        let c = kinematic_factor(kin);
        let (v, ve) = quadratic(amps, -1.0);
        let (s, se) = quadratic(amps, 2.0);
        let (t, te) = quadratic(amps, -2.0);
        Self {
            value: c * v,
            error: c * ve,
            singlet: c * s,
            singlet_error: c * se,
            triplet: c * t,
            triplet_error: c * te,
            evaluations: 1,
            budget_exceeded: partial as usize,
        }
    }
}

fn amplitudes_or_partial(
    kin: &IonizationKinematics,
    model: ChargeModel,
    spec: &QuadratureSpec,
) -> Result<(AmplitudePair, bool), AmplitudeError> {
    match t_matrix(kin, model, spec) {
        Ok(a) => Ok((a, false)),
        Err(AmplitudeError::BudgetExceeded { partial, .. }) => Ok((*partial, true)),
        Err(e) => Err(e),
    }
}

/// Single differential cross section d sigma / dE_a at excess energy `e`:
/// the TDCS integrated over both emission directions. Amplitudes that miss
/// their error target contribute their partial estimate, counted in
/// `budget_exceeded`.
pub fn sdcs(
    e: f64,
    e_a: f64,
    model: ChargeModel,
    grid: &AngularGrid,
    spec: &QuadratureSpec,
) -> Result<CrossSection, AmplitudeError> {
    if !(e > 0.0) || !(0.0..=e).contains(&e_a) {
        return Err(AmplitudeError::Kinematics(format!("need 0 <= E_a = {e_a} <= E = {e}")));
    }
    if grid.polar == 0 || grid.azimuthal == 0 {
        return Err(AmplitudeError::InvalidSpec("empty angular grid".into()));
    }
    let (x, w) = gauss_legendre(grid.polar);
    let dphi = 2.0 * PI / grid.azimuthal as f64;
    let mut total = CrossSection::default();
    let mut node = 0u64;
    for (&ca, &wa) in x.iter().zip(&w) {
        let sa = (1.0 - ca * ca).sqrt();
        let dir_a = Vec3::new(ca, sa, 0.0);
        for (&cb, &wb) in x.iter().zip(&w) {
            let sb = (1.0 - cb * cb).sqrt();
            for j in 0..grid.azimuthal {
                let phi = (j as f64 + 0.5) * PI / grid.azimuthal as f64;
                let dir_b = Vec3::new(cb, sb * phi.cos(), sb * phi.sin());
                let kin = IonizationKinematics::new(e + BINDING, e_a, dir_a, dir_b)?;
                let (amps, partial) = amplitudes_or_partial(&kin, model, &spec.derived(node))?;
                node += 1;
                let point = CrossSection::from_amplitudes(&kin, &amps, partial);
                total.accumulate(2.0 * PI * wa * wb * dphi, &point);
            }
        }
    }
    Ok(total)
}

/// sigma(E) = 1/2 int_0^E SDCS dE_a, the half removing the double count of
/// identical electrons. Exchange symmetry of the SDCS turns this into
/// int_0^{E/2} SDCS dE_a, evaluated by Gauss-Legendre on `energy_nodes`
/// points.
pub fn total_sigma(
    e: f64,
    model: ChargeModel,
    grid: &AngularGrid,
    energy_nodes: usize,
    spec: &QuadratureSpec,
) -> Result<CrossSection, AmplitudeError> {
    if !(e > 0.0) {
        return Err(AmplitudeError::Kinematics(format!("excess energy {e} must be positive")));
    }
    if energy_nodes == 0 {
        return Err(AmplitudeError::InvalidSpec("no energy nodes".into()));
    }
    let (x, w) = gauss_legendre(energy_nodes);
    let half = e / 2.0;
    let mut total = CrossSection::default();
    for (i, (&xi, &wi)) in x.iter().zip(&w).enumerate() {
        let e_a = half * (xi + 1.0) / 2.0;
        let s = sdcs(e, e_a, model, grid, &spec.derived(1 << 32 | i as u64))?;
        total.accumulate(wi * half / 2.0, &s);
    }
    Ok(total)
}

/// Least-squares slope of ln sigma against ln E.
pub fn wannier_fit(points: &[(f64, f64)]) -> Result<f64, AmplitudeError> {
    if points.len() < 2 {
        return Err(AmplitudeError::Degenerate("need at least two (E, sigma) points"));
    }
    if points.iter().any(|&(e, s)| !(e > 0.0 && s > 0.0)) {
        return Err(AmplitudeError::Degenerate("energies and cross sections must be positive"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AmplitudeError::Degenerate("all energies coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// A = (sigma_s - sigma_t) / (sigma_s + 3 sigma_t).
pub fn spin_asymmetry(sigma_s: f64, sigma_t: f64) -> Result<f64, AmplitudeError> {
    let den = sigma_s + 3.0 * sigma_t;
    if !(den > 0.0) {
        return Err(AmplitudeError::Degenerate("singlet and triplet cross sections vanish"));
    }
    Ok((sigma_s - sigma_t) / den)
}
