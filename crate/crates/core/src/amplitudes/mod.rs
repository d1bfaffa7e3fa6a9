//! Electron-impact ionization of atomic hydrogen: prior-form T-matrix
//! elements by Monte Carlo quadrature and the cross sections built on them.
//!
//! Normalization: the initial state carries (2 pi)^{-3/2} for the projectile
//! plane wave, the final two-electron state (2 pi)^{-3}, so that
//! c = (2 pi)^4 k_a k_b / k_i turns |T|^2 into a triple differential cross
//! section in atomic units.

mod cross_sections;
mod kinematics;
mod sampling;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::specfun::{coulomb_norm_factor, kummer_1f1_best_effort, SpecialFunctionError};
use crate::threebody::{ChargeModel, EffectiveCharges, ThreeBodyError};
use crate::Vec3;

pub use cross_sections::{
    sdcs, singlet_triplet, spin_asymmetry, tdcs, tdcs_estimate, total_sigma, wannier_fit,
    AngularGrid, CrossSection, TdcsEstimate,
};
pub use kinematics::{direction, IonizationKinematics, BINDING, HARTREE_EV};
pub use sampling::{gamma_int_quantile, Proposal, ScrambledHalton, DIMENSIONS};

/// Final states whose electron-pair Sommerfeld parameter exceeds this are
/// set to zero: the Gamow factor 2 pi beta e^{-2 pi beta} underflows.
pub const GAMOW_CUTOFF: f64 = 150.0;

/// Absolute accuracy demanded of each normalized Coulomb factor N 1F1,
/// whose modulus is O(1) where the electron is classically allowed; far
/// below the statistical error of any amplitude.
const DISTORTION_TOLERANCE: f64 = 1e-8;

/// Radial rate of the near-nucleus and coalescence proposals.
const NEAR_RATE: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmplitudeError {
    #[error("invalid kinematics: {0}")]
    Kinematics(String),
    #[error("perturbation is singular at r_a = {r_a:?}, r_b = {r_b:?}")]
    Singularity { r_a: [f64; 3], r_b: [f64; 3] },
    #[error("target relative error {target:.2e} not reached within {samples} samples (achieved {achieved:.2e})")]
    BudgetExceeded {
        partial: Box<AmplitudePair>,
        achieved: f64,
        target: f64,
        samples: u64,
    },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("invalid quadrature specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    ThreeBody(#[from] ThreeBodyError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

impl AmplitudeError {
    /// The partial estimate carried by a budget failure.
    pub fn partial(&self) -> Option<&AmplitudePair> {
        match self {
            AmplitudeError::BudgetExceeded { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Hydrogen 1s for the bound electron a times the projectile plane wave.
pub fn initial_state(r_a: &Vec3, r_b: &Vec3, k_i: &Vec3) -> Complex64 {
    let bound = (-r_a.norm()).exp() / PI.sqrt();
    let plane = Complex64::new(0.0, k_i.dot(r_b)).exp();
    plane * (bound * (2.0 * PI).powf(-1.5))
}

/// 1/|r_1 - r_2| - 1/r_1: the interaction of the electron at r_1 with the
/// other electron and the proton. The prior perturbation of the projectile b
/// is `perturbation(r_b, r_a)`.
pub fn perturbation(r_1: &Vec3, r_2: &Vec3) -> Result<f64, AmplitudeError> {
    let r = r_1.norm();
    let d = (r_1 - r_2).norm();
    if r == 0.0 || d == 0.0 {
        return Err(AmplitudeError::Singularity {
            r_a: [r_1.x, r_1.y, r_1.z],
            r_b: [r_2.x, r_2.y, r_2.z],
        });
    }
    Ok(1.0 / d - 1.0 / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadratureMethod {
    /// Mixture importance sampling with stratified component counts and
    /// Latin-hypercube radial coordinates.
    Stratified,
    /// Randomly digit-scrambled Halton points, one scrambling per batch.
    Halton,
}

impl std::str::FromStr for QuadratureMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stratified" => Ok(Self::Stratified),
            "halton" | "qmc" => Ok(Self::Halton),
            other => Err(format!("unknown quadrature '{other}' (expected stratified or halton)")),
        }
    }
}

impl std::fmt::Display for QuadratureMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Stratified => "stratified",
            Self::Halton => "halton",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub seed: u64,
    /// Samples per batch; batches are the unit of error estimation.
    pub batch_size: usize,
    /// Batches evaluated between convergence checks.
    pub round_batches: usize,
    /// Total sample budget.
    pub max_samples: u64,
    /// Stop once the larger statistical error over the larger amplitude
    /// falls below this.
    pub target_rel_error: f64,
    /// Abel damping rate e^{-eps r_b} as a fraction of the smallest momentum
    /// transfer |k_i - k_a|, |k_i - k_b|.
    pub damping: f64,
    /// Weights of the near, mid, far and coalescence r_b proposals.
    pub weights: [f64; 4],
    /// Rate of the mid proposal as a multiple of the smallest momentum
    /// transfer.
    pub mid_rate: f64,
    /// Average each sample with its half-wavelength shifts along the
    /// momentum transfer.
    pub phase_filter: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::Stratified,
            seed: 0,
            batch_size: 1024,
            round_batches: 16,
            max_samples: 1 << 23,
            target_rel_error: 0.05,
            damping: 0.005,
            weights: [0.2, 0.4, 0.2, 0.2],
            mid_rate: 0.5,
            phase_filter: true,
        }
    }
}

impl QuadratureSpec {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_method(self, method: QuadratureMethod) -> Self {
        Self { method, ..self }
    }

    fn validate(&self) -> Result<(), AmplitudeError> {
        let bad = |m: &str| Err(AmplitudeError::InvalidSpec(m.to_string()));
        if self.batch_size < 2 || self.round_batches < 2 {
            return bad("need at least 2 samples per batch and 2 batches per round");
        }
        if self.max_samples < (self.batch_size * self.round_batches) as u64 {
            return bad("budget smaller than one round of batches");
        }
        if !(self.mid_rate > 0.0 && self.mid_rate.is_finite()) {
            return bad("mid proposal rate must be positive");
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return bad("damping must be positive");
        }
        if !(self.target_rel_error >= 0.0) {
            return bad("target error must be non-negative");
        }
        if self.weights.iter().any(|w| !(*w >= 0.0)) || self.weights.iter().sum::<f64>() <= 0.0 {
            return bad("proposal weights must be non-negative and not all zero");
        }
        Ok(())
    }

    /// Seed for an independent sub-computation, e.g. one angular grid node.
    pub fn derived(self, index: u64) -> Self {
        Self {
            seed: splitmix(self.seed ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d))),
            ..self
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Direct T(k_a, k_b) and exchange T(k_b, k_a) amplitudes from one set of
/// samples, with the per-batch means kept for error propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePair {
    pub direct: Complex64,
    pub exchange: Complex64,
    pub direct_error: f64,
    pub exchange_error: f64,
    pub batches: Vec<[Complex64; 2]>,
    pub samples: u64,
}

impl AmplitudePair {
    /// Exact amplitudes with no statistical error.
    pub fn exact(direct: Complex64, exchange: Complex64) -> Self {
        Self {
            direct,
            exchange,
            direct_error: 0.0,
            exchange_error: 0.0,
            batches: Vec::new(),
            samples: 0,
        }
    }

    fn from_batches(batches: Vec<[Complex64; 2]>, batch_size: usize) -> Self {
        let n = batches.len() as f64;
        let mean = |i: usize| {
            let mut re = Neumaier::default();
            let mut im = Neumaier::default();
            for b in &batches {
                re.add(b[i].re);
                im.add(b[i].im);
            }
            Complex64::new(re.sum(), im.sum()) / n
        };
        let (d, e) = (mean(0), mean(1));
        let err = |i: usize, m: Complex64| {
            let mut s = Neumaier::default();
            for b in &batches {
                s.add((b[i] - m).norm_sqr());
            }
            (s.sum() / (n * (n - 1.0))).sqrt()
        };
        Self {
            direct: d,
            exchange: e,
            direct_error: err(0, d),
            exchange_error: err(1, e),
            samples: (batches.len() * batch_size) as u64,
            batches,
        }
    }

    /// Larger standard error over the larger amplitude; zero when both
    /// amplitudes and errors vanish.
    pub fn relative_error(&self) -> f64 {
        let err = self.direct_error.max(self.exchange_error);
        if err == 0.0 {
            return 0.0;
        }
        err / self.direct.norm().max(self.exchange.norm())
    }

    /// Labels of the two electrons exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            direct: self.exchange,
            exchange: self.direct,
            direct_error: self.exchange_error,
            exchange_error: self.direct_error,
            batches: self.batches.iter().map(|b| [b[1], b[0]]).collect(),
            samples: self.samples,
        }
    }
}

/// Neumaier compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// (2 pi)^{-3} N e^{i(k_1.r_a + k_2.r_b)} times the pair distortions, or
/// nothing when the Gamow factor kills the state.
struct FinalState {
    charges: EffectiveCharges,
    k_1: Vec3,
    k_2: Vec3,
    norm: Complex64,
}

impl FinalState {
    fn new(charges: EffectiveCharges, k_1: Vec3, k_2: Vec3) -> Result<Option<Self>, AmplitudeError> {
        if !(charges.beta_ab <= GAMOW_CUTOFF) {
            return Ok(None);
        }
        let norm = coulomb_norm_factor(charges.beta_a)?
            * coulomb_norm_factor(charges.beta_b)?
            * coulomb_norm_factor(charges.beta_ab)?
            * (2.0 * PI).powi(-3);
        Ok(Some(Self {
            charges,
            k_1,
            k_2,
            norm,
        }))
    }

    /// Factor depending on r_a alone: normalization, plane wave and the
    /// electron-a distortion.
    fn bound_part(&self, r_a: &Vec3) -> Result<Complex64, AmplitudeError> {
        let plane = Complex64::new(0.0, self.k_1.dot(r_a)).exp();
        Ok(self.norm * plane * distortion(self.charges.beta_a, &self.k_1, r_a)?)
    }

    /// The rest: plane wave of b and the b and ab distortions.
    fn free_part(&self, r_a: &Vec3, r_b: &Vec3) -> Result<Complex64, AmplitudeError> {
        let plane = Complex64::new(0.0, self.k_2.dot(r_b)).exp();
        let k_ab = (self.k_1 - self.k_2) / 2.0;
        Ok(plane
            * distortion(self.charges.beta_b, &self.k_2, r_b)?
            * distortion(self.charges.beta_ab, &k_ab, &(r_a - r_b))?)
    }
}

/// 1F1(i beta, 1, -i(k r + k.r)), accepted when its absolute error times
/// |N(beta)| is below `DISTORTION_TOLERANCE`.
fn distortion(beta: f64, k: &Vec3, r: &Vec3) -> Result<Complex64, SpecialFunctionError> {
    if beta == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let z = Complex64::new(0.0, -(k.norm() * r.norm() + k.dot(r)));
    let v = kummer_1f1_best_effort(Complex64::new(0.0, beta), 1, z)?;
    let scale = coulomb_norm_factor(beta)?.norm();
    if v.error * v.value.norm() * scale > DISTORTION_TOLERANCE {
        return Err(SpecialFunctionError::Convergence {
            achieved: v.error,
            method: "1F1 for a Coulomb distortion",
        });
    }
    Ok(v.value)
}

fn model_charges(model: ChargeModel, k_1: &Vec3, k_2: &Vec3, energy: f64) -> Result<EffectiveCharges, AmplitudeError> {
    match model.charges(k_1, k_2, energy, 1.0) {
        Ok(c) => Ok(c),
        Err(ThreeBodyError::CoalescentVelocity { limit }) => Ok(limit),
        Err(e) => Err(e.into()),
    }
}

struct Integrand<'a, V> {
    k_i: Vec3,
    damping: f64,
    states: [Option<FinalState>; 2],
    shift: [Option<Vec3>; 2],
    potential: &'a V,
    proposal: Proposal,
}

impl<V: Fn(&Vec3, &Vec3) -> f64 + Sync> Integrand<'_, V> {
    /// (f_direct, f_exchange) / p at one configuration drawn with density p.
    ///
    /// With the phase filter each state's integrand is replaced by
    /// [f(r_b - d)/4 + f(r_b)/2 + f(r_b + d)/4] with d = pi q/|q|^2 and q its
    /// momentum transfer. Shifting the argument of an integrand leaves its
    /// integral unchanged, so the estimate stays unbiased, while the leading
    /// e^{i q.r_b} oscillation of the dipole tail cancels to second order.
    fn evaluate(&self, r_a: &Vec3, r_b: &Vec3, p: f64) -> Result<[Complex64; 2], AmplitudeError> {
        if !(p > 0.0) {
            return Err(self.singular(r_a, r_b));
        }
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for (k, (o, s)) in out.iter_mut().zip(&self.states).enumerate() {
            let Some(s) = s else { continue };
            let mut sum = Complex64::new(0.0, 0.0);
            match self.shift[k] {
                Some(d) => {
                    for (w, r) in [(0.25, r_b - d), (0.5, *r_b), (0.25, r_b + d)] {
                        sum += self.point(s, r_a, &r)? * w;
                    }
                }
                None => sum = self.point(s, r_a, r_b)?,
            }
            if sum != Complex64::new(0.0, 0.0) {
                // the r_a factors are common to all shifts
                sum *= s.bound_part(r_a)?.conj() * initial_state(r_a, &Vec3::zeros(), &self.k_i);
            }
            *o = sum / p;
        }
        Ok(out)
    }

    /// V e^{-eps r_b} e^{i k_i.r_b} times the conjugated r_b-dependent
    /// final-state factor.
    fn point(&self, state: &FinalState, r_a: &Vec3, r_b: &Vec3) -> Result<Complex64, AmplitudeError> {
        let v = (self.potential)(r_a, r_b);
        if !v.is_finite() {
            return Err(self.singular(r_a, r_b));
        }
        if v == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let source = Complex64::new(0.0, self.k_i.dot(r_b)).exp() * (v * (-self.damping * r_b.norm()).exp());
        Ok(state.free_part(r_a, r_b)?.conj() * source)
    }

    fn singular(&self, r_a: &Vec3, r_b: &Vec3) -> AmplitudeError {
        AmplitudeError::Singularity {
            r_a: [r_a.x, r_a.y, r_a.z],
            r_b: [r_b.x, r_b.y, r_b.z],
        }
    }

    fn batch(&self, spec: &QuadratureSpec, index: u64) -> Result<[Complex64; 2], AmplitudeError> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(index);
        let n = spec.batch_size;
        let mut acc = [Neumaier::default(); 4];
        let mut push = |f: [Complex64; 2]| {
            acc[0].add(f[0].re);
            acc[1].add(f[0].im);
            acc[2].add(f[1].re);
            acc[3].add(f[1].im);
        };
        match spec.method {
            QuadratureMethod::Stratified => {
                let mut counts = [0usize; 4];
                let mut left = n;
                for (c, w) in counts.iter_mut().zip(self.proposal.weights).take(3) {
                    *c = ((w * n as f64).round() as usize).min(left);
                    left -= *c;
                }
                counts[3] = left;
                // the realized fractions define the mixture that is sampled
                let realized = Proposal::new(counts.map(|c| c as f64 / n as f64), self.proposal.rates);
                for (component, &m) in counts.iter().enumerate() {
                    if m == 0 {
                        continue;
                    }
                    let mut strata: Vec<usize> = (0..m).collect();
                    rand::seq::SliceRandom::shuffle(strata.as_mut_slice(), &mut rng);
                    for (i, &s) in strata.iter().enumerate() {
                        let x = [
                            (s as f64 + rng.gen::<f64>()) / m as f64,
                            rng.gen::<f64>(),
                            rng.gen::<f64>(),
                            (i as f64 + rng.gen::<f64>()) / m as f64,
                            rng.gen::<f64>(),
                            rng.gen::<f64>(),
                        ]
                        .map(|v: f64| v.clamp(1e-300, 1.0 - 1e-16));
                        let (r_a, r_b) = realized.map(component, &x);
                        let p = Proposal::density_a(&r_a) * realized.density_b(&r_a, &r_b);
                        push(self.evaluate(&r_a, &r_b, p)?);
                    }
                }
            }
            QuadratureMethod::Halton => {
                let halton = ScrambledHalton::new(&mut rng);
                for i in 0..n as u64 {
                    let x = halton.point(i);
                    let component = self.proposal.component(x[0]);
                    let (r_a, r_b) = self.proposal.map(component, &x[1..]);
                    let p = Proposal::density_a(&r_a) * self.proposal.density_b(&r_a, &r_b);
                    push(self.evaluate(&r_a, &r_b, p)?);
                }
            }
        }
        let nf = n as f64;
        Ok([
            Complex64::new(acc[0].sum(), acc[1].sum()) / nf,
            Complex64::new(acc[2].sum(), acc[3].sum()) / nf,
        ])
    }
}

/// Prior-form amplitudes T(k_a, k_b) = <Psi^-_{k_a,k_b}|V_i|Phi_i> and
/// T(k_b, k_a) with V_i = 1/r_ab - 1/r_b (projectile b, bound electron a).
pub fn t_matrix(
    kin: &IonizationKinematics,
    model: ChargeModel,
    spec: &QuadratureSpec,
) -> Result<AmplitudePair, AmplitudeError> {
    let v = |r_a: &Vec3, r_b: &Vec3| perturbation(r_b, r_a).unwrap_or(f64::NAN);
    t_matrix_with_potential(kin, model, spec, &v)
}

/// `t_matrix` with the perturbation replaced by `potential(r_a, r_b)`.
pub fn t_matrix_with_potential<V>(
    kin: &IonizationKinematics,
    model: ChargeModel,
    spec: &QuadratureSpec,
    potential: &V,
) -> Result<AmplitudePair, AmplitudeError>
where
    V: Fn(&Vec3, &Vec3) -> f64 + Sync,
{
    let charges = [
        model_charges(model, &kin.k_a, &kin.k_b, kin.excess())?,
        model_charges(model, &kin.k_b, &kin.k_a, kin.excess())?,
    ];
    t_matrix_with_charges(kin, charges, spec, potential)
}

/// Amplitudes with explicit direct and exchange final-state charges.
pub fn t_matrix_with_charges<V>(
    kin: &IonizationKinematics,
    charges: [EffectiveCharges; 2],
    spec: &QuadratureSpec,
    potential: &V,
) -> Result<AmplitudePair, AmplitudeError>
where
    V: Fn(&Vec3, &Vec3) -> f64 + Sync,
{
    spec.validate()?;
    let states = [
        FinalState::new(charges[0], kin.k_a, kin.k_b)?,
        FinalState::new(charges[1], kin.k_b, kin.k_a)?,
    ];
    if states.iter().all(Option::is_none) {
        return Ok(AmplitudePair::exact(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
    }
    let q = (kin.k_i - kin.k_a).norm().min((kin.k_i - kin.k_b).norm());
    let eps = spec.damping * q;
    let shift = |k: &Vec3| {
        let q = kin.k_i - k;
        (spec.phase_filter && q.norm() > 0.0).then(|| q * (PI / q.norm_squared()))
    };
    let integrand = Integrand {
        k_i: kin.k_i,
        damping: eps,
        shift: [shift(&kin.k_b), shift(&kin.k_a)],
        states,
        potential,
        proposal: Proposal::new(spec.weights, [NEAR_RATE, spec.mid_rate * q, eps, NEAR_RATE]),
    };
    let mut batches: Vec<[Complex64; 2]> = Vec::new();
    loop {
        let start = batches.len() as u64;
        let round: Result<Vec<_>, _> = (start..start + spec.round_batches as u64)
            .into_par_iter()
            .map(|b| integrand.batch(spec, b))
            .collect();
        batches.extend(round?);
        let pair = AmplitudePair::from_batches(batches.clone(), spec.batch_size);
        let achieved = pair.relative_error();
        if achieved <= spec.target_rel_error {
            return Ok(pair);
        }
        let next = pair.samples + (spec.batch_size * spec.round_batches) as u64;
        if next > spec.max_samples {
            return Err(AmplitudeError::BudgetExceeded {
                samples: pair.samples,
                partial: Box::new(pair),
                achieved,
                target: spec.target_rel_error,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::threebody::three_body_wave;

    #[test]
    fn split_final_state_matches_the_product_wave() {
        let k_a = Vec3::new(0.5, 0.3, 0.0);
        let k_b = Vec3::new(-0.2, 0.6, 0.1);
        let charges = ChargeModel::Ds3c.charges(&k_a, &k_b, 0.4, 1.0).unwrap();
        let s = FinalState::new(charges, k_a, k_b).unwrap().unwrap();
        for (r_a, r_b) in [
            (Vec3::new(0.3, -1.0, 0.2), Vec3::new(2.0, 0.5, -0.7)),
            (Vec3::new(4.0, 1.0, 0.0), Vec3::new(-3.0, 0.0, 9.0)),
        ] {
            let split = s.bound_part(&r_a).unwrap() * s.free_part(&r_a, &r_b).unwrap();
            let whole = three_body_wave(&charges, &k_a, &k_b, &r_a, &r_b).unwrap() * (2.0 * PI).powi(-3);
            assert!((split - whole).norm() <= 1e-13 * whole.norm());
        }
    }

    #[test]
    fn perturbation_examples() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        assert!((perturbation(&x, &y).unwrap() - (0.5f64.sqrt() - 1.0)).abs() < 1e-15);
        // |r_1 - r_2| = r_1: the two terms cancel
        assert_eq!(perturbation(&x, &Vec3::new(2.0, 0.0, 0.0)).unwrap(), 0.0);
        assert!(perturbation(&Vec3::zeros(), &y).is_err());
        assert!(perturbation(&x, &x).is_err());
        // far second electron: -1/r_1 + O(1/r_2)
        let far = perturbation(&x, &Vec3::new(0.0, 1e8, 0.0)).unwrap();
        assert!((far + 1.0).abs() < 1e-7);
    }

    #[test]
    fn initial_state_normalization() {
        let k = Vec3::new(1.0, 0.0, 0.0);
        let scale = (2.0 * PI).powf(1.5);
        assert!((initial_state(&Vec3::zeros(), &Vec3::zeros(), &k).norm() * scale - 1.0 / PI.sqrt()).abs() < 1e-15);
        let one = initial_state(&Vec3::new(1.0, 0.0, 0.0), &Vec3::zeros(), &k).norm() * scale;
        assert!((one - (-1.0f64).exp() / PI.sqrt()).abs() < 1e-15);
        // int |1s|^2 d^3r = int 4 r^2 e^{-2r} dr
        let h = 1e-3;
        let norm: f64 = (0..40_000)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                let v = initial_state(&Vec3::new(r, 0.0, 0.0), &Vec3::zeros(), &k).norm() * scale;
                4.0 * PI * r * r * v * v * h
            })
            .sum();
        assert!((norm - 1.0).abs() < 1e-6);
    }
}
