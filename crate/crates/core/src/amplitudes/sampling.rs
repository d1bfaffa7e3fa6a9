//! Proposal densities for the six-dimensional (r_a, r_b) integral and the
//! scrambled Halton points used by the validation route.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::Vec3;

/// Inverse CDF of the gamma distribution with integer shape `k` and unit
/// rate: solves 1 - e^{-x} sum_{j<k} x^j/j! = u by safeguarded Newton.
pub fn gamma_int_quantile(k: u32, u: f64) -> f64 {
    debug_assert!(k >= 1 && u > 0.0 && u < 1.0);
    let cdf = |x: f64| -> (f64, f64) {
        // upper tail e^{-x} sum x^j/j! and the density x^{k-1} e^{-x}/(k-1)!
        let mut term = 1.0;
        let mut tail = 1.0;
        for j in 1..k {
            term *= x / j as f64;
            tail += term;
        }
        let e = (-x).exp();
        (1.0 - e * tail, e * term)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while cdf(hi).0 < u {
        lo = hi;
        hi *= 2.0;
    }
    let kf = k as f64;
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    // small-u start from F ~ x^k/k!, otherwise the bracket midpoint
    let mut x = (fact * u).powf(1.0 / kf).clamp(lo, hi);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    for _ in 0..100 {
        let (f, dens) = cdf(x);
        let g = f - u;
        if g > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let mut next = if dens > 0.0 { x - g / dens } else { f64::NAN };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 1e-15 * x.max(1e-300) {
            return next;
        }
        x = next;
    }
    x
}

fn isotropic(u: f64, v: f64) -> Vec3 {
    let c = 1.0 - 2.0 * u;
    let s = (1.0 - c * c).max(0.0).sqrt();
    let phi = 2.0 * PI * v;
    Vec3::new(s * phi.cos(), s * phi.sin(), c)
}

/// Mixture proposal for one electron-pair configuration. The bound electron
/// r_a follows e^{-r_a}/(8 pi), the 1s amplitude itself. The projectile r_b
/// mixes four densities, indexed as in `weights` and `rates`:
///
/// 0. near the nucleus, radial r e^{-lambda r} (absorbs -1/r_b),
/// 1. the same shape on the scale of the momentum transfer,
/// 2. far, radial e^{-kappa r} with kappa the Abel damping rate (the dipole
///    tail falls as 1/r_b^2),
/// 3. near r_a, radial u e^{-mu u} in u = |r_b - r_a| (absorbs 1/r_ab).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proposal {
    pub weights: [f64; 4],
    pub rates: [f64; 4],
}

/// Unit-cube coordinates of one sample: component selector, r_a radius and
/// direction, r_b radius and direction.
pub const DIMENSIONS: usize = 7;

impl Proposal {
    pub fn new(weights: [f64; 4], rates: [f64; 4]) -> Self {
        let s: f64 = weights.iter().sum();
        Self {
            weights: weights.map(|w| w / s),
            rates,
        }
    }

    pub fn density_a(r_a: &Vec3) -> f64 {
        (-r_a.norm()).exp() / (8.0 * PI)
    }

    /// Mixture density of r_b given r_a.
    pub fn density_b(&self, r_a: &Vec3, r_b: &Vec3) -> f64 {
        let r = r_b.norm();
        let u = (r_b - r_a).norm();
        let gamma2 = |l: f64, x: f64| l * l * (-l * x).exp() / (4.0 * PI * x);
        let [l0, l1, k, m] = self.rates;
        let far = k * (-k * r).exp() / (4.0 * PI * r * r);
        let w = self.weights;
        w[0] * gamma2(l0, r) + w[1] * gamma2(l1, r) + w[2] * far + w[3] * gamma2(m, u)
    }

    pub fn component(&self, x: f64) -> usize {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w;
            if x < acc {
                return i;
            }
        }
        3
    }

    /// Maps six unit-cube coordinates to (r_a, r_b) for one component.
    pub fn map(&self, component: usize, x: &[f64]) -> (Vec3, Vec3) {
        let r_a = isotropic(x[1], x[2]) * gamma_int_quantile(3, x[0]);
        let dir = isotropic(x[4], x[5]);
        let rate = self.rates[component];
        let r_b = match component {
            2 => dir * (-(1.0 - x[3]).ln() / rate),
            3 => r_a + dir * (gamma_int_quantile(2, x[3]) / rate),
            _ => dir * (gamma_int_quantile(2, x[3]) / rate),
        };
        (r_a, r_b)
    }
}

/// Scrambled radical-inverse sequence in the first seven prime bases with an
/// independent random digit permutation per base and digit position.
pub struct ScrambledHalton {
    perms: Vec<Vec<Vec<u8>>>,
}

const PRIMES: [u64; DIMENSIONS] = [2, 3, 5, 7, 11, 13, 17];

impl ScrambledHalton {
    pub fn new<R: Rng>(rng: &mut R) -> Self {
        let perms = PRIMES
            .iter()
            .map(|&b| {
                let digits = (53.0 * 2f64.ln() / (b as f64).ln()).ceil() as usize;
                (0..digits)
                    .map(|_| {
                        let mut p: Vec<u8> = (0..b as u8).collect();
                        p.shuffle(rng);
                        p
                    })
                    .collect()
            })
            .collect();
        Self { perms }
    }

    /// Point `index` in (0, 1)^7.
    pub fn point(&self, index: u64) -> [f64; DIMENSIONS] {
        let mut out = [0.0; DIMENSIONS];
        for (d, &b) in PRIMES.iter().enumerate() {
            let mut n = index;
            let mut scale = 1.0 / b as f64;
            let mut v = 0.0;
            for perm in &self.perms[d] {
                let digit = (n % b) as usize;
                n /= b;
                v += perm[digit] as f64 * scale;
                scale /= b as f64;
            }
            out[d] = v.clamp(1e-16, 1.0 - 1e-16);
        }
        out
    }
}
