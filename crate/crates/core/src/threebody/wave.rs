//! Product continuum state of two electrons in the field of a heavy ion.

use num_complex::Complex64;

use crate::specfun::{coulomb_norm_factor, kummer_1f1, SpecialFunctionError};
use crate::Vec3;

use super::EffectiveCharges;

/// 1F1(i beta_a, 1, -i(k_a r_a + k_a.r_a)) 1F1(i beta_b, ...) 1F1(i beta_ab, ...)
/// with k_ab = (k_a - k_b)/2 and r_ab = r_a - r_b, without normalization or
/// plane wave.
pub fn electron_pair_distortion(
    charges: &EffectiveCharges,
    k_a: &Vec3,
    k_b: &Vec3,
    r_a: &Vec3,
    r_b: &Vec3,
) -> Result<Complex64, SpecialFunctionError> {
    let k_ab = (k_a - k_b) / 2.0;
    let r_ab = r_a - r_b;
    let mut prod = Complex64::new(1.0, 0.0);
    for (beta, k, r) in [
        (charges.beta_a, k_a, r_a),
        (charges.beta_b, k_b, r_b),
        (charges.beta_ab, &k_ab, &r_ab),
    ] {
        if beta == 0.0 {
            continue;
        }
        let z = Complex64::new(0.0, -(k.norm() * r.norm() + k.dot(r)));
        prod *= kummer_1f1(Complex64::new(0.0, beta), 1, z)?;
    }
    Ok(prod)
}

/// N exp(i k_a.r_a + i k_b.r_b) times the three Coulomb distortions, with
/// N the product of the three Coulomb normalization factors.
pub fn three_body_wave(
    charges: &EffectiveCharges,
    k_a: &Vec3,
    k_b: &Vec3,
    r_a: &Vec3,
    r_b: &Vec3,
) -> Result<Complex64, SpecialFunctionError> {
    let n = coulomb_norm_factor(charges.beta_a)?
        * coulomb_norm_factor(charges.beta_b)?
        * coulomb_norm_factor(charges.beta_ab)?;
    let plane = Complex64::new(0.0, k_a.dot(r_a) + k_b.dot(r_b)).exp();
    Ok(n * plane * electron_pair_distortion(charges, k_a, k_b, r_a, r_b)?)
}
