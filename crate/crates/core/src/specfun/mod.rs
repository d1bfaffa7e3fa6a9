//! Complex special functions: Gamma, log-Gamma, the Kummer function 1F1 and
//! the Coulomb normalization factor built from them.

mod ddouble;
mod gamma;
mod hyp1f1;

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

pub use ddouble::{ComplexDD, DoubleDouble};
pub use gamma::{gamma, ln_gamma, rgamma};
pub use hyp1f1::{
    kummer_1f1, kummer_1f1_detailed, kummer_1f1_best_effort, Hyp1f1Method, Hyp1f1Value,
};

/// The scalar type carried through every wave-function evaluation.
pub type ComplexScalar = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("pole of Gamma at {re}{im:+}i")]
    Pole { re: f64, im: f64 },
    #[error("{0}: result exceeds the representable range")]
    Overflow(&'static str),
    #[error("1F1 did not converge: best error estimate {achieved:.3e} ({method})")]
    Convergence { achieved: f64, method: &'static str },
    #[error("invalid argument: {0}")]
    Domain(&'static str),
}

/// exp(-pi alpha / 2) Gamma(1 - i alpha), evaluated in log space.
///
/// |N|^2 = pi alpha e^{-pi alpha} / sinh(pi alpha) grows only linearly as
/// alpha goes to minus infinity, so overflow is practically unreachable; the
/// check remains for completeness.
pub fn coulomb_norm_factor(alpha: f64) -> Result<ComplexScalar, SpecialFunctionError> {
    if !alpha.is_finite() {
        return Err(SpecialFunctionError::Domain("non-finite Sommerfeld parameter"));
    }
    if alpha == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let lg = ln_gamma(Complex64::new(1.0, -alpha))?;
    let l = lg - PI * alpha / 2.0;
    if l.re > gamma::EXP_MAX {
        return Err(SpecialFunctionError::Overflow("coulomb_norm_factor"));
    }
    Ok(l.exp())
}
