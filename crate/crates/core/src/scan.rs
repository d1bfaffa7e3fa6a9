//! Dilation scans: how a Schrödinger residual decays when every coordinate
//! of a configuration is scaled up together.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::specfun::SpecialFunctionError;
use crate::twobody::{schrodinger_residual_extrapolated, Hamiltonian, TwoBodyError};

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub type Field<'a> = Box<dyn Fn(&[f64]) -> Result<Complex64, SpecialFunctionError> + Send + Sync + 'a>;

/// One wave function, its Hamiltonian and energy, and the unit-scale point
/// x0 that is dilated to s x0.
pub struct DilationRay<'a> {
    pub field: Field<'a>,
    pub hamiltonian: Hamiltonian,
    pub energy: f64,
    pub direction: Vec<f64>,
}

/// How each scale is sampled. Residuals of product states carry beats
/// between the pair terms, so each scale is represented by `samples`
/// dilations spread over [s, s + width].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationWindow {
    pub width: f64,
    pub samples: usize,
    /// Finite-difference step of the extrapolated residual.
    pub step: f64,
    /// Power of s taken out of each sample before averaging, so the drift
    /// of the leading decay across the window does not bias the mean.
    pub weight_power: i32,
}

impl Default for DilationWindow {
    fn default() -> Self {
        Self {
            width: 20.0,
            samples: 16,
            step: 0.05,
            weight_power: 2,
        }
    }
}

/// RMS over rays and window samples of residual(t) (t/s)^p: the ensemble
/// residual at scale s. Rays are processed in parallel; the reduction
/// order is fixed so the result does not depend on the thread count.
pub fn ensemble_residual(
    rays: &[DilationRay],
    s: f64,
    window: &DilationWindow,
) -> Result<f64, TwoBodyError> {
    let per_ray: Vec<Result<f64, TwoBodyError>> = rays
        .par_iter()
        .map(|ray| {
            let mut sum = 0.0;
            for i in 0..window.samples {
                let t = s + window.width * i as f64 / window.samples as f64;
                let x: Vec<f64> = ray.direction.iter().map(|c| c * t).collect();
                let res = schrodinger_residual_extrapolated(
                    &ray.field,
                    &ray.hamiltonian,
                    ray.energy,
                    &x,
                    window.step,
                )?;
                sum += (res * (t / s).powi(window.weight_power)).powi(2);
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

/// Ensemble residual at each scale and the fitted log-log slope.
pub fn dilation_scan(
    rays: &[DilationRay],
    scales: &[f64],
    window: &DilationWindow,
) -> Result<(Vec<f64>, f64), TwoBodyError> {
    let res = scales
        .iter()
        .map(|&s| ensemble_residual(rays, s, window))
        .collect::<Result<Vec<_>, _>>()?;
    let slope = loglog_slope(scales, &res);
    Ok((res, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 1.5).abs() < 1e-14);
    }
}
