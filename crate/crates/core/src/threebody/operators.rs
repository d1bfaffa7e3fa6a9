//! The three-body operator acting on the distortion factor Psi-bar, both in
//! the curvilinear coordinates xi_1..xi_6 (split into H_par, H_int, H_mix)
//! and directly in Cartesian Jacobi coordinates.
//!
//! With Psi = N exp(i k.r + i K.R) Psi-bar the Schrödinger equation becomes
//! L Psi-bar = 0 where
//! L = (1/mu) Lap_r + (1/mu_k) Lap_R + 2i (k.grad_r/mu + K.grad_R/mu_k)
//!     - 2 sum z_mn / r_mn.
//! Changing variables to xi gives L = H_par + H_int + H_mix; the
//! off-diagonal part of the kinetic metric G_uv = sum_p (1/m_p)
//! grad_p xi_u . grad_p xi_v forms H_mix.

use nalgebra::{Matrix6, SymmetricEigen};
use num_complex::Complex64;

use crate::specfun::SpecialFunctionError;
use crate::Vec3;

use super::{finite, jacobi, PairChannel, ThreeBodyConfig, ThreeBodyError};

/// A distortion factor sampled in curvilinear coordinates.
pub trait XiField: Fn(&[f64; 6]) -> Result<Complex64, SpecialFunctionError> {}
impl<T: Fn(&[f64; 6]) -> Result<Complex64, SpecialFunctionError>> XiField for T {}

const MAX_CONDITION: f64 = 1e8;

fn eval<F: XiField>(field: &F, xi: &[f64; 6]) -> Result<Complex64, ThreeBodyError> {
    let v = field(xi)?;
    if !finite(v) {
        return Err(ThreeBodyError::Domain("field returned a non-finite value"));
    }
    Ok(v)
}

fn shifted(xi: &[f64; 6], u: usize, du: f64) -> [f64; 6] {
    let mut p = *xi;
    p[u] += du;
    p
}

/// First and second central differences along xi_u.
fn derivatives<F: XiField>(
    field: &F,
    xi: &[f64; 6],
    u: usize,
    h: f64,
    center: Complex64,
) -> Result<(Complex64, Complex64), ThreeBodyError> {
    let up = eval(field, &shifted(xi, u, h))?;
    let down = eval(field, &shifted(xi, u, -h))?;
    Ok(((up - down) / (2.0 * h), (up - 2.0 * center + down) / (h * h)))
}

fn check_internal(xi: &[f64; 6], h: f64) -> Result<(), ThreeBodyError> {
    for u in 3..6 {
        if xi[u] <= 2.0 * h {
            return Err(ThreeBodyError::SingularStencil {
                coordinate: u + 1,
                value: xi[u],
            });
        }
    }
    Ok(())
}

/// sum_{j=1..3} (2/(mu r)) [d xi d + i k xi d - mu z] Psi-bar, r = xi_{j+3}.
pub fn apply_h_par<F: XiField>(
    field: &F,
    pairs: &[PairChannel; 3],
    xi: &[f64; 6],
    h: f64,
) -> Result<Complex64, ThreeBodyError> {
    check_internal(xi, h)?;
    let center = eval(field, xi)?;
    let i = Complex64::i();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, pair) in pairs.iter().enumerate() {
        let r = xi[j + 3];
        let (d1, d2) = derivatives(field, xi, j, h, center)?;
        let x = xi[j];
        let inner = x * d2 + d1 + i * pair.k * x * d1 - pair.mu * pair.z * center;
        total += 2.0 / (pair.mu * r) * inner;
    }
    Ok(total)
}

/// sum_{j=4..6} (1/mu) [xi^-2 d xi^2 d + 2i k (xi_{j-3} - xi_j)/xi_j d] Psi-bar.
pub fn apply_h_int<F: XiField>(
    field: &F,
    pairs: &[PairChannel; 3],
    xi: &[f64; 6],
    h: f64,
) -> Result<Complex64, ThreeBodyError> {
    check_internal(xi, h)?;
    let center = eval(field, xi)?;
    let i = Complex64::i();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, pair) in pairs.iter().enumerate() {
        let u = j + 3;
        let r = xi[u];
        let (d1, d2) = derivatives(field, xi, u, h, center)?;
        let radial = d2 + 2.0 / r * d1;
        let drift = 2.0 * i * pair.k * (xi[j] - r) / r * d1;
        total += (radial + drift) / pair.mu;
    }
    Ok(total)
}

/// Gradients of xi_1..xi_6 with respect to each particle position.
fn xi_gradients(config: &ThreeBodyConfig) -> [[Vec3; 3]; 6] {
    let mut grads = [[Vec3::zeros(); 3]; 6];
    for idx in 1..=3 {
        let s = config.set(idx);
        let (i, j) = jacobi::pair_of(idx);
        let r_hat = s.r / s.r.norm();
        let k_hat = s.k / s.k.norm();
        for (u, g) in [(idx - 1, r_hat + k_hat), (idx + 2, r_hat)] {
            grads[u][i] = g;
            grads[u][j] = -g;
        }
    }
    grads
}

/// Kinetic metric G_uv = sum_p (1/m_p) grad_p xi_u . grad_p xi_v.
pub fn metric_tensor(config: &ThreeBodyConfig) -> Matrix6<f64> {
    let grads = xi_gradients(config);
    Matrix6::from_fn(|u, v| {
        (0..3)
            .map(|p| grads[u][p].dot(&grads[v][p]) / config.triple.m[p])
            .sum()
    })
}

fn condition_number(g: &Matrix6<f64>) -> f64 {
    let eig = SymmetricEigen::new(*g);
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// sum_{u != v} G_uv d_u d_v Psi-bar at the configuration's own xi point.
pub fn apply_h_mix<F: XiField>(
    field: &F,
    config: &ThreeBodyConfig,
    h: f64,
) -> Result<Complex64, ThreeBodyError> {
    let xi = config.curvilinear().xi;
    check_internal(&xi, h)?;
    let g = metric_tensor(config);
    let condition = condition_number(&g);
    if condition > MAX_CONDITION {
        return Err(ThreeBodyError::DegenerateJacobian { condition });
    }
    let mut total = Complex64::new(0.0, 0.0);
    for u in 0..6 {
        for v in (u + 1)..6 {
            if g[(u, v)] == 0.0 {
                continue;
            }
            let mut p = xi;
            let mut corner = |du: f64, dv: f64| -> Result<Complex64, ThreeBodyError> {
                p = xi;
                p[u] += du;
                p[v] += dv;
                eval(field, &p)
            };
            let mixed = (corner(h, h)? - corner(h, -h)? - corner(-h, h)? + corner(-h, -h)?)
                / (4.0 * h * h);
            total += 2.0 * g[(u, v)] * mixed;
        }
    }
    Ok(total)
}

/// The operator L applied to Psi-bar(xi(r_23, R_1)) by central differences
/// in the six Cartesian Jacobi coordinates of set 1. Independent of the
/// curvilinear machinery except for the coordinate map itself.
pub fn cartesian_operator<F: XiField>(
    field: &F,
    config: &ThreeBodyConfig,
    h: f64,
) -> Result<Complex64, ThreeBodyError> {
    let t = config.triple;
    let base = config.set1;
    let mu = t.mu_pair(1);
    let mu_k = t.mu_spectator(1);
    let sample = |r: Vec3, big_r: Vec3| -> Result<Complex64, ThreeBodyError> {
        let s = jacobi::JacobiSet { r, big_r, ..base };
        eval(field, &super::curvilinear_from_jacobi(&t, &s).xi)
    };
    let center = sample(base.r, base.big_r)?;
    let i = Complex64::i();
    let mut total = Complex64::new(0.0, 0.0);
    for axis in 0..3 {
        let mut e = Vec3::zeros();
        e[axis] = h;
        let up = sample(base.r + e, base.big_r)?;
        let down = sample(base.r - e, base.big_r)?;
        total += (up - 2.0 * center + down) / (h * h * mu);
        total += 2.0 * i * base.k[axis] * (up - down) / (2.0 * h * mu);
        let up = sample(base.r, base.big_r + e)?;
        let down = sample(base.r, base.big_r - e)?;
        total += (up - 2.0 * center + down) / (h * h * mu_k);
        total += 2.0 * i * base.big_k[axis] * (up - down) / (2.0 * h * mu_k);
    }
    let potential: f64 = (1..=3)
        .map(|idx| t.z_pair(idx) / config.set(idx).r.norm())
        .sum();
    Ok(total - 2.0 * potential * center)
}
