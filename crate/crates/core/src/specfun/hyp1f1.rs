//! Kummer's confluent hypergeometric function 1F1(a; b; z) for complex `a`,
//! small positive integer `b` and complex `z`, aimed at the Coulomb-wave
//! arguments z = -i k (r + k^.r) that sit on the imaginary axis.
//!
//! Every evaluation route returns an error estimate and the cheapest route
//! whose estimate clears `ACCEPT` wins:
//!
//! * |z| <= 30: power series in f64, tracking the largest term to detect
//!   cancellation; on cancellation the same series in double-double.
//! * |z| >= 20: the two-sector asymptotic expansion, optimally truncated.
//! * |z| <= 50: double-double series when the expansion is not yet sharp.
//! * otherwise: Taylor-series continuation of Kummer's ODE outward from
//!   |z| = 30 along the ray through z.
//!
//! For Re z < -|Im z| the Kummer transformation maps the argument to the
//! right half plane first.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ddouble::{ComplexDD, DoubleDouble};
use super::gamma::{ln_gamma, EXP_MAX};
use super::SpecialFunctionError;

const EPS: f64 = f64::EPSILON;
/// Error estimate at which a route's answer is returned immediately.
const ACCEPT: f64 = 1e-12;
/// Worst estimate still returned as a value rather than an error.
const TOLERANCE: f64 = 1e-10;

const SERIES_RADIUS: f64 = 30.0;
const ASYMPTOTIC_RADIUS: f64 = 20.0;
const DD_RADIUS: f64 = 50.0;
/// Candidate start radii of the continuation, largest first.
const ODE_START_RADII: [f64; 8] = [30.0, 20.0, 12.0, 8.0, 5.0, 3.0, 2.0, 1.0];
const ODE_MAX_STEP: f64 = 2.0;
const MAX_SERIES_TERMS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hyp1f1Method {
    Trivial,
    Series,
    DoubleDoubleSeries,
    Asymptotic,
    OdeContinuation,
}

impl Hyp1f1Method {
    fn name(self) -> &'static str {
        match self {
            Self::Trivial => "trivial",
            Self::Series => "series",
            Self::DoubleDoubleSeries => "double-double series",
            Self::Asymptotic => "asymptotic",
            Self::OdeContinuation => "ODE continuation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp1f1Value {
    pub value: Complex64,
    /// Estimated relative error.
    pub error: f64,
    /// Magnitude of the contributing terms over |value|; large only near a
    /// zero of the function, where no route can deliver a small relative
    /// error.
    pub conditioning: f64,
    pub method: Hyp1f1Method,
}

impl Hyp1f1Value {
    fn exact(value: Complex64) -> Self {
        Self {
            value,
            error: 0.0,
            conditioning: 1.0,
            method: Hyp1f1Method::Trivial,
        }
    }
}

pub fn kummer_1f1(a: Complex64, b: u32, z: Complex64) -> Result<Complex64, SpecialFunctionError> {
    kummer_1f1_detailed(a, b, z).map(|v| v.value)
}

pub fn kummer_1f1_detailed(
    a: Complex64,
    b: u32,
    z: Complex64,
) -> Result<Hyp1f1Value, SpecialFunctionError> {
    let v = kummer_1f1_best_effort(a, b, z)?;
    if v.error <= TOLERANCE || v.error / v.conditioning <= ACCEPT {
        Ok(v)
    } else {
        Err(SpecialFunctionError::Convergence {
            achieved: v.error,
            method: v.method.name(),
        })
    }
}

/// The most accurate estimate any route delivers, with its error estimate
/// and no acceptance test: for callers that judge accuracy on their own
/// scale, e.g. the absolute error of a normalized Coulomb wave where the
/// function itself is exponentially small.
pub fn kummer_1f1_best_effort(
    a: Complex64,
    b: u32,
    z: Complex64,
) -> Result<Hyp1f1Value, SpecialFunctionError> {
    if b == 0 {
        return Err(SpecialFunctionError::Domain("1F1 needs b >= 1"));
    }
    if !(a.re.is_finite() && a.im.is_finite() && z.re.is_finite() && z.im.is_finite()) {
        return Err(SpecialFunctionError::Domain("non-finite argument to 1F1"));
    }
    let bf = b as f64;
    if a == Complex64::new(0.0, 0.0) || z == Complex64::new(0.0, 0.0) {
        return Ok(Hyp1f1Value::exact(Complex64::new(1.0, 0.0)));
    }
    if a == Complex64::new(bf, 0.0) {
        return checked_exp(z).map(Hyp1f1Value::exact);
    }
    if z.re < -z.im.abs() {
        // 1F1(a; b; z) = e^z 1F1(b - a; b; -z)
        let inner = evaluate(Complex64::new(bf, 0.0) - a, b, -z)?;
        let value = scaled_exp(z, inner.value)?;
        return Ok(Hyp1f1Value {
            value,
            error: inner.error + EPS * (1.0 + z.norm()),
            ..inner
        });
    }
    evaluate(a, b, z)
}

fn checked_exp(z: Complex64) -> Result<Complex64, SpecialFunctionError> {
    if z.re > EXP_MAX {
        return Err(SpecialFunctionError::Overflow("1F1"));
    }
    Ok(z.exp())
}

/// e^z * f without intermediate overflow when |f| is huge and e^z tiny.
fn scaled_exp(z: Complex64, f: Complex64) -> Result<Complex64, SpecialFunctionError> {
    if f == Complex64::new(0.0, 0.0) {
        return Ok(f);
    }
    let l = z + f.ln();
    checked_exp(l)
}

fn evaluate(a: Complex64, b: u32, z: Complex64) -> Result<Hyp1f1Value, SpecialFunctionError> {
    let r = z.norm();
    let mut best: Option<Hyp1f1Value> = None;
    let keep = |cand: Hyp1f1Value, best: &mut Option<Hyp1f1Value>| -> bool {
        if !(cand.value.re.is_finite() && cand.value.im.is_finite()) {
            return false;
        }
        if best.map_or(true, |b| cand.error < b.error) {
            *best = Some(cand);
        }
        cand.error <= ACCEPT
    };

    if r <= SERIES_RADIUS {
        if let Some(v) = series_f64(a, b, z) {
            if keep(v, &mut best) {
                return Ok(v);
            }
        }
        if let Some(v) = series_dd(a, b, z) {
            if keep(v, &mut best) {
                return Ok(v);
            }
        }
    }
    if r >= ASYMPTOTIC_RADIUS {
        if let Some(v) = asymptotic(a, b, z)? {
            if keep(v, &mut best) {
                return Ok(v);
            }
        }
    }
    if r > SERIES_RADIUS && r <= DD_RADIUS {
        if let Some(v) = series_dd(a, b, z) {
            if keep(v, &mut best) {
                return Ok(v);
            }
        }
    }
    if r > ODE_START_RADII[ODE_START_RADII.len() - 1] {
        if let Some(v) = ode_continuation(a, b, z)? {
            if keep(v, &mut best) {
                return Ok(v);
            }
        }
    }
    // acceptance happens in the caller; near a zero of the function the
    // asymptotic route is judged relative to the size of its terms
    match best {
        Some(v) => Ok(v),
        None => Err(SpecialFunctionError::Convergence {
            achieved: f64::INFINITY,
            method: "none",
        }),
    }
}

fn series_f64(a: Complex64, b: u32, z: Complex64) -> Option<Hyp1f1Value> {
    let bf = b as f64;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut max_term = 1.0_f64;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        term *= (a + nf) * z / ((bf + nf) * (nf + 1.0));
        sum += term;
        n += 1;
        let t = term.norm();
        max_term = max_term.max(t);
        if t == 0.0 {
            break;
        }
        if nf > z.norm() && nf > a.norm() && t <= 0.1 * EPS * sum.norm() {
            break;
        }
        if n >= MAX_SERIES_TERMS || !t.is_finite() {
            return None;
        }
    }
    let s = sum.norm();
    if s == 0.0 || !s.is_finite() {
        return None;
    }
    Some(Hyp1f1Value {
        value: sum,
        error: EPS * (n as f64).sqrt() * 4.0 * max_term / s,
        conditioning: 1.0,
        method: Hyp1f1Method::Series,
    })
}

fn series_dd(a: Complex64, b: u32, z: Complex64) -> Option<Hyp1f1Value> {
    let zd = ComplexDD::from_c64(z);
    let ad = ComplexDD::from_c64(a);
    let mut term = ComplexDD::ONE;
    let mut sum = ComplexDD::ONE;
    let mut max_term = 1.0_f64;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        let shift = ComplexDD {
            re: ad.re + DoubleDouble::from_f64(nf),
            im: ad.im,
        };
        // (b + n)(n + 1) is an integer well below 2^53
        let denom = DoubleDouble::from_f64((b as f64 + nf) * (nf + 1.0));
        term = (term * shift * zd).div_real(denom);
        sum = sum + term;
        n += 1;
        let t = term.norm_f64();
        max_term = max_term.max(t);
        if t == 0.0 {
            break;
        }
        if nf > z.norm() && nf > a.norm() && t <= 1e-34 * sum.norm_f64() {
            break;
        }
        if n >= MAX_SERIES_TERMS || !t.is_finite() {
            return None;
        }
    }
    let s = sum.norm_f64();
    if s == 0.0 || !s.is_finite() {
        return None;
    }
    // double-double unit roundoff is 2^-104
    let dd_eps = 4.93e-32;
    Some(Hyp1f1Value {
        value: sum.to_c64(),
        error: (dd_eps * 8.0 * (n as f64) * max_term / s).max(EPS),
        conditioning: 1.0,
        method: Hyp1f1Method::DoubleDoubleSeries,
    })
}

/// Optimally truncated sum of (p)_n (q)_n / n! * w^{-n}; returns the sum and
/// the magnitude of the first omitted term.
fn asymptotic_tail(p: Complex64, q: Complex64, w: Complex64) -> (Complex64, f64) {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 0..500 {
        let nf = n as f64;
        let next = term * (p + nf) * (q + nf) / ((nf + 1.0) * w);
        let tn = next.norm();
        if tn == 0.0 {
            return (sum, 0.0);
        }
        if tn >= term.norm() {
            return (sum, term.norm());
        }
        sum += next;
        term = next;
        if tn <= 0.1 * EPS * sum.norm() {
            return (sum, tn);
        }
    }
    (sum, term.norm())
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// 1F1(a;b;z) ~ Gamma(b) [ e^{+-i pi a} z^{-a} / Gamma(b-a) * S1
///                        + e^z z^{a-b} / Gamma(a) * S2 ],
/// upper sign for Im z >= 0.
fn asymptotic(
    a: Complex64,
    b: u32,
    z: Complex64,
) -> Result<Option<Hyp1f1Value>, SpecialFunctionError> {
    let bf = Complex64::new(b as f64, 0.0);
    let i = Complex64::i();
    let lnz = z.ln();
    let lgb = ln_factorial(b - 1);
    let sign = if z.im >= 0.0 { 1.0 } else { -1.0 };

    let ln_p1 = match ln_gamma(bf - a) {
        Ok(lg) => Some(sign * i * PI * a - a * lnz - lg + lgb),
        Err(SpecialFunctionError::Pole { .. }) => None,
        Err(e) => return Err(e),
    };
    let ln_p2 = match ln_gamma(a) {
        Ok(lg) => Some(z + (a - bf) * lnz - lg + lgb),
        Err(SpecialFunctionError::Pole { .. }) => None,
        Err(e) => return Err(e),
    };
    for l in [ln_p1, ln_p2].iter().flatten() {
        if l.re > EXP_MAX {
            return Err(SpecialFunctionError::Overflow("1F1"));
        }
    }

    let (t1, e1) = match ln_p1 {
        Some(l) => {
            let (s, e) = asymptotic_tail(a, a - bf + 1.0, -z);
            let p = l.exp();
            (p * s, p.norm() * e)
        }
        None => (Complex64::new(0.0, 0.0), 0.0),
    };
    let (t2, e2) = match ln_p2 {
        Some(l) => {
            let (s, e) = asymptotic_tail(bf - a, 1.0 - a, z);
            let p = l.exp();
            (p * s, p.norm() * e)
        }
        None => (Complex64::new(0.0, 0.0), 0.0),
    };
    let value = t1 + t2;
    let mag = value.norm();
    if mag == 0.0 || !mag.is_finite() {
        return Ok(None);
    }
    // exp of the log prefactors loses about |a ln z| + |z| ulps; the
    // imaginary part of z is reduced exactly by libm so only Re z counts
    let rounding = EPS * (8.0 + z.re.abs() + (a * lnz).norm()) * (t1.norm() + t2.norm());
    Ok(Some(Hyp1f1Value {
        value,
        error: (e1 + e2 + rounding) / mag,
        conditioning: (t1.norm() + t2.norm()) / mag,
        method: Hyp1f1Method::Asymptotic,
    }))
}

/// Advances (F, F') of Kummer's equation z F'' + (b - z) F' - a F = 0 from
/// z0 to z0 + h using the local Taylor series.
fn taylor_step(
    a: Complex64,
    b: f64,
    z0: Complex64,
    f: Complex64,
    fp: Complex64,
    h: Complex64,
) -> (Complex64, Complex64) {
    let mut c_prev = f;
    let mut c_cur = fp;
    let mut hn = h;
    let mut val = f + fp * h;
    let mut der = fp;
    let scale = f.norm() + fp.norm() * h.norm();
    let mut small = 0;
    for n in 0..400usize {
        let nf = n as f64;
        // c_{n+2} = [(n + a) c_n - (n + 1)(n + b - z0) c_{n+1}] / (z0 (n + 2)(n + 1))
        let c_next =
            ((nf + a) * c_prev - (nf + 1.0) * (nf + b - z0) * c_cur) / (z0 * (nf + 2.0) * (nf + 1.0));
        let hn1 = hn * h;
        let tv = c_next * hn1;
        val += tv;
        der += (nf + 2.0) * c_next * hn;
        hn = hn1;
        c_prev = c_cur;
        c_cur = c_next;
        if tv.norm() <= 1e-18 * scale {
            small += 1;
            if small >= 2 {
                break;
            }
        } else {
            small = 0;
        }
    }
    (val, der)
}

fn ode_continuation(
    a: Complex64,
    b: u32,
    z: Complex64,
) -> Result<Option<Hyp1f1Value>, SpecialFunctionError> {
    let r = z.norm();
    let dir = z / r;
    let start = |aa: Complex64, bb: u32, z0: Complex64| -> Option<Hyp1f1Value> {
        let v = series_f64(aa, bb, z0)?;
        if v.error <= ACCEPT {
            return Some(v);
        }
        series_dd(aa, bb, z0)
    };
    // the largest start radius whose series is still accurate; large |a|
    // cancels the series terms well inside the default radius
    let mut chosen = None;
    for r0 in ODE_START_RADII.iter().copied().filter(|&r0| r0 < r) {
        let z0 = dir * r0;
        if let (Some(f0), Some(g0)) = (start(a, b, z0), start(a + 1.0, b + 1, z0)) {
            let ok = f0.error.max(g0.error) <= 0.1 * ACCEPT;
            let better = chosen.as_ref().map_or(true, |c: &(f64, Hyp1f1Value, Hyp1f1Value)| {
                f0.error.max(g0.error) < c.1.error.max(c.2.error)
            });
            if better {
                chosen = Some((r0, f0, g0));
            }
            if ok {
                break;
            }
        }
    }
    let Some((r0, f0, g0)) = chosen else {
        return Ok(None);
    };
    let mut zc = dir * r0;
    let mut f = f0.value;
    let mut fp = a / (b as f64) * g0.value;
    let mut peak = f.norm();
    let mut steps = 0usize;
    // the local Taylor series converges within |zc| of zc
    while (z - zc).norm() > 0.0 {
        let left = (z - zc).norm();
        let len = ODE_MAX_STEP.min(0.5 * zc.norm()).min(left);
        let h = if len == left { z - zc } else { dir * len };
        let (nf, nfp) = taylor_step(a, b as f64, zc, f, fp, h);
        f = nf;
        fp = nfp;
        zc += h;
        steps += 1;
        if !(f.re.is_finite() && f.im.is_finite()) {
            return Err(SpecialFunctionError::Overflow("1F1"));
        }
        peak = peak.max(f.norm());
    }
    let mag = f.norm();
    if mag == 0.0 {
        return Ok(None);
    }
    let start_err = f0.error.max(g0.error);
    let error = (start_err + 16.0 * EPS * steps as f64) * peak / mag;
    Ok(Some(Hyp1f1Value {
        value: f,
        error,
        conditioning: 1.0,
        method: Hyp1f1Method::OdeContinuation,
    }))
}
