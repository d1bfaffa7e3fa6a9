//! Canonical partition function of a finite system, continued to complex
//! inverse temperature, and its zeros.
//!
//! Z(beta) = int dE Omega(E) e^{-beta E}, Omega = -(1/pi) Im Tr G(E + i eta),
//! or the exact sum over a discrete spectrum. Units: k_B = 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::greenfn::{direct_green, free_green, green_expand, GreenError, ModelSpace, ResolventQuery};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("partition integral does not converge: {0}")]
    Convergence(String),
    #[error("a zero of Z lies on a search edge near beta = {beta}")]
    BoundaryZero { beta: Complex64 },
    #[error("Z({beta}) = {value} is not positive")]
    NonpositiveZ { beta: f64, value: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Green(#[from] GreenError),
}

/// Omega(E) sampled on an increasing energy grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOfStates {
    pub energies: Vec<f64>,
    pub omega: Vec<f64>,
    pub eta: f64,
}

impl DensityOfStates {
    /// Trapezoidal integral of Omega: the number of states in the window.
    pub fn state_count(&self) -> f64 {
        trapezoid(&self.energies, |i| Complex64::new(self.omega[i], 0.0)).re
    }
}

/// `n` equally spaced energies from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn check_grid(energies: &[f64]) -> Result<(), ThermoError> {
    if energies.len() < 2 {
        return Err(ThermoError::InvalidInput("energy grid needs two points".into()));
    }
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(ThermoError::Convergence("unbounded energy window".into()));
    }
    if energies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ThermoError::InvalidInput("energy grid must increase".into()));
    }
    Ok(())
}

fn trapezoid(x: &[f64], f: impl Fn(usize) -> Complex64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f(0);
    for i in 1..x.len() {
        let cur = f(i);
        sum += (prev + cur) * (0.5 * (x[i] - x[i - 1]));
        prev = cur;
    }
    sum
}

fn omega_of(g: &crate::greenfn::CMatrix) -> f64 {
    -g.trace().im / PI
}

fn dos_with(
    space: &ModelSpace,
    energies: &[f64],
    eta: f64,
    green: impl Fn(&ModelSpace, &ResolventQuery) -> Result<crate::greenfn::CMatrix, GreenError>,
) -> Result<DensityOfStates, ThermoError> {
    check_grid(energies)?;
    if !(eta > 0.0) {
        return Err(ThermoError::InvalidInput(format!("broadening must be positive, got {eta}")));
    }
    let omega = energies
        .iter()
        .map(|&e| green(space, &ResolventQuery::new(Complex64::new(e, eta))).map(|g| omega_of(&g)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DensityOfStates {
        energies: energies.to_vec(),
        omega,
        eta,
    })
}

/// Omega = -(1/pi) Im Tr G(E + i eta) with G from the Faddeev-type expansion.
pub fn dos_from_green(space: &ModelSpace, energies: &[f64], eta: f64) -> Result<DensityOfStates, ThermoError> {
    dos_with(space, energies, eta, |s, q| green_expand(s, q).map(|d| d.total))
}

/// Omega from the dense resolvent, for cross-checks.
pub fn dos_direct(space: &ModelSpace, energies: &[f64], eta: f64) -> Result<DensityOfStates, ThermoError> {
    dos_with(space, energies, eta, direct_green)
}

/// The split Omega = Omega_0 + sum_j Omega_j, from Tr G0 and Tr G_j.
pub fn dos_components(
    space: &ModelSpace,
    energies: &[f64],
    eta: f64,
) -> Result<(DensityOfStates, Vec<DensityOfStates>), ThermoError> {
    let free = dos_with(space, energies, eta, free_green)?;
    let n = space.particles();
    let mut parts: Vec<Vec<f64>> = vec![Vec::with_capacity(energies.len()); n];
    for &e in energies {
        let sol = green_expand(space, &ResolventQuery::new(Complex64::new(e, eta)))?;
        for (p, g) in parts.iter_mut().zip(&sol.components) {
            p.push(omega_of(g));
        }
    }
    let parts = parts
        .into_iter()
        .map(|omega| DensityOfStates {
            energies: energies.to_vec(),
            omega,
            eta,
        })
        .collect();
    Ok((free, parts))
}

/// Where Z comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Discrete(Vec<f64>),
    Tabulated(DensityOfStates),
}

/// Z(beta) and Z'(beta) for complex beta. Energies are measured internally
/// from `shift` (the lowest energy), which only rescales Z by e^{-beta shift}.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionFunction {
    spectrum: Spectrum,
    shift: f64,
}

impl PartitionFunction {
    pub fn discrete(levels: Vec<f64>) -> Result<Self, ThermoError> {
        if levels.is_empty() {
            return Err(ThermoError::InvalidInput("empty spectrum".into()));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(ThermoError::Convergence("non-finite level".into()));
        }
        let shift = levels.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            spectrum: Spectrum::Discrete(levels),
            shift,
        })
    }

    pub fn tabulated(dos: DensityOfStates) -> Result<Self, ThermoError> {
        check_grid(&dos.energies)?;
        if dos.omega.len() != dos.energies.len() || dos.omega.iter().any(|w| !w.is_finite()) {
            return Err(ThermoError::InvalidInput("Omega must be finite on every grid point".into()));
        }
        let shift = dos.energies[0];
        Ok(Self {
            spectrum: Spectrum::Tabulated(dos),
            shift,
        })
    }

    /// Discrete spectrum of H0 + U.
    pub fn from_model_space(space: &ModelSpace) -> Result<Self, ThermoError> {
        Self::discrete(space.hamiltonian().symmetric_eigenvalues().iter().copied().collect())
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// e^{beta shift} Z(beta) and its beta-derivative.
    fn shifted(&self, beta: Complex64) -> (Complex64, Complex64) {
        match &self.spectrum {
            Spectrum::Discrete(levels) => levels.iter().fold(
                (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
                |(z, dz), &e| {
                    let w = (-beta * (e - self.shift)).exp();
                    (z + w, dz - w * (e - self.shift))
                },
            ),
            Spectrum::Tabulated(dos) => {
                let x = &dos.energies;
                let w = |i: usize| dos.omega[i] * (-beta * (x[i] - self.shift)).exp();
                let z = trapezoid(x, w);
                let dz = -trapezoid(x, |i| w(i) * (x[i] - self.shift));
                (z, dz)
            }
        }
    }

    pub fn z(&self, beta: Complex64) -> Complex64 {
        self.shifted(beta).0 * (-beta * self.shift).exp()
    }

    pub fn dz(&self, beta: Complex64) -> Complex64 {
        let (z, dz) = self.shifted(beta);
        (dz - z * self.shift) * (-beta * self.shift).exp()
    }

    /// Smallest spacing between distinct levels (1 for a single level);
    /// for a tabulated DOS the grid span.
    pub fn level_spacing(&self) -> f64 {
        match &self.spectrum {
            Spectrum::Discrete(levels) => {
                let mut l = levels.clone();
                l.sort_by(f64::total_cmp);
                let scale = l.iter().fold(1.0f64, |m, e| m.max(e.abs()));
                let gap = l
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .filter(|&d| d > 1e-12 * scale)
                    .fold(f64::INFINITY, f64::min);
                if gap.is_finite() {
                    gap
                } else {
                    1.0
                }
            }
            Spectrum::Tabulated(dos) => dos.energies[dos.energies.len() - 1] - dos.energies[0],
        }
    }
}

/// Z(beta) from a DOS table or a discrete spectrum.
pub fn partition(spectrum: &Spectrum, beta: Complex64) -> Result<Complex64, ThermoError> {
    let pf = match spectrum {
        Spectrum::Discrete(l) => PartitionFunction::discrete(l.clone())?,
        Spectrum::Tabulated(d) => PartitionFunction::tabulated(d.clone())?,
    };
    let z = pf.z(beta);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(ThermoError::Convergence(format!("Z overflows at beta = {beta}")));
    }
    Ok(z)
}

/// Z_0 and the Z_j from the component densities; their sum is Z.
pub fn partition_components(
    free: &DensityOfStates,
    parts: &[DensityOfStates],
    beta: Complex64,
) -> Result<(Complex64, Vec<Complex64>), ThermoError> {
    let z0 = partition(&Spectrum::Tabulated(free.clone()), beta)?;
    let zj = parts
        .iter()
        .map(|d| partition(&Spectrum::Tabulated(d.clone()), beta))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((z0, zj))
}

/// Closed rectangle in the complex beta plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rectangle {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    /// Re beta in [-1/dE, 10/dE], |Im beta| <= 4 pi/dE with dE the level
    /// spacing. The left edge stays off the imaginary axis, where the zeros
    /// of evenly spaced spectra sit.
    pub fn default_for(pf: &PartitionFunction) -> Self {
        let de = pf.level_spacing();
        Self::new((-1.0 / de, 10.0 / de), (-4.0 * PI / de, 4.0 * PI / de))
    }

    fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re.0 - slack && z.re <= self.re.1 + slack && z.im >= self.im.0 - slack && z.im <= self.im.1 + slack
    }

    fn grown(&self, d: f64) -> Self {
        Self::new((self.re.0 - d, self.re.1 + d), (self.im.0 - d, self.im.1 + d))
    }

    fn size(&self) -> f64 {
        (self.re.1 - self.re.0).max(self.im.1 - self.im.0)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }
}

/// A polished zero and |Z| there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zero {
    pub beta: Complex64,
    pub residual: f64,
}

const EDGE_SAMPLES: usize = 32;
const MAX_BISECTIONS: u32 = 40;
const MAX_DEPTH: u32 = 48;
const SPLIT_RETRIES: usize = 4;

struct Searcher<'a> {
    pf: &'a PartitionFunction,
    /// |Z~| below this on an edge counts as a zero on the edge.
    floor: f64,
    /// Newton stops once |Z~| is below this.
    target: f64,
}

impl Searcher<'_> {
    fn f(&self, beta: Complex64) -> Complex64 {
        self.pf.shifted(beta).0
    }

    /// Change of arg Z~ along a straight segment, refined until successive
    /// samples differ by less than pi/4 in phase.
    fn phase_change(&self, a: Complex64, b: Complex64) -> Result<f64, ThermoError> {
        let mut total = 0.0;
        let mut fa = self.f(a);
        for i in 1..=EDGE_SAMPLES {
            let p = a + (b - a) * (i as f64 / EDGE_SAMPLES as f64);
            let pa = a + (b - a) * ((i - 1) as f64 / EDGE_SAMPLES as f64);
            let fp = self.f(p);
            total += self.segment(pa, fa, p, fp, 0)?;
            fa = fp;
        }
        Ok(total)
    }

    fn segment(&self, a: Complex64, fa: Complex64, b: Complex64, fb: Complex64, depth: u32) -> Result<f64, ThermoError> {
        for (p, fp) in [(a, fa), (b, fb)] {
            if !(fp.norm() > self.floor) {
                return Err(ThermoError::BoundaryZero { beta: p });
            }
        }
        let d = (fb / fa).arg();
        if d.abs() < PI / 4.0 {
            return Ok(d);
        }
        if depth >= MAX_BISECTIONS {
            return Err(ThermoError::BoundaryZero { beta: (a + b) * 0.5 });
        }
        let m = (a + b) * 0.5;
        let fm = self.f(m);
        Ok(self.segment(a, fa, m, fm, depth + 1)? + self.segment(m, fm, b, fb, depth + 1)?)
    }

    fn winding(&self, r: &Rectangle) -> Result<i64, ThermoError> {
        let c = r.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.phase_change(c[i], c[(i + 1) % 4])?;
        }
        Ok((total / (2.0 * PI)).round() as i64)
    }

    fn newton(&self, start: Complex64) -> Option<Complex64> {
        let mut b = start;
        for _ in 0..100 {
            let (z, dz) = self.pf.shifted(b);
            if dz.norm() == 0.0 {
                return None;
            }
            let step = z / dz;
            b -= step;
            if !(b.re.is_finite() && b.im.is_finite()) {
                return None;
            }
            if step.norm() <= 1e-15 * (1.0 + b.norm()) && self.f(b).norm() <= self.target {
                return Some(b);
            }
        }
        (self.f(b).norm() <= self.target).then_some(b)
    }

    fn split(r: &Rectangle, t: f64) -> (Rectangle, Rectangle) {
        if r.re.1 - r.re.0 >= r.im.1 - r.im.0 {
            let m = r.re.0 + t * (r.re.1 - r.re.0);
            (Rectangle::new((r.re.0, m), r.im), Rectangle::new((m, r.re.1), r.im))
        } else {
            let m = r.im.0 + t * (r.im.1 - r.im.0);
            (Rectangle::new(r.re, (r.im.0, m)), Rectangle::new(r.re, (m, r.im.1)))
        }
    }

    fn search(&self, r: Rectangle, winding: i64, depth: u32) -> Result<Vec<Complex64>, ThermoError> {
        if winding <= 0 {
            return Ok(Vec::new());
        }
        let centre = Complex64::new(0.5 * (r.re.0 + r.re.1), 0.5 * (r.im.0 + r.im.1));
        if winding == 1 {
            if let Some(z) = self.newton(centre) {
                if r.contains(z, 0.0) {
                    return Ok(vec![z]);
                }
            }
        }
        if depth >= MAX_DEPTH {
            // a multiple zero: report it with its multiplicity
            let z = self.newton(centre).unwrap_or(centre);
            return Ok(vec![z; winding as usize]);
        }
        let mut last = None;
        for attempt in 0..SPLIT_RETRIES {
            // perturbed split lines for the retries
            let t = 0.5 + 0.0137 * attempt as f64 * if attempt % 2 == 0 { 1.0 } else { -1.0 };
            let (a, b) = Self::split(&r, t);
            let wa = match self.winding(&a) {
                Ok(w) => w,
                Err(e) => {
                    last = Some(e);
                    continue;
                }
            };
            let wb = winding - wa;
            let (za, zb) = rayon::join(|| self.search(a, wa, depth + 1), || self.search(b, wb, depth + 1));
            let mut z = za?;
            z.extend(zb?);
            return Ok(z);
        }
        Err(last.unwrap_or(ThermoError::BoundaryZero { beta: centre }))
    }
}

/// Zeros of Z inside a rectangle: winding numbers isolate them on bisected
/// rectangles, Newton's method polishes them to |Z| < 1e-10 |Z(0)|. Sorted
/// by (|Im beta|, Re beta, Im beta).
pub fn find_zeros(pf: &PartitionFunction, rect: &Rectangle) -> Result<Vec<Zero>, ThermoError> {
    let (z_at_0, _) = pf.shifted(Complex64::new(0.0, 0.0));
    let searcher = Searcher {
        pf,
        floor: 1e-9 * z_at_0.norm(),
        target: 1e-11 * z_at_0.norm(),
    };
    // a zero on the outer edge: grow the rectangle slightly and keep the
    // zeros that belong to the closed original
    let mut slack = 0.0;
    let mut outcome = Err(ThermoError::InvalidInput("empty rectangle".into()));
    for attempt in 0..=SPLIT_RETRIES {
        let r = rect.grown(slack);
        outcome = searcher.winding(&r).and_then(|w| searcher.search(r, w, 0));
        match &outcome {
            Err(ThermoError::BoundaryZero { .. }) => slack = 1e-6 * rect.size() * 10f64.powi(attempt as i32),
            _ => break,
        }
    }
    let mut zeros: Vec<Zero> = outcome?
        .into_iter()
        .filter(|z| rect.contains(*z, slack))
        .map(|beta| Zero {
            beta,
            residual: pf.z(beta).norm(),
        })
        .collect();
    zeros.sort_by(|a, b| {
        (a.beta.im.abs(), a.beta.re, a.beta.im)
            .partial_cmp(&(b.beta.im.abs(), b.beta.re, b.beta.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(zeros)
}

/// Winding number of Z around a rectangle: the number of zeros inside.
pub fn zero_count(pf: &PartitionFunction, rect: &Rectangle) -> Result<i64, ThermoError> {
    let (z_at_0, _) = pf.shifted(Complex64::new(0.0, 0.0));
    Searcher {
        pf,
        floor: 1e-9 * z_at_0.norm(),
        target: 0.0,
    }
    .winding(rect)
}

/// C_V = beta^2 d^2 ln Z / d beta^2 by central differences.
pub fn specific_heat(pf: &PartitionFunction, beta: f64, step: f64) -> Result<f64, ThermoError> {
    let ln_z = |b: f64| -> Result<f64, ThermoError> {
        // ln Z = ln Z~ - b shift, with Z~ = e^{b shift} Z
        let z = pf.shifted(Complex64::new(b, 0.0)).0.re;
        if !(z > 0.0) {
            return Err(ThermoError::NonpositiveZ { beta: b, value: z });
        }
        Ok(z.ln() - b * pf.shift)
    };
    let d2 = (ln_z(beta + step)? - 2.0 * ln_z(beta)? + ln_z(beta - step)?) / (step * step);
    Ok(beta * beta * d2)
}

/// Z(0) e^{beta Z'(0)/Z(0)} prod_k (1 - beta/beta_k) e^{beta/beta_k}.
pub fn product_form(pf: &PartitionFunction, zeros: &[Complex64], beta: Complex64) -> Complex64 {
    let origin = Complex64::new(0.0, 0.0);
    let z0 = pf.z(origin);
    let mut p = z0 * (beta * pf.dz(origin) / z0).exp();
    for &bk in zeros {
        p *= (1.0 - beta / bk) * (beta / bk).exp();
    }
    p
}

/// Max relative deviation of the product over the K zeros nearest the
/// origin from Z, on `samples` points spanning the real window.
pub fn product_reconstruction(
    pf: &PartitionFunction,
    zeros: &[Zero],
    k: usize,
    window: (f64, f64),
    samples: usize,
) -> Result<f64, ThermoError> {
    if pf.z(Complex64::new(0.0, 0.0)).norm() == 0.0 {
        return Err(ThermoError::InvalidInput("Z(0) = 0".into()));
    }
    let mut nearest: Vec<Complex64> = zeros.iter().map(|z| z.beta).collect();
    nearest.sort_by(|a, b| {
        (a.norm(), a.im)
            .partial_cmp(&(b.norm(), b.im))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    nearest.truncate(k);
    let mut worst = 0.0f64;
    for i in 0..samples {
        let b = window.0 + (window.1 - window.0) * i as f64 / (samples - 1).max(1) as f64;
        let beta = Complex64::new(b, 0.0);
        let exact = pf.z(beta);
        worst = worst.max((product_form(pf, &nearest, beta) - exact).norm() / exact.norm());
    }
    Ok(worst)
}
