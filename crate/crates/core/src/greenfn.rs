//! Faddeev-type recursion for the N-body transition and Green operators on
//! a finite model space.
//!
//! The total potential is a sum of pair terms, U = sum_{i<j} v_ij. Writing
//! U = sum_j u~_j with u~_j = u_j/(N-2), u_j the potential with particle j
//! removed, the transition operator splits as T = sum_j T_j with
//!
//! T_j = t_j + t_j G0 sum_{k != j} T_k,   t_j = u~_j + u~_j G0 t_j,
//!
//! and G = G0 + sum_j G_j with G_j = G0 T_j G0. Every operator here is a dense
//! matrix, so each identity can be checked against a direct inversion.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Solves whose matrix has a larger 1-norm condition number are refused.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GreenError {
    #[error("kernel is numerically singular (condition number {condition:.3e})")]
    SingularKernel { condition: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model space: {0}")]
    InvalidSpace(String),
    #[error("model-space file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// H0 and the pair potentials v_ij (0-based, i < j) of an N-particle system
/// represented on a common dim-dimensional basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpace {
    particles: usize,
    h0: CMatrix,
    pairs: BTreeMap<(usize, usize), CMatrix>,
}

fn is_hermitian(m: &CMatrix) -> bool {
    let scale = m.norm().max(1.0);
    (m - m.adjoint()).norm() <= 1e-12 * scale
}

impl ModelSpace {
    pub fn new(
        particles: usize,
        h0: CMatrix,
        pairs: BTreeMap<(usize, usize), CMatrix>,
    ) -> Result<Self, GreenError> {
        if particles < 3 {
            return Err(GreenError::InvalidSpace(format!(
                "need at least 3 particles, got {particles}"
            )));
        }
        let dim = h0.nrows();
        if h0.ncols() != dim || dim == 0 {
            return Err(GreenError::InvalidSpace("H0 must be square and nonempty".into()));
        }
        if !is_hermitian(&h0) {
            return Err(GreenError::InvalidSpace("H0 is not Hermitian".into()));
        }
        for (&(i, j), v) in &pairs {
            if i >= j || j >= particles {
                return Err(GreenError::InvalidSpace(format!("bad pair ({i}, {j})")));
            }
            if v.nrows() != dim || v.ncols() != dim {
                return Err(GreenError::DimensionMismatch {
                    expected: dim,
                    found: v.nrows(),
                });
            }
            if !is_hermitian(v) {
                return Err(GreenError::InvalidSpace(format!("v_{}{} is not Hermitian", i + 1, j + 1)));
            }
        }
        Ok(Self { particles, h0, pairs })
    }

    /// Diagonal H0 with levels uniform in [0, 1] and random Hermitian pair
    /// potentials of spectral size about `coupling`.
    pub fn random(seed: u64, particles: usize, dim: usize, coupling: f64) -> Result<Self, GreenError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut levels: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
        levels.sort_by(f64::total_cmp);
        let h0 = CMatrix::from_diagonal(&CVector::from_iterator(
            dim,
            levels.iter().map(|&e| Complex64::new(e, 0.0)),
        ));
        let mut pairs = BTreeMap::new();
        for i in 0..particles {
            for j in i + 1..particles {
                pairs.insert((i, j), random_hermitian(&mut rng, dim, coupling));
            }
        }
        Self::new(particles, h0, pairs)
    }

    /// Reads the plain-text format
    ///
    /// ```text
    /// particles 3
    /// dim 2
    /// h0 0.0 0.5
    /// v 1 2  0 1  0.05 0.01   # pair (1,2), entry (0,1) = 0.05 + 0.01i
    /// ```
    ///
    /// Particle numbers are 1-based, matrix indices 0-based; each `v` line
    /// also sets the Hermitian partner entry.
    pub fn from_text(text: &str) -> Result<Self, GreenError> {
        let mut particles = None;
        let mut dim = None;
        let mut h0 = None;
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = no + 1;
            let err = |message: String| GreenError::Parse { line, message };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut words = content.split_whitespace();
            let key = words.next().unwrap_or_default();
            let nums: Vec<f64> = words
                .map(|w| w.parse::<f64>().map_err(|e| err(format!("{w}: {e}"))))
                .collect::<Result<_, _>>()?;
            let as_index = |x: f64| -> Result<usize, GreenError> {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as usize)
                } else {
                    Err(err(format!("{x} is not an index")))
                }
            };
            match key {
                "particles" | "dim" => {
                    if nums.len() != 1 {
                        return Err(err(format!("{key} takes one value")));
                    }
                    let n = as_index(nums[0])?;
                    if key == "dim" {
                        dim = Some(n);
                    } else {
                        particles = Some(n);
                    }
                }
                "h0" => h0 = Some(nums),
                "v" => {
                    if nums.len() != 6 {
                        return Err(err("v takes: i j row col re im".into()));
                    }
                    let (i, j) = (as_index(nums[0])?, as_index(nums[1])?);
                    if i == 0 || j == 0 || i == j {
                        return Err(err("particles are numbered from 1 and distinct".into()));
                    }
                    let pair = (i.min(j) - 1, i.max(j) - 1);
                    let (r, c) = (as_index(nums[2])?, as_index(nums[3])?);
                    entries.push((line, pair, r, c, Complex64::new(nums[4], nums[5])));
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        let missing = |what: &str| GreenError::Parse {
            line: 0,
            message: format!("missing '{what}'"),
        };
        let particles = particles.ok_or_else(|| missing("particles"))?;
        let dim = dim.ok_or_else(|| missing("dim"))?;
        let h0 = h0.ok_or_else(|| missing("h0"))?;
        if h0.len() != dim {
            return Err(GreenError::DimensionMismatch {
                expected: dim,
                found: h0.len(),
            });
        }
        let h0 = CMatrix::from_diagonal(&CVector::from_iterator(dim, h0.iter().map(|&e| Complex64::new(e, 0.0))));
        let mut pairs: BTreeMap<(usize, usize), CMatrix> = BTreeMap::new();
        for (line, pair, r, c, value) in entries {
            if r >= dim || c >= dim {
                return Err(GreenError::Parse {
                    line,
                    message: format!("entry ({r}, {c}) outside dim {dim}"),
                });
            }
            if r == c && value.im != 0.0 {
                return Err(GreenError::Parse {
                    line,
                    message: "diagonal entries must be real".into(),
                });
            }
            let v = pairs.entry(pair).or_insert_with(|| CMatrix::zeros(dim, dim));
            v[(r, c)] = value;
            v[(c, r)] = value.conj();
        }
        Self::new(particles, h0, pairs)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &CMatrix {
        &self.h0
    }

    pub fn pair(&self, i: usize, j: usize) -> Option<&CMatrix> {
        self.pairs.get(&(i.min(j), i.max(j)))
    }

    pub fn pairs(&self) -> &BTreeMap<(usize, usize), CMatrix> {
        &self.pairs
    }

    /// The same space with every pair potential multiplied by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            particles: self.particles,
            h0: self.h0.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|(&k, v)| (k, v * Complex64::new(lambda, 0.0)))
                .collect(),
        }
    }

    /// The same space keeping only the listed pairs.
    pub fn restricted(&self, keep: &[(usize, usize)]) -> Self {
        Self {
            particles: self.particles,
            h0: self.h0.clone(),
            pairs: self
                .pairs
                .iter()
                .filter(|(k, _)| keep.contains(k))
                .map(|(&k, v)| (k, v.clone()))
                .collect(),
        }
    }

    /// U = sum over pairs of v_ij.
    pub fn total_potential(&self) -> CMatrix {
        let d = self.dim();
        self.pairs.values().fold(CMatrix::zeros(d, d), |acc, v| acc + v)
    }

    /// u_j: the potential of the N-1 particles left when j is removed.
    pub fn subsystem_potential(&self, j: usize) -> CMatrix {
        let d = self.dim();
        self.pairs
            .iter()
            .filter(|(&(m, n), _)| m != j && n != j)
            .fold(CMatrix::zeros(d, d), |acc, (_, v)| acc + v)
    }

    pub fn hamiltonian(&self) -> CMatrix {
        &self.h0 + self.total_potential()
    }

    /// Width of the H0 spectrum.
    pub fn spectral_range(&self) -> f64 {
        let levels = self.h0.clone().symmetric_eigenvalues();
        let lo = levels.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo).max(f64::EPSILON)
    }
}

/// A + A^dagger over 2 with entries uniform in the unit square, scaled so
/// the spectrum has size about `scale`.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize, scale: f64) -> CMatrix {
    let a = CMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let h = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    h * Complex64::new(scale / (dim as f64).sqrt(), 0.0)
}

/// Complex energy at which resolvents are taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventQuery {
    pub energy: Complex64,
}

impl ResolventQuery {
    pub fn new(energy: Complex64) -> Self {
        Self { energy }
    }

    /// E + i eta with the default broadening eta = 1e-3 of the H0 spectral range.
    pub fn broadened(space: &ModelSpace, e: f64) -> Self {
        Self::new(Complex64::new(e, 1e-3 * space.spectral_range()))
    }
}

fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// X with A X = B, refusing ill-conditioned A. One step of iterative
/// refinement follows the dense solve.
pub fn solve_checked(a: &CMatrix, b: &CMatrix) -> Result<CMatrix, GreenError> {
    let inv = a.clone().try_inverse().ok_or(GreenError::SingularKernel {
        condition: f64::INFINITY,
    })?;
    let condition = norm1(a) * norm1(&inv);
    if !(condition <= MAX_CONDITION) {
        return Err(GreenError::SingularKernel { condition });
    }
    let mut x = &inv * b;
    let r = b - a * &x;
    x += &inv * r;
    Ok(x)
}

/// (E - H)^{-1}.
pub fn resolvent(h: &CMatrix, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    let d = h.nrows();
    let a = CMatrix::identity(d, d) * query.energy - h;
    solve_checked(&a, &CMatrix::identity(d, d))
}

/// G0 = (E - H0)^{-1}.
pub fn free_green(space: &ModelSpace, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    resolvent(space.h0(), query)
}

/// u~_j = u_j/(N-2) for j = 0..N; their sum is U.
pub fn scaled_subsystem_potentials(space: &ModelSpace) -> Vec<CMatrix> {
    let scale = Complex64::new(1.0 / (space.particles() - 2) as f64, 0.0);
    (0..space.particles())
        .map(|j| space.subsystem_potential(j) * scale)
        .collect()
}

fn subsystem_t_with(u: &CMatrix, g0: &CMatrix) -> Result<CMatrix, GreenError> {
    let d = u.nrows();
    solve_checked(&(CMatrix::identity(d, d) - u * g0), u)
}

/// t_j from (1 - u~_j G0) t_j = u~_j.
pub fn subsystem_t(space: &ModelSpace, j: usize, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    if j >= space.particles() {
        return Err(GreenError::InvalidSpace(format!("no particle {j}")));
    }
    let g0 = free_green(space, query)?;
    let u = scaled_subsystem_potentials(space).swap_remove(j);
    subsystem_t_with(&u, &g0)
}

/// Operator components and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub components: Vec<CMatrix>,
    pub total: CMatrix,
}

/// The N d x N d block kernel with block (j, k) = left_j right for k != j and
/// zero diagonal blocks.
fn block_kernel(left: &[CMatrix], right: &CMatrix) -> CMatrix {
    let n = left.len();
    let d = right.nrows();
    let products: Vec<CMatrix> = left.par_iter().map(|l| l * right).collect();
    let mut k = CMatrix::zeros(n * d, n * d);
    for (j, p) in products.iter().enumerate() {
        for c in (0..n).filter(|&c| c != j) {
            k.view_mut((j * d, c * d), (d, d)).copy_from(p);
        }
    }
    k
}

fn stack(blocks: &[CMatrix]) -> CMatrix {
    let d = blocks[0].nrows();
    let mut s = CMatrix::zeros(blocks.len() * d, blocks[0].ncols());
    for (j, b) in blocks.iter().enumerate() {
        s.view_mut((j * d, 0), (d, b.ncols())).copy_from(b);
    }
    s
}

fn unstack(s: &CMatrix, n: usize) -> Vec<CMatrix> {
    let d = s.nrows() / n;
    (0..n).map(|j| s.rows(j * d, d).into_owned()).collect()
}

fn solve_blocks(kernel: &CMatrix, rhs: &[CMatrix]) -> Result<Decomposition, GreenError> {
    let n = rhs.len();
    let a = CMatrix::identity(kernel.nrows(), kernel.ncols()) - kernel;
    let x = solve_checked(&a, &stack(rhs))?;
    let components = unstack(&x, n);
    let d = components[0].nrows();
    let total = components.iter().fold(CMatrix::zeros(d, d), |acc, c| acc + c);
    Ok(Decomposition { components, total })
}

/// All t_j at the query energy, with G0.
pub fn subsystem_ts(space: &ModelSpace, query: &ResolventQuery) -> Result<(Vec<CMatrix>, CMatrix), GreenError> {
    let g0 = free_green(space, query)?;
    let ts = scaled_subsystem_potentials(space)
        .par_iter()
        .map(|u| subsystem_t_with(u, &g0))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((ts, g0))
}

/// The kernel [K] with blocks t_j G0 off the diagonal.
pub fn faddeev_kernel(space: &ModelSpace, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    let (ts, g0) = subsystem_ts(space, query)?;
    Ok(block_kernel(&ts, &g0))
}

/// Solves T_j = t_j + t_j G0 sum_{k != j} T_k; the total is T = sum_j T_j.
pub fn faddeev_solve(space: &ModelSpace, query: &ResolventQuery) -> Result<Decomposition, GreenError> {
    let (ts, g0) = subsystem_ts(space, query)?;
    solve_blocks(&block_kernel(&ts, &g0), &ts)
}

/// Solves G_j = (g_j - G0) + G0 t_j sum_{k != j} G_k, the T-equation
/// conjugated by G0, with g_j = (E - H0 - u~_j)^{-1}. The total is
/// G = G0 + sum_j G_j.
pub fn green_expand(space: &ModelSpace, query: &ResolventQuery) -> Result<Decomposition, GreenError> {
    let (ts, g0) = subsystem_ts(space, query)?;
    // G0 [K] G0^{-1}: block (j, k) is G0 t_j
    let left: Vec<CMatrix> = ts.iter().map(|t| &g0 * t).collect();
    let d = space.dim();
    let rhs = scaled_subsystem_potentials(space)
        .par_iter()
        .map(|u| resolvent(&(space.h0() + u), query).map(|g| g - &g0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut sol = solve_blocks(&block_kernel(&left, &CMatrix::identity(d, d)), &rhs)?;
    sol.total += g0;
    Ok(sol)
}

/// Oracle: T from (1 - U G0) T = U by one dense solve.
pub fn direct_t(space: &ModelSpace, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    let g0 = free_green(space, query)?;
    let u = space.total_potential();
    let d = space.dim();
    solve_checked(&(CMatrix::identity(d, d) - &u * &g0), &u)
}

/// Oracle: G = (E - H0 - U)^{-1}.
pub fn direct_green(space: &ModelSpace, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    resolvent(&space.hamiltonian(), query)
}

/// First iteration for four particles: sum_j g_j - 3 G0 with
/// g_j = (E - H0 - u~_j)^{-1}.
pub fn g4_first_iteration(space: &ModelSpace, query: &ResolventQuery) -> Result<CMatrix, GreenError> {
    if space.particles() != 4 {
        return Err(GreenError::InvalidSpace(format!(
            "first iteration is defined for 4 particles, got {}",
            space.particles()
        )));
    }
    // G0 + sum_j (g_j - G0), so the free case returns G0 bit for bit
    let g0 = free_green(space, query)?;
    let mut g = g0.clone();
    for u in scaled_subsystem_potentials(space) {
        g += resolvent(&(space.h0() + u), query)? - &g0;
    }
    Ok(g)
}

/// |psi_234> + |psi_134> + |psi_124> + |psi_123> - 3 |phi_free>.
pub fn psi4_first_order(three_body: &[CVector; 4], free: &CVector) -> Result<CVector, GreenError> {
    let mut psi = free * Complex64::new(-3.0, 0.0);
    for s in three_body {
        if s.len() != free.len() {
            return Err(GreenError::DimensionMismatch {
                expected: free.len(),
                found: s.len(),
            });
        }
        psi += s;
    }
    Ok(psi)
}

/// phi + (E - H0 - V)^{-1} V phi: the state grown out of phi by V.
pub fn scattering_state(
    h0: &CMatrix,
    potential: &CMatrix,
    query: &ResolventQuery,
    free: &CVector,
) -> Result<CVector, GreenError> {
    let g = resolvent(&(h0 + potential), query)?;
    Ok(free + g * (potential * free))
}

/// Three-body states for the four-body sum: particle j is left free, the
/// other three interact through u~_j. Returned in the order
/// psi_234, psi_134, psi_124, psi_123.
pub fn three_body_states(
    space: &ModelSpace,
    query: &ResolventQuery,
    free: &CVector,
) -> Result<[CVector; 4], GreenError> {
    if space.particles() != 4 {
        return Err(GreenError::InvalidSpace("three-body states need 4 particles".into()));
    }
    let u = scaled_subsystem_potentials(space);
    let states = u
        .iter()
        .map(|u| scattering_state(space.h0(), u, query, free))
        .collect::<Result<Vec<_>, _>>()?;
    Ok([
        states[0].clone(),
        states[1].clone(),
        states[2].clone(),
        states[3].clone(),
    ])
}

/// Frobenius-norm relative difference |a - b|/|b|.
pub fn relative_difference(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn three_particles_use_unscaled_subsystem_potentials() {
        let space = ModelSpace::random(1, 3, 4, 0.2).unwrap();
        let u = scaled_subsystem_potentials(&space);
        assert_eq!(u[0], space.pair(1, 2).unwrap().clone());
        assert_eq!(u[2], space.pair(0, 1).unwrap().clone());
    }

    #[test]
    fn free_space_gives_zero_t() {
        let space = ModelSpace::random(2, 4, 5, 0.3).unwrap().scaled(0.0);
        let q = ResolventQuery::broadened(&space, 0.4);
        let sol = faddeev_solve(&space, &q).unwrap();
        assert!(sol.components.iter().all(|t| t.norm() == 0.0));
        let g = green_expand(&space, &q).unwrap();
        assert_eq!(g.total, free_green(&space, &q).unwrap());
    }

    #[test]
    fn scalar_t_is_a_geometric_series() {
        let mut pairs = BTreeMap::new();
        pairs.insert((1, 2), CMatrix::from_element(1, 1, c(0.3)));
        let space = ModelSpace::new(3, CMatrix::from_element(1, 1, c(0.5)), pairs).unwrap();
        let q = ResolventQuery::new(Complex64::new(1.2, 0.1));
        let g0 = Complex64::new(1.0, 0.0) / (q.energy - 0.5);
        let t = subsystem_t(&space, 0, &q).unwrap()[(0, 0)];
        let expect = c(0.3) / (c(1.0) - 0.3 * g0);
        assert!((t - expect).norm() < 1e-15);
    }

    #[test]
    fn kernel_diagonal_blocks_vanish() {
        let space = ModelSpace::random(3, 3, 4, 0.2).unwrap();
        let q = ResolventQuery::broadened(&space, 0.5);
        let k = faddeev_kernel(&space, &q).unwrap();
        for j in 0..3 {
            assert_eq!(k.view((4 * j, 4 * j), (4, 4)).norm(), 0.0);
        }
    }

    #[test]
    fn text_format_round_trip() {
        let text = "particles 3\ndim 2\nh0 0.0 0.5\nv 1 2 0 1 0.05 0.01 # off-diagonal\nv 2 3 1 1 -0.2 0\n";
        let space = ModelSpace::from_text(text).unwrap();
        assert_eq!(space.dim(), 2);
        let v = space.pair(0, 1).unwrap();
        assert_eq!(v[(1, 0)], Complex64::new(0.05, -0.01));
        assert_eq!(space.pair(1, 2).unwrap()[(1, 1)], c(-0.2));
        assert!(ModelSpace::from_text("particles 3\ndim 2\nh0 0\n").is_err());
        assert!(matches!(
            ModelSpace::from_text("particles 3\ndim 1\nh0 0\nw 1\n"),
            Err(GreenError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn rejects_bad_spaces() {
        let h0 = CMatrix::identity(2, 2);
        assert!(ModelSpace::new(2, h0.clone(), BTreeMap::new()).is_err());
        let mut pairs = BTreeMap::new();
        pairs.insert((0, 1), CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        assert!(ModelSpace::new(3, h0, pairs).is_err());
    }

    #[test]
    fn singular_solve_is_reported() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(4.0)]);
        assert!(matches!(
            solve_checked(&a, &CMatrix::identity(2, 2)),
            Err(GreenError::SingularKernel { .. })
        ));
    }
}
