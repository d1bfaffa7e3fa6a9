//! Jacobi coordinates of a three-particle system.
//!
//! Convention: set k pairs particles (i, j) with i < j and k the spectator,
//! r_ij = x_i - x_j and R_k = x_k - CM(i, j); set 1 = (r_23, R_1),
//! set 2 = (r_13, R_2), set 3 = (r_12, R_3). Momenta are the conjugates
//! (k_ij, K_k). Sets 2 and 3 follow from set 1 through the 2x2 mass matrices
//! D1 and D2; momenta transform with the inverse transposes so that
//! r.k + R.K is the same in every set.

use crate::Vec3;

use super::ParticleTriple;

type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiSet {
    /// 1, 2 or 3: the spectator particle (1-based).
    pub index: usize,
    pub r: Vec3,
    pub big_r: Vec3,
    pub k: Vec3,
    pub big_k: Vec3,
}

/// Particle indices (0-based) of the pair belonging to set `index`.
pub fn pair_of(index: usize) -> (usize, usize) {
    match index {
        1 => (1, 2),
        2 => (0, 2),
        3 => (0, 1),
        _ => panic!("Jacobi set index must be 1, 2 or 3, got {index}"),
    }
}

/// (r_13, R_2) = D1 (r_23, R_1)
pub fn d1(t: &ParticleTriple) -> Mat2 {
    let m3 = t.m[2];
    let mu23 = t.mu_pair(1);
    let mu13 = t.mu_pair(2);
    [
        [mu23 / m3, 1.0],
        [1.0 - mu13 * mu23 / (m3 * m3), -mu13 / m3],
    ]
}

/// (r_12, R_3) = D2 (r_23, R_1)
pub fn d2(t: &ParticleTriple) -> Mat2 {
    let m2 = t.m[1];
    let mu23 = t.mu_pair(1);
    let mu12 = t.mu_pair(3);
    [
        [-mu23 / m2, 1.0],
        [-1.0 + mu12 * mu23 / (m2 * m2), -mu12 / m2],
    ]
}

fn apply(m: &Mat2, a: &Vec3, b: &Vec3) -> (Vec3, Vec3) {
    (m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b)
}

fn inverse(m: &Mat2) -> Mat2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [
        [m[1][1] / det, -m[0][1] / det],
        [-m[1][0] / det, m[0][0] / det],
    ]
}

fn transpose(m: &Mat2) -> Mat2 {
    [[m[0][0], m[1][0]], [m[0][1], m[1][1]]]
}

/// Matrix taking set-1 coordinates to set `index` coordinates.
fn from_set1(t: &ParticleTriple, index: usize) -> Mat2 {
    match index {
        1 => [[1.0, 0.0], [0.0, 1.0]],
        2 => d1(t),
        3 => d2(t),
        _ => panic!("Jacobi set index must be 1, 2 or 3, got {index}"),
    }
}

pub fn jacobi_transform(t: &ParticleTriple, source: &JacobiSet, target: usize) -> JacobiSet {
    if source.index == target {
        return *source;
    }
    // coordinates: x_t = A_t x_1; momenta: p_1 = A_t^T p_t
    let to1 = inverse(&from_set1(t, source.index));
    let (r1, big_r1) = apply(&to1, &source.r, &source.big_r);
    let (k1, big_k1) = apply(&transpose(&from_set1(t, source.index)), &source.k, &source.big_k);
    let a = from_set1(t, target);
    let (r, big_r) = apply(&a, &r1, &big_r1);
    let (k, big_k) = apply(&inverse(&transpose(&a)), &k1, &big_k1);
    JacobiSet {
        index: target,
        r,
        big_r,
        k,
        big_k,
    }
}

/// Particle positions and momenta in the centre-of-mass frame.
pub fn to_particles(t: &ParticleTriple, set: &JacobiSet) -> ([Vec3; 3], [Vec3; 3]) {
    let (i, j) = pair_of(set.index);
    let s = set.index - 1;
    let (mi, mj, ms) = (t.m[i], t.m[j], t.m[s]);
    let mij = mi + mj;
    let total = mij + ms;
    let mut x = [Vec3::zeros(); 3];
    let mut p = [Vec3::zeros(); 3];
    let cm_pair = -ms / total * set.big_r;
    x[s] = mij / total * set.big_r;
    x[i] = cm_pair + mj / mij * set.r;
    x[j] = cm_pair - mi / mij * set.r;
    p[s] = set.big_k;
    p[i] = set.k - mi / mij * set.big_k;
    p[j] = -set.k - mj / mij * set.big_k;
    (x, p)
}

/// Jacobi set `index` built from centre-of-mass-frame particle data.
pub fn from_particles(t: &ParticleTriple, index: usize, x: &[Vec3; 3], p: &[Vec3; 3]) -> JacobiSet {
    let (i, j) = pair_of(index);
    let s = index - 1;
    let (mi, mj) = (t.m[i], t.m[j]);
    let cm_pair = (mi * x[i] + mj * x[j]) / (mi + mj);
    JacobiSet {
        index,
        r: x[i] - x[j],
        big_r: x[s] - cm_pair,
        k: (mj * p[i] - mi * p[j]) / (mi + mj),
        big_k: p[s],
    }
}

impl JacobiSet {
    pub fn scalar_product(&self) -> f64 {
        self.r.dot(&self.k) + self.big_r.dot(&self.big_k)
    }

    /// Kinetic energy k^2/2mu_ij + K^2/2mu_k.
    pub fn energy(&self, t: &ParticleTriple) -> f64 {
        self.k.norm_squared() / (2.0 * t.mu_pair(self.index))
            + self.big_k.norm_squared() / (2.0 * t.mu_spectator(self.index))
    }
}
