use fewbody::specfun::{kummer_1f1, SpecialFunctionError};
use fewbody::threebody::{
    apply_h_int, apply_h_mix, apply_h_par, cartesian_operator, ds3c_charges, jacobi_transform,
    potential_sum_check, JacobiSet, PairChannel, ParticleTriple, ThreeBodyConfig, ThreeBodyError,
};
use fewbody::Vec3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

fn random_config(rng: &mut ChaCha8Rng) -> ThreeBodyConfig {
    let triple = ParticleTriple::new(
        [rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0)],
        [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
    );
    ThreeBodyConfig::new(
        triple,
        JacobiSet {
            index: rng.gen_range(1..=3),
            r: random_vec(rng, 2.0),
            big_r: random_vec(rng, 2.0),
            k: random_vec(rng, 1.0),
            big_k: random_vec(rng, 1.0),
        },
    )
}

/// Interior point: every pair separation and every xi_1..3 comfortably
/// away from zero.
fn interior(c: &ThreeBodyConfig) -> bool {
    let xi = c.curvilinear().xi;
    xi.iter().all(|&x| x > 0.2) && c.pair_channels().iter().all(|p| p.k > 0.2)
}

fn product_distortion(pairs: [PairChannel; 3]) -> impl Fn(&[f64; 6]) -> Result<Complex64, SpecialFunctionError> {
    move |xi: &[f64; 6]| {
        let mut prod = Complex64::new(1.0, 0.0);
        for (j, p) in pairs.iter().enumerate() {
            let a = Complex64::new(0.0, p.sommerfeld());
            prod *= kummer_1f1(a, 1, Complex64::new(0.0, -p.k * xi[j]))?;
        }
        Ok(prod)
    }
}

#[test]
fn jacobi_invariants_hold_across_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let c = random_config(&mut rng);
        let s1 = c.set1;
        for target in [2, 3] {
            let s = jacobi_transform(&c.triple, &s1, target);
            let sp = s1.scalar_product();
            assert!((s.scalar_product() - sp).abs() <= 1e-12 * (1.0 + sp.abs()));
            let e = s1.energy(&c.triple);
            assert!((s.energy(&c.triple) - e).abs() <= 1e-12 * e);
        }
    }
}

#[test]
fn three_c_distortion_annihilates_h_par() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut tested = 0;
    while tested < 50 {
        let c = random_config(&mut rng);
        if !interior(&c) {
            continue;
        }
        tested += 1;
        let pairs = c.pair_channels();
        let field = product_distortion(pairs);
        let xi = c.curvilinear().xi;
        let h = apply_h_par(&field, &pairs, &xi, 1e-3).unwrap();
        let rel = h.norm() / field(&xi).unwrap().norm();
        assert!(rel <= 1e-5, "H_par residual {rel:e} at {xi:?}");
    }
}

#[test]
fn ds3c_distortion_annihilates_h_par_with_effective_charges() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut tested = 0;
    while tested < 50 {
        let k_a = random_vec(&mut rng, 1.0);
        let k_b = random_vec(&mut rng, 1.0);
        let k_ab = (k_a - k_b) / 2.0;
        if k_a.norm() < 0.2 || k_b.norm() < 0.2 || k_ab.norm() < 0.2 {
            continue;
        }
        let energy = (k_a.norm_squared() + k_b.norm_squared()) / 2.0;
        let q = ds3c_charges(&k_a, &k_b, energy, 1.0).unwrap();
        let pairs = [
            PairChannel { mu: 1.0, k: k_a.norm(), z: q.z_a },
            PairChannel { mu: 1.0, k: k_b.norm(), z: q.z_b },
            PairChannel { mu: 0.5, k: k_ab.norm(), z: q.z_ab },
        ];
        assert!((pairs[2].sommerfeld() - q.beta_ab).abs() < 1e-12 * q.beta_ab.abs().max(1.0));
        let r_a = random_vec(&mut rng, 2.0);
        let r_b = random_vec(&mut rng, 2.0);
        let mut xi = [0.0; 6];
        for (j, (k, r)) in [(k_a, r_a), (k_b, r_b), (k_ab, r_a - r_b)].iter().enumerate() {
            xi[j] = r.norm() + k.normalize().dot(r);
            xi[j + 3] = r.norm();
        }
        if xi.iter().any(|&x| x < 0.2) {
            continue;
        }
        tested += 1;
        let field = product_distortion(pairs);
        let h = apply_h_par(&field, &pairs, &xi, 1e-3).unwrap();
        let rel = h.norm() / field(&xi).unwrap().norm();
        assert!(rel <= 1e-5, "H_par residual {rel:e} at {xi:?}");
    }
}

#[test]
fn operator_splitting_is_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut tested = 0;
    let mut worst = 0.0f64;
    while tested < 20 {
        let c = random_config(&mut rng);
        if !interior(&c) {
            continue;
        }
        let pairs = c.pair_channels();
        let distortion = product_distortion(pairs);
        let field = move |xi: &[f64; 6]| -> Result<Complex64, SpecialFunctionError> {
            let extra = Complex64::new(
                1.0 + 0.2 * xi[3] * xi[4] / (1.0 + xi[5]),
                0.1 * xi[0] * xi[5] - 0.05 * xi[1] * xi[2],
            );
            Ok(distortion(xi)? * extra)
        };
        let h = 1e-3;
        let xi = c.curvilinear().xi;
        let mix = match apply_h_mix(&field, &c, h) {
            Ok(v) => v,
            Err(ThreeBodyError::DegenerateJacobian { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        tested += 1;
        let split = apply_h_par(&field, &pairs, &xi, h).unwrap()
            + apply_h_int(&field, &pairs, &xi, h).unwrap()
            + mix;
        let oracle = cartesian_operator(&field, &c, h).unwrap();
        let rel = (split - oracle).norm() / oracle.norm();
        worst = worst.max(rel);
        assert!(rel <= 1e-4, "split {split} vs Cartesian {oracle}: {rel:e}");
    }
    eprintln!("worst splitting deviation {worst:e}");
}

#[test]
fn potential_identity_on_random_velocities() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let energy = 10f64.powf(rng.gen_range(-3.0..3.0));
        let v = (2.0 * energy).sqrt();
        let share = rng.gen_range(0.0..1.0f64);
        let dir_a = random_vec(&mut rng, 1.0).normalize();
        let dir_b = random_vec(&mut rng, 1.0).normalize();
        let v_a = dir_a * v * share.sqrt();
        let v_b = dir_b * v * (1.0 - share).sqrt();
        let q = ds3c_charges(&v_a, &v_b, energy, 1.0).unwrap();
        let d = potential_sum_check(&q, &v_a, &v_b);
        worst = worst.max(d);
        assert!(d <= 1e-12, "{d:e} for {v_a:?} {v_b:?} E={energy}");
    }
    eprintln!("worst potential identity defect {worst:e}");
}
