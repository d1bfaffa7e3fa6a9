use std::f64::consts::PI;

use fewbody::specfun::{gamma, kummer_1f1};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Parameters in the Sommerfeld range, arguments within 0.4 rad of the
/// imaginary axis and |z| log-uniform in [0.1, 1000].
fn random_case(rng: &mut ChaCha8Rng) -> (Complex64, u32, Complex64) {
    let a = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-3.0..3.0));
    let b = rng.gen_range(1..=2);
    let side = if rng.gen_bool(0.5) { PI / 2.0 } else { -PI / 2.0 };
    let theta = side + rng.gen_range(-0.4..0.4);
    let rho = 10f64.powf(rng.gen_range(-1.0..3.0));
    (a, b, Complex64::from_polar(rho, theta))
}

#[test]
fn kummer_transformation_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b, z) = random_case(&mut rng);
        let lhs = kummer_1f1(a, b, z).unwrap();
        let rhs = z.exp() * kummer_1f1(b as f64 - a, b, -z).unwrap();
        let r = (lhs - rhs).norm() / lhs.norm();
        worst = worst.max(r);
        assert!(r < 1e-9, "a={a} b={b} z={z}: {r:e}");
    }
    eprintln!("worst Kummer-transformation deviation {worst:e}");
}

#[test]
fn derivative_identity_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let h = 1e-5;
    for _ in 0..1000 {
        let (a, b, z) = random_case(&mut rng);
        let fd = (kummer_1f1(a, b, z + h).unwrap() - kummer_1f1(a, b, z - h).unwrap()) / (2.0 * h);
        let exact = a / b as f64 * kummer_1f1(a + 1.0, b + 1, z).unwrap();
        let scale = exact.norm().max(kummer_1f1(a, b, z).unwrap().norm());
        let r = (fd - exact).norm() / scale;
        assert!(r < 1e-6, "a={a} b={b} z={z}: {r:e}");
    }
}

#[test]
fn contiguity_relation_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let (a, b, z) = random_case(&mut rng);
        let bf = b as f64;
        let t1 = bf * kummer_1f1(a, b, z).unwrap();
        let t2 = bf * kummer_1f1(a - 1.0, b, z).unwrap();
        let t3 = z * kummer_1f1(a, b + 1, z).unwrap();
        let scale = t1.norm().max(t2.norm()).max(t3.norm());
        let r = (t1 - t2 - t3).norm() / scale;
        assert!(r < 1e-9, "a={a} b={b} z={z}: {r:e}");
    }
}

#[test]
fn gamma_reflection_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..1000 {
        let z = Complex64::new(rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0));
        let lhs = gamma(z).unwrap() * gamma(1.0 - z).unwrap();
        let rhs = PI / (PI * z).sin();
        assert!((lhs - rhs).norm() / rhs.norm() < 1e-12, "z={z}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn gamma_recurrence(re in -20.0f64..20.0, im in -20.0f64..20.0) {
        let z = Complex64::new(re, im);
        prop_assume!(im.abs() > 1e-3 || (re - re.round()).abs() > 1e-3);
        let lhs = gamma(z + 1.0).unwrap();
        let rhs = z * gamma(z).unwrap();
        prop_assert!((lhs - rhs).norm() / lhs.norm() < 1e-12);
    }

    #[test]
    fn one_f_one_of_zero_argument_is_one(re in -5.0f64..5.0, im in -5.0f64..5.0, b in 1u32..4) {
        let v = kummer_1f1(Complex64::new(re, im), b, Complex64::new(0.0, 0.0)).unwrap();
        prop_assert_eq!(v, Complex64::new(1.0, 0.0));
    }
}
