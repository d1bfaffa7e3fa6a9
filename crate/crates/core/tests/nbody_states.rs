use std::f64::consts::PI;

use fewbody::nbody::{
    cusp_check, electron_ensemble, f_function, flux_check, nbody_normalization, nbody_wave,
    remainder_r, remainder_scan, sphere_average_factor, Channel, Dilation, NBodySystem,
};
use fewbody::scan::{loglog_slope, DilationWindow};
use fewbody::specfun::coulomb_norm_factor;
use fewbody::threebody::{three_body_wave, EffectiveCharges};
use fewbody::twobody::schrodinger_defect;
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

fn flat(positions: &[Vec3]) -> Vec<f64> {
    positions.iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect()
}

fn unflat(x: &[f64]) -> Vec<Vec3> {
    x.chunks(3).map(|c| Vec3::new(c[0], c[1], c[2])).collect()
}

#[test]
fn two_electrons_reduce_to_the_three_body_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..100 {
        let z = rng.gen_range(0.5..2.0);
        let k_a = random_vec(&mut rng, 1.0);
        let k_b = random_vec(&mut rng, 1.0);
        let sys = NBodySystem::new(z, vec![-1.0, -1.0], 1.0, vec![k_a, k_b]).unwrap();
        let r_a = random_vec(&mut rng, 5.0);
        let r_b = random_vec(&mut rng, 5.0);
        let psi_n = nbody_wave(&sys, &[r_a, r_b]).unwrap();
        let charges = EffectiveCharges::three_c(z, &k_a, &k_b);
        let psi_3 = three_body_wave(&charges, &k_a, &k_b, &r_a, &r_b).unwrap() * (2.0 * PI).powi(-3);
        assert!((psi_n - psi_3).norm() <= 1e-12 * psi_3.norm(), "{psi_n} vs {psi_3}");
        let norm_3: Complex64 = [charges.beta_a, charges.beta_b, charges.beta_ab]
            .iter()
            .map(|&b| coulomb_norm_factor(b).unwrap())
            .product::<Complex64>()
            * (2.0 * PI).powi(-3);
        let norm_n = nbody_normalization(&sys).unwrap();
        assert!((norm_n - norm_3).norm() <= 1e-13 * norm_3.norm());
    }
}

#[test]
fn neutral_particle_factorizes() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for _ in 0..50 {
        let momenta: Vec<Vec3> = (0..3).map(|_| random_vec(&mut rng, 1.0)).collect();
        let pos: Vec<Vec3> = (0..3).map(|_| random_vec(&mut rng, 4.0)).collect();
        let full = NBodySystem::new(1.5, vec![-1.0, 1.0, 0.0], 1.0, momenta.clone()).unwrap();
        let reduced = NBodySystem::new(1.5, vec![-1.0, 1.0], 1.0, momenta[..2].to_vec()).unwrap();
        let lhs = nbody_wave(&full, &pos).unwrap();
        let rhs = nbody_wave(&reduced, &pos[..2]).unwrap()
            * (2.0 * PI).powf(-1.5)
            * Complex64::new(0.0, momenta[2].dot(&pos[2])).exp();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    }
}

#[test]
fn remainder_is_the_schrodinger_defect() {
    // (H - E) Psi = -(R/m) Psi: the finite-difference Hamiltonian and the
    // F-function formula are independent routes to the same quantity.
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    let mut worst = 0.0f64;
    for n in [2, 3] {
        for (i, (sys, pos)) in electron_ensemble(64 + n as u64, n, 1.0, 20, None).into_iter().enumerate() {
            let mass = if i % 2 == 0 { 1.0 } else { rng.gen_range(0.5..2.0) };
            let sys = NBodySystem { mass, ..sys };
            let x = flat(&pos);
            let field = |y: &[f64]| {
                nbody_wave(&sys, &unflat(y)).map_err(|e| match e {
                    fewbody::nbody::NBodyError::Special(s) => s,
                    other => panic!("{other}"),
                })
            };
            let ham = sys.hamiltonian();
            let e = sys.energy();
            let h = 2e-3;
            let (fine, psi) = schrodinger_defect(&field, &ham, e, &x, h).unwrap();
            let (coarse, _) = schrodinger_defect(&field, &ham, e, &x, 2.0 * h).unwrap();
            let defect = (4.0 * fine - coarse) / 3.0 / psi;
            let r = remainder_r(&sys, &pos).unwrap();
            let d = (defect + r / mass).norm() / (r / mass).norm().max(1e-3);
            worst = worst.max(d);
            assert!(d <= 1e-5, "N={n}: FD {defect} vs -R/m {} ({d:e})", -r / mass);
        }
    }
    eprintln!("worst defect/remainder mismatch {worst:e}");
}

#[test]
fn f_function_approaches_its_asymptotic_form_on_average() {
    // Pointwise, 1F1(1+ia,2,w)/1F1(ia,1,w) = -1/w (1 + c e^w) + O(w^-2)
    // with |c| = 1: the outgoing spherical-wave part modulates |F| at
    // order one. Averaged over one period of e^w the leading term remains.
    let sys = NBodySystem::new(
        1.0,
        vec![-1.0, -1.0],
        1.0,
        vec![Vec3::new(0.7, 0.3, -0.2), Vec3::new(-0.4, 0.5, 0.6)],
    )
    .unwrap();
    for c in [Channel::Ion(0), Channel::Pair(0, 1)] {
        let k = sys.channel_momentum(c);
        let dir = Vec3::new(0.3, -0.8, 0.5).normalize();
        let other = Vec3::new(2.0, 1.0, -1.0);
        let samples = 64;
        let mut mean = [Complex64::new(0.0, 0.0); 3];
        let mut expect = 0.0;
        for i in 0..samples {
            let xi_step = 2.0 * PI / k.norm();
            let along = 1.0 + k.normalize().dot(&dir);
            // kr = 1e3 at the start of the window
            let r = 1e3 / k.norm() + xi_step / along * i as f64 / samples as f64;
            let rel = dir * r;
            let pos = match c {
                Channel::Ion(_) => vec![rel, other],
                _ => vec![other + rel, other],
            };
            let f = f_function(&sys, c, &pos).unwrap();
            for a in 0..3 {
                mean[a] += f.vector[a] / samples as f64;
            }
            let g = k.normalize() + dir;
            expect += g.norm() / (k.dot(&g) * r) / samples as f64;
        }
        let got = mean.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((got / expect - 1.0).abs() <= 0.05, "{c}: {got} vs {expect}");
    }
}

#[test]
fn remainder_decays_as_inverse_square_when_all_separations_grow() {
    let rays = electron_ensemble(70, 3, 1.0, 16, None);
    let scales = [1e2, 1e3, 1e4];
    let (r, slope) = remainder_scan(&rays, &scales, Dilation::All, &DilationWindow::default()).unwrap();
    eprintln!("|R| {r:?} slope {slope}");
    assert!((slope + 2.0).abs() <= 0.1, "slope {slope}");
}

#[test]
fn remainder_is_coulomb_ranged_with_a_pinned_pair() {
    let rays = electron_ensemble(71, 3, 1.0, 16, Some((0, 1)));
    let scales = [1e2, 1e3, 1e4];
    let window = DilationWindow {
        weight_power: 1,
        ..DilationWindow::default()
    };
    let (r, slope) = remainder_scan(&rays, &scales, Dilation::PinnedPair(0, 1), &window).unwrap();
    let scaled: Vec<f64> = r.iter().zip(&scales).map(|(r, s)| r * s).collect();
    eprintln!("|R| {r:?} slope {slope}, s|R| {scaled:?}");
    // s |R| levels off: the coupling falls only like the Coulomb potential
    assert!(loglog_slope(&scales, &scaled).abs() <= 0.2, "slope {slope}");
}

#[test]
fn cusp_conditions_hold_at_every_two_body_coalescence() {
    for n in [2, 3] {
        for (sys, pos) in electron_ensemble(80 + n as u64, n, 1.0, 5, None) {
            for c in sys.channels() {
                let report = cusp_check(&sys, c, &pos, 1e-4).unwrap();
                assert!(report.deviation <= 0.01, "N={n} {c}: {report:?}");
            }
        }
    }
    // repulsive ion and attractive pair
    let sys = NBodySystem::new(
        -1.0,
        vec![-1.0, 1.0, -1.0],
        1.0,
        vec![Vec3::new(0.5, 0.1, 0.0), Vec3::new(-0.2, 0.6, 0.3), Vec3::new(0.1, -0.3, 0.7)],
    )
    .unwrap();
    let pos = [Vec3::new(1.0, 0.2, -0.5), Vec3::new(-0.7, 0.9, 0.4), Vec3::new(0.3, -1.2, 0.8)];
    for c in sys.channels() {
        let report = cusp_check(&sys, c, &pos, 1e-4).unwrap();
        assert!(report.deviation <= 0.01, "{c}: {report:?}");
    }
}

#[test]
fn sphere_average_is_linear_in_the_radius() {
    let sys = NBodySystem::new(
        1.0,
        vec![-1.0, -1.0],
        1.0,
        vec![Vec3::new(0.6, -0.2, 0.3), Vec3::new(0.0, 0.4, 0.1)],
    )
    .unwrap();
    let alpha = sys.sommerfeld(Channel::Ion(0)).unwrap();
    let k = sys.momenta[0].norm();
    let err = |r: f64| (sphere_average_factor(&sys, 0, r).unwrap() - (1.0 + alpha * k * r)).norm();
    let ratio = err(2e-2) / err(1e-2);
    assert!((ratio - 4.0).abs() <= 0.2, "Richardson ratio {ratio}");
}

#[test]
fn flux_matches_normalized_plane_waves() {
    for n in [2, 3] {
        let (sys, pos) = electron_ensemble(90 + n as u64, n, 1.0, 1, None).remove(0);
        let k_min = sys.momenta.iter().map(|k| k.norm()).fold(f64::INFINITY, f64::min);
        let r_min = pos.iter().map(|r| r.norm()).fold(f64::INFINITY, f64::min);
        let s = 1e3 / (k_min * r_min);
        let far: Vec<Vec3> = pos.iter().map(|r| r * s).collect();
        let report = flux_check(&sys, &far, 1e-3).unwrap();
        eprintln!("N={n} flux deviation {}", report.deviation);
        assert!(report.deviation <= 0.02, "{report:?}");
    }
}
