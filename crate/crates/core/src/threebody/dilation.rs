//! Random configuration ensembles for dilation scans of the two-electron
//! product states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scan::DilationRay;
use crate::Vec3;

use super::{electron_pair_hamiltonian, three_body_wave, ChargeModel, ThreeBodyError};

fn random_vec(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

/// Momenta with all three pair momenta of order one.
fn random_momenta(rng: &mut ChaCha8Rng) -> (Vec3, Vec3) {
    loop {
        let (k_a, k_b) = (random_vec(rng), random_vec(rng));
        let k_ab = (k_a - k_b) / 2.0;
        if k_a.norm() > 0.4 && k_b.norm() > 0.4 && k_ab.norm() > 0.2 {
            return (k_a, k_b);
        }
    }
}

/// Unit-scale point clear of all three pair coalescences and of the
/// backward lines where a parabolic coordinate vanishes: every pair has
/// r >= 0.5 and r + k^.r >= 0.5.
pub fn is_generic_ray(k_a: &Vec3, k_b: &Vec3, r_a: &Vec3, r_b: &Vec3) -> bool {
    let k_ab = (k_a - k_b) / 2.0;
    [(*k_a, *r_a), (*k_b, *r_b), (k_ab, r_a - r_b)]
        .iter()
        .all(|(k, r)| r.norm() >= 0.5 && r.norm() + k.normalize().dot(r) >= 0.5)
}

/// `count` electron pairs around a unit ion with random momenta. With
/// `along_velocities` the positions are r_a = v_a, r_b = v_b (the rays on
/// which the effective-charge potential identity holds), otherwise random.
pub fn electron_pair_rays(
    model: ChargeModel,
    seed: u64,
    count: usize,
    along_velocities: bool,
) -> Result<Vec<DilationRay<'static>>, ThreeBodyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let (k_a, k_b) = random_momenta(&mut rng);
        let (r_a, r_b) = if along_velocities {
            (k_a, k_b)
        } else {
            (random_vec(&mut rng), random_vec(&mut rng))
        };
        if !is_generic_ray(&k_a, &k_b, &r_a, &r_b) {
            continue;
        }
        let energy = (k_a.norm_squared() + k_b.norm_squared()) / 2.0;
        let charges = model.charges(&k_a, &k_b, energy, 1.0)?;
        out.push(DilationRay {
            field: Box::new(move |x: &[f64]| {
                let r_a = Vec3::new(x[0], x[1], x[2]);
                let r_b = Vec3::new(x[3], x[4], x[5]);
                three_body_wave(&charges, &k_a, &k_b, &r_a, &r_b)
            }),
            hamiltonian: electron_pair_hamiltonian(1.0),
            energy,
            direction: r_a.iter().chain(r_b.iter()).copied().collect(),
        });
    }
    Ok(out)
}
