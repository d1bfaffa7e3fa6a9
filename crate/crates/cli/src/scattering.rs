//! Ionization observables: `tdcs`, `sdcs`, `sigma`, `asymmetry`, `charges`.

use fewbody::amplitudes::{
    sdcs, spin_asymmetry, t_matrix, tdcs_estimate, total_sigma, wannier_fit, AmplitudeError, AngularGrid,
    CrossSection, IonizationKinematics, QuadratureMethod, QuadratureSpec, BINDING, HARTREE_EV,
};
use fewbody::threebody::{potential_sum_check, ChargeModel, EffectiveCharges, ThreeBodyError};
use fewbody::Vec3;

use crate::config::Reader;
use crate::error::{CliError, Context};
use crate::output::{num, Output, Table};
use crate::Job;

/// Energy sums within this much (hartree) of E_i - 1/2 are rescaled onto it.
const CONSERVATION_SLACK: f64 = 0.01;

pub(crate) fn model(r: &Reader) -> Result<ChargeModel, CliError> {
    r.parsed_or("run", "model", ChargeModel::Ds3c)
}

pub(crate) fn seed(r: &Reader) -> Result<u64, CliError> {
    if !r.has("run", "seed") {
        return Err(CliError::Config(
            "missing [run] seed: stochastic commands need an explicit seed (--seed or [run] seed)".into(),
        ));
    }
    r.parsed("run", "seed")
}

fn quadrature(r: &Reader) -> Result<QuadratureSpec, CliError> {
    let d = QuadratureSpec::default();
    let weights = r.float_list_or("quadrature", "weights", &d.weights)?;
    let weights: [f64; 4] = weights
        .try_into()
        .map_err(|_| CliError::Config("[quadrature] weights: expected four numbers".into()))?;
    Ok(QuadratureSpec {
        method: r.parsed_or::<QuadratureMethod>("quadrature", "method", d.method)?,
        seed: seed(r)?,
        batch_size: r.parsed_or("quadrature", "batch_size", d.batch_size)?,
        round_batches: r.parsed_or("quadrature", "round_batches", d.round_batches)?,
        max_samples: r.parsed_or("quadrature", "max_samples", d.max_samples)?,
        target_rel_error: r.float_or("quadrature", "target_rel_error", d.target_rel_error)?,
        damping: r.float_or("quadrature", "damping", d.damping)?,
        weights,
        mid_rate: r.float_or("quadrature", "mid_rate", d.mid_rate)?,
        phase_filter: r.parsed_or("quadrature", "phase_filter", d.phase_filter)?,
    })
}

fn grid(r: &Reader) -> Result<AngularGrid, CliError> {
    let d = AngularGrid::default();
    Ok(AngularGrid {
        polar: r.parsed_or("grid", "polar", d.polar)?,
        azimuthal: r.parsed_or("grid", "azimuthal", d.azimuthal)?,
    })
}

/// Incident energy and electron a's energy. When both ejected energies are
/// given their sum must match E_i - 1/2 to within the slack and they are
/// rescaled onto it; equal energies stay exactly equal.
fn energies(r: &Reader) -> Result<(f64, f64), CliError> {
    let e_i = r.energy("kinematics", "E_i")?;
    let e = e_i - BINDING;
    if !(e > 0.0) {
        return Err(CliError::Config(format!(
            "[kinematics] E_i = {} eV is below the 13.6 eV threshold",
            e_i * HARTREE_EV
        )));
    }
    let e_a = r.optional_energy("kinematics", "E_a")?;
    let e_b = r.optional_energy("kinematics", "E_b")?;
    let e_a = match (e_a, e_b) {
        (Some(a), None) => a,
        (None, Some(b)) => e - b,
        (Some(a), Some(b)) => {
            if (a + b - e).abs() > CONSERVATION_SLACK {
                return Err(CliError::Config(format!(
                    "E_a + E_b = {} eV differs from E_i - 13.6 eV = {} eV",
                    (a + b) * HARTREE_EV,
                    e * HARTREE_EV
                )));
            }
            if a == b {
                e / 2.0
            } else {
                a * e / (a + b)
            }
        }
        (None, None) => return Err(CliError::Config("[kinematics] needs E_a or E_b".into())),
    };
    if !(0.0..=e).contains(&e_a) {
        return Err(CliError::Config(format!("E_a = {} eV outside [0, {}] eV", e_a * HARTREE_EV, e * HARTREE_EV)));
    }
    Ok((e_i, e_a))
}

/// Azimuths of electron b: an explicit list, or from/to/step with the end
/// point excluded.
fn phi_b_scan(r: &Reader) -> Result<Vec<f64>, CliError> {
    if r.has("kinematics", "phi_b") {
        return r.angle_list("kinematics", "phi_b");
    }
    let from = r.angle_or("kinematics", "phi_b_from", 0.0)?;
    let to = r.angle_or("kinematics", "phi_b_to", 360.0)?;
    let step = r.angle_or("kinematics", "phi_b_step", 2.0)?;
    if !(step > 0.0) || !(to > from) {
        return Err(CliError::Config("phi_b scan needs phi_b_to > phi_b_from and phi_b_step > 0".into()));
    }
    let n = ((to - from) / step - 1e-9).ceil() as usize;
    Ok((0..n).map(|j| from + step * j as f64).collect())
}

/// Degrees for display, with the radian round trip's last-bit noise
/// removed (30 deg reads back as 30, not 29.999999999999996).
fn degrees(rad: f64) -> f64 {
    (rad.to_degrees() * 1e9).round() / 1e9
}

fn fractions(r: &Reader, section: &str) -> Result<Vec<f64>, CliError> {
    let f = r.float_list_or(section, "sharing", &[0.1, 0.3, 0.5, 0.7, 0.9])?;
    if f.iter().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(CliError::Config(format!("[{section}] sharing: fractions E_a/E must lie in [0, 1]")));
    }
    Ok(f)
}

pub(crate) fn tdcs(r: &Reader) -> Result<Job, CliError> {
    let model = model(r)?;
    let spec = quadrature(r)?;
    let (e_i, e_a) = energies(r)?;
    let phi_a = r.angle("kinematics", "phi_a")?;
    let phi_b = phi_b_scan(r)?;
    Ok(Box::new(move || {
        let mut table = Table::new(&["phi_a_deg", "phi_b_deg", "E_a_au", "tdcs_au", "stat_err"]);
        let (mut samples, mut missed, mut worst) = (0u64, 0usize, 0.0f64);
        for (j, &pb) in phi_b.iter().enumerate() {
            let kin = IonizationKinematics::coplanar(e_i, e_a, phi_a, pb)
                .context(|| format!("kinematics at phi_b = {} deg", pb.to_degrees()))?;
            let amps = match t_matrix(&kin, model, &spec.derived(j as u64)) {
                Ok(a) => a,
                Err(AmplitudeError::BudgetExceeded { partial, .. }) => {
                    missed += 1;
                    *partial
                }
                Err(e) => {
                    return Err(e).context(|| format!("T-matrix at phi_b = {} deg", pb.to_degrees()));
                }
            };
            samples += amps.samples;
            worst = worst.max(amps.relative_error());
            let t = tdcs_estimate(&kin, &amps);
            eprintln!(
                "tdcs {}/{}: phi_b = {} deg, {:.4e} +- {:.1e}",
                j + 1,
                phi_b.len(),
                pb.to_degrees(),
                t.value,
                t.error
            );
            table.push(vec![
                num(degrees(phi_a)),
                num(degrees(pb)),
                num(e_a),
                num(t.value),
                num(t.error),
            ]);
        }
        let mut out = Output::new(table);
        out.result("samples", samples);
        out.result("budget_exceeded_rows", missed);
        out.result("max_amplitude_rel_error", worst);
        Ok(out)
    }))
}

fn excess_energy(r: &Reader) -> Result<f64, CliError> {
    let e = match r.optional_energy("kinematics", "E")? {
        Some(e) => e,
        None => r.energy("kinematics", "E_i")? - BINDING,
    };
    if !(e > 0.0) {
        return Err(CliError::Config("excess energy must be positive".into()));
    }
    Ok(e)
}

fn relative_change(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub(crate) fn sdcs_scan(r: &Reader) -> Result<Job, CliError> {
    let model = model(r)?;
    let spec = quadrature(r)?;
    let grid = grid(r)?;
    let halving = r.parsed_or("grid", "halving_test", false)?;
    let e = excess_energy(r)?;
    let fractions = fractions(r, "kinematics")?;
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "E_a_over_E",
            "E_a_au",
            "sdcs_au",
            "stat_err",
            "singlet_au",
            "triplet_au",
            "budget_exceeded",
        ]);
        let mut values = Vec::new();
        let mut change = 0.0f64;
        for (j, &f) in fractions.iter().enumerate() {
            let at = || format!("SDCS at E_a/E = {f}");
            let s = sdcs(e, f * e, model, &grid, &spec.derived(j as u64)).context(at)?;
            if halving {
                let fine = sdcs(e, f * e, model, &grid.refined(), &spec.derived(1 << 40 | j as u64)).context(at)?;
                change = change.max(relative_change(s.value, fine.value));
            }
            eprintln!("sdcs {}/{}: E_a/E = {f}, {:.4e} +- {:.1e}", j + 1, fractions.len(), s.value, s.error);
            values.push(s.value);
            table.push(vec![
                num(f),
                num(f * e),
                num(s.value),
                num(s.error),
                num(s.singlet),
                num(s.triplet),
                s.budget_exceeded.to_string(),
            ]);
        }
        let mut out = Output::new(table);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        out.result("max_over_min", max / min);
        if halving {
            out.result("halving_max_rel_change", change);
        }
        Ok(out)
    }))
}

fn sigma_settings(r: &Reader) -> Result<(ChargeModel, QuadratureSpec, AngularGrid, usize), CliError> {
    Ok((model(r)?, quadrature(r)?, grid(r)?, r.parsed_or("grid", "energy_nodes", 4)?))
}

fn sigma_at(
    e: f64,
    index: usize,
    settings: &(ChargeModel, QuadratureSpec, AngularGrid, usize),
) -> Result<CrossSection, CliError> {
    let (model, spec, grid, nodes) = settings;
    total_sigma(e, *model, grid, *nodes, &spec.derived(index as u64))
        .context(|| format!("total cross section at E = {} eV", e * HARTREE_EV))
}

pub(crate) fn sigma(r: &Reader) -> Result<Job, CliError> {
    let settings = sigma_settings(r)?;
    let energies = r.energy_list("kinematics", "energies")?;
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("[kinematics] energies: excess energies must be positive".into()));
    }
    Ok(Box::new(move || {
        let mut table = Table::new(&["E_au", "E_eV", "sigma_au", "stat_err", "budget_exceeded"]);
        let mut points = Vec::new();
        for (j, &e) in energies.iter().enumerate() {
            let s = sigma_at(e, j, &settings)?;
            eprintln!("sigma {}/{}: E = {} eV, {:.4e} +- {:.1e}", j + 1, energies.len(), e * HARTREE_EV, s.value, s.error);
            points.push((e, s.value));
            table.push(vec![
                num(e),
                num(e * HARTREE_EV),
                num(s.value),
                num(s.error),
                s.budget_exceeded.to_string(),
            ]);
        }
        let mut out = Output::new(table);
        match wannier_fit(&points) {
            Ok(mu) => out.result("wannier_exponent", mu),
            Err(e) => out.result("wannier_exponent", format!("unavailable ({e})")),
        }
        Ok(out)
    }))
}

pub(crate) fn asymmetry(r: &Reader) -> Result<Job, CliError> {
    let settings = sigma_settings(r)?;
    let incident = r.energy_list("kinematics", "incident")?;
    if incident.iter().any(|&e| !(e > BINDING)) {
        return Err(CliError::Config("[kinematics] incident: energies must exceed 13.6 eV".into()));
    }
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "E_i_eV",
            "sigma_singlet_au",
            "singlet_err",
            "sigma_triplet_au",
            "triplet_err",
            "asymmetry",
            "stat_err",
        ]);
        for (j, &e_i) in incident.iter().enumerate() {
            let s = sigma_at(e_i - BINDING, j, &settings)?;
            let a = spin_asymmetry(s.singlet, s.triplet)
                .context(|| format!("spin asymmetry at E_i = {} eV", e_i * HARTREE_EV))?;
            // dA/ds = 4t/(s+3t)^2, dA/dt = -4s/(s+3t)^2
            let d = (s.singlet + 3.0 * s.triplet).powi(2);
            let err = (4.0 * s.triplet * s.singlet_error / d).hypot(4.0 * s.singlet * s.triplet_error / d);
            eprintln!("asymmetry {}/{}: E_i = {} eV, A = {a:.4} +- {err:.1e}", j + 1, incident.len(), e_i * HARTREE_EV);
            table.push(vec![
                num(e_i * HARTREE_EV),
                num(s.singlet),
                num(s.singlet_error),
                num(s.triplet),
                num(s.triplet_error),
                num(a),
                num(err),
            ]);
        }
        Ok(Output::new(table))
    }))
}

/// Effective charges over a grid of excess energies, energy sharings and
/// mutual angles. Equal velocities report the limit charges.
pub(crate) fn charges(r: &Reader) -> Result<Job, CliError> {
    let model = model(r)?;
    let energies = r.energy_list("charges", "energies")?;
    let fractions = fractions(r, "charges")?;
    let angles = r.angle_list("charges", "theta_ab")?;
    let z_ion = r.float_or("charges", "z_ion", 1.0)?;
    if energies.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("[charges] energies must be positive".into()));
    }
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "E_au",
            "E_a_over_E",
            "theta_ab_deg",
            "z_ab",
            "z_a",
            "z_b",
            "beta_ab",
            "beta_a",
            "beta_b",
            "potential_check",
        ]);
        for &e in &energies {
            for &f in &fractions {
                for &theta in &angles {
                    let v_a = Vec3::new((2.0 * f * e).sqrt(), 0.0, 0.0);
                    let v_b = Vec3::new(theta.cos(), theta.sin(), 0.0) * (2.0 * (1.0 - f) * e).sqrt();
                    let q: EffectiveCharges = match model.charges(&v_a, &v_b, e, z_ion) {
                        Ok(q) => q,
                        Err(ThreeBodyError::CoalescentVelocity { limit }) => limit,
                        Err(err) => {
                            return Err(err).context(|| {
                                format!("charges at E = {e} au, E_a/E = {f}, theta_ab = {} deg", theta.to_degrees())
                            })
                        }
                    };
                    let check = if q.beta_ab.is_finite() {
                        num(potential_sum_check(&q, &v_a, &v_b))
                    } else {
                        String::from("nan")
                    };
                    table.push(vec![
                        num(e),
                        num(f),
                        num(degrees(theta)),
                        num(q.z_ab),
                        num(q.z_a),
                        num(q.z_b),
                        num(q.beta_ab),
                        num(q.beta_a),
                        num(q.beta_b),
                        check,
                    ]);
                }
            }
        }
        Ok(Output::new(table))
    }))
}
