//! Wave-function checks: `residual-scan`, `cusp-check`, `falloff-scan`.

use fewbody::nbody::{cusp_check, electron_ensemble, remainder_scan, Dilation};
use fewbody::scan::{dilation_scan, loglog_slope, DilationWindow};
use fewbody::threebody::{electron_pair_rays, ChargeModel};

use crate::config::Reader;
use crate::error::{CliError, Context};
use crate::output::{num, Output, Table};
use crate::scattering::{model, seed};
use crate::Job;

fn window(r: &Reader, section: &str, weight_power: i32) -> Result<DilationWindow, CliError> {
    let d = DilationWindow::default();
    Ok(DilationWindow {
        width: r.float_or(section, "window_width", d.width)?,
        samples: r.parsed_or(section, "window_samples", d.samples)?,
        step: r.length_or(section, "step", d.step)?,
        weight_power: r.parsed_or(section, "weight_power", weight_power)?,
    })
}

fn scales(r: &Reader, section: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let s = r.float_list_or(section, "scales", default)?;
    if s.len() < 2 || s.iter().any(|&x| !(x > 0.0)) {
        return Err(CliError::Config(format!("[{section}] scales: need at least two positive scales")));
    }
    Ok(s)
}

fn scan_table(scales: &[f64], residuals: &[f64]) -> Table {
    let mut table = Table::new(&["scale", "residual"]);
    for (s, res) in scales.iter().zip(residuals) {
        table.push(vec![num(*s), num(*res)]);
    }
    table
}

/// RMS Schrödinger residual of the two-electron product state under
/// dilation of random configurations.
pub(crate) fn residual_scan(r: &Reader) -> Result<Job, CliError> {
    let model = model(r)?;
    let seed = seed(r)?;
    let rays = r.parsed_or("scan", "rays", 24usize)?;
    let along = r.parsed_or("scan", "along_velocities", model == ChargeModel::Ds3c)?;
    let scales = scales(r, "scan", &[10.0, 30.0, 100.0, 300.0])?;
    let window = window(r, "scan", 2)?;
    Ok(Box::new(move || {
        let ensemble = electron_pair_rays(model, seed, rays, along).context(|| "building dilation rays".into())?;
        let (res, slope) = dilation_scan(&ensemble, &scales, &window).context(|| "dilation scan".into())?;
        let mut out = Output::new(scan_table(&scales, &res));
        out.result("slope", slope);
        Ok(out)
    }))
}

/// Kato cusp deviations for every two-body channel of random N-electron
/// systems.
pub(crate) fn cusp(r: &Reader) -> Result<Job, CliError> {
    let seed = seed(r)?;
    let sizes: Vec<usize> = r
        .float_list_or("cusp", "particles", &[2.0, 3.0])?
        .iter()
        .map(|&n| n as usize)
        .collect();
    if sizes.iter().any(|&n| n < 1) {
        return Err(CliError::Config("[cusp] particles must be at least 1".into()));
    }
    let systems = r.parsed_or("cusp", "systems", 5usize)?;
    let z = r.float_or("cusp", "z", 1.0)?;
    let r_delta = r.length_or("cusp", "r_delta", 1e-4)?;
    Ok(Box::new(move || {
        let mut table = Table::new(&[
            "particles",
            "system",
            "channel",
            "deviation",
            "lhs_re",
            "lhs_im",
            "rhs_re",
            "rhs_im",
        ]);
        let mut worst = 0.0f64;
        for &n in &sizes {
            for (i, (sys, pos)) in electron_ensemble(seed.wrapping_add(n as u64), n, z, systems, None)
                .into_iter()
                .enumerate()
            {
                for c in sys.channels() {
                    let rep = cusp_check(&sys, c, &pos, r_delta).context(|| format!("cusp of {c}, N = {n}"))?;
                    worst = worst.max(rep.deviation);
                    table.push(vec![
                        n.to_string(),
                        i.to_string(),
                        c.to_string(),
                        num(rep.deviation),
                        num(rep.lhs.re),
                        num(rep.lhs.im),
                        num(rep.rhs.re),
                        num(rep.rhs.im),
                    ]);
                }
            }
        }
        let mut out = Output::new(table);
        out.result("max_deviation", worst);
        Ok(out)
    }))
}

/// N-body remainder |R| under dilation of all coordinates, or with one
/// pair held at fixed separation.
pub(crate) fn falloff(r: &Reader) -> Result<Job, CliError> {
    let seed = seed(r)?;
    let n = r.parsed_or("falloff", "particles", 3usize)?;
    let z = r.float_or("falloff", "z", 1.0)?;
    let rays = r.parsed_or("falloff", "rays", 16usize)?;
    let pinned = match r.parsed_or("falloff", "pinned_pair", String::from("none"))?.as_str() {
        "none" => None,
        text => {
            let idx: Vec<usize> = text
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Config(format!("[falloff] pinned_pair: '{text}' is not 'i j'")))?;
            match idx[..] {
                [i, j] if i >= 1 && i < j && j <= n => Some((i - 1, j - 1)),
                _ => return Err(CliError::Config(format!("[falloff] pinned_pair: need 1 <= i < j <= {n}"))),
            }
        }
    };
    if n < 2 {
        return Err(CliError::Config("[falloff] particles must be at least 2".into()));
    }
    let scales = scales(r, "falloff", &[1e2, 1e3, 1e4])?;
    let window = window(r, "falloff", if pinned.is_some() { 1 } else { 2 })?;
    Ok(Box::new(move || {
        let ensemble = electron_ensemble(seed, n, z, rays, pinned);
        let mode = match pinned {
            Some((i, j)) => Dilation::PinnedPair(i, j),
            None => Dilation::All,
        };
        let (res, slope) = remainder_scan(&ensemble, &scales, mode, &window).context(|| "remainder scan".into())?;
        let mut out = Output::new(scan_table(&scales, &res));
        out.result("slope", slope);
        if pinned.is_some() {
            let scaled: Vec<f64> = res.iter().zip(&scales).map(|(r, s)| r * s).collect();
            out.result("slope_of_scale_times_residual", loglog_slope(&scales, &scaled));
        }
        Ok(out)
    }))
}
