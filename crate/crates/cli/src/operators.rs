//! Model-space commands: `faddeev`, `zeros`, `heat`.

use std::path::PathBuf;

use fewbody::greenfn::{
    direct_green, direct_t, faddeev_solve, free_green, g4_first_iteration, green_expand, relative_difference,
    ModelSpace, ResolventQuery,
};
use fewbody::thermo::{dos_from_green, find_zeros, specific_heat, uniform_grid, zero_count, PartitionFunction, Rectangle};
use num_complex::Complex64;

use crate::config::Reader;
use crate::error::{CliError, Context};
use crate::output::{num, Output, Table};
use crate::scattering::seed;
use crate::Job;

/// Where a model space comes from: a file in the model-space text format
/// or a seeded random instance.
enum SpaceSource {
    File(PathBuf),
    Random { seed: u64, particles: usize, dim: usize, coupling: f64 },
}

impl SpaceSource {
    fn read(r: &Reader) -> Result<Self, CliError> {
        if let Some(path) = r.optional_string("model_space", "file") {
            return Ok(SpaceSource::File(PathBuf::from(path)));
        }
        Ok(SpaceSource::Random {
            seed: seed(r)?,
            particles: r.parsed_or("model_space", "particles", 3usize)?,
            dim: r.parsed_or("model_space", "dim", 20usize)?,
            coupling: r.float_or("model_space", "coupling", 0.3)?,
        })
    }

    fn build(&self) -> Result<ModelSpace, CliError> {
        match self {
            SpaceSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
                ModelSpace::from_text(&text).context(|| format!("model space {}", path.display()))
            }
            &SpaceSource::Random { seed, particles, dim, coupling } => {
                ModelSpace::random(seed, particles, dim, coupling).context(|| "random model space".into())
            }
        }
    }
}

/// Faddeev-type T and Green operators against dense inversion.
pub(crate) fn faddeev(r: &Reader) -> Result<Job, CliError> {
    let source = SpaceSource::read(r)?;
    let energies = r.energy_list("faddeev", "energies")?;
    let eta = r.optional_energy("faddeev", "eta")?;
    if eta.is_some_and(|e| !(e > 0.0)) {
        return Err(CliError::Config("[faddeev] eta must be positive".into()));
    }
    Ok(Box::new(move || {
        let space = source.build()?;
        let mut table = Table::new(&[
            "energy_au",
            "eta_au",
            "t_vs_direct",
            "g_vs_direct",
            "g_vs_g0_t_g0",
            "g4_first_iteration_vs_direct",
        ]);
        let (mut worst_t, mut worst_g) = (0.0f64, 0.0f64);
        for &e in &energies {
            let q = match eta {
                Some(eta) => ResolventQuery::new(Complex64::new(e, eta)),
                None => ResolventQuery::broadened(&space, e),
            };
            let at = || format!("E = {}", q.energy);
            let t = faddeev_solve(&space, &q).context(at)?.total;
            let g = green_expand(&space, &q).context(at)?.total;
            let dt = relative_difference(&t, &direct_t(&space, &q).context(at)?);
            let oracle = direct_green(&space, &q).context(at)?;
            let dg = relative_difference(&g, &oracle);
            let g0 = free_green(&space, &q).context(at)?;
            let via_t = relative_difference(&(&g0 + &g0 * &t * &g0), &g);
            let first = if space.particles() == 4 {
                num(relative_difference(&g4_first_iteration(&space, &q).context(at)?, &oracle))
            } else {
                String::new()
            };
            worst_t = worst_t.max(dt);
            worst_g = worst_g.max(dg).max(via_t);
            table.push(vec![num(q.energy.re), num(q.energy.im), num(dt), num(dg), num(via_t), first]);
        }
        let mut out = Output::new(table);
        out.result("particles", space.particles());
        out.result("dim", space.dim());
        out.result("max_t_deviation", worst_t);
        out.result("max_g_deviation", worst_g);
        Ok(out)
    }))
}

/// Energy window and grid of a tabulated density of states.
#[derive(Clone, Copy)]
struct DosWindow {
    lo: f64,
    hi: f64,
    eta: f64,
    points: usize,
}

impl DosWindow {
    /// The same window widened by 10% of its width on both sides, at the
    /// same grid spacing.
    fn widened(&self) -> Self {
        let pad = 0.1 * (self.hi - self.lo);
        let extra = (0.2 * (self.points - 1) as f64).round() as usize;
        Self {
            lo: self.lo - pad,
            hi: self.hi + pad,
            points: self.points + extra,
            ..*self
        }
    }
}

enum SpectrumSource {
    Levels(Vec<f64>),
    Space(SpaceSource),
    Dos(SpaceSource, DosWindow),
}

fn read_levels_file(path: &str, scale: f64) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {path}: {e}")))?;
    let mut levels = Vec::new();
    for (no, line) in text.lines().enumerate() {
        for tok in line.split('#').next().unwrap_or("").split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| CliError::Config(format!("{path} line {}: '{tok}' is not a number", no + 1)))?;
            levels.push(v * scale);
        }
    }
    if levels.is_empty() {
        return Err(CliError::Config(format!("{path}: no energies")));
    }
    Ok(levels)
}

impl SpectrumSource {
    fn read(r: &Reader) -> Result<Self, CliError> {
        let kind: String = r.string("spectrum", "source")?;
        match kind.as_str() {
            "levels" => Ok(SpectrumSource::Levels(r.energy_list("spectrum", "levels")?)),
            "file" => {
                let path = r.string("spectrum", "file")?;
                // the file holds bare numbers in this unit
                let unit = r.energy("spectrum", "unit")?;
                Ok(SpectrumSource::Levels(read_levels_file(&path, unit)?))
            }
            "model_space" => Ok(SpectrumSource::Space(SpaceSource::read(r)?)),
            "dos" => {
                let window = r.energy_list("spectrum", "dos_window")?;
                let [lo, hi] = window[..] else {
                    return Err(CliError::Config("[spectrum] dos_window: expected 'lo, hi' with a unit".into()));
                };
                let w = DosWindow {
                    lo,
                    hi,
                    eta: r.energy("spectrum", "eta")?,
                    points: r.parsed_or("spectrum", "points", 4001usize)?,
                };
                if !(hi > lo) || !(w.eta > 0.0) || w.points < 3 {
                    return Err(CliError::Config("[spectrum] needs hi > lo, eta > 0 and at least 3 points".into()));
                }
                Ok(SpectrumSource::Dos(SpaceSource::read(r)?, w))
            }
            other => Err(CliError::Config(format!(
                "[spectrum] source: '{other}' (expected levels, file, model_space or dos)"
            ))),
        }
    }

    /// The partition function, and for a tabulated DOS also the one on the
    /// widened window for the sensitivity report.
    fn build(&self) -> Result<(PartitionFunction, Option<PartitionFunction>), CliError> {
        let ctx = || "partition function".to_string();
        match self {
            SpectrumSource::Levels(l) => Ok((PartitionFunction::discrete(l.clone()).context(ctx)?, None)),
            SpectrumSource::Space(s) => Ok((PartitionFunction::from_model_space(&s.build()?).context(ctx)?, None)),
            SpectrumSource::Dos(s, w) => {
                let space = s.build()?;
                let tab = |w: &DosWindow| -> Result<PartitionFunction, CliError> {
                    let dos = dos_from_green(&space, &uniform_grid(w.lo, w.hi, w.points), w.eta).context(ctx)?;
                    PartitionFunction::tabulated(dos).context(ctx)
                };
                Ok((tab(w)?, Some(tab(&w.widened())?)))
            }
        }
    }
}

fn rectangle(r: &Reader) -> Result<Option<(f64, f64, f64, f64)>, CliError> {
    let keys = ["re_min", "re_max", "im_min", "im_max"];
    let vals = keys
        .iter()
        .map(|k| r.optional_inverse_energy("zeros", k))
        .collect::<Result<Vec<_>, _>>()?;
    match vals[..] {
        [Some(a), Some(b), Some(c), Some(d)] if b > a && d > c => Ok(Some((a, b, c, d))),
        [None, None, None, None] => Ok(None),
        _ => Err(CliError::Config(
            "[zeros] give all of re_min < re_max, im_min < im_max, or none for the default rectangle".into(),
        )),
    }
}

/// Complex-beta zeros of Z inside a rectangle.
pub(crate) fn zeros(r: &Reader) -> Result<Job, CliError> {
    let source = SpectrumSource::read(r)?;
    let rect = rectangle(r)?;
    Ok(Box::new(move || {
        let (pf, wide) = source.build()?;
        let rect = match rect {
            Some((a, b, c, d)) => Rectangle::new((a, b), (c, d)),
            None => Rectangle::default_for(&pf),
        };
        let zs = find_zeros(&pf, &rect).context(|| "zero search".into())?;
        let winding = zero_count(&pf, &rect).context(|| "winding number".into())?;
        let mut table = Table::new(&["re_beta", "im_beta", "residual"]);
        for z in &zs {
            table.push(vec![num(z.beta.re), num(z.beta.im), num(z.residual)]);
        }
        let mut out = Output::new(table);
        out.result("count", zs.len());
        out.result("winding_number", winding);
        out.result("rectangle", format!("{}, {}, {}, {}", rect.re.0, rect.re.1, rect.im.0, rect.im.1));
        if let Some(wide) = wide {
            let near = zs.first().map(|z| z.beta);
            let wide_zs = find_zeros(&wide, &rect).context(|| "zero search, widened window".into())?;
            let shift = match (near, wide_zs.first()) {
                (Some(a), Some(b)) => num((a - b.beta).norm() / a.norm()),
                _ => format!("zero counts {} vs {}", zs.len(), wide_zs.len()),
            };
            out.result("window_sensitivity_nearest_zero", shift);
        }
        Ok(out)
    }))
}

/// C_V(beta) on a uniform grid.
pub(crate) fn heat(r: &Reader) -> Result<Job, CliError> {
    let source = SpectrumSource::read(r)?;
    let from = r.inverse_energy_or("heat", "beta_from", 0.1)?;
    let to = r
        .optional_inverse_energy("heat", "beta_to")?
        .ok_or_else(|| CliError::Config("missing [heat] beta_to".into()))?;
    let points = r.parsed_or("heat", "points", 200usize)?;
    let step = r.float_or("heat", "relative_step", 1e-3)?;
    if !(to > from && from > 0.0) || points < 2 || !(step > 0.0) {
        return Err(CliError::Config("[heat] needs 0 < beta_from < beta_to, points >= 2, relative_step > 0".into()));
    }
    Ok(Box::new(move || {
        let (pf, wide) = source.build()?;
        let mut table = Table::new(&["beta", "c_v"]);
        let (mut peak, mut worst) = ((0.0, f64::NEG_INFINITY), 0.0f64);
        for beta in uniform_grid(from, to, points) {
            let cv = specific_heat(&pf, beta, step * beta).context(|| format!("C_V at beta = {beta}"))?;
            if cv > peak.1 {
                peak = (beta, cv);
            }
            if let Some(w) = &wide {
                let other = specific_heat(w, beta, step * beta).context(|| format!("C_V at beta = {beta}"))?;
                worst = worst.max((cv - other).abs() / cv.abs().max(f64::MIN_POSITIVE));
            }
            table.push(vec![num(beta), num(cv)]);
        }
        let mut out = Output::new(table);
        out.result("peak_beta", peak.0);
        out.result("peak_c_v", peak.1);
        if wide.is_some() {
            out.result("window_sensitivity_c_v", worst);
        }
        Ok(out)
    }))
}
