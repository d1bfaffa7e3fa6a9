//! Line-oriented `key = value` configuration with `[section]` headers.
//!
//! Physical inputs carry a unit suffix (`6.8 eV`, `200 meV`, `0.25 au`,
//! `30 deg`). Everything is converted to atomic units and radians when read.
//! A `Reader` records every value a command consumed, together with the
//! defaults it fell back on, so the manifest can echo the full effective
//! configuration and unknown keys are caught before any work starts.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use fewbody::amplitudes::HARTREE_EV;

use crate::error::CliError;

/// Sections a command never reads: the manifest bookkeeping.
pub const PASSIVE_SECTIONS: [&str; 2] = ["manifest", "results"];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = Config::default();
        let mut section = String::from("run");
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::Config(format!("line {}: {msg}", no + 1));
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("unterminated section header '{line}'")))?
                    .trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                    return Err(at(format!("bad section name '{name}'")));
                }
                section = name.to_string();
                cfg.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected 'key = value', found '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(at("empty key".into()));
            }
            let entries = cfg.sections.entry(section.clone()).or_default();
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(at(format!("duplicate key '{key}' in [{section}]")));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(String::as_str)
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value.into());
    }

    pub fn remove_section(&mut self, section: &str) {
        self.sections.remove(section);
    }

    pub fn section(&self, section: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(section)
    }

    fn keys(&self) -> impl Iterator<Item = (&str, &str)> {
        self.sections
            .iter()
            .flat_map(|(s, m)| m.keys().map(move |k| (s.as_str(), k.as_str())))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, entries) in &self.sections {
            if !first {
                writeln!(f)?;
            }
            first = false;
            writeln!(f, "[{name}]")?;
            for (k, v) in entries {
                writeln!(f, "{k} = {v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Dimension {
    Energy,
    InverseEnergy,
    Angle,
    Length,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Energy => "an energy (eV, meV, au, hartree)",
            Dimension::InverseEnergy => "an inverse energy (1/eV, 1/au, 1/hartree)",
            Dimension::Angle => "an angle (deg, rad)",
            Dimension::Length => "a length (bohr, au)",
        }
    }

    fn factor(self, unit: &str) -> Option<f64> {
        match (self, unit) {
            (Dimension::Energy, "eV") => Some(1.0 / HARTREE_EV),
            (Dimension::Energy, "meV") => Some(1e-3 / HARTREE_EV),
            (Dimension::Energy, "au" | "hartree") => Some(1.0),
            (Dimension::InverseEnergy, "1/eV") => Some(HARTREE_EV),
            (Dimension::InverseEnergy, "1/au" | "1/hartree") => Some(1.0),
            (Dimension::Angle, "deg") => Some(std::f64::consts::PI / 180.0),
            (Dimension::Angle, "rad") => Some(1.0),
            (Dimension::Length, "bohr" | "au") => Some(1.0),
            _ => None,
        }
    }
}

fn number(text: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{what}: '{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("{what}: '{text}' is not finite")));
    }
    Ok(v)
}

/// "6.8 eV" -> (6.8, Some("eV")); "6.8" -> (6.8, None).
fn split_quantity<'a>(text: &'a str, what: &str) -> Result<(f64, Option<&'a str>), CliError> {
    let text = text.trim();
    match text.split_once(char::is_whitespace) {
        Some((num, unit)) => Ok((number(num, what)?, Some(unit.trim()))),
        None => Ok((number(text, what)?, None)),
    }
}

fn quantity_list(text: &str, dim: Dimension, what: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(CliError::Config(format!("{what}: empty list entry in '{text}'")));
    }
    let parsed = items
        .iter()
        .map(|s| split_quantity(s, what))
        .collect::<Result<Vec<_>, _>>()?;
    // a unit on the last entry covers the bare ones: "0.1, 0.2, 0.5 eV"
    let trailing = parsed.last().and_then(|(_, u)| *u);
    parsed
        .iter()
        .map(|&(v, unit)| {
            let unit = unit
                .or(trailing)
                .ok_or_else(|| CliError::Unit(format!("{what}: '{text}' needs a unit, expected {}", dim.name())))?;
            let f = dim
                .factor(unit)
                .ok_or_else(|| CliError::Unit(format!("{what}: unit '{unit}' is not {}", dim.name())))?;
            Ok(v * f)
        })
        .collect()
}

/// Typed access to a `Config` that remembers what was read.
pub struct Reader<'a> {
    config: &'a Config,
    effective: RefCell<Config>,
}

impl<'a> Reader<'a> {
    pub fn new(config: &'a Config) -> Self {
        Self {
            config,
            effective: RefCell::new(Config::default()),
        }
    }

    fn raw(&self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.config.get(section, key)?;
        self.effective.borrow_mut().set(section, key, v);
        Some(v)
    }

    fn record_default(&self, section: &str, key: &str, value: String) {
        self.effective.borrow_mut().set(section, key, value);
    }

    pub fn has(&self, section: &str, key: &str) -> bool {
        self.config.get(section, key).is_some()
    }

    fn name(section: &str, key: &str) -> String {
        format!("[{section}] {key}")
    }

    fn missing(section: &str, key: &str) -> CliError {
        CliError::Config(format!("missing {}", Self::name(section, key)))
    }

    pub fn string(&self, section: &str, key: &str) -> Result<String, CliError> {
        self.raw(section, key)
            .map(str::to_string)
            .ok_or_else(|| Self::missing(section, key))
    }

    pub fn optional_string(&self, section: &str, key: &str) -> Option<String> {
        self.raw(section, key).map(str::to_string)
    }

    pub fn parsed_or<T>(&self, section: &str, key: &str, default: T) -> Result<T, CliError>
    where
        T: std::str::FromStr + fmt::Display,
        T::Err: fmt::Display,
    {
        match self.raw(section, key) {
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("{}: '{v}': {e}", Self::name(section, key)))),
            None => {
                self.record_default(section, key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn parsed<T>(&self, section: &str, key: &str) -> Result<T, CliError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        let v = self.raw(section, key).ok_or_else(|| Self::missing(section, key))?;
        v.parse()
            .map_err(|e| CliError::Config(format!("{}: '{v}': {e}", Self::name(section, key))))
    }

    pub fn optional_parsed<T>(&self, section: &str, key: &str) -> Result<Option<T>, CliError>
    where
        T: std::str::FromStr,
        T::Err: fmt::Display,
    {
        if self.has(section, key) {
            self.parsed(section, key).map(Some)
        } else {
            Ok(None)
        }
    }

    /// Dimensionless real number.
    pub fn float_or(&self, section: &str, key: &str, default: f64) -> Result<f64, CliError> {
        match self.raw(section, key) {
            Some(v) => number(v, &Self::name(section, key)),
            None => {
                self.record_default(section, key, default.to_string());
                Ok(default)
            }
        }
    }

    pub fn float_list_or(&self, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>, CliError> {
        match self.raw(section, key) {
            Some(v) => v.split(',').map(|s| number(s, &Self::name(section, key))).collect(),
            None => {
                self.record_default(section, key, join(default));
                Ok(default.to_vec())
            }
        }
    }

    fn dimensioned(&self, section: &str, key: &str, dim: Dimension) -> Result<Option<f64>, CliError> {
        let Some(v) = self.raw(section, key) else {
            return Ok(None);
        };
        let list = quantity_list(v, dim, &Self::name(section, key))?;
        if list.len() != 1 {
            return Err(CliError::Config(format!("{}: expected one value", Self::name(section, key))));
        }
        Ok(Some(list[0]))
    }

    pub fn energy(&self, section: &str, key: &str) -> Result<f64, CliError> {
        self.dimensioned(section, key, Dimension::Energy)?
            .ok_or_else(|| Self::missing(section, key))
    }

    pub fn optional_energy(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.dimensioned(section, key, Dimension::Energy)
    }

    pub fn energy_list(&self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw(section, key).ok_or_else(|| Self::missing(section, key))?;
        quantity_list(v, Dimension::Energy, &Self::name(section, key))
    }

    pub fn optional_inverse_energy(&self, section: &str, key: &str) -> Result<Option<f64>, CliError> {
        self.dimensioned(section, key, Dimension::InverseEnergy)
    }

    pub fn inverse_energy_or(&self, section: &str, key: &str, default_au: f64) -> Result<f64, CliError> {
        match self.dimensioned(section, key, Dimension::InverseEnergy)? {
            Some(v) => Ok(v),
            None => {
                self.record_default(section, key, format!("{default_au} 1/au"));
                Ok(default_au)
            }
        }
    }

    pub fn angle(&self, section: &str, key: &str) -> Result<f64, CliError> {
        self.dimensioned(section, key, Dimension::Angle)?
            .ok_or_else(|| Self::missing(section, key))
    }

    pub fn angle_or(&self, section: &str, key: &str, default_deg: f64) -> Result<f64, CliError> {
        match self.dimensioned(section, key, Dimension::Angle)? {
            Some(v) => Ok(v),
            None => {
                self.record_default(section, key, format!("{default_deg} deg"));
                Ok(default_deg.to_radians())
            }
        }
    }

    pub fn angle_list(&self, section: &str, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw(section, key).ok_or_else(|| Self::missing(section, key))?;
        quantity_list(v, Dimension::Angle, &Self::name(section, key))
    }

    pub fn length_or(&self, section: &str, key: &str, default_bohr: f64) -> Result<f64, CliError> {
        match self.dimensioned(section, key, Dimension::Length)? {
            Some(v) => Ok(v),
            None => {
                self.record_default(section, key, format!("{default_bohr} bohr"));
                Ok(default_bohr)
            }
        }
    }

    pub fn energy_or(&self, section: &str, key: &str, default_au: f64) -> Result<f64, CliError> {
        match self.dimensioned(section, key, Dimension::Energy)? {
            Some(v) => Ok(v),
            None => {
                self.record_default(section, key, format!("{default_au} au"));
                Ok(default_au)
            }
        }
    }

    /// Fails on keys nobody read, outside the passive sections.
    pub fn finish(self) -> Result<Config, CliError> {
        let effective = self.effective.into_inner();
        let unused: Vec<String> = self
            .config
            .keys()
            .filter(|(s, _)| !PASSIVE_SECTIONS.contains(s))
            .filter(|(s, k)| effective.get(s, k).is_none())
            .map(|(s, k)| Self::name(s, k))
            .collect();
        if !unused.is_empty() {
            return Err(CliError::Config(format!("unknown keys for this command: {}", unused.join(", "))));
        }
        Ok(effective)
    }
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}
