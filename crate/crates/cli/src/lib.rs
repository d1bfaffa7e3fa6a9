//! Command-line front end: reads a configuration, runs one command and
//! writes `<command>.csv` plus a `<command>.manifest` into the output
//! directory.

pub mod config;
pub mod error;
pub mod output;

mod operators;
mod scattering;
mod states;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::config::{Config, Reader};
use crate::error::CliError;
use crate::output::{write_artifacts, Artifacts, Output};

/// Work a command has fully configured and validated.
pub(crate) type Job = Box<dyn FnOnce() -> Result<Output, CliError> + Send>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Coplanar angular scan of the triply differential cross section
    Tdcs,
    /// Energy-sharing scan of the singly differential cross section
    Sdcs,
    /// Total cross section over excess energies, with the threshold-law fit
    Sigma,
    /// Singlet/triplet cross sections and the spin asymmetry over incident energies
    Asymmetry,
    /// Table of velocity-dependent effective charges
    Charges,
    /// Schrödinger residual of the two-electron product states under dilation
    ResidualScan,
    /// Kato cusp deviations of the N-body product states
    CuspCheck,
    /// N-body remainder falloff under dilation
    FalloffScan,
    /// Faddeev-type model-space solve against dense inversion
    Faddeev,
    /// Partition-function zeros in the complex temperature plane
    Zeros,
    /// Specific heat over inverse temperature
    Heat,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "fewbody", version, about = "Few-body Coulomb continuum states and their observables")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Configuration file (`key = value` lines under `[section]` headers)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Overrides [run] seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides [quadrature] max_samples
    #[arg(long)]
    pub budget: Option<u64>,
    /// Overrides [run] model
    #[arg(long, value_parser = ["ds3c", "3c", "independent"])]
    pub model: Option<String>,
}

/// The configuration with command-line overrides applied.
pub fn effective_input(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("run", "seed", seed.to_string());
    }
    if let Some(model) = &cli.model {
        cfg.set("run", "model", model.clone());
    }
    if let Some(budget) = cli.budget {
        cfg.set("quadrature", "max_samples", budget.to_string());
    }
    Ok(cfg)
}

/// Parses and validates the whole configuration for `command`, then runs
/// it. Returns the effective configuration (with defaults filled in) and
/// the output.
pub fn execute(command: Command, cfg: &Config) -> Result<(Config, Output), CliError> {
    let reader = Reader::new(cfg);
    let job = match command {
        Command::Tdcs => scattering::tdcs(&reader),
        Command::Sdcs => scattering::sdcs_scan(&reader),
        Command::Sigma => scattering::sigma(&reader),
        Command::Asymmetry => scattering::asymmetry(&reader),
        Command::Charges => scattering::charges(&reader),
        Command::ResidualScan => states::residual_scan(&reader),
        Command::CuspCheck => states::cusp(&reader),
        Command::FalloffScan => states::falloff(&reader),
        Command::Faddeev => operators::faddeev(&reader),
        Command::Zeros => operators::zeros(&reader),
        Command::Heat => operators::heat(&reader),
    }?;
    let effective = reader.finish()?;
    Ok((effective, job()?))
}

pub fn run(cli: &Cli) -> Result<Artifacts, CliError> {
    let cfg = effective_input(cli)?;
    let work = || execute(cli.command, &cfg);
    let (effective, output) = match cli.workers {
        Some(0) => return Err(CliError::Config("--workers must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?
            .install(work)?,
        None => work()?,
    };
    write_artifacts(&cli.out_dir, &cli.command.name(), &effective, &output)
}
