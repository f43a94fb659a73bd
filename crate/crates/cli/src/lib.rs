//! Command-line front end: configuration overrides, the experiment
//! pipelines, CSV/JSON output and run manifests.

pub mod commands;
pub mod manifest;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use floquet_junction::{JunctionError, ModelConfig, ProfileKind};

pub use commands::run;
pub use manifest::RunManifest;

/// Environment variable fixing the worker-thread count.
pub const WORKERS_ENV: &str = "JUNCTION_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "junction", version, about = "Driven ergodic/localized junction simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub options: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Populations and C_ZZ correlations for a single disorder draw.
    Dynamics,
    /// Disorder-averaged populations and correlations.
    Ensemble,
    /// Pooled quasienergy gap-ratio statistics.
    Spectrum,
    /// Monodromy stability grid of the classical model.
    Stability,
    /// Undriven classical energy landscape.
    Contours,
    /// Parses a device table and reports inconsistencies.
    DeviceCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dynamics => "dynamics",
            Command::Ensemble => "ensemble",
            Command::Spectrum => "spectrum",
            Command::Stability => "stability",
            Command::Contours => "contours",
            Command::DeviceCheck => "device-check",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML configuration (MHz / ns units); defaults reproduce the experiment.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for the disorder realizations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub realizations: Option<usize>,
    #[arg(long, global = true)]
    pub steps_per_period: Option<usize>,
    /// cosine | flat | table
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Disorder strength W in units of J.
    #[arg(long, global = true)]
    pub disorder_w: Option<f64>,
    #[arg(long, global = true)]
    pub init_site: Option<usize>,
    /// Number of excitations.
    #[arg(long, global = true)]
    pub sector: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Also write per-realization populations.
    #[arg(long, global = true)]
    pub keep_realizations: bool,
    /// Device table for device-check (bundled table when omitted).
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
}

impl Overrides {
    /// Loads the config file (or defaults) and applies the flags.
    pub fn resolve_config(&self) -> Result<ModelConfig, JunctionError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|source| JunctionError::Io { path: path.display().to_string(), source })?;
                ModelConfig::parse(&text)?
            }
            None => ModelConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.disorder.seed = seed;
        }
        if let Some(r) = self.realizations {
            config.disorder.realizations = r;
        }
        if let Some(k) = self.steps_per_period {
            config.run.steps_per_period = k;
        }
        if let Some(p) = &self.profile {
            config.potential.profile = p.parse::<ProfileKind>()?;
        }
        if let Some(w) = self.disorder_w {
            config.disorder.w_in_j = w;
        }
        if let Some(l) = self.init_site {
            config.run.init_site = l;
        }
        if let Some(n) = self.sector {
            config.chain.sector = n;
        }
        if self.keep_realizations {
            config.run.keep_realizations = true;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Process exit code for an error: 2 for bad configuration, 3 for numerical
/// failure, 1 otherwise.
pub fn exit_code(err: &JunctionError) -> i32 {
    match err {
        e if e.is_numerical() => 3,
        JunctionError::Io { .. } => 1,
        JunctionError::Realization { source, .. } => exit_code(source),
        _ => 2,
    }
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}
