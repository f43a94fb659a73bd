//! Run configuration in laboratory units (MHz, GHz, ns).
//!
//! Every field has a default reproducing the twelve-site experiment, so an
//! empty document is a valid configuration. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::basis::SectorBasis;
use crate::device::{DeviceTable, WorkingRow, DEVICE_QUBITS};
use crate::error::{JunctionError, Result};
use crate::model::{
    resonance_drive_frequency, units, ChainSpec, DisorderSpec, DriveSpec, JunctionModel, PotentialProfile,
    PotentialSpec, SiteRange,
};
use crate::propagator::DEFAULT_STEPS_PER_PERIOD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Cosine,
    Flat,
    Table,
}

impl std::str::FromStr for ProfileKind {
    type Err = JunctionError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(ProfileKind::Cosine),
            "flat" => Ok(ProfileKind::Flat),
            "table" => Ok(ProfileKind::Table),
            other => Err(JunctionError::InvalidSpec(format!("potential.profile: unknown profile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n_sites: usize,
    /// Reference coupling `J`; disorder strengths and `Δ₀` defaults are
    /// multiples of it.
    pub coupling_mhz: f64,
    /// Per-bond couplings overriding the uniform `coupling_mhz`.
    pub bond_couplings_mhz: Option<Vec<f64>>,
    pub onsite_mhz: f64,
    pub boson_cutoff: u8,
    pub sector: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_sites: 12,
            coupling_mhz: 11.5,
            bond_couplings_mhz: None,
            onsite_mhz: -250.0,
            boson_cutoff: 1,
            sector: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    /// `Δ₀` as a multiple of `J`.
    pub dc_in_j: f64,
    /// `Δ₁` as a multiple of `J`.
    pub ac_in_j: f64,
    /// Explicit `ω/2π`; when absent the resonance `mω = 2Ω` is used.
    pub frequency_mhz: Option<f64>,
    pub resonance_order: u32,
    pub phase: f64,
    pub time_origin_ns: f64,
    /// Inclusive 1-based range; defaults to `1..=N/2`.
    pub driven_sites: Option<[usize; 2]>,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig {
            dc_in_j: 3.0,
            ac_in_j: 3.0,
            frequency_mhz: None,
            resonance_order: 3,
            phase: 0.0,
            time_origin_ns: 0.0,
            driven_sites: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub profile: ProfileKind,
    pub rotating_frame_ghz: f64,
    /// Device table for `profile = "table"`; the bundled table when absent.
    pub device_table: Option<PathBuf>,
    /// Working row used in table mode.
    pub table_row: TableRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableRow {
    Cosine,
    Flat,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            profile: ProfileKind::Cosine,
            rotating_frame_ghz: 4.335,
            device_table: None,
            table_row: TableRow::Flat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisorderConfig {
    /// `W` as a multiple of `J`.
    pub w_in_j: f64,
    /// Inclusive 1-based range; defaults to `N/2+1..=N`.
    pub sites: Option<[usize; 2]>,
    pub seed: u64,
    pub realizations: usize,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        DisorderConfig { w_in_j: 0.0, sites: None, seed: 2024, realizations: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t_max_ns: f64,
    pub sample_ns: f64,
    pub steps_per_period: usize,
    pub init_site: usize,
    /// Second site of every tracked `C_ZZ` pair.
    pub reference_site: usize,
    pub keep_realizations: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_max_ns: 150.0,
            sample_ns: 1.0,
            steps_per_period: DEFAULT_STEPS_PER_PERIOD,
            init_site: 3,
            reference_site: 7,
            keep_realizations: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumConfig {
    pub histogram_bins: usize,
    pub coe_dim: usize,
    pub coe_matrices: usize,
    pub coe_seed: u64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { histogram_bins: 20, coe_dim: 50, coe_matrices: 500, coe_seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SemiclassicalConfig {
    pub resolution: usize,
    /// Upper end of the ω axis in units of `Ω`.
    pub omega_max_in_omega: f64,
    /// Upper end of the Δ₁ axis in units of `Δ₀`.
    pub delta1_max_in_dc: f64,
    pub steps_per_oscillation: usize,
    pub contour_points: usize,
}

impl Default for SemiclassicalConfig {
    fn default() -> Self {
        SemiclassicalConfig {
            resolution: crate::semiclassical::DEFAULT_GRID_RESOLUTION,
            omega_max_in_omega: 3.0,
            delta1_max_in_dc: 2.0,
            steps_per_oscillation: crate::semiclassical::DEFAULT_STEPS_PER_OSCILLATION,
            contour_points: 101,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub chain: ChainConfig,
    pub drive: DriveConfig,
    pub potential: PotentialConfig,
    pub disorder: DisorderConfig,
    pub run: RunConfig,
    pub spectrum: SpectrumConfig,
    pub semiclassical: SemiclassicalConfig,
}

/// Model, basis and disorder ready to simulate.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub model: JunctionModel,
    pub basis: SectorBasis,
    pub disorder: DisorderSpec,
}

fn invalid(field: &str, message: impl std::fmt::Display) -> JunctionError {
    JunctionError::InvalidSpec(format!("{field}: {message}"))
}

fn range(field: &str, value: Option<[usize; 2]>, default: SiteRange, n: usize) -> Result<SiteRange> {
    let r = value.map_or(default, |[a, b]| SiteRange::new(a, b));
    if r.first == 0 || r.first > r.last || r.last > n {
        return Err(invalid(field, format!("range {}..={} must lie inside 1..={n}", r.first, r.last)));
    }
    Ok(r)
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ModelConfig =
            toml::from_str(text).map_err(|e| JunctionError::InvalidSpec(format!("config: {}", e.message())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.chain;
        let n = c.n_sites;
        if n < 4 || n % 2 != 0 {
            return Err(invalid("chain.n_sites", format!("need an even number of sites >= 4, got {n}")));
        }
        if self.potential.profile == ProfileKind::Table && n != DEVICE_QUBITS {
            return Err(invalid("chain.n_sites", format!("table profile needs {DEVICE_QUBITS} sites, got {n}")));
        }
        if !(c.coupling_mhz > 0.0 && c.coupling_mhz.is_finite()) {
            return Err(invalid("chain.coupling_mhz", format!("must be positive, got {}", c.coupling_mhz)));
        }
        if let Some(b) = &c.bond_couplings_mhz {
            if b.len() != n - 1 {
                return Err(invalid("chain.bond_couplings_mhz", format!("need {} values, got {}", n - 1, b.len())));
            }
        }
        if c.boson_cutoff == 0 {
            return Err(invalid("chain.boson_cutoff", "must be at least 1"));
        }
        if c.sector == 0 || c.sector > n * c.boson_cutoff as usize {
            return Err(invalid("chain.sector", format!("must lie in 1..={}", n * c.boson_cutoff as usize)));
        }
        let d = &self.drive;
        if !(d.dc_in_j > 0.0 && d.dc_in_j.is_finite()) {
            return Err(invalid("drive.dc_in_j", format!("must be positive, got {}", d.dc_in_j)));
        }
        if !d.ac_in_j.is_finite() {
            return Err(invalid("drive.ac_in_j", "must be finite"));
        }
        if let Some(f) = d.frequency_mhz {
            if !(f > 0.0 && f.is_finite()) {
                return Err(invalid("drive.frequency_mhz", format!("must be positive, got {f}")));
            }
        }
        if d.resonance_order == 0 {
            return Err(invalid("drive.resonance_order", "must be at least 1"));
        }
        range("drive.driven_sites", d.driven_sites, SiteRange::new(1, n / 2), n)?;
        if !(self.disorder.w_in_j >= 0.0 && self.disorder.w_in_j.is_finite()) {
            return Err(invalid("disorder.w_in_j", format!("must be non-negative, got {}", self.disorder.w_in_j)));
        }
        if self.disorder.realizations == 0 {
            return Err(invalid("disorder.realizations", "must be at least 1"));
        }
        range("disorder.sites", self.disorder.sites, SiteRange::new(n / 2 + 1, n), n)?;
        let r = &self.run;
        if !(r.t_max_ns >= 0.0 && r.t_max_ns.is_finite()) {
            return Err(invalid("run.t_max_ns", format!("must be non-negative, got {}", r.t_max_ns)));
        }
        if !(r.sample_ns > 0.0 && r.sample_ns.is_finite()) {
            return Err(invalid("run.sample_ns", format!("must be positive, got {}", r.sample_ns)));
        }
        if r.steps_per_period == 0 {
            return Err(invalid("run.steps_per_period", "must be at least 1"));
        }
        if r.init_site == 0 || r.init_site > n {
            return Err(invalid("run.init_site", format!("must lie in 1..={n}")));
        }
        if r.reference_site == 0 || r.reference_site > n {
            return Err(invalid("run.reference_site", format!("must lie in 1..={n}")));
        }
        if self.spectrum.histogram_bins == 0 {
            return Err(invalid("spectrum.histogram_bins", "must be at least 1"));
        }
        if self.spectrum.coe_dim < 4 {
            return Err(invalid("spectrum.coe_dim", "must be at least 4"));
        }
        let s = &self.semiclassical;
        if s.resolution == 0 || s.steps_per_oscillation == 0 || s.contour_points == 0 {
            return Err(invalid("semiclassical", "resolution, steps and contour points must be positive"));
        }
        if !(s.omega_max_in_omega > 0.0) || !(s.delta1_max_in_dc >= 0.0) {
            return Err(invalid("semiclassical", "axis ranges must be positive"));
        }
        Ok(())
    }

    /// `J` in rad/ns.
    pub fn coupling(&self) -> f64 {
        units::mhz_to_angular(self.chain.coupling_mhz)
    }

    /// `ω/2π` in MHz, explicit or from the resonance condition.
    pub fn drive_frequency_mhz(&self) -> Result<f64> {
        match self.drive.frequency_mhz {
            Some(f) => Ok(f),
            None => resonance_drive_frequency(
                self.chain.n_sites,
                self.drive.dc_in_j * self.chain.coupling_mhz,
                self.chain.coupling_mhz,
                self.drive.resonance_order,
            ),
        }
    }

    pub fn disorder_spec(&self) -> Result<DisorderSpec> {
        let n = self.chain.n_sites;
        Ok(DisorderSpec {
            strength: self.disorder.w_in_j * self.coupling(),
            disordered_sites: range("disorder.sites", self.disorder.sites, SiteRange::new(n / 2 + 1, n), n)?,
            master_seed: self.disorder.seed,
            realization_count: self.disorder.realizations,
        })
    }

    fn load_table(&self) -> Result<DeviceTable> {
        match &self.potential.device_table {
            Some(path) => DeviceTable::load(path),
            None => Ok(DeviceTable::bundled()),
        }
    }

    /// Builds the clean (disorder-free) model and the sector basis.
    pub fn resolve(&self) -> Result<ResolvedModel> {
        self.validate()?;
        let n = self.chain.n_sites;
        let j = self.coupling();
        let u = units::mhz_to_angular(self.chain.onsite_mhz);
        let frame = units::ghz_to_angular(self.potential.rotating_frame_ghz);
        let table = match self.potential.profile {
            ProfileKind::Table => Some(self.load_table()?),
            _ => None,
        };
        let chain = match (&table, &self.chain.bond_couplings_mhz) {
            (_, Some(b)) => ChainSpec::new(b.iter().map(|&x| units::mhz_to_angular(x)).collect(), u, self.chain.boson_cutoff)?,
            (Some(t), None) => t.chain_spec(u, self.chain.boson_cutoff)?,
            (None, None) => ChainSpec::uniform(n, j, u, self.chain.boson_cutoff)?,
        };
        let omega = units::mhz_to_angular(self.drive_frequency_mhz()?);
        let driven = range("drive.driven_sites", self.drive.driven_sites, SiteRange::new(1, n / 2), n)?;
        let dc = self.drive.dc_in_j * j;
        let mut drive = DriveSpec::cosine_on(n, driven, dc, self.drive.ac_in_j * j, omega)?;
        drive.phase = self.drive.phase;
        drive.time_origin = self.drive.time_origin_ns;
        let profile = match &table {
            Some(t) => {
                let row = match self.potential.table_row {
                    TableRow::Cosine => WorkingRow::Cosine,
                    TableRow::Flat => WorkingRow::Flat,
                };
                let profile = t.working_profile(row);
                // the AC drive follows the tabulated static modulation
                if let PotentialProfile::Table(values) = &profile {
                    for l in driven.iter() {
                        drive.spatial_profile[l - 1] = (values[l - 1] - frame) / dc;
                    }
                }
                profile
            }
            None => match self.potential.profile {
                ProfileKind::Flat => PotentialProfile::Flat,
                _ => PotentialProfile::Cosine,
            },
        };
        let potential = PotentialSpec::build(&profile, &drive, frame, None)?;
        let model = JunctionModel::new(chain, drive, potential)?;
        let basis = SectorBasis::new(n, self.chain.sector, self.chain.boson_cutoff)?;
        Ok(ResolvedModel { model, basis, disorder: self.disorder_spec()? })
    }

    /// Sample times `0, Δ, 2Δ, …` up to `t_max` (inclusive when it lands on
    /// the grid).
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.run.t_max_ns / self.run.sample_ns + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * self.run.sample_ns).collect()
    }
}
