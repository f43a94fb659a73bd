//! Model parameters for the driven junction chain.
//!
//! Sites are numbered `1..=N` in every public signature; vectors indexed by
//! site are stored 0-based (`v[l - 1]`). All frequencies held by the types in
//! this module are angular (rad/ns) and measured relative to the rotating
//! frame `ḡ`, which never appears on the simulated diagonal.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{JunctionError, Result};

/// Unit conversions between the ordinary frequencies used in configuration
/// files (MHz, GHz) and the angular frequencies used internally (rad/ns).
pub mod units {
    use std::f64::consts::TAU;

    pub const MHZ_TO_ANGULAR: f64 = TAU * 1e-3;

    pub fn mhz_to_angular(mhz: f64) -> f64 {
        mhz * MHZ_TO_ANGULAR
    }

    pub fn angular_to_mhz(angular: f64) -> f64 {
        angular / MHZ_TO_ANGULAR
    }

    pub fn ghz_to_angular(ghz: f64) -> f64 {
        ghz * TAU
    }

    pub fn angular_to_ghz(angular: f64) -> f64 {
        angular / TAU
    }
}

/// Inclusive range of 1-based site numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRange {
    pub first: usize,
    pub last: usize,
}

impl SiteRange {
    pub fn new(first: usize, last: usize) -> Self {
        SiteRange { first, last }
    }

    pub fn contains(&self, site: usize) -> bool {
        (self.first..=self.last).contains(&site)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.first..=self.last
    }

    pub fn len(&self) -> usize {
        if self.last < self.first {
            0
        } else {
            self.last - self.first + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn validate(&self, n_sites: usize, what: &str) -> Result<()> {
        if self.first == 0 || self.first > self.last || self.last > n_sites {
            return Err(JunctionError::InvalidSpec(format!(
                "{what} range {}..={} must lie inside 1..={n_sites}",
                self.first, self.last
            )));
        }
        Ok(())
    }
}

fn check_site(site: usize, n_sites: usize) -> Result<()> {
    if site == 0 || site > n_sites {
        Err(JunctionError::SiteOutOfRange { site, n_sites })
    } else {
        Ok(())
    }
}

/// `cos(4πl/N)`, the spatial modulation shared by the drive and the cosine
/// background.
pub fn cosine_weight(site: usize, n_sites: usize) -> f64 {
    (4.0 * PI * site as f64 / n_sites as f64).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    /// `J_l` for the bond `(l, l+1)`, length `n_sites - 1`.
    pub bond_couplings: Vec<f64>,
    /// `U` in the `(U/2) n(n-1)` onsite term.
    pub onsite_nonlinearity: f64,
    /// Maximum occupation per site.
    pub boson_cutoff: u8,
}

impl ChainSpec {
    pub fn new(
        bond_couplings: Vec<f64>,
        onsite_nonlinearity: f64,
        boson_cutoff: u8,
    ) -> Result<Self> {
        let spec = ChainSpec {
            n_sites: bond_couplings.len() + 1,
            bond_couplings,
            onsite_nonlinearity,
            boson_cutoff,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn uniform(
        n_sites: usize,
        coupling: f64,
        onsite_nonlinearity: f64,
        boson_cutoff: u8,
    ) -> Result<Self> {
        if n_sites < 2 {
            return Err(JunctionError::InvalidSpec(format!(
                "chain needs at least 2 sites, got {n_sites}"
            )));
        }
        Self::new(vec![coupling; n_sites - 1], onsite_nonlinearity, boson_cutoff)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(JunctionError::InvalidSpec(format!(
                "chain needs at least 2 sites, got {}",
                self.n_sites
            )));
        }
        if self.bond_couplings.len() != self.n_sites - 1 {
            return Err(JunctionError::InvalidSpec(format!(
                "{} sites need {} bond couplings, got {}",
                self.n_sites,
                self.n_sites - 1,
                self.bond_couplings.len()
            )));
        }
        if self.bond_couplings.iter().any(|j| !j.is_finite()) || !self.onsite_nonlinearity.is_finite() {
            return Err(JunctionError::InvalidSpec("couplings must be finite".into()));
        }
        if self.boson_cutoff == 0 {
            return Err(JunctionError::InvalidSpec("boson cutoff must be at least 1".into()));
        }
        Ok(())
    }
}

/// Time-periodic modulation of the ergodic domain.
///
/// Only the AC part `Δ₁ cos(ω(t - t₀) + φ)` weighted by `spatial_profile` is
/// applied at evaluation time; the DC part `Δ₀ · profile` is folded into
/// [`PotentialSpec::static_offsets`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub dc_amplitude: f64,
    pub ac_amplitude: f64,
    pub angular_frequency: f64,
    pub phase: f64,
    pub driven_sites: SiteRange,
    /// Per-site weights, length `N`, zero outside `driven_sites`.
    pub spatial_profile: Vec<f64>,
    pub time_origin: f64,
}

impl DriveSpec {
    /// Cosine-profile drive on sites `1..=N/2`, starting at `t₀ = 0` with zero
    /// phase.
    pub fn cosine(n_sites: usize, dc_amplitude: f64, ac_amplitude: f64, angular_frequency: f64) -> Result<Self> {
        Self::cosine_on(
            n_sites,
            SiteRange::new(1, n_sites / 2),
            dc_amplitude,
            ac_amplitude,
            angular_frequency,
        )
    }

    pub fn cosine_on(
        n_sites: usize,
        driven_sites: SiteRange,
        dc_amplitude: f64,
        ac_amplitude: f64,
        angular_frequency: f64,
    ) -> Result<Self> {
        driven_sites.validate(n_sites, "driven-site")?;
        let spatial_profile = (1..=n_sites)
            .map(|l| if driven_sites.contains(l) { cosine_weight(l, n_sites) } else { 0.0 })
            .collect();
        let drive = DriveSpec {
            dc_amplitude,
            ac_amplitude,
            angular_frequency,
            phase: 0.0,
            driven_sites,
            spatial_profile,
            time_origin: 0.0,
        };
        drive.validate(n_sites)?;
        Ok(drive)
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if !(self.angular_frequency > 0.0 && self.angular_frequency.is_finite()) {
            return Err(JunctionError::InvalidSpec(format!(
                "drive frequency must be positive, got {}",
                self.angular_frequency
            )));
        }
        self.driven_sites.validate(n_sites, "driven-site")?;
        if self.spatial_profile.len() != n_sites {
            return Err(JunctionError::InvalidSpec(format!(
                "spatial profile has {} entries for {n_sites} sites",
                self.spatial_profile.len()
            )));
        }
        let scalars = [self.dc_amplitude, self.ac_amplitude, self.phase, self.time_origin];
        if self.spatial_profile.iter().chain(scalars.iter()).any(|w| !w.is_finite()) {
            return Err(JunctionError::InvalidSpec("drive parameters must be finite".into()));
        }
        Ok(())
    }

    /// Drive period `T = 2π/ω` in ns.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.angular_frequency
    }

    /// `Δ₁ cos(ω(t - t₀) + φ)`.
    pub fn ac_envelope(&self, time: f64) -> f64 {
        self.ac_amplitude * (self.angular_frequency * (time - self.time_origin) + self.phase).cos()
    }
}

/// Background frequency profile of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PotentialProfile {
    /// `Δ₀ cos(4πl/N)` on every site.
    Cosine,
    /// Cosine on the driven sites, constant `Δ₀` everywhere else.
    Flat,
    /// Absolute working frequencies (rad/ns), one per site.
    Table(Vec<f64>),
}

impl PotentialProfile {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialProfile::Cosine => "cosine",
            PotentialProfile::Flat => "flat",
            PotentialProfile::Table(_) => "table",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    /// `g_l - ḡ` without the AC drive, length `N`.
    pub static_offsets: Vec<f64>,
    /// `ḡ`, kept for reporting absolute frequencies.
    pub rotating_frame: f64,
}

impl PotentialSpec {
    /// Builds the static offsets for `profile`, taking `N`, `Δ₀` and the
    /// driven range from `drive` and adding `disorder` (length `N`) on top.
    pub fn build(
        profile: &PotentialProfile,
        drive: &DriveSpec,
        rotating_frame: f64,
        disorder: Option<&[f64]>,
    ) -> Result<Self> {
        let n_sites = drive.spatial_profile.len();
        let mut static_offsets: Vec<f64> = match profile {
            PotentialProfile::Cosine => (1..=n_sites)
                .map(|l| drive.dc_amplitude * cosine_weight(l, n_sites))
                .collect(),
            PotentialProfile::Flat => (1..=n_sites)
                .map(|l| {
                    if drive.driven_sites.contains(l) {
                        drive.dc_amplitude * cosine_weight(l, n_sites)
                    } else {
                        drive.dc_amplitude
                    }
                })
                .collect(),
            PotentialProfile::Table(values) => {
                if values.len() != n_sites {
                    return Err(JunctionError::InvalidSpec(format!(
                        "table profile has {} values for {n_sites} sites",
                        values.len()
                    )));
                }
                values.iter().map(|g| g - rotating_frame).collect()
            }
        };
        if let Some(offsets) = disorder {
            if offsets.len() != n_sites {
                return Err(JunctionError::InvalidSpec(format!(
                    "disorder vector has {} entries for {n_sites} sites",
                    offsets.len()
                )));
            }
            for (v, g) in static_offsets.iter_mut().zip(offsets) {
                *v += g;
            }
        }
        Ok(PotentialSpec { static_offsets, rotating_frame })
    }

    pub fn n_sites(&self) -> usize {
        self.static_offsets.len()
    }

    /// Absolute static frequency `ḡ + offset` of a site.
    pub fn absolute(&self, site: usize) -> Result<f64> {
        check_site(site, self.n_sites())?;
        Ok(self.rotating_frame + self.static_offsets[site - 1])
    }
}

/// `g_l(t) - ḡ` for a 1-based site.
pub fn frequency_at(site: usize, time: f64, drive: &DriveSpec, potential: &PotentialSpec) -> Result<f64> {
    check_site(site, potential.n_sites())?;
    Ok(frequency_at_index(site - 1, time, drive, potential))
}

#[inline]
pub(crate) fn frequency_at_index(index: usize, time: f64, drive: &DriveSpec, potential: &PotentialSpec) -> f64 {
    potential.static_offsets[index] + drive.ac_envelope(time) * drive.spatial_profile[index]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    /// `W`: offsets are uniform on `[-W, W]`.
    pub strength: f64,
    pub disordered_sites: SiteRange,
    pub master_seed: u64,
    pub realization_count: usize,
}

/// One draw of the onsite disorder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub index: usize,
    pub seed: u64,
    /// `G_l`, length `N`, zero outside the disordered sites.
    pub offsets: Vec<f64>,
}

impl DisorderSpec {
    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if !(self.strength >= 0.0 && self.strength.is_finite()) {
            return Err(JunctionError::InvalidSpec(format!(
                "disorder strength must be non-negative, got {}",
                self.strength
            )));
        }
        if self.realization_count == 0 {
            return Err(JunctionError::InvalidSpec("need at least one realization".into()));
        }
        self.disordered_sites.validate(n_sites, "disordered-site")
    }

    /// Seed of realization `index`.
    ///
    /// A ChaCha8 generator keyed by `master_seed` on stream `index` yields the
    /// realization seed as its first 64-bit word. The value therefore depends
    /// only on `(master_seed, index)`.
    pub fn realization_seed(&self, index: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(index as u64);
        rng.next_u64()
    }

    /// Draws realization `index`.
    ///
    /// Site `l` reads the two 32-bit words at position `2(l-1)` of a ChaCha8
    /// keystream keyed by the realization seed, so each `G_l` is a pure
    /// function of `(master_seed, index, l)`.
    pub fn sample(&self, n_sites: usize, index: usize) -> DisorderRealization {
        let seed = self.realization_seed(index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offsets = (1..=n_sites)
            .map(|l| {
                if self.strength == 0.0 || !self.disordered_sites.contains(l) {
                    return 0.0;
                }
                rng.set_word_pos(2 * (l as u128 - 1));
                let u: f64 = rng.random();
                self.strength * (2.0 * u - 1.0)
            })
            .collect();
        DisorderRealization { index, seed, offsets }
    }
}

/// Drive frequency (MHz) meeting `m ω = 2Ω` with `Ω = (4π/N)√(2Δ₀J)`.
///
/// `Δ₀` and `J` are ordinary frequencies in MHz. The formula is homogeneous of
/// degree one, so reading the inputs as ordinary frequencies returns `ω/2π`.
pub fn resonance_drive_frequency(n_sites: usize, dc_amplitude_mhz: f64, coupling_mhz: f64, order: u32) -> Result<f64> {
    if order == 0 || n_sites == 0 || !(dc_amplitude_mhz * coupling_mhz > 0.0) {
        return Err(JunctionError::InvalidSpec(format!(
            "resonance needs m >= 1, N >= 1 and Δ₀·J > 0 (got m={order}, N={n_sites}, Δ₀={dc_amplitude_mhz}, J={coupling_mhz})"
        )));
    }
    Ok(2.0 * small_oscillation_frequency(n_sites, dc_amplitude_mhz, coupling_mhz) / order as f64)
}

/// `Ω = (4π/N)√(2Δ₀J)`, in whatever unit `Δ₀` and `J` share.
pub fn small_oscillation_frequency(n_sites: usize, dc_amplitude: f64, coupling: f64) -> f64 {
    4.0 * PI / n_sites as f64 * (2.0 * dc_amplitude * coupling).sqrt()
}

/// A fully specified junction: chain, drive and static background.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JunctionModel {
    pub chain: ChainSpec,
    pub drive: DriveSpec,
    pub potential: PotentialSpec,
}

impl JunctionModel {
    pub fn new(chain: ChainSpec, drive: DriveSpec, potential: PotentialSpec) -> Result<Self> {
        chain.validate()?;
        drive.validate(chain.n_sites)?;
        if potential.n_sites() != chain.n_sites {
            return Err(JunctionError::InvalidSpec(format!(
                "potential has {} sites, chain has {}",
                potential.n_sites(),
                chain.n_sites
            )));
        }
        if potential.static_offsets.iter().any(|v| !v.is_finite()) {
            return Err(JunctionError::InvalidSpec("static offsets must be finite".into()));
        }
        Ok(JunctionModel { chain, drive, potential })
    }

    pub fn n_sites(&self) -> usize {
        self.chain.n_sites
    }

    pub fn period(&self) -> f64 {
        self.drive.period()
    }

    pub fn frequency_at(&self, site: usize, time: f64) -> Result<f64> {
        frequency_at(site, time, &self.drive, &self.potential)
    }

    /// Copy of the model with `offsets` added to the static background.
    pub fn with_disorder(&self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.n_sites() {
            return Err(JunctionError::InvalidSpec(format!(
                "disorder vector has {} entries for {} sites",
                offsets.len(),
                self.n_sites()
            )));
        }
        let mut model = self.clone();
        for (v, g) in model.potential.static_offsets.iter_mut().zip(offsets) {
            *v += g;
        }
        Ok(model)
    }

    /// Copy of the model with the AC drive switched off.
    pub fn undriven(&self) -> Self {
        let mut model = self.clone();
        model.drive.ac_amplitude = 0.0;
        model
    }
}
