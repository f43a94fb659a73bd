//! Device parameter table ingestion.
//!
//! The file is TOML with one array per tabulated quantity (one entry per
//! qubit, left to right) plus an 11-entry `couplings_mhz` list. Only the
//! working frequencies, bond couplings and anharmonicities feed the
//! simulation; the remaining rows are carried along for reporting.

use std::path::Path;

use serde::Serialize;

use crate::error::{JunctionError, Result};
use crate::model::{cosine_weight, units, ChainSpec, PotentialProfile};

pub const DEVICE_QUBITS: usize = 12;
pub const DEVICE_BONDS: usize = DEVICE_QUBITS - 1;

const BUNDLED: &str = include_str!("../data/device_table.toml");

/// Per-qubit rows, each of length 12.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceTable {
    pub readout_ghz: Vec<f64>,
    pub max_ghz: Vec<f64>,
    pub idle_ghz: Vec<f64>,
    pub cosine_ghz: Vec<f64>,
    pub flat_ghz: Vec<f64>,
    pub t1_us: Vec<f64>,
    pub t2s_us: Vec<f64>,
    pub eta_mhz: Vec<f64>,
    pub chi_mhz: Vec<f64>,
    pub f00: Vec<f64>,
    pub f11: Vec<f64>,
    pub visibility: Vec<f64>,
    pub integration_ns: Vec<f64>,
    pub couplings_mhz: Vec<f64>,
}

/// Which working-frequency row to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkingRow {
    Cosine,
    Flat,
}

fn numeric_row(table: &toml::Table, field: &str, expected: usize) -> Result<Vec<f64>> {
    let err = |message: String| JunctionError::TableParse { field: field.to_string(), message };
    let value = table.get(field).ok_or_else(|| err("missing".into()))?;
    let array = value.as_array().ok_or_else(|| err("expected an array".into()))?;
    let row = array
        .iter()
        .map(|v| match v {
            toml::Value::Float(x) => Ok(*x),
            toml::Value::Integer(i) => Ok(*i as f64),
            other => Err(err(format!("non-numeric entry {other}"))),
        })
        .collect::<Result<Vec<f64>>>()?;
    if row.len() != expected {
        return Err(err(format!("expected {expected} values, found {}", row.len())));
    }
    if row.iter().any(|x| !x.is_finite()) {
        return Err(err("entries must be finite".into()));
    }
    Ok(row)
}

impl DeviceTable {
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| JunctionError::TableParse {
            field: "<document>".into(),
            message: e.message().to_string(),
        })?;
        let row = |field: &str| numeric_row(&table, field, DEVICE_QUBITS);
        let parsed = DeviceTable {
            readout_ghz: row("readout_ghz")?,
            max_ghz: row("max_ghz")?,
            idle_ghz: row("idle_ghz")?,
            cosine_ghz: row("cosine_ghz")?,
            flat_ghz: row("flat_ghz")?,
            t1_us: row("t1_us")?,
            t2s_us: row("t2s_us")?,
            eta_mhz: row("eta_mhz")?,
            chi_mhz: row("chi_mhz")?,
            f00: row("f00")?,
            f11: row("f11")?,
            visibility: row("visibility")?,
            integration_ns: row("integration_ns")?,
            couplings_mhz: numeric_row(&table, "couplings_mhz", DEVICE_BONDS)?,
        };
        parsed.validate()?;
        Ok(parsed)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| JunctionError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// The table shipped with the crate.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled device table parses")
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("readout_ghz", &self.readout_ghz),
            ("max_ghz", &self.max_ghz),
            ("idle_ghz", &self.idle_ghz),
            ("cosine_ghz", &self.cosine_ghz),
            ("flat_ghz", &self.flat_ghz),
            ("couplings_mhz", &self.couplings_mhz),
        ];
        for (field, values) in positive {
            if let Some(bad) = values.iter().find(|&&v| v <= 0.0) {
                return Err(JunctionError::TableParse {
                    field: field.into(),
                    message: format!("frequencies must be positive, found {bad}"),
                });
            }
        }
        Ok(())
    }

    pub fn working_row_ghz(&self, row: WorkingRow) -> &[f64] {
        match row {
            WorkingRow::Cosine => &self.cosine_ghz,
            WorkingRow::Flat => &self.flat_ghz,
        }
    }

    /// Working frequencies as an absolute-frequency profile (rad/ns).
    pub fn working_profile(&self, row: WorkingRow) -> PotentialProfile {
        PotentialProfile::Table(self.working_row_ghz(row).iter().map(|&g| units::ghz_to_angular(g)).collect())
    }

    /// Chain with the tabulated bond couplings.
    pub fn chain_spec(&self, onsite_nonlinearity: f64, boson_cutoff: u8) -> Result<ChainSpec> {
        ChainSpec::new(
            self.couplings_mhz.iter().map(|&j| units::mhz_to_angular(j)).collect(),
            onsite_nonlinearity,
            boson_cutoff,
        )
    }

    pub fn mean_anharmonicity_mhz(&self) -> f64 {
        self.eta_mhz.iter().sum::<f64>() / self.eta_mhz.len() as f64
    }

    /// Compares the working rows against the closed-form profiles
    /// `ḡ + Δ₀cos(4πl/N)` (driven and cosine sites) and `ḡ + Δ₀` (flat
    /// sites `N/2+1..=N`). Returns one message per mismatch larger than
    /// `tolerance_mhz`.
    pub fn consistency_warnings(&self, rotating_frame_ghz: f64, dc_amplitude_mhz: f64, tolerance_mhz: f64) -> Vec<String> {
        let n = DEVICE_QUBITS;
        let frame_mhz = rotating_frame_ghz * 1e3;
        let deviation = |row: &[f64], model: &dyn Fn(usize) -> f64, sites: std::ops::RangeInclusive<usize>| {
            sites
                .map(|l| (row[l - 1] * 1e3 - frame_mhz - model(l)).abs())
                .fold(0.0, f64::max)
        };
        let mut warnings = Vec::new();

        let formula = |l: usize| dc_amplitude_mhz * cosine_weight(l, n);
        let shifted = |l: usize| dc_amplitude_mhz * cosine_weight(l - 1, n);
        let cos_dev = deviation(&self.cosine_ghz, &formula, 1..=n);
        if cos_dev > tolerance_mhz {
            let shifted_dev = deviation(&self.cosine_ghz, &shifted, 1..=n);
            let mut msg = format!(
                "cosine row deviates from ḡ + Δ₀cos(4πl/N) by up to {cos_dev:.2} MHz"
            );
            if shifted_dev <= tolerance_mhz {
                msg.push_str(&format!(
                    "; it matches cos(4π(l-1)/N) to {shifted_dev:.2} MHz (site-index phase offset)"
                ));
            }
            warnings.push(msg);
        }

        let flat_sites = n / 2 + 1..=n;
        let flat = |_l: usize| dc_amplitude_mhz;
        let flat_dev = deviation(&self.flat_ghz, &flat, flat_sites.clone());
        if flat_dev > tolerance_mhz {
            let half = |_l: usize| dc_amplitude_mhz / 2.0;
            let half_dev = deviation(&self.flat_ghz, &half, flat_sites);
            let mut msg = format!("flat row deviates from ḡ + Δ₀ by up to {flat_dev:.2} MHz");
            if half_dev <= tolerance_mhz {
                msg.push_str(&format!("; it matches ḡ + Δ₀/2 to {half_dev:.2} MHz"));
            }
            warnings.push(msg);
        }
        warnings
    }
}
