//! The experiment pipelines behind each subcommand.
//!
//! All numerics run inside a rayon pool sized by `JUNCTION_WORKERS`; files
//! are written afterwards from the calling thread.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use floquet_junction::semiclassical::{linspace, potential_contours, stability_grid, GridSpec, SemiclassicalParams};
use floquet_junction::spectrum::{
    check_printed_coe, ks_distance, poisson_mean, ratio_histogram, sample_coe_reference, PrintedCoeCheck,
    Reference, COE_QUADRATURE_CUTOFF,
};
use floquet_junction::{
    observables::pairs_with, run_dynamics_ensemble, run_spectrum_ensemble, DeviceTable, DynamicsRequest,
    JunctionError, ModelConfig, Result,
};
use serde::Serialize;

use crate::manifest::{write_file, RunManifest};
use crate::output;
use crate::{exit_code, workers_from_env, Command, Overrides};

/// Tolerance (MHz) for the device-table consistency check.
pub const DEVICE_TOLERANCE_MHZ: f64 = 2.0;

/// Runs `command`, writes its outputs and manifest into `options.out`, and
/// returns the manifest with the process exit code.
pub fn run(command: Command, options: &Overrides) -> (RunManifest, i32) {
    let started = Instant::now();
    let pool = match workers_from_env() {
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build(),
        None => rayon::ThreadPoolBuilder::new().build(),
    }
    .expect("thread pool");
    let mut manifest = RunManifest::new(command.name(), pool.current_num_threads());
    let result = pool.install(|| execute(command, options, &mut manifest));
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(e);
            manifest.record_failure(e, code);
            code
        }
    };
    manifest.wall_clock_seconds = started.elapsed().as_secs_f64();
    if let Err(e) = manifest.write(&options.out) {
        eprintln!("error: could not write manifest: {e}");
        return (manifest, if code == 0 { 1 } else { code });
    }
    (manifest, code)
}

fn execute(command: Command, options: &Overrides, manifest: &mut RunManifest) -> Result<()> {
    let config = options.resolve_config()?;
    manifest.set_config(&config);
    match command {
        Command::Dynamics => dynamics(&config, options, manifest, true),
        Command::Ensemble => dynamics(&config, options, manifest, false),
        Command::Spectrum => spectrum(&config, options, manifest),
        Command::Stability => stability(&config, options, manifest),
        Command::Contours => contours(&config, options, manifest),
        Command::DeviceCheck => device_check(&config, options, manifest),
    }
}

fn emit(options: &Overrides, manifest: &mut RunManifest, name: &str, bytes: &[u8]) -> Result<()> {
    manifest.outputs.push(write_file(&options.out, name, bytes)?);
    Ok(())
}

/// `single` restricts the run to realization 0, which makes `dynamics`
/// identical to `ensemble` with one realization.
fn dynamics(config: &ModelConfig, options: &Overrides, manifest: &mut RunManifest, single: bool) -> Result<()> {
    let resolved = config.resolve()?;
    let mut disorder = resolved.disorder.clone();
    if single {
        disorder.realization_count = 1;
    }
    let steps = config.run.steps_per_period;
    let request = DynamicsRequest {
        initial_site: config.run.init_site,
        samples: config.sample_times(),
        step: resolved.model.period() / steps as f64,
        pairs: pairs_with(config.run.reference_site, resolved.model.n_sites()),
        keep_realizations: config.run.keep_realizations && !single,
    };
    let result = run_dynamics_ensemble(&resolved.model, &resolved.basis, &disorder, &request)?;
    manifest.realization_seeds = result.seeds.clone();
    manifest.steps_per_period = Some(steps);
    let averaged = result.averaged.expect("dynamics ensemble returns averages");
    emit(options, manifest, "populations.csv", output::populations_csv(&averaged).as_bytes())?;
    emit(options, manifest, "czz.csv", output::czz_csv(&averaged).as_bytes())?;
    if let Some(runs) = &result.realizations {
        emit(options, manifest, "populations_raw.csv", output::raw_populations_csv(runs).as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub realizations: usize,
    pub ratio_count: usize,
    pub discarded_degenerate: usize,
    pub mean_r: f64,
    pub poisson_mean: f64,
    pub coe_reference_mean: f64,
    pub coe_reference_ratios: usize,
    pub ks_poisson: f64,
    pub ks_coe: f64,
    /// `poisson` or `coe`, whichever KS distance is smaller.
    pub closer_to: String,
    pub printed_coe: PrintedCoeCheck,
}

fn spectrum(config: &ModelConfig, options: &Overrides, manifest: &mut RunManifest) -> Result<()> {
    let resolved = config.resolve()?;
    let steps = config.run.steps_per_period;
    let result = run_spectrum_ensemble(&resolved.model, &resolved.basis, &resolved.disorder, steps)?;
    manifest.realization_seeds = result.seeds.clone();
    manifest.steps_per_period = Some(steps);
    let pooled = result.pooled.expect("spectrum ensemble returns ratios");
    let s = &config.spectrum;
    let coe = sample_coe_reference(s.coe_dim, s.coe_matrices, s.coe_seed)?;
    let mean_r = pooled.mean().ok_or(JunctionError::EmptySample)?;
    let ks_poisson = ks_distance(&pooled, &Reference::Poisson)?;
    let ks_coe = ks_distance(&pooled, &Reference::Sample(&coe))?;
    let summary = SpectrumSummary {
        realizations: result.realization_count,
        ratio_count: pooled.len(),
        discarded_degenerate: pooled.discarded_degenerate,
        mean_r,
        poisson_mean: poisson_mean(),
        coe_reference_mean: coe.mean().ok_or(JunctionError::EmptySample)?,
        coe_reference_ratios: coe.len(),
        ks_poisson,
        ks_coe,
        closer_to: if ks_poisson <= ks_coe { "poisson" } else { "coe" }.into(),
        printed_coe: check_printed_coe(COE_QUADRATURE_CUTOFF),
    };
    let rows = ratio_histogram(&pooled, &coe, s.histogram_bins);
    emit(options, manifest, "ratio_histogram.csv", output::histogram_csv(&rows).as_bytes())?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(options, manifest, "summary.json", json.as_bytes())?;
    Ok(())
}

/// Classical-model parameters matching the quantum configuration.
pub fn semiclassical_params(config: &ModelConfig) -> Result<SemiclassicalParams> {
    let j = config.chain.coupling_mhz;
    SemiclassicalParams::from_mhz(
        config.chain.n_sites,
        config.drive.dc_in_j * j,
        config.drive.ac_in_j * j,
        config.drive_frequency_mhz()?,
        j,
    )
}

pub fn grid_spec(config: &ModelConfig, params: &SemiclassicalParams) -> GridSpec {
    let s = &config.semiclassical;
    GridSpec {
        omega_max: s.omega_max_in_omega * params.small_oscillation_frequency(),
        delta1_max: s.delta1_max_in_dc * params.dc_amplitude,
        omega_points: s.resolution,
        delta1_steps: s.resolution,
        steps_per_oscillation: s.steps_per_oscillation,
    }
}

fn stability(config: &ModelConfig, options: &Overrides, manifest: &mut RunManifest) -> Result<()> {
    let params = semiclassical_params(config)?;
    let grid = stability_grid(&params, &grid_spec(config, &params))?;
    emit(options, manifest, "stability.csv", output::stability_csv(&grid).as_bytes())
}

fn contours(config: &ModelConfig, options: &Overrides, manifest: &mut RunManifest) -> Result<()> {
    let params = semiclassical_params(config)?;
    let points = config.semiclassical.contour_points;
    let field = potential_contours(&linspace(0.0, TAU, points), &linspace(-PI, PI, points), &params)?;
    emit(options, manifest, "contours.csv", output::contours_csv(&field).as_bytes())
}

#[derive(Debug, Serialize)]
struct DeviceReport<'a> {
    source: String,
    table: &'a DeviceTable,
    mean_anharmonicity_mhz: f64,
    warnings: Vec<String>,
}

fn device_check(config: &ModelConfig, options: &Overrides, manifest: &mut RunManifest) -> Result<()> {
    let (table, source) = match &options.table {
        Some(path) => (DeviceTable::load(path)?, path.display().to_string()),
        None => (DeviceTable::bundled(), "bundled".to_string()),
    };
    let warnings = table.consistency_warnings(
        config.potential.rotating_frame_ghz,
        config.drive.dc_in_j * config.chain.coupling_mhz,
        DEVICE_TOLERANCE_MHZ,
    );
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let report = DeviceReport { source, table: &table, mean_anharmonicity_mhz: table.mean_anharmonicity_mhz(), warnings };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    emit(options, manifest, "device_report.json", json.as_bytes())
}
