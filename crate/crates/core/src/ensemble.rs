//! Disorder ensembles: one model per realization, evaluated in parallel and
//! folded in realization order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::SectorBasis;
use crate::error::{JunctionError, Result};
use crate::model::{DisorderSpec, JunctionModel};
use crate::observables::ObservableSeries;
use crate::propagator::Propagator;
use crate::spectrum::{gap_ratios, quasienergies, RatioSample};

/// What to record along each realization's trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsRequest {
    /// Excitations start packed from this 1-based site.
    pub initial_site: usize,
    /// Ascending sample times (ns); evolution starts at `t = 0`.
    pub samples: Vec<f64>,
    /// Largest integrator step (ns).
    pub step: f64,
    pub pairs: Vec<(usize, usize)>,
    pub keep_realizations: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub realization_count: usize,
    pub seeds: Vec<u64>,
    /// Mean over realizations per time and site.
    pub averaged: Option<ObservableSeries>,
    pub pooled: Option<RatioSample>,
    /// Per-realization series, in realization order, when requested.
    pub realizations: Option<Vec<ObservableSeries>>,
}

fn realization_model(model: &JunctionModel, disorder: &DisorderSpec, index: usize) -> Result<JunctionModel> {
    model.with_disorder(&disorder.sample(model.n_sites(), index).offsets)
}

fn seeds(disorder: &DisorderSpec) -> Vec<u64> {
    (0..disorder.realization_count).map(|i| disorder.realization_seed(i)).collect()
}

/// Runs `job` for every realization (only once when `W = 0`, since all
/// realizations then coincide) and returns results in realization order.
/// The first failing realization, by index, aborts the ensemble.
fn map_realizations<T: Send + Clone>(
    disorder: &DisorderSpec,
    job: impl Fn(usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let wrap = |index: usize| job(index).map_err(|e| JunctionError::Realization { index, source: Box::new(e) });
    if disorder.strength == 0.0 {
        let single = wrap(0)?;
        return Ok(vec![single; disorder.realization_count]);
    }
    let results: Vec<Result<T>> = (0..disorder.realization_count).into_par_iter().map(wrap).collect();
    results.into_iter().collect()
}

/// Ensemble-averaged populations and correlations.
pub fn run_dynamics_ensemble(
    model: &JunctionModel,
    basis: &SectorBasis,
    disorder: &DisorderSpec,
    request: &DynamicsRequest,
) -> Result<EnsembleResult> {
    disorder.validate(model.n_sites())?;
    let initial = basis.packed_state(request.initial_site)?;
    let runs = map_realizations(disorder, |index| {
        let m = realization_model(model, disorder, index)?;
        let traj = Propagator::new(&m, basis).evolve_state(&initial, &request.samples, request.step)?;
        ObservableSeries::from_trajectory(&traj, basis, &request.pairs)
    })?;
    let averaged = average(&runs);
    Ok(EnsembleResult {
        realization_count: disorder.realization_count,
        seeds: seeds(disorder),
        averaged: Some(averaged),
        pooled: None,
        realizations: request.keep_realizations.then_some(runs),
    })
}

/// Element-wise mean, summed in realization order.
pub fn average(runs: &[ObservableSeries]) -> ObservableSeries {
    let first = &runs[0];
    let scale = 1.0 / runs.len() as f64;
    let mean = |pick: &dyn Fn(&ObservableSeries) -> &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        let mut acc: Vec<Vec<f64>> = pick(first).iter().map(|row| vec![0.0; row.len()]).collect();
        for run in runs {
            for (a, row) in acc.iter_mut().zip(pick(run)) {
                for (x, v) in a.iter_mut().zip(row) {
                    *x += v;
                }
            }
        }
        if runs.len() > 1 {
            acc.iter_mut().flatten().for_each(|x| *x *= scale);
        }
        acc
    };
    ObservableSeries {
        times: first.times.clone(),
        populations: mean(&|s| &s.populations),
        pairs: first.pairs.clone(),
        correlations: mean(&|s| &s.correlations),
    }
}

/// Gap ratios of every realization's Floquet spectrum, pooled in
/// realization order.
pub fn run_spectrum_ensemble(
    model: &JunctionModel,
    basis: &SectorBasis,
    disorder: &DisorderSpec,
    steps_per_period: usize,
) -> Result<EnsembleResult> {
    disorder.validate(model.n_sites())?;
    let samples = map_realizations(disorder, |index| {
        let m = realization_model(model, disorder, index)?;
        let floquet = Propagator::new(&m, basis).floquet_operator(steps_per_period)?;
        gap_ratios(&quasienergies(&floquet)?, index)
    })?;
    Ok(EnsembleResult {
        realization_count: disorder.realization_count,
        seeds: seeds(disorder),
        averaged: None,
        pooled: Some(RatioSample::pool(samples)),
        realizations: None,
    })
}
