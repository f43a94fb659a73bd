//! Site populations and ZZ correlations.
//!
//! A site counts as "in state one" when its occupation is at least one, so
//! `σᶻ_l = 2·[v_l ≥ 1] - 1`. For hard-core or single-excitation states this is
//! `2n̂_l - 1`.

use serde::{Deserialize, Serialize};

use crate::basis::{QuantumState, SectorBasis};
use crate::error::{JunctionError, Result};
use crate::propagator::StateTrajectory;

const PROBABILITY_TOL: f64 = 1e-9;

fn check_sites(basis: &SectorBasis, i: usize, j: usize) -> Result<()> {
    for site in [i, j] {
        if site == 0 || site > basis.n_sites() {
            return Err(JunctionError::SiteOutOfRange { site, n_sites: basis.n_sites() });
        }
    }
    if i == j {
        return Err(JunctionError::SameSite(i));
    }
    Ok(())
}

/// `⟨n̂_l⟩` for every site.
pub fn populations(state: &QuantumState, basis: &SectorBasis) -> Vec<f64> {
    let mut out = vec![0.0; basis.n_sites()];
    for (amp, occ) in state.amplitudes.iter().zip(basis.states()) {
        let p = amp.norm_sqr();
        for (o, &v) in out.iter_mut().zip(occ) {
            *o += p * v as f64;
        }
    }
    out
}

/// Joint occupancy distribution of two sites; `p01` means site `i` empty and
/// site `j` occupied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointProbabilities {
    pub p00: f64,
    pub p01: f64,
    pub p10: f64,
    pub p11: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Marginals {
    pub p0_i: f64,
    pub p1_i: f64,
    pub p0_j: f64,
    pub p1_j: f64,
}

impl JointProbabilities {
    pub fn total(&self) -> f64 {
        self.p00 + self.p01 + self.p10 + self.p11
    }

    pub fn marginals(&self) -> Marginals {
        Marginals {
            p0_i: self.p00 + self.p01,
            p1_i: self.p10 + self.p11,
            p0_j: self.p00 + self.p10,
            p1_j: self.p01 + self.p11,
        }
    }
}

pub fn joint_probabilities(state: &QuantumState, basis: &SectorBasis, i: usize, j: usize) -> Result<(JointProbabilities, Marginals)> {
    check_sites(basis, i, j)?;
    let mut joint = JointProbabilities { p00: 0.0, p01: 0.0, p10: 0.0, p11: 0.0 };
    for (amp, occ) in state.amplitudes.iter().zip(basis.states()) {
        let p = amp.norm_sqr();
        match (occ[i - 1] >= 1, occ[j - 1] >= 1) {
            (false, false) => joint.p00 += p,
            (false, true) => joint.p01 += p,
            (true, false) => joint.p10 += p,
            (true, true) => joint.p11 += p,
        }
    }
    Ok((joint, joint.marginals()))
}

/// Counting estimator `P00 + P11 - P01 - P10 - [P0(i) - P1(i)][P0(j) - P1(j)]`.
pub fn czz_from_counts(joint: &JointProbabilities, marginals: &Marginals) -> Result<f64> {
    let total = joint.total();
    if (total - 1.0).abs() > PROBABILITY_TOL {
        return Err(JunctionError::InvalidProbabilities(total));
    }
    for sum in [marginals.p0_i + marginals.p1_i, marginals.p0_j + marginals.p1_j] {
        if (sum - 1.0).abs() > PROBABILITY_TOL {
            return Err(JunctionError::InvalidProbabilities(sum));
        }
    }
    Ok(joint.p00 + joint.p11 - joint.p01 - joint.p10
        - (marginals.p0_i - marginals.p1_i) * (marginals.p0_j - marginals.p1_j))
}

/// `⟨σᶻ_i σᶻ_j⟩ - ⟨σᶻ_i⟩⟨σᶻ_j⟩`.
pub fn czz_expectation(state: &QuantumState, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    check_sites(basis, i, j)?;
    let sigma = |v: u8| if v >= 1 { 1.0 } else { -1.0 };
    let (mut zz, mut zi, mut zj) = (0.0, 0.0, 0.0);
    for (amp, occ) in state.amplitudes.iter().zip(basis.states()) {
        let p = amp.norm_sqr();
        let (si, sj) = (sigma(occ[i - 1]), sigma(occ[j - 1]));
        zz += p * si * sj;
        zi += p * si;
        zj += p * sj;
    }
    Ok(zz - zi * zj)
}

/// Populations and selected correlations along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSeries {
    pub times: Vec<f64>,
    /// `populations[t][l - 1]`.
    pub populations: Vec<Vec<f64>>,
    /// Site pairs `(i, j)` whose correlation is tracked.
    pub pairs: Vec<(usize, usize)>,
    /// `correlations[t][k]` is `C_ZZ` for `pairs[k]`.
    pub correlations: Vec<Vec<f64>>,
}

impl ObservableSeries {
    pub fn from_trajectory(traj: &StateTrajectory, basis: &SectorBasis, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut populations_out = Vec::with_capacity(traj.states.len());
        let mut correlations = Vec::with_capacity(traj.states.len());
        for state in &traj.states {
            populations_out.push(populations(state, basis));
            correlations.push(
                pairs
                    .iter()
                    .map(|&(i, j)| czz_expectation(state, basis, i, j))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(ObservableSeries {
            times: traj.times.clone(),
            populations: populations_out,
            pairs: pairs.to_vec(),
            correlations,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.populations.first().map_or(0, Vec::len)
    }

    /// Time average of `Σ_{l ∈ sites} ⟨n̂_l⟩` over the samples (trapezoid
    /// rule on the sample grid).
    pub fn time_averaged_population(&self, sites: impl IntoIterator<Item = usize> + Clone) -> f64 {
        let series: Vec<f64> = self
            .populations
            .iter()
            .map(|p| sites.clone().into_iter().map(|l| p[l - 1]).sum())
            .collect();
        if series.len() < 2 {
            return series.first().copied().unwrap_or(0.0);
        }
        let span = self.times[self.times.len() - 1] - self.times[0];
        let area: f64 = self
            .times
            .windows(2)
            .zip(series.windows(2))
            .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
            .sum();
        area / span
    }

    /// `max_t ⟨n̂_site⟩`.
    pub fn max_population(&self, site: usize) -> f64 {
        self.populations.iter().map(|p| p[site - 1]).fold(0.0, f64::max)
    }
}

/// The pairs `(l, reference)` for every `l ≠ reference`.
pub fn pairs_with(reference: usize, n_sites: usize) -> Vec<(usize, usize)> {
    (1..=n_sites).filter(|&l| l != reference).map(|l| (l, reference)).collect()
}
