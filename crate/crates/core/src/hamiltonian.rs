//! Sector Hamiltonian of the driven Bose-Hubbard chain.
//!
//! Every matrix element in the occupation basis is real, so snapshots are
//! stored as real symmetric matrices; Hermiticity reduces to symmetry.

use nalgebra::{DMatrix, DVector};

use crate::basis::SectorBasis;
use crate::model::{frequency_at_index, ChainSpec, JunctionModel, SiteRange};

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSnapshot {
    pub matrix: DMatrix<f64>,
    pub time: f64,
}

impl HamiltonianSnapshot {
    /// `max |H - H†|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }
}

/// Hopping `Σ_l J_l (a†_l a_{l+1} + h.c.)` over all bonds.
pub fn hopping_matrix(chain: &ChainSpec, basis: &SectorBasis) -> DMatrix<f64> {
    hopping_matrix_for_bonds(chain, basis, 1..chain.n_sites)
}

/// Hopping restricted to the bonds `(l, l+1)` for `l` in `bonds` (1-based).
pub fn hopping_matrix_for_bonds(
    chain: &ChainSpec,
    basis: &SectorBasis,
    bonds: impl IntoIterator<Item = usize> + Clone,
) -> DMatrix<f64> {
    let dim = basis.dim();
    let cutoff = basis.boson_cutoff();
    let mut h = DMatrix::zeros(dim, dim);
    let mut target = vec![0u8; basis.n_sites()];
    for (col, state) in basis.states().iter().enumerate() {
        for bond in bonds.clone() {
            let (a, b) = (bond - 1, bond);
            let coupling = chain.bond_couplings[bond - 1];
            // a†_a a_b then a†_b a_a
            for (from, to) in [(b, a), (a, b)] {
                if state[from] == 0 || state[to] >= cutoff {
                    continue;
                }
                target.copy_from_slice(state);
                target[from] -= 1;
                target[to] += 1;
                let amplitude = ((state[from] as f64) * (state[to] as f64 + 1.0)).sqrt();
                let row = basis.lookup(&target).expect("hop stays inside the sector");
                h[(row, col)] += coupling * amplitude;
            }
        }
    }
    h
}

/// Diagonal entries `Σ_l [(g_l(t) - ḡ) v_l + (U/2) v_l (v_l - 1)]`.
pub fn diagonal_at(time: f64, model: &JunctionModel, basis: &SectorBasis) -> DVector<f64> {
    diagonal_for_sites(time, model, basis, SiteRange::new(1, model.n_sites()))
}

/// Diagonal contributions of the sites in `sites` only.
pub fn diagonal_for_sites(time: f64, model: &JunctionModel, basis: &SectorBasis, sites: SiteRange) -> DVector<f64> {
    let half_u = 0.5 * model.chain.onsite_nonlinearity;
    let freqs: Vec<(usize, f64)> = sites
        .iter()
        .map(|l| (l - 1, frequency_at_index(l - 1, time, &model.drive, &model.potential)))
        .collect();
    DVector::from_iterator(
        basis.dim(),
        basis.states().iter().map(|state| {
            freqs
                .iter()
                .map(|&(i, g)| {
                    let v = state[i] as f64;
                    g * v + half_u * v * (v - 1.0)
                })
                .sum::<f64>()
        }),
    )
}

pub fn hamiltonian_at(time: f64, model: &JunctionModel, basis: &SectorBasis) -> HamiltonianSnapshot {
    HamiltonianBuilder::new(model, basis).at(time)
}

/// Caches the static hopping so that repeated snapshots only rebuild the
/// diagonal.
#[derive(Debug, Clone)]
pub struct HamiltonianBuilder<'a> {
    model: &'a JunctionModel,
    basis: &'a SectorBasis,
    hopping: DMatrix<f64>,
}

impl<'a> HamiltonianBuilder<'a> {
    pub fn new(model: &'a JunctionModel, basis: &'a SectorBasis) -> Self {
        assert_eq!(model.n_sites(), basis.n_sites(), "model and basis disagree on N");
        HamiltonianBuilder { model, basis, hopping: hopping_matrix(&model.chain, basis) }
    }

    pub fn model(&self) -> &JunctionModel {
        self.model
    }

    pub fn basis(&self) -> &SectorBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn at(&self, time: f64) -> HamiltonianSnapshot {
        let mut matrix = self.hopping.clone();
        matrix.set_diagonal(&diagonal_at(time, self.model, self.basis));
        HamiltonianSnapshot { matrix, time }
    }
}

/// `H(t) = H_erg(t) + H_loc + H_int` assembled piece by piece. The ergodic
/// part holds the driven sites and the bonds among them, the localized part
/// the remaining sites and bonds, and the interface the single bond joining
/// the two domains.
#[derive(Debug, Clone)]
pub struct JunctionParts {
    pub ergodic: DMatrix<f64>,
    pub localized: DMatrix<f64>,
    pub interface: DMatrix<f64>,
}

impl JunctionParts {
    pub fn total(&self) -> DMatrix<f64> {
        &self.ergodic + &self.localized + &self.interface
    }
}

/// Splits the Hamiltonian at `time` into its domain pieces. The driven sites
/// must form the left block `1..=k` of the chain.
pub fn junction_parts(time: f64, model: &JunctionModel, basis: &SectorBasis) -> JunctionParts {
    let n = model.n_sites();
    let driven = model.drive.driven_sites;
    assert!(driven.first == 1 && driven.last < n, "driven sites must be a proper left block");
    let k = driven.last;
    let chain = &model.chain;

    let mut ergodic = hopping_matrix_for_bonds(chain, basis, 1..k);
    ergodic.set_diagonal(&diagonal_for_sites(time, model, basis, SiteRange::new(1, k)));
    let mut localized = hopping_matrix_for_bonds(chain, basis, k + 1..n);
    localized.set_diagonal(&diagonal_for_sites(time, model, basis, SiteRange::new(k + 1, n)));
    let interface = hopping_matrix_for_bonds(chain, basis, k..k + 1);
    JunctionParts { ergodic, localized, interface }
}
