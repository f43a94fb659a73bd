//! Fixed-excitation-number occupation basis.

use std::collections::HashMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{JunctionError, Result};

/// Identifies the sector a state vector lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisTag {
    pub n_sites: usize,
    pub excitations: usize,
    pub boson_cutoff: u8,
}

/// All occupation vectors of `N` sites holding exactly `n` excitations with
/// at most `n_max` per site, in descending lexicographic order.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    tag: BasisTag,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl SectorBasis {
    pub fn new(n_sites: usize, excitations: usize, boson_cutoff: u8) -> Result<Self> {
        let max = n_sites * boson_cutoff as usize;
        if n_sites == 0 || boson_cutoff == 0 || excitations > max {
            return Err(JunctionError::SectorOutOfRange { excitations, max });
        }
        let mut states = Vec::new();
        let mut current = vec![0u8; n_sites];
        enumerate(&mut current, 0, excitations, boson_cutoff, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(SectorBasis {
            tag: BasisTag { n_sites, excitations, boson_cutoff },
            states,
            index,
        })
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    pub fn n_sites(&self) -> usize {
        self.tag.n_sites
    }

    pub fn excitations(&self) -> usize {
        self.tag.excitations
    }

    pub fn boson_cutoff(&self) -> u8 {
        self.tag.boson_cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Vec<u8>] {
        &self.states
    }

    pub fn state(&self, index: usize) -> &[u8] {
        &self.states[index]
    }

    /// Dense index of an occupation vector.
    pub fn index_of(&self, occupation: &[u8]) -> Result<usize> {
        self.index
            .get(occupation)
            .copied()
            .ok_or_else(|| JunctionError::InvalidOccupation(occupation.to_vec()))
    }

    pub(crate) fn lookup(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    /// Single excitation on a 1-based site.
    pub fn fock_state(&self, site: usize) -> Result<QuantumState> {
        if self.excitations() != 1 {
            return Err(JunctionError::WrongSector { expected: 1, actual: self.excitations() });
        }
        if site == 0 || site > self.n_sites() {
            return Err(JunctionError::SiteOutOfRange { site, n_sites: self.n_sites() });
        }
        let mut occupation = vec![0u8; self.n_sites()];
        occupation[site - 1] = 1;
        self.basis_state(&occupation)
    }

    /// Excitations packed from `first_site` rightwards, each site filled to
    /// the cutoff before the next one. Equals [`SectorBasis::fock_state`] for
    /// `n = 1`.
    pub fn packed_state(&self, first_site: usize) -> Result<QuantumState> {
        if first_site == 0 || first_site > self.n_sites() {
            return Err(JunctionError::SiteOutOfRange { site: first_site, n_sites: self.n_sites() });
        }
        let mut occupation = vec![0u8; self.n_sites()];
        let mut remaining = self.excitations();
        for occ in occupation.iter_mut().skip(first_site - 1) {
            let put = remaining.min(self.boson_cutoff() as usize);
            *occ = put as u8;
            remaining -= put;
        }
        if remaining > 0 {
            return Err(JunctionError::InvalidSpec(format!(
                "{} excitations do not fit on sites {first_site}..={} with cutoff {}",
                self.excitations(),
                self.n_sites(),
                self.boson_cutoff()
            )));
        }
        self.basis_state(&occupation)
    }

    /// Normalized basis vector for an occupation.
    pub fn basis_state(&self, occupation: &[u8]) -> Result<QuantumState> {
        let index = self.index_of(occupation)?;
        let mut amplitudes = DVector::zeros(self.dim());
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes, tag: self.tag })
    }
}

// Fills sites left to right, largest occupation first, which yields the
// descending lexicographic order directly.
fn enumerate(current: &mut Vec<u8>, site: usize, remaining: usize, cutoff: u8, out: &mut Vec<Vec<u8>>) {
    let n_sites = current.len();
    if site == n_sites - 1 {
        if remaining <= cutoff as usize {
            current[site] = remaining as u8;
            out.push(current.clone());
            current[site] = 0;
        }
        return;
    }
    let capacity_after = (n_sites - site - 1) * cutoff as usize;
    let hi = remaining.min(cutoff as usize);
    let lo = remaining.saturating_sub(capacity_after);
    for occ in (lo..=hi).rev() {
        current[site] = occ as u8;
        enumerate(current, site + 1, remaining - occ, cutoff, out);
    }
    current[site] = 0;
}

/// Complex amplitudes over a [`SectorBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: DVector<Complex64>,
    pub tag: BasisTag,
}

impl QuantumState {
    pub fn new(basis: &SectorBasis, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(JunctionError::BasisMismatch);
        }
        Ok(QuantumState { amplitudes, tag: basis.tag() })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            self.amplitudes /= Complex64::new(norm, 0.0);
        }
        self
    }

    pub fn check_basis(&self, basis: &SectorBasis) -> Result<()> {
        if self.tag != basis.tag() || self.amplitudes.len() != basis.dim() {
            return Err(JunctionError::BasisMismatch);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_count(n_sites: usize, n: usize, cutoff: u8) -> usize {
        let base = cutoff as usize + 1;
        (0..base.pow(n_sites as u32))
            .filter(|&code| {
                let mut c = code;
                let mut total = 0;
                for _ in 0..n_sites {
                    total += c % base;
                    c /= base;
                }
                total == n
            })
            .count()
    }

    #[test]
    fn dimensions() {
        assert_eq!(SectorBasis::new(12, 1, 1).unwrap().dim(), 12);
        assert_eq!(SectorBasis::new(12, 1, 3).unwrap().dim(), 12);
        assert_eq!(SectorBasis::new(12, 2, 1).unwrap().dim(), 66);
        assert_eq!(SectorBasis::new(12, 2, 2).unwrap().dim(), brute_force_count(12, 2, 2));
        assert_eq!(SectorBasis::new(12, 2, 2).unwrap().dim(), 78);
    }

    #[test]
    fn dimension_matches_nested_loop_count() {
        for n_sites in 1..=8 {
            for n in 0..=3 {
                for cutoff in 1..=2u8 {
                    if n > n_sites * cutoff as usize {
                        assert!(SectorBasis::new(n_sites, n, cutoff).is_err());
                        continue;
                    }
                    let basis = SectorBasis::new(n_sites, n, cutoff).unwrap();
                    assert_eq!(basis.dim(), brute_force_count(n_sites, n, cutoff), "{n_sites} {n} {cutoff}");
                }
            }
        }
    }

    #[test]
    fn states_are_strictly_descending_and_valid() {
        let basis = SectorBasis::new(6, 3, 2).unwrap();
        for pair in basis.states().windows(2) {
            assert!(pair[0] > pair[1]);
        }
        for s in basis.states() {
            assert_eq!(s.iter().map(|&v| v as usize).sum::<usize>(), 3);
            assert!(s.iter().all(|&v| v <= 2));
        }
        assert_eq!(basis.state(0), &[2, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn index_roundtrip_exhaustive() {
        let basis = SectorBasis::new(12, 2, 1).unwrap();
        assert_eq!(basis.index_of(basis.state(0)).unwrap(), 0);
        for (i, s) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(s).unwrap(), i);
        }
        let mut wrong = vec![0u8; 12];
        wrong[0] = 1;
        assert!(matches!(basis.index_of(&wrong), Err(JunctionError::InvalidOccupation(_))));
        wrong[1] = 2;
        assert!(basis.index_of(&wrong).is_err());
    }

    #[test]
    fn sector_out_of_range() {
        assert!(matches!(
            SectorBasis::new(3, 4, 1),
            Err(JunctionError::SectorOutOfRange { excitations: 4, max: 3 })
        ));
    }

    #[test]
    fn fock_states() {
        let basis = SectorBasis::new(12, 1, 2).unwrap();
        let psi = basis.fock_state(3).unwrap();
        assert_eq!(psi.norm(), 1.0);
        let idx = psi.amplitudes.iter().position(|a| a.re == 1.0).unwrap();
        assert_eq!(basis.state(idx)[2], 1);
        assert!(basis.fock_state(13).is_err());
        let two = SectorBasis::new(12, 2, 1).unwrap();
        assert!(matches!(two.fock_state(3), Err(JunctionError::WrongSector { .. })));
    }
}
